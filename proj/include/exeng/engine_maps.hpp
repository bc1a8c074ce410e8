#pragma once

// Engine calibration maps over a speed x torque lattice: ingest/serialize
// (CSV), synthesize (Willans-style fuel map + affine exhaust temperature),
// and bilinear lookup.  The same grid/CSV machinery serves the mean-value
// in-cylinder maps produced by the cylinder module.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "exeng/engine.hpp"
#include "exeng/errors.hpp"
#include "exeng/thermo.hpp"

namespace exeng {

// Rectangular lookup table.  Rows follow the torque grid, columns the speed
// grid (matching the CSV layout: header row = speeds, header column = torques).
struct GridTable {
    std::vector<double> speeds_rpm;   // strictly increasing
    std::vector<double> torques_Nm;   // strictly increasing
    std::vector<double> values;       // row-major [torque][speed]

    double& at(std::size_t it, std::size_t is) { return values[it * speeds_rpm.size() + is]; }
    double at(std::size_t it, std::size_t is) const { return values[it * speeds_rpm.size() + is]; }
};

inline void validate_grid(const GridTable& t, const std::string& name) {
    if (t.speeds_rpm.size() < 2 || t.torques_Nm.size() < 2)
        throw ValidationError(name + ": need at least a 2x2 grid");
    for (std::size_t i = 1; i < t.speeds_rpm.size(); ++i)
        if (!(t.speeds_rpm[i] > t.speeds_rpm[i - 1]))
            throw ValidationError(name + ": speed grid not strictly increasing at index " +
                                  std::to_string(i));
    for (std::size_t i = 1; i < t.torques_Nm.size(); ++i)
        if (!(t.torques_Nm[i] > t.torques_Nm[i - 1]))
            throw ValidationError(name + ": torque grid not strictly increasing at index " +
                                  std::to_string(i));
    if (t.values.size() != t.speeds_rpm.size() * t.torques_Nm.size())
        throw ValidationError(name + ": matrix size " + std::to_string(t.values.size()) +
                              " does not match " + std::to_string(t.torques_Nm.size()) + "x" +
                              std::to_string(t.speeds_rpm.size()) + " grid");
    for (double v : t.values)
        if (!std::isfinite(v)) throw ValidationError(name + ": non-finite matrix entry");
}

namespace detail {

// Shortest decimal string that round-trips the double exactly.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // Prefer a shorter form when it parses back exactly.
    for (int prec = 1; prec < 17; ++prec) {
        char s[40];
        std::snprintf(s, sizeof s, "%.*g", prec, v);
        if (std::strtod(s, nullptr) == v) return s;
    }
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

inline double parse_cell(const std::string& cell, const std::string& path, std::size_t row,
                         std::size_t col) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ValidationError(path + ": row " + std::to_string(row + 1) + ", column " +
                              std::to_string(col + 1) + ": cannot parse '" + cell + "' as a number");
    }
}

} // namespace detail

inline constexpr const char* kGridHeaderToken = "torque_Nm\\speed_rpm";

inline void save_grid_csv(const std::string& path, const GridTable& t) {
    validate_grid(t, path);
    std::ofstream out(path);
    if (!out) throw ValidationError("save_grid_csv: cannot open " + path + " for writing");
    out << kGridHeaderToken;
    for (double s : t.speeds_rpm) out << ',' << detail::format_double(s);
    out << '\n';
    for (std::size_t it = 0; it < t.torques_Nm.size(); ++it) {
        out << detail::format_double(t.torques_Nm[it]);
        for (std::size_t is = 0; is < t.speeds_rpm.size(); ++is)
            out << ',' << detail::format_double(t.at(it, is));
        out << '\n';
    }
    if (!out) throw ValidationError("save_grid_csv: write failed for " + path);
}

inline GridTable load_grid_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("load_grid_csv: cannot open " + path);
    GridTable t;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (row == 0) {
            if (cells.empty() || cells[0] != kGridHeaderToken)
                throw ValidationError(path + ": first header cell must be '" +
                                      std::string(kGridHeaderToken) + "', got '" +
                                      (cells.empty() ? "" : cells[0]) + "'");
            if (cells.size() < 3)
                throw ValidationError(path + ": header row needs at least 2 speed columns");
            for (std::size_t c = 1; c < cells.size(); ++c)
                t.speeds_rpm.push_back(detail::parse_cell(cells[c], path, row, c));
        } else {
            if (cells.size() != t.speeds_rpm.size() + 1)
                throw ValidationError(path + ": row " + std::to_string(row + 1) + " has " +
                                      std::to_string(cells.size()) + " cells, expected " +
                                      std::to_string(t.speeds_rpm.size() + 1));
            t.torques_Nm.push_back(detail::parse_cell(cells[0], path, row, 0));
            for (std::size_t c = 1; c < cells.size(); ++c)
                t.values.push_back(detail::parse_cell(cells[c], path, row, c));
        }
        ++row;
    }
    validate_grid(t, path);
    return t;
}

// Bilinear interpolation at engine speed [rad/s] and torque [Nm].  Queries
// outside the bounding box are rejected (no extrapolation, ever); a relative
// 1e-9 snap absorbs the rpm <-> rad/s round-trip error at the box edges.
inline double interpolate(const GridTable& t, double omega_radps, double torque_Nm,
                          const std::string& quantity = "map") {
    auto snap = [](double q, double lo, double hi) {
        const double tol = 1e-9 * std::max({std::abs(lo), std::abs(hi), 1.0});
        if (q < lo && q > lo - tol) return lo;
        if (q > hi && q < hi + tol) return hi;
        return q;
    };
    const auto& xs = t.speeds_rpm;
    const auto& ys = t.torques_Nm;
    const double rpm = snap(radps_to_rpm(omega_radps), xs.front(), xs.back());
    const double torque = snap(torque_Nm, ys.front(), ys.back());
    if (!(rpm >= xs.front() && rpm <= xs.back() && torque >= ys.front() &&
          torque <= ys.back()))
        throw DomainError("interpolate(" + quantity + "): query (" + std::to_string(rpm) +
                          " rpm, " + std::to_string(torque_Nm) + " Nm) outside grid box [" +
                          std::to_string(xs.front()) + ", " + std::to_string(xs.back()) + "] rpm x [" +
                          std::to_string(ys.front()) + ", " + std::to_string(ys.back()) + "] Nm");

    auto cell = [](const std::vector<double>& g, double v) {
        std::size_t i = 1;
        while (i + 1 < g.size() && v >= g[i]) ++i;
        return i - 1;  // v in [g[i-1], g[i]]
    };
    const std::size_t is = cell(xs, rpm);
    const std::size_t it = cell(ys, torque);
    const double u = (rpm - xs[is]) / (xs[is + 1] - xs[is]);
    const double w = (torque - ys[it]) / (ys[it + 1] - ys[it]);
    return (1.0 - w) * ((1.0 - u) * t.at(it, is) + u * t.at(it, is + 1)) +
           w * ((1.0 - u) * t.at(it + 1, is) + u * t.at(it + 1, is + 1));
}

// The Figure-1-style calibration pair: fuel rate and exhaust temperature.
struct EngineMaps {
    GridTable fuel_kg_s;
    GridTable texh_K;
};

inline void validate_engine_maps(const EngineMaps& m) {
    validate_grid(m.fuel_kg_s, "fuel map");
    validate_grid(m.texh_K, "exhaust-temperature map");
    if (m.fuel_kg_s.speeds_rpm != m.texh_K.speeds_rpm ||
        m.fuel_kg_s.torques_Nm != m.texh_K.torques_Nm)
        throw ValidationError("engine maps: fuel and exhaust-temperature grids differ");
    const auto& f = m.fuel_kg_s;
    for (std::size_t it = 0; it < f.torques_Nm.size(); ++it)
        for (std::size_t is = 0; is < f.speeds_rpm.size(); ++is) {
            if (f.at(it, is) < 0.0)
                throw ValidationError("fuel map: negative fuel rate at (" +
                                      std::to_string(f.speeds_rpm[is]) + " rpm, " +
                                      std::to_string(f.torques_Nm[it]) + " Nm)");
            if (it > 0 && f.at(it, is) < f.at(it - 1, is))
                throw ValidationError("fuel map: fuel rate decreases with torque at " +
                                      std::to_string(f.speeds_rpm[is]) + " rpm");
            if (m.texh_K.at(it, is) < 350.0)
                throw ValidationError("exhaust-temperature map: entry below 350 K at (" +
                                      std::to_string(f.speeds_rpm[is]) + " rpm, " +
                                      std::to_string(f.torques_Nm[it]) + " Nm)");
        }
}

inline EngineMaps load_maps(const std::string& fuel_csv, const std::string& texh_csv) {
    EngineMaps m;
    m.fuel_kg_s = load_grid_csv(fuel_csv);
    m.texh_K = load_grid_csv(texh_csv);
    validate_engine_maps(m);
    return m;
}

inline void save_maps(const EngineMaps& m, const std::string& fuel_csv,
                      const std::string& texh_csv) {
    save_grid_csv(fuel_csv, m.fuel_kg_s);
    save_grid_csv(texh_csv, m.texh_K);
}

// Willans-style indicated efficiency: concave quadratic in speed.  The loss
// term is the FMEP friction power scaled by loss_factor (> 1 folds pumping
// and accessory losses on top of rubbing friction).
struct WillansParams {
    double eta_peak = 0.46;                   // [-]
    double omega_peak_radps = 191.1135;       // mid-speed of the default grid
    double curvature_per_radps2 = 1.0e-5;     // [1/(rad/s)^2]
    double loss_factor = 2.2;                 // multiple of FMEP friction power [-]

    double eta(double omega_radps) const {
        const double d = omega_radps - omega_peak_radps;
        return eta_peak - curvature_per_radps2 * d * d;
    }
};

// Exhaust temperature, affine in BMEP and speed above idle.
struct ExhaustTempParams {
    double base_K = 380.0;
    double per_bmep_K_per_Pa = 2.9e-4;
    double per_speed_K_per_radps = 0.35;
    double omega_idle_radps = 68.0678;  // 650 rpm
};

struct SynthMapParams {
    WillansParams willans;
    ExhaustTempParams texh;
    double idle_rpm = 650.0;
    double max_rpm = 3000.0;
    double peak_power_W = 260.0e3;  // at max_rpm
    std::size_t n_speed = 11;
    std::size_t n_torque = 11;
};

// Synthetic calibration maps standing in for the untabulated dyno data.
// Fuel: mdot_f = (P_eng/eta_i(omega) + P_loss(omega))/LHV, where the Willans
// loss term equals the FMEP friction power so the map and the friction model
// agree.  T_E: affine in BMEP and speed.
inline EngineMaps synth_maps(const EngineSpec& engine, const FuelThermo& fuel,
                             const SynthMapParams& p = SynthMapParams{}) {
    validate_engine(engine);
    if (!(p.idle_rpm > 0.0 && p.max_rpm > p.idle_rpm))
        throw ValidationError("synth_maps: need 0 < idle_rpm < max_rpm");
    if (p.n_speed < 2 || p.n_torque < 2) throw ValidationError("synth_maps: need a 2x2 grid at least");
    if (!(p.peak_power_W > 0.0)) throw ValidationError("synth_maps: peak power must be positive");

    const double torque_max = p.peak_power_W / rpm_to_radps(p.max_rpm);

    GridTable fuel_map;
    for (std::size_t i = 0; i < p.n_speed; ++i)
        fuel_map.speeds_rpm.push_back(p.idle_rpm +
                                      (p.max_rpm - p.idle_rpm) * static_cast<double>(i) /
                                          static_cast<double>(p.n_speed - 1));
    for (std::size_t i = 0; i < p.n_torque; ++i)
        fuel_map.torques_Nm.push_back(torque_max * static_cast<double>(i) /
                                      static_cast<double>(p.n_torque - 1));
    GridTable texh_map = fuel_map;

    fuel_map.values.resize(p.n_speed * p.n_torque);
    texh_map.values.resize(p.n_speed * p.n_torque);
    for (std::size_t it = 0; it < p.n_torque; ++it) {
        for (std::size_t is = 0; is < p.n_speed; ++is) {
            const double omega = rpm_to_radps(fuel_map.speeds_rpm[is]);
            const OperatingPoint op{omega, fuel_map.torques_Nm[it]};
            const double eta = p.willans.eta(omega);
            if (!(eta > 0.05))
                throw ValidationError("synth_maps: Willans efficiency " + std::to_string(eta) +
                                      " unusable at " + std::to_string(fuel_map.speeds_rpm[is]) +
                                      " rpm");
            const double sp = mean_piston_speed(engine.geometry, omega);
            const double p_loss = p.willans.loss_factor * omega / (4.0 * kPi) *
                                  fmep_Pa(engine.fmep, omega, sp) * engine.geometry.displacement_m3;
            fuel_map.at(it, is) = (op.power_W() / eta + p_loss) / fuel.lhv_J_per_kg;
            texh_map.at(it, is) = p.texh.base_K + p.texh.per_bmep_K_per_Pa * bmep_Pa(op, engine.geometry) +
                                  p.texh.per_speed_K_per_radps * (omega - p.texh.omega_idle_radps);
        }
    }

    EngineMaps m{std::move(fuel_map), std::move(texh_map)};
    validate_engine_maps(m);
    return m;
}

} // namespace exeng
