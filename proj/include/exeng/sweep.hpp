#pragma once

// Drive-cycle evaluation and the reference-condition sensitivity study:
// percentage breakdowns over the T0 x x_EGR grid per cycle, cross-cycle
// statistics, and per-term trend classification.

#include <exeng/exergy.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace exeng {

// Uniformly sampled engine operating trace (speed/torque request vs time).
struct CycleTrace {
    std::string name;
    std::vector<double> t_s;
    std::vector<double> omega_radps;
    std::vector<double> torque_Nm;

    std::size_t size() const { return t_s.size(); }
    double dt_s() const { return size() > 1 ? t_s[1] - t_s[0] : 0.0; }
};

inline void validate_cycle_trace(const CycleTrace& c) {
    if (c.size() < 2) throw ValidationError("cycle '" + c.name + "': needs at least two samples");
    if (c.omega_radps.size() != c.size() || c.torque_Nm.size() != c.size())
        throw ValidationError("cycle '" + c.name + "': column lengths differ");
    const double dt = c.t_s[1] - c.t_s[0];
    if (dt <= 0.0) throw ValidationError("cycle '" + c.name + "': time must increase");
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        const double step = c.t_s[i + 1] - c.t_s[i];
        if (std::abs(step - dt) > 1e-9 * std::max(1.0, dt))
            throw ValidationError("cycle '" + c.name + "': non-uniform timestep at sample " +
                                  std::to_string(i + 1));
    }
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (!std::isfinite(c.t_s[i]) || !std::isfinite(c.omega_radps[i]) ||
            !std::isfinite(c.torque_Nm[i]))
            throw ValidationError("cycle '" + c.name + "': non-finite sample " + std::to_string(i));
        if (c.omega_radps[i] < 0.0)
            throw ValidationError("cycle '" + c.name + "': negative speed at sample " +
                                  std::to_string(i));
    }
}

// Loads a trace CSV with the fixed header t_s,omega_radps,torque_Nm.  The
// cycle name defaults to the file stem.
inline CycleTrace load_cycle_trace(const std::string& path, std::string name = "") {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open cycle file: " + path);
    CycleTrace c;
    c.name = name.empty() ? std::filesystem::path(path).stem().string() : std::move(name);
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t_s,omega_radps,torque_Nm")
        throw ValidationError(path + ": expected header t_s,omega_radps,torque_Nm, got '" + line +
                              "'");
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::array<double, 3> v{};
        for (std::size_t k = 0; k < 3; ++k) {
            if (!std::getline(ss, cell, ','))
                throw ValidationError(path + ": row " + std::to_string(row) + " has too few cells");
            try {
                v[k] = std::stod(cell);
            } catch (const std::exception&) {
                throw ValidationError(path + ": row " + std::to_string(row) + ": bad number '" +
                                      cell + "'");
            }
        }
        if (std::getline(ss, cell, ','))
            throw ValidationError(path + ": row " + std::to_string(row) + " has too many cells");
        c.t_s.push_back(v[0]);
        c.omega_radps.push_back(v[1]);
        c.torque_Nm.push_back(v[2]);
    }
    validate_cycle_trace(c);
    return c;
}

inline std::string to_csv(const CycleTrace& c) {
    using detail::format_double;
    std::string out = "t_s,omega_radps,torque_Nm\n";
    for (std::size_t i = 0; i < c.size(); ++i)
        out += format_double(c.t_s[i]) + "," + format_double(c.omega_radps[i]) + "," +
               format_double(c.torque_Nm[i]) + "\n";
    return out;
}

// Reference-condition grid.  Defaults reproduce the published study.
struct SweepGrid {
    std::vector<double> t0_K = {263.15, 273.15, 283.15, 293.15, 303.15, 313.15};
    std::vector<double> x_egr = {0.0, 0.1, 0.2, 0.3};
};

inline constexpr double kT0Min_K = 233.15;
inline constexpr double kT0Max_K = 333.15;
inline constexpr double kEgrMax = 0.6;

inline void validate_sweep_grid(const SweepGrid& g) {
    if (g.t0_K.empty() || g.x_egr.empty()) throw ValidationError("sweep grid: empty axis");
    for (std::size_t i = 0; i + 1 < g.t0_K.size(); ++i)
        if (g.t0_K[i + 1] <= g.t0_K[i])
            throw ValidationError("sweep grid: T0 list must be strictly increasing");
    for (std::size_t i = 0; i + 1 < g.x_egr.size(); ++i)
        if (g.x_egr[i + 1] <= g.x_egr[i])
            throw ValidationError("sweep grid: x_EGR list must be strictly increasing");
    for (double t : g.t0_K)
        if (t < kT0Min_K || t > kT0Max_K)
            throw ValidationError("sweep grid: T0 = " + detail::format_double(t) +
                                  " K outside [233.15, 333.15]");
    for (double x : g.x_egr)
        if (x < 0.0 || x > kEgrMax)
            throw ValidationError("sweep grid: x_EGR = " + detail::format_double(x) +
                                  " outside [0, 0.6]");
}

// Everything a balance evaluation needs besides the grid point itself.  The
// reference state holds the base composition/pressure; T0 is overridden per
// grid point.
struct SweepModels {
    CylinderModel mdl;
    EngineMaps maps;
    ReferenceState env;
    IntakeState intake;
};

struct CycleResult {
    ExergyTotals totals;
    PercentBreakdown percent;
};

// Integrated balance of one trace at one reference condition.  Samples with
// no torque request or with the engine spinning below the mapped idle speed
// contribute zero to every term (engine-off convention).
inline CycleResult evaluate_cycle(const CycleTrace& trace, double t0_K, double x_egr,
                                  const SweepModels& m, const MeanValueMaps& mvm) {
    validate_cycle_trace(trace);
    ReferenceState env = m.env;
    env.T0_K = t0_K;
    validate_reference(env);
    const double omega_idle = rpm_to_radps(mvm.p_cyl_Pa.speeds_rpm.front());
    std::vector<ExergyRates> rates(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace.torque_Nm[i] <= 0.0 || trace.omega_radps[i] < omega_idle) continue;
        const OperatingPoint op{trace.omega_radps[i], trace.torque_Nm[i]};
        try {
            rates[i] = balance(op, x_egr, m.maps, mvm, m.mdl.engine, m.mdl.fuel, m.mdl.props, env,
                               m.intake);
        } catch (const DomainError& e) {
            throw DomainError("cycle '" + trace.name + "' at t = " +
                              detail::format_double(trace.t_s[i]) + " s: " + e.what());
        }
    }
    CycleResult r;
    r.totals = integrate(rates, trace.dt_s());
    try {
        r.percent = percentages(r.totals);
    } catch (const DomainError& e) {
        throw DomainError("cycle '" + trace.name + "': " + e.what());
    }
    return r;
}

// One cube cell of a sweep.
struct SweepEntry {
    std::string cycle;
    double t0_K = 0.0;
    double x_egr = 0.0;
    ExergyTotals totals;
    PercentBreakdown percent;
};

struct SweepResult {
    SweepGrid grid;
    std::vector<std::string> cycles;
    std::vector<SweepEntry> entries;  // cycle-major, then T0, then x_EGR
    std::string config_hash;

    const SweepEntry& at(std::size_t cycle, std::size_t it0, std::size_t ix) const {
        return entries[(cycle * grid.t0_K.size() + it0) * grid.x_egr.size() + ix];
    }
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace detail

// Fingerprint of every number that feeds a sweep: engine, combustion, fuel,
// reference, intake, maps, and the grid itself.  Identical inputs hash
// identically, so output payloads are reproducible byte for byte.
inline std::string config_fingerprint(const SweepModels& m, const SweepGrid& grid) {
    using detail::format_double;
    std::string s;
    auto add = [&s](double v) {
        s += format_double(v);
        s += ';';
    };
    const EngineSpec& e = m.mdl.engine;
    add(static_cast<double>(e.geometry.n_cyl)), add(e.geometry.displacement_m3);
    add(e.geometry.compression_ratio), add(e.geometry.bore_m), add(e.geometry.stroke_m);
    add(e.geometry.conrod_ratio), add(e.geometry.wall_temp_K);
    add(e.fmep.c1_kPa), add(e.fmep.c2_kPa_s), add(e.fmep.c3_kPa_s2_m2);
    add(e.breathing.eta_vol), add(e.breathing.boost_slope_per_Pa);
    add(e.breathing.boost_threshold_Pa);
    const CombustionParams& c = m.mdl.comb;
    add(c.wiebe_a), add(c.wiebe_m), add(c.soc_deg), add(c.duration_deg);
    add(c.window_lo_deg), add(c.window_hi_deg), add(c.ivc_deg), add(c.evo_deg);
    add(c.step_deg), add(c.htc_c1), add(c.htc_c2);
    const FuelThermo& f = m.mdl.fuel;
    add(f.x), add(f.y), add(f.lhv_J_per_kg), add(f.molar_mass_kg_per_mol);
    add(f.h_ref_J_per_mol), add(f.s_ref_J_per_molK), add(f.cp_J_per_molK);
    add(m.env.T0_K), add(m.env.P0_Pa);
    for (Species sp : kAllSpecies) add(m.env.f0[sp]);
    add(m.intake.TI_K), add(m.intake.PI_Pa);
    for (const GridTable* t : {&m.maps.fuel_kg_s, &m.maps.texh_K}) {
        for (double v : t->speeds_rpm) add(v);
        for (double v : t->torques_Nm) add(v);
        for (double v : t->values) add(v);
    }
    for (double v : grid.t0_K) add(v);
    for (double v : grid.x_egr) add(v);
    return detail::hex64(detail::fnv1a(s));
}

// Full study: mean-value maps are generated once per x_EGR and shared across
// reference temperatures and cycles; cube cells evaluate concurrently and
// land in preassigned slots, so scheduling cannot reorder anything.
inline SweepResult run_sweep(const std::vector<CycleTrace>& cycles, const SweepGrid& grid,
                             const SweepModels& m, unsigned jobs = 0) {
    validate_sweep_grid(grid);
    if (cycles.empty()) throw ValidationError("run_sweep: no cycles");
    for (std::size_t i = 0; i < cycles.size(); ++i)
        for (std::size_t j = i + 1; j < cycles.size(); ++j)
            if (cycles[i].name == cycles[j].name)
                throw ValidationError("run_sweep: duplicate cycle name '" + cycles[i].name + "'");

    SweepResult r;
    r.grid = grid;
    for (const CycleTrace& c : cycles) r.cycles.push_back(c.name);
    r.config_hash = config_fingerprint(m, grid);

    std::vector<MeanValueMaps> maps_by_egr(grid.x_egr.size());
    for (std::size_t ix = 0; ix < grid.x_egr.size(); ++ix)
        maps_by_egr[ix] = generate_maps(m.mdl, m.maps, grid.x_egr[ix], m.env, m.intake, jobs);

    const std::size_t nt = grid.t0_K.size(), nx = grid.x_egr.size();
    r.entries.resize(cycles.size() * nt * nx);
    parallel_for(r.entries.size(), jobs, [&](std::size_t idx) {
        const std::size_t ic = idx / (nt * nx);
        const std::size_t it = (idx / nx) % nt;
        const std::size_t ix = idx % nx;
        SweepEntry& e = r.entries[idx];
        e.cycle = cycles[ic].name;
        e.t0_K = grid.t0_K[it];
        e.x_egr = grid.x_egr[ix];
        const CycleResult cr =
            evaluate_cycle(cycles[ic], e.t0_K, e.x_egr, m, maps_by_egr[ix]);
        e.totals = cr.totals;
        e.percent = cr.percent;
    });
    return r;
}

// Printed decomposition terms, in the order they appear in the balance.
inline constexpr std::array<const char*, 6> kTermNames = {"work",     "heat",     "exhaust",
                                                          "combustion", "friction", "others"};

inline double term_percent(const PercentBreakdown& b, std::size_t term) {
    switch (term) {
        case 0: return b.work;
        case 1: return b.heat;
        case 2: return b.exhaust;
        case 3: return b.combustion;
        case 4: return b.friction;
        default: return b.others;
    }
}

inline double term_total_J(const ExergyTotals& t, std::size_t term) {
    switch (term) {
        case 0: return t.work;
        case 1: return t.heat;
        case 2: return t.exhaust;
        case 3: return t.combustion;
        case 4: return t.friction;
        default: return t.others;
    }
}

// Long-format export: one row per cube cell and term, plot-ready.
inline std::string to_csv(const SweepResult& r) {
    using detail::format_double;
    std::string out = "# config " + r.config_hash + "\n";
    out += "cycle,T0_K,xEGR,term,percent,signed_value_J\n";
    for (const SweepEntry& e : r.entries)
        for (std::size_t k = 0; k < kTermNames.size(); ++k)
            out += e.cycle + "," + format_double(e.t0_K) + "," + format_double(e.x_egr) + "," +
                   kTermNames[k] + "," + format_double(term_percent(e.percent, k)) + "," +
                   format_double(term_total_J(e.totals, k)) + "\n";
    return out;
}

inline void save_sweep_csv(const SweepResult& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << to_csv(r);
}

// Cross-cycle statistics at one grid point: per-term mean and population
// standard deviation over cycles.
struct CycleStats {
    PercentBreakdown mean;
    PercentBreakdown sd;
    std::size_t n = 0;
};

inline CycleStats cycle_stats(const SweepResult& r, double t0_K, double x_egr) {
    std::vector<const SweepEntry*> hits;
    for (const SweepEntry& e : r.entries)
        if (std::abs(e.t0_K - t0_K) <= 1e-9 && std::abs(e.x_egr - x_egr) <= 1e-12)
            hits.push_back(&e);
    if (hits.size() < 2)
        throw ValidationError("cycle_stats: fewer than two cycles at T0 = " +
                              detail::format_double(t0_K) + " K, x_EGR = " +
                              detail::format_double(x_egr));
    CycleStats s;
    s.n = hits.size();
    std::array<double*, 6> mean = {&s.mean.work,     &s.mean.heat,     &s.mean.exhaust,
                                   &s.mean.combustion, &s.mean.friction, &s.mean.others};
    std::array<double*, 6> sd = {&s.sd.work,       &s.sd.heat,     &s.sd.exhaust,
                                 &s.sd.combustion, &s.sd.friction, &s.sd.others};
    for (std::size_t k = 0; k < 6; ++k) {
        double acc = 0.0;
        for (const SweepEntry* e : hits) acc += term_percent(e->percent, k);
        *mean[k] = acc / static_cast<double>(s.n);
        double var = 0.0;
        for (const SweepEntry* e : hits) {
            const double d = term_percent(e->percent, k) - *mean[k];
            var += d * d;
        }
        *sd[k] = std::sqrt(var / static_cast<double>(s.n));
    }
    return s;
}

// Monotonicity summary.  direction reflects strict pairwise comparison along
// the axis, required to hold on every line of the grid; flat records whether
// the term moves less than 2 percentage points over the whole grid.
struct TrendEntry {
    std::string cycle;
    std::string term;
    std::string axis;       // "T0" or "xEGR"
    std::string direction;  // "increasing", "decreasing", or "mixed"
    bool flat = false;
    double range_pp = 0.0;
};

struct TrendReport {
    std::vector<TrendEntry> entries;
};

inline constexpr double kFlatThreshold_pp = 2.0;

inline TrendReport trend_report(const SweepResult& r) {
    if (r.grid.t0_K.size() < 2 || r.grid.x_egr.size() < 2)
        throw ValidationError("trend_report: needs at least two points per axis");
    const std::size_t nt = r.grid.t0_K.size(), nx = r.grid.x_egr.size();
    TrendReport rep;
    for (std::size_t ic = 0; ic < r.cycles.size(); ++ic) {
        for (std::size_t k = 0; k < kTermNames.size(); ++k) {
            double lo = term_percent(r.at(ic, 0, 0).percent, k);
            double hi = lo;
            bool up_t0 = true, down_t0 = true, up_x = true, down_x = true;
            for (std::size_t it = 0; it < nt; ++it) {
                for (std::size_t ix = 0; ix < nx; ++ix) {
                    const double v = term_percent(r.at(ic, it, ix).percent, k);
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                    if (it + 1 < nt) {
                        const double w = term_percent(r.at(ic, it + 1, ix).percent, k);
                        up_t0 = up_t0 && w > v;
                        down_t0 = down_t0 && w < v;
                    }
                    if (ix + 1 < nx) {
                        const double w = term_percent(r.at(ic, it, ix + 1).percent, k);
                        up_x = up_x && w > v;
                        down_x = down_x && w < v;
                    }
                }
            }
            const double range = hi - lo;
            auto dir = [](bool up, bool down) {
                return std::string(up ? "increasing" : down ? "decreasing" : "mixed");
            };
            rep.entries.push_back({r.cycles[ic], kTermNames[k], "T0", dir(up_t0, down_t0),
                                   range < kFlatThreshold_pp, range});
            rep.entries.push_back({r.cycles[ic], kTermNames[k], "xEGR", dir(up_x, down_x),
                                   range < kFlatThreshold_pp, range});
        }
    }
    return rep;
}

inline std::string to_string(const TrendReport& rep) {
    using detail::format_double;
    std::string out = "cycle,term,axis,direction,flat,range_pp\n";
    for (const TrendEntry& e : rep.entries)
        out += e.cycle + "," + e.term + "," + e.axis + "," + e.direction + "," +
               (e.flat ? "yes" : "no") + "," + format_double(e.range_pp) + "\n";
    return out;
}

} // namespace exeng
