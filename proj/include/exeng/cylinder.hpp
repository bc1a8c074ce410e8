#pragma once

// Single-zone crank-angle in-cylinder process: slider-crank kinematics, Wiebe
// heat release, Hohenberg wall heat transfer, explicit 4-stage integration,
// and firing-interval averaging into mean-value maps.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "exeng/engine.hpp"
#include "exeng/engine_maps.hpp"
#include "exeng/errors.hpp"
#include "exeng/mixture.hpp"
#include "exeng/parallel.hpp"
#include "exeng/thermo.hpp"

namespace exeng {

struct CombustionParams {
    double wiebe_a = 6.908;      // efficiency factor [-]
    double wiebe_m = 1.5;        // shape factor [-]
    double soc_deg = -8.0;       // start of combustion [deg aTDC]
    double duration_deg = 45.0;  // burn duration [deg]
    // Averaging window for the mean-value maps.  Full IVC..EVO span: averaging
    // only a tail around TDC overweights the burnt gas and pushes the
    // combustion-destruction share of the balance out of its published band.
    double window_lo_deg = -90.0;
    double window_hi_deg = 120.0;
    double ivc_deg = -165.0;     // intake valve closing [deg aTDC]
    double evo_deg = 120.0;      // exhaust valve opening [deg aTDC]
    double step_deg = 0.25;      // crank step
    double htc_c1 = 130.0;       // Hohenberg scale constant
    double htc_c2 = 1.4;         // Hohenberg piston-speed offset [m/s]
};

inline void validate_combustion(const CombustionParams& c) {
    if (!(c.wiebe_a > 0.0 && c.wiebe_m > 0.0))
        throw ValidationError("combustion: Wiebe a and m must be positive");
    if (!(c.duration_deg > 0.0)) throw ValidationError("combustion: burn duration must be positive");
    if (!(c.window_lo_deg < c.soc_deg && c.soc_deg < c.window_hi_deg))
        throw ValidationError("combustion: need window_lo < soc < window_hi");
    if (!(c.ivc_deg < c.evo_deg)) throw ValidationError("combustion: need IVC < EVO");
    if (c.window_lo_deg < c.ivc_deg - 1e-9 || c.window_hi_deg > c.evo_deg + 1e-9)
        throw ValidationError("combustion: averaging window outside the simulated span");
    if (!(c.step_deg > 0.0)) throw ValidationError("combustion: crank step must be positive");
    if (!(c.htc_c1 > 0.0) || c.htc_c2 < 0.0)
        throw ValidationError("combustion: Hohenberg constants out of range");
}

// Instantaneous single-cylinder volume [m^3], slider-crank:
//   V = V_c + (V_d/2) (1 + R - cos th - sqrt(R^2 - sin^2 th))
inline double cylinder_volume(double theta_deg, const EngineGeometry& g) {
    const double th = theta_deg * kPi / 180.0;
    const double R = g.conrod_ratio;
    const double s = std::sin(th);
    return g.clearance_per_cyl_m3() +
           0.5 * g.swept_per_cyl_m3() * (1.0 + R - std::cos(th) - std::sqrt(R * R - s * s));
}

// dV/dtheta [m^3/rad].
inline double cylinder_volume_deriv(double theta_deg, const EngineGeometry& g) {
    const double th = theta_deg * kPi / 180.0;
    const double R = g.conrod_ratio;
    const double s = std::sin(th);
    const double c = std::cos(th);
    return 0.5 * g.swept_per_cyl_m3() * (s + s * c / std::sqrt(R * R - s * s));
}

// Gas-exposed area [m^2]: head + piston crown + instantaneous liner band.
inline double exposed_area(double theta_deg, const EngineGeometry& g) {
    const double piston = g.piston_area_m2();
    const double travel = (cylinder_volume(theta_deg, g) - g.clearance_per_cyl_m3()) / piston;
    return 2.0 * piston + kPi * g.bore_m * travel;
}

// Cumulative Wiebe burn fraction in [0, 1].
inline double wiebe_burn_fraction(double theta_deg, const CombustionParams& c) {
    if (theta_deg <= c.soc_deg) return 0.0;
    const double z = (theta_deg - c.soc_deg) / c.duration_deg;
    return 1.0 - std::exp(-c.wiebe_a * std::pow(z, c.wiebe_m + 1.0));
}

// d(burn fraction)/dtheta [1/deg].
inline double wiebe_burn_rate(double theta_deg, const CombustionParams& c) {
    if (theta_deg <= c.soc_deg) return 0.0;
    const double z = (theta_deg - c.soc_deg) / c.duration_deg;
    return c.wiebe_a * (c.wiebe_m + 1.0) / c.duration_deg * std::pow(z, c.wiebe_m) *
           std::exp(-c.wiebe_a * std::pow(z, c.wiebe_m + 1.0));
}

// Hohenberg convection coefficient [W/(m^2 K)]; p in Pa enters in bar.
inline double hohenberg_htc(double V_m3, double p_Pa, double T_K, double piston_speed_m_s,
                            double c1 = 130.0, double c2 = 1.4) {
    if (!(V_m3 > 0.0 && p_Pa > 0.0 && T_K > 0.0) || piston_speed_m_s < 0.0)
        throw DomainError("hohenberg_htc: inputs must be positive (V=" + std::to_string(V_m3) +
                          ", p=" + std::to_string(p_Pa) + ", T=" + std::to_string(T_K) + ")");
    return c1 * std::pow(V_m3, -0.06) * std::pow(p_Pa / 1.0e5, 0.8) * std::pow(T_K, -0.4) *
           std::pow(piston_speed_m_s + c2, 0.8);
}

// Crank-angle resolved single-cylinder trace over one closed cycle.
struct CycleTraceCA {
    double theta0_deg = 0.0;
    double dtheta_deg = 0.0;
    std::vector<double> p_Pa;      // per node
    std::vector<double> T_K;       // per node
    std::vector<double> V_m3;      // per node
    std::vector<double> Q_wall_J;  // cumulative gas->wall heat per node

    // Bookkeeping for audits (per cylinder, per cycle).
    double trapped_mol = 0.0;
    double trapped_kg = 0.0;
    double fresh_kg = 0.0;
    double fuel_energy_J = 0.0;   // LHV energy scheduled for release
    double heat_released_J = 0.0; // Wiebe energy actually released by EVO
    double work_J = 0.0;          // indicated work integral p dV
    Composition f_charge;

    double theta_at(std::size_t i) const { return theta0_deg + static_cast<double>(i) * dtheta_deg; }
    std::size_t size() const { return p_Pa.size(); }
};

// Everything the in-cylinder process needs besides the operating point.
struct CylinderModel {
    EngineSpec engine;
    CombustionParams comb;
    PropertyTable props = builtin_property_table();
    FuelThermo fuel = make_fuel(props);
};

// Low-level closed-cycle integration.  Charge composition is frozen; energy
// enters through the Wiebe schedule; ideal-gas closure p V = n R T.
struct CycleInputs {
    double omega_radps = 0.0;
    double trapped_mol = 0.0;      // per cylinder
    Composition f_charge;          // trapped mixture
    double fuel_energy_J = 0.0;    // per cylinder per cycle; 0 = motored
    double t_initial_K = 323.15;   // charge temperature at IVC
    bool wall_heat = true;         // false = adiabatic walls (test oracle)
};

inline CycleTraceCA integrate_cycle(const CylinderModel& mdl, const CycleInputs& in) {
    validate_combustion(mdl.comb);
    validate_engine(mdl.engine);
    if (!(in.omega_radps > 0.0)) throw DomainError("integrate_cycle: engine speed must be positive");
    if (!(in.trapped_mol > 0.0)) throw DomainError("integrate_cycle: trapped charge must be positive");
    if (!(in.t_initial_K > 0.0)) throw DomainError("integrate_cycle: initial temperature must be positive");
    if (in.fuel_energy_J < 0.0) throw DomainError("integrate_cycle: fuel energy must be non-negative");

    const auto& geom = mdl.engine.geometry;
    const auto& comb = mdl.comb;
    const double span = comb.evo_deg - comb.ivc_deg;
    const auto n_steps = static_cast<std::size_t>(std::llround(span / comb.step_deg));
    if (n_steps < 2 || std::abs(static_cast<double>(n_steps) * comb.step_deg - span) > 1e-9 * span)
        throw ValidationError("integrate_cycle: crank step " + std::to_string(comb.step_deg) +
                              " deg does not tile the span [" + std::to_string(comb.ivc_deg) + ", " +
                              std::to_string(comb.evo_deg) + "] deg");

    const double n = in.trapped_mol;
    const double R = mdl.props.R;
    const double sp = mean_piston_speed(geom, in.omega_radps);
    const double t_wall = geom.wall_temp_K;

    // Mixture heat capacity at constant volume [J/(mol K)], frozen composition.
    auto cv_mix = [&](double T) {
        double cp = 0.0;
        for (Species s : kAllSpecies) cp += in.f_charge[s] * heat_capacity(mdl.props, s, T);
        return cp - R;
    };

    // theta in degrees; state y = {T, Q_wall, W, Q_comb}; derivatives per deg.
    struct Deriv {
        double dT, dQw, dW, dQc;
    };
    auto rhs = [&](double theta, double T) -> Deriv {
        const double V = cylinder_volume(theta, geom);
        const double dVdeg = cylinder_volume_deriv(theta, geom) * kPi / 180.0;
        const double p = n * R * T / V;
        const double dQc = in.fuel_energy_J * wiebe_burn_rate(theta, comb);
        double dQw = 0.0;
        if (in.wall_heat) {
            const double htc = hohenberg_htc(V, p, T, sp, comb.htc_c1, comb.htc_c2);
            // W/K * K / (rad/s) -> J/rad; convert to J/deg.
            dQw = htc * exposed_area(theta, geom) * (T - t_wall) / in.omega_radps * kPi / 180.0;
        }
        const double dW = p * dVdeg;
        const double dT = (dQc - dQw - dW) / (n * cv_mix(T));
        return {dT, dQw, dW, dQc};
    };

    CycleTraceCA tr;
    tr.theta0_deg = comb.ivc_deg;
    tr.dtheta_deg = comb.step_deg;
    tr.f_charge = in.f_charge;
    tr.trapped_mol = n;
    tr.fuel_energy_J = in.fuel_energy_J;
    tr.p_Pa.reserve(n_steps + 1);
    tr.T_K.reserve(n_steps + 1);
    tr.V_m3.reserve(n_steps + 1);
    tr.Q_wall_J.reserve(n_steps + 1);

    double T = in.t_initial_K;
    double Qw = 0.0, W = 0.0, Qc = 0.0;
    const double h = comb.step_deg;

    auto record = [&](double theta) {
        const double V = cylinder_volume(theta, geom);
        const double p = n * R * T / V;
        if (!(T > 0.0) || !(p > 0.0) || !std::isfinite(T) || !std::isfinite(p))
            throw NumericalError("integrate_cycle: state blew up at theta = " +
                                 std::to_string(theta) + " deg (T = " + std::to_string(T) +
                                 " K, p = " + std::to_string(p) + " Pa)");
        tr.p_Pa.push_back(p);
        tr.T_K.push_back(T);
        tr.V_m3.push_back(V);
        tr.Q_wall_J.push_back(Qw);
    };

    record(comb.ivc_deg);
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double th = comb.ivc_deg + static_cast<double>(i) * h;
        const Deriv k1 = rhs(th, T);
        const Deriv k2 = rhs(th + 0.5 * h, T + 0.5 * h * k1.dT);
        const Deriv k3 = rhs(th + 0.5 * h, T + 0.5 * h * k2.dT);
        const Deriv k4 = rhs(th + h, T + h * k3.dT);
        T += h / 6.0 * (k1.dT + 2.0 * k2.dT + 2.0 * k3.dT + k4.dT);
        Qw += h / 6.0 * (k1.dQw + 2.0 * k2.dQw + 2.0 * k3.dQw + k4.dQw);
        W += h / 6.0 * (k1.dW + 2.0 * k2.dW + 2.0 * k3.dW + k4.dW);
        Qc += h / 6.0 * (k1.dQc + 2.0 * k2.dQc + 2.0 * k3.dQc + k4.dQc);
        record(th + h);
    }
    tr.work_J = W;
    tr.heat_released_J = Qc;
    return tr;
}

// Full operating-point simulation: breathing, equivalence ratio, EGR charge
// composition, then the closed-cycle integration.
inline CycleTraceCA simulate_cycle(const CylinderModel& mdl, const OperatingPoint& op, double x_egr,
                                   const EngineMaps& maps, const ReferenceState& env,
                                   const IntakeState& intake) {
    validate_reference(env);
    validate_intake(intake);
    const double mdot_f = interpolate(maps.fuel_kg_s, op.omega_radps, op.torque_Nm, "fuel");
    if (!(mdot_f > 0.0))
        throw DomainError("simulate_cycle: interpolated fuel rate " + std::to_string(mdot_f) +
                          " kg/s is not positive");
    const double mdot_air = air_mass_flow(op, intake, mdl.engine);
    const double lam = lambda_ratio(mdot_air, mdot_f, mdl.fuel);
    auto [f_i, f_e] = egr_fixed_point(lam, x_egr, mdl.fuel, env.f0);
    (void)f_e;

    const auto& geom = mdl.engine.geometry;
    const double per_cycle = 4.0 * kPi / (op.omega_radps * geom.n_cyl);
    const double fresh_kg = mdot_air * per_cycle;
    const double fresh_mol = fresh_kg / env.f0.mean_molar_mass();
    const double trapped_mol = fresh_mol / (1.0 - x_egr);

    CycleInputs in;
    in.omega_radps = op.omega_radps;
    in.trapped_mol = trapped_mol;
    in.f_charge = f_i;
    in.fuel_energy_J = mdot_f * mdl.fuel.lhv_J_per_kg * per_cycle;
    in.t_initial_K = intake.TI_K;
    CycleTraceCA tr = integrate_cycle(mdl, in);
    tr.fresh_kg = fresh_kg;
    tr.trapped_kg = trapped_mol * f_i.mean_molar_mass();
    return tr;
}

// Firing-interval averages: arithmetic means of p and T over the window plus
// the engine-total wall-loss rate (positive gas->wall).
struct MeanValues {
    double p_cyl_Pa = 0.0;
    double t_cyl_K = 0.0;
    double q_wall_W = 0.0;
};

inline MeanValues mean_values(const CycleTraceCA& tr, const CombustionParams& comb,
                              const OperatingPoint& op, const EngineGeometry& geom) {
    if (tr.size() < 2) throw ValidationError("mean_values: trace has fewer than 2 nodes");
    const double theta_end = tr.theta_at(tr.size() - 1);
    if (comb.window_lo_deg < tr.theta0_deg - 1e-9 || comb.window_hi_deg > theta_end + 1e-9)
        throw ValidationError("mean_values: window [" + std::to_string(comb.window_lo_deg) + ", " +
                              std::to_string(comb.window_hi_deg) + "] deg outside trace span [" +
                              std::to_string(tr.theta0_deg) + ", " + std::to_string(theta_end) +
                              "] deg");
    std::size_t i_lo = tr.size(), i_hi = 0;
    double sum_p = 0.0, sum_t = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double th = tr.theta_at(i);
        if (th >= comb.window_lo_deg - 1e-9 && th <= comb.window_hi_deg + 1e-9) {
            sum_p += tr.p_Pa[i];
            sum_t += tr.T_K[i];
            ++count;
            i_lo = std::min(i_lo, i);
            i_hi = std::max(i_hi, i);
        }
    }
    if (count < 2) throw ValidationError("mean_values: window contains fewer than 2 trace nodes");
    MeanValues mv;
    mv.p_cyl_Pa = sum_p / static_cast<double>(count);
    mv.t_cyl_K = sum_t / static_cast<double>(count);
    mv.q_wall_W = (tr.Q_wall_J[i_hi] - tr.Q_wall_J[i_lo]) * geom.n_cyl * op.omega_radps /
                  (4.0 * kPi);
    return mv;
}

// Mean-value in-cylinder maps on a speed x torque lattice, keyed by the EGR
// rate they were generated at.
struct MeanValueMaps {
    double x_egr = 0.0;
    GridTable p_cyl_Pa;
    GridTable t_cyl_K;
    GridTable q_wall_W;
};

inline void validate_mean_value_maps(const MeanValueMaps& m, double t_wall_K) {
    validate_grid(m.p_cyl_Pa, "P_cyl map");
    validate_grid(m.t_cyl_K, "T_cyl map");
    validate_grid(m.q_wall_W, "Q_wall map");
    for (std::size_t i = 0; i < m.p_cyl_Pa.values.size(); ++i) {
        if (!(m.p_cyl_Pa.values[i] > 0.0 && m.t_cyl_K.values[i] > 0.0 && m.q_wall_W.values[i] > 0.0))
            throw ValidationError("mean-value maps: non-positive entry at flat index " +
                                  std::to_string(i));
        if (!(m.t_cyl_K.values[i] > t_wall_K))
            throw ValidationError("mean-value maps: T_cyl " + std::to_string(m.t_cyl_K.values[i]) +
                                  " K does not exceed the wall temperature at flat index " +
                                  std::to_string(i));
    }
    for (std::size_t is = 0; is < m.t_cyl_K.speeds_rpm.size(); ++is)
        for (std::size_t it = 1; it < m.t_cyl_K.torques_Nm.size(); ++it)
            if (m.t_cyl_K.at(it, is) < m.t_cyl_K.at(it - 1, is))
                throw ValidationError("mean-value maps: T_cyl decreases with torque at " +
                                      std::to_string(m.t_cyl_K.speeds_rpm[is]) + " rpm");
}

// Runs simulate_cycle + mean_values on every lattice node.  Nodes evaluate
// concurrently (jobs = 0: hardware threads); failures are collected and
// reported together with their coordinates.
inline MeanValueMaps generate_maps(const CylinderModel& mdl, const EngineMaps& maps, double x_egr,
                                   const ReferenceState& env, const IntakeState& intake,
                                   unsigned jobs = 0) {
    validate_engine_maps(maps);
    const auto& speeds = maps.fuel_kg_s.speeds_rpm;
    const auto& torques = maps.fuel_kg_s.torques_Nm;

    MeanValueMaps out;
    out.x_egr = x_egr;
    for (GridTable* t : {&out.p_cyl_Pa, &out.t_cyl_K, &out.q_wall_W}) {
        t->speeds_rpm = speeds;
        t->torques_Nm = torques;
        t->values.assign(speeds.size() * torques.size(), 0.0);
    }

    std::vector<std::string> failures(speeds.size() * torques.size());
    parallel_for(speeds.size() * torques.size(), jobs, [&](std::size_t idx) {
        const std::size_t it = idx / speeds.size();
        const std::size_t is = idx % speeds.size();
        const OperatingPoint op{rpm_to_radps(speeds[is]), torques[it]};
        try {
            const CycleTraceCA tr = simulate_cycle(mdl, op, x_egr, maps, env, intake);
            const MeanValues mv = mean_values(tr, mdl.comb, op, mdl.engine.geometry);
            out.p_cyl_Pa.values[idx] = mv.p_cyl_Pa;
            out.t_cyl_K.values[idx] = mv.t_cyl_K;
            out.q_wall_W.values[idx] = mv.q_wall_W;
        } catch (const std::exception& e) {
            failures[idx] = "(" + std::to_string(speeds[is]) + " rpm, " + std::to_string(torques[it]) +
                            " Nm): " + e.what();
        }
    });

    std::string report;
    std::size_t n_failed = 0;
    for (const auto& f : failures) {
        if (f.empty()) continue;
        ++n_failed;
        if (n_failed <= 5) report += "\n  " + f;
    }
    if (n_failed > 0)
        throw DomainError("generate_maps: " + std::to_string(n_failed) + " of " +
                          std::to_string(failures.size()) + " lattice nodes failed:" + report +
                          (n_failed > 5 ? "\n  ..." : ""));

    validate_mean_value_maps(out, mdl.engine.geometry.wall_temp_K);
    return out;
}

inline void save_mean_value_maps(const MeanValueMaps& m, const std::string& pcyl_csv,
                                 const std::string& tcyl_csv, const std::string& qwall_csv) {
    save_grid_csv(pcyl_csv, m.p_cyl_Pa);
    save_grid_csv(tcyl_csv, m.t_cyl_K);
    save_grid_csv(qwall_csv, m.q_wall_W);
}

inline MeanValueMaps load_mean_value_maps(double x_egr, const std::string& pcyl_csv,
                                          const std::string& tcyl_csv, const std::string& qwall_csv) {
    MeanValueMaps m;
    m.x_egr = x_egr;
    m.p_cyl_Pa = load_grid_csv(pcyl_csv);
    m.t_cyl_K = load_grid_csv(tcyl_csv);
    m.q_wall_W = load_grid_csv(qwall_csv);
    if (m.p_cyl_Pa.speeds_rpm != m.t_cyl_K.speeds_rpm ||
        m.p_cyl_Pa.speeds_rpm != m.q_wall_W.speeds_rpm ||
        m.p_cyl_Pa.torques_Nm != m.t_cyl_K.torques_Nm ||
        m.p_cyl_Pa.torques_Nm != m.q_wall_W.torques_Nm)
        throw ValidationError("mean-value maps: the three files use different grids");
    return m;
}

} // namespace exeng
