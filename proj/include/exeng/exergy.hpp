#pragma once

// Exergy flux building blocks, the eight balance terms, steady-state closure,
// time integration, and the percentage decomposition of the input exergy.

#include <exeng/cylinder.hpp>
#include <exeng/mixture.hpp>

#include <cmath>
#include <string>
#include <vector>

namespace exeng {

// Signed exergy transfer/destruction rates [W].  Input terms (fuel, intake)
// are non-negative; outflow and destruction terms are non-positive on
// feasible points; others enforces the zero steady-state sum.
struct ExergyRates {
    double fuel = 0.0;
    double intake = 0.0;
    double work = 0.0;
    double heat = 0.0;
    double exhaust = 0.0;
    double combustion = 0.0;
    double friction = 0.0;
    double others = 0.0;

    double sum() const {
        return fuel + intake + work + heat + exhaust + combustion + friction + others;
    }
    double input() const { return fuel + intake; }
};

// Time-integrated exergies [J] over a horizon [s].
struct ExergyTotals {
    double fuel = 0.0;
    double intake = 0.0;
    double work = 0.0;
    double heat = 0.0;
    double exhaust = 0.0;
    double combustion = 0.0;
    double friction = 0.0;
    double others = 0.0;
    double horizon_s = 0.0;

    double sum() const {
        return fuel + intake + work + heat + exhaust + combustion + friction + others;
    }
    double input() const { return fuel + intake; }
};

// Share of the input exergy per term [%].  Values follow the print convention
// of the percentage decomposition: -X_j / (X_fuel + X_intk) * 100, so outflow
// and destruction terms come out positive and the six entries sum to +100.
// Magnitudes are available via std::abs; the sign here is the retained one.
struct PercentBreakdown {
    double work = 0.0;
    double heat = 0.0;
    double exhaust = 0.0;
    double combustion = 0.0;
    double friction = 0.0;
    double others = 0.0;

    double sum() const { return work + heat + exhaust + combustion + friction + others; }
};

// Physical (thermomechanical) flow availability of one species [J/mol]:
//   psi_ph = (h(T) - T0 s(T)) - (h(T0) - T0 s(T0))
inline double psi_physical(const PropertyTable& tab, Species sp, double t_K,
                           const ReferenceState& env) {
    return (enthalpy(tab, sp, t_K) - env.T0_K * entropy(tab, sp, t_K)) -
           (enthalpy(tab, sp, env.T0_K) - env.T0_K * entropy(tab, sp, env.T0_K));
}

// Chemical (mixing) availability [J/mol]: R T0 ln(f / f0).
inline double psi_chemical(double f, double f0, const ReferenceState& env) {
    if (!(f > 0.0) || !(f0 > 0.0))
        throw DomainError("psi_chemical: mole fractions must be positive (f = " +
                          std::to_string(f) + ", f0 = " + std::to_string(f0) + ")");
    return env.R * env.T0_K * std::log(f / f0);
}

// (T.1)  Fuel chemical exergy from the Szargut-style correlation.
inline double fuel_exergy_multiplier(const FuelThermo& fuel) {
    return 1.04224 + 0.011925 * fuel.x / fuel.y - 0.042 / fuel.x;
}

inline double x_fuel(double mdot_f_kg_s, const FuelThermo& fuel) {
    if (mdot_f_kg_s < 0.0) throw ValidationError("x_fuel: fuel mass flow must be non-negative");
    return fuel_exergy_multiplier(fuel) * fuel.lhv_J_per_kg * mdot_f_kg_s;
}

// Stream availability carried by a molar flow of the given composition at
// temperature t_K [W].  Species with zero fraction carry nothing and are
// skipped (the f ln f limit).
inline double stream_availability(double ndot_mol_s, const Composition& f, double t_K,
                                  const PropertyTable& tab, const ReferenceState& env) {
    double acc = 0.0;
    for (Species sp : kAllSpecies) {
        if (f[sp] == 0.0) continue;
        acc += f[sp] * (psi_chemical(f[sp], env.f0[sp], env) + psi_physical(tab, sp, t_K, env));
    }
    return ndot_mol_s * acc;
}

// (T.2)  Intake availability inflow (>= 0 for a warm, EGR-shifted charge).
inline double x_intake(const FlowState& flows, const IntakeState& intake,
                       const PropertyTable& tab, const ReferenceState& env) {
    return stream_availability(flows.ndot_1_mol_s, flows.f_I, intake.TI_K, tab, env);
}

// (T.3)  Brake work leaves as pure exergy.
inline double x_work(const OperatingPoint& op) { return -op.omega_radps * op.torque_Nm; }

// (T.4)  Carnot-weighted wall heat loss; qdot_cyl > 0 means gas -> wall.
inline double x_heat(double qdot_cyl_W, double t_cyl_K, const ReferenceState& env) {
    if (!(t_cyl_K > 0.0))
        throw DomainError("x_heat: cylinder temperature must be positive, got " +
                          std::to_string(t_cyl_K) + " K");
    return (1.0 - env.T0_K / t_cyl_K) * (-qdot_cyl_W);
}

// (T.5)  Exhaust stream availability outflow (<= 0).
inline double x_exhaust(const FlowState& flows, double t_exh_K, const PropertyTable& tab,
                        const ReferenceState& env) {
    return -stream_availability(flows.ndot_E_mol_s, flows.f_E, t_exh_K, tab, env);
}

// (T.6)  Combustion irreversibility.  Three brace groups per the printed
// formula -- the Gibbs reaction term at T_cyl, the N2 dilution term, and the
// non-N2 partial-pressure term -- scaled by -(T0/T_cyl) ndot_f.
inline double x_combustion(const FlowState& flows, const Stoichiometry& st, double t_cyl_K,
                           double p_cyl_Pa, const FuelThermo& fuel, const PropertyTable& tab,
                           const ReferenceState& env) {
    if (!(t_cyl_K > 0.0) || !(p_cyl_Pa > 0.0))
        throw DomainError("x_combustion: T_cyl and P_cyl must be positive (T = " +
                          std::to_string(t_cyl_K) + " K, p = " + std::to_string(p_cyl_Pa) +
                          " Pa)");
    if (flows.ndot_f_mol_s == 0.0) return 0.0;

    const double R = env.R;

    const double gibbs_term = fuel_gibbs(fuel, t_cyl_K) -
                              fuel.x * gibbs(tab, Species::CO2, t_cyl_K) -
                              0.5 * fuel.y * gibbs(tab, Species::H2O, t_cyl_K) +
                              (fuel.x + 0.25 * fuel.y) * gibbs(tab, Species::O2, t_cyl_K);

    if (!(st.f_I[Species::N2] > 0.0) || !(st.f_E[Species::N2] > 0.0))
        throw DomainError("x_combustion: N2 fraction vanishes in the dilution log");
    const double dilution = st.lambda / (1.0 - st.x_egr) * (fuel.x + 0.25 * fuel.y) * 3.76 * R *
                            t_cyl_K * std::log(st.f_I[Species::N2] / st.f_E[Species::N2]);

    double partial = 0.0;
    for (Species sp : kAllSpecies) {
        if (sp == Species::N2) continue;
        for (const auto& [nu, f] : {std::pair{st.nu_I[sp], st.f_I[sp]},
                                    std::pair{-st.nu_E[sp], st.f_E[sp]}}) {
            if (nu == 0.0) continue;
            if (!(f > 0.0))
                throw DomainError(std::string("x_combustion: ") + species_name(sp) +
                                  " has zero mole fraction but a nonzero stoichiometric "
                                  "coefficient in the partial-pressure log");
            partial += nu * std::log(f * p_cyl_Pa / env.P0_Pa);
        }
    }
    partial *= R * t_cyl_K;

    return -(env.T0_K / t_cyl_K) * flows.ndot_f_mol_s * (gibbs_term + dilution + partial);
}

// (T.7)  Friction destruction from the FMEP model.
inline double x_friction(const OperatingPoint& op, const EngineSpec& engine) {
    if (op.omega_radps < 0.0)
        throw DomainError("x_friction: engine speed must be non-negative");
    if (op.omega_radps == 0.0) return 0.0;
    const double sp = mean_piston_speed(engine.geometry, op.omega_radps);
    return -(op.omega_radps / (4.0 * kPi)) * fmep_Pa(engine.fmep, op.omega_radps, sp) *
           engine.geometry.displacement_m3;
}

// (T.8)  Remainder enforcing the steady-state closure; the others field of
// the argument is ignored.
inline double x_others(const ExergyRates& seven) {
    const double terms[] = {seven.fuel,    seven.intake,     seven.work,    seven.heat,
                            seven.exhaust, seven.combustion, seven.friction};
    double acc = 0.0;
    for (double t : terms) {
        if (!std::isfinite(t))
            throw NumericalError("x_others: non-finite exergy term " + std::to_string(t));
        acc += t;
    }
    return -acc;
}

// Full eight-term balance at one operating point.  The mean-value maps must
// be the ones generated at the requested EGR rate.
inline ExergyRates balance(const OperatingPoint& op, double x_egr, const EngineMaps& maps,
                           const MeanValueMaps& mvm, const EngineSpec& engine,
                           const FuelThermo& fuel, const PropertyTable& tab,
                           const ReferenceState& env, const IntakeState& intake) {
    validate_reference(env);
    validate_intake(intake);
    if (std::abs(mvm.x_egr - x_egr) > 1e-12)
        throw ValidationError("balance: mean-value maps were generated at x_EGR = " +
                              std::to_string(mvm.x_egr) + ", requested " + std::to_string(x_egr));

    const double mdot_f = interpolate(maps.fuel_kg_s, op.omega_radps, op.torque_Nm, "fuel");
    if (!(mdot_f > 0.0))
        throw DomainError("balance: interpolated fuel rate " + std::to_string(mdot_f) +
                          " kg/s is not positive");
    const double t_exh = interpolate(maps.texh_K, op.omega_radps, op.torque_Nm, "T_exh");
    const double p_cyl = interpolate(mvm.p_cyl_Pa, op.omega_radps, op.torque_Nm, "P_cyl");
    const double t_cyl = interpolate(mvm.t_cyl_K, op.omega_radps, op.torque_Nm, "T_cyl");
    const double qdot = interpolate(mvm.q_wall_W, op.omega_radps, op.torque_Nm, "Q_wall");

    const double mdot_air = air_mass_flow(op, intake, engine);
    const double lam = lambda_ratio(mdot_air, mdot_f, fuel);
    const Stoichiometry st = make_stoichiometry(lam, x_egr, fuel, env.f0);
    const FlowState flows = molar_flows(mdot_f, lam, x_egr, fuel, env.f0);

    ExergyRates r;
    r.fuel = x_fuel(mdot_f, fuel);
    r.intake = x_intake(flows, intake, tab, env);
    r.work = x_work(op);
    r.heat = x_heat(qdot, t_cyl, env);
    r.exhaust = x_exhaust(flows, t_exh, tab, env);
    r.combustion = x_combustion(flows, st, t_cyl, p_cyl, fuel, tab, env);
    r.friction = x_friction(op, engine);
    r.others = x_others(r);
    return r;
}

// (Eq. 3)  Trapezoidal time integration of a uniformly sampled rate trace.
inline ExergyTotals integrate(const std::vector<ExergyRates>& trace, double dt_s) {
    if (trace.empty()) throw ValidationError("integrate: empty rate trace");
    if (!(dt_s > 0.0)) throw ValidationError("integrate: timestep must be positive");

    ExergyTotals tot;
    tot.horizon_s = dt_s * static_cast<double>(trace.size() - 1);
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
        const ExergyRates& a = trace[i];
        const ExergyRates& b = trace[i + 1];
        tot.fuel += 0.5 * dt_s * (a.fuel + b.fuel);
        tot.intake += 0.5 * dt_s * (a.intake + b.intake);
        tot.work += 0.5 * dt_s * (a.work + b.work);
        tot.heat += 0.5 * dt_s * (a.heat + b.heat);
        tot.exhaust += 0.5 * dt_s * (a.exhaust + b.exhaust);
        tot.combustion += 0.5 * dt_s * (a.combustion + b.combustion);
        tot.friction += 0.5 * dt_s * (a.friction + b.friction);
        tot.others += 0.5 * dt_s * (a.others + b.others);
    }
    return tot;
}

inline ExergyTotals scale_to_totals(const ExergyRates& r, double horizon_s) {
    ExergyTotals tot;
    tot.fuel = r.fuel * horizon_s;
    tot.intake = r.intake * horizon_s;
    tot.work = r.work * horizon_s;
    tot.heat = r.heat * horizon_s;
    tot.exhaust = r.exhaust * horizon_s;
    tot.combustion = r.combustion * horizon_s;
    tot.friction = r.friction * horizon_s;
    tot.others = r.others * horizon_s;
    tot.horizon_s = horizon_s;
    return tot;
}

// (Eq. 4)  Percentage decomposition against the input exergy.
inline PercentBreakdown percentages(const ExergyTotals& tot) {
    const double input = tot.input();
    if (!(input > 0.0))
        throw DomainError("percentages: input exergy must be positive, got " +
                          std::to_string(input) + " J");
    PercentBreakdown b;
    b.work = -tot.work / input * 100.0;
    b.heat = -tot.heat / input * 100.0;
    b.exhaust = -tot.exhaust / input * 100.0;
    b.combustion = -tot.combustion / input * 100.0;
    b.friction = -tot.friction / input * 100.0;
    b.others = -tot.others / input * 100.0;
    return b;
}

// JSON serialization with fixed field names and shortest-round-trip numbers.
inline std::string to_json(const ExergyRates& r) {
    using detail::format_double;
    return "{\"fuel\": " + format_double(r.fuel) + ", \"intake\": " + format_double(r.intake) +
           ", \"work\": " + format_double(r.work) + ", \"heat\": " + format_double(r.heat) +
           ", \"exhaust\": " + format_double(r.exhaust) +
           ", \"combustion\": " + format_double(r.combustion) +
           ", \"friction\": " + format_double(r.friction) +
           ", \"others\": " + format_double(r.others) + "}";
}

inline std::string to_json(const ExergyTotals& t) {
    using detail::format_double;
    return "{\"fuel\": " + format_double(t.fuel) + ", \"intake\": " + format_double(t.intake) +
           ", \"work\": " + format_double(t.work) + ", \"heat\": " + format_double(t.heat) +
           ", \"exhaust\": " + format_double(t.exhaust) +
           ", \"combustion\": " + format_double(t.combustion) +
           ", \"friction\": " + format_double(t.friction) +
           ", \"others\": " + format_double(t.others) +
           ", \"horizon_s\": " + format_double(t.horizon_s) + "}";
}

inline std::string to_json(const PercentBreakdown& b) {
    using detail::format_double;
    return "{\"work\": " + format_double(b.work) + ", \"heat\": " + format_double(b.heat) +
           ", \"exhaust\": " + format_double(b.exhaust) +
           ", \"combustion\": " + format_double(b.combustion) +
           ", \"friction\": " + format_double(b.friction) +
           ", \"others\": " + format_double(b.others) + "}";
}

} // namespace exeng
