#pragma once

// Lean-combustion stoichiometry for a CxHy surrogate, speed-density air flow,
// the steady-state EGR composition fixed point, and molar flow bookkeeping.

#include <cmath>
#include <string>
#include <utility>

#include "exeng/engine.hpp"
#include "exeng/errors.hpp"
#include "exeng/species.hpp"
#include "exeng/thermo.hpp"

namespace exeng {

// Dead-state (environment) description used throughout the exergy terms.
struct ReferenceState {
    double T0_K = 293.15;
    double P0_Pa = 1.0e5;
    Composition f0 = ambient_air();
    double R = kGasConstant;  // J/(mol K), configurable (tables list 8.31)
};

struct IntakeState {
    double TI_K = 323.15;  // intake manifold temperature
    double PI_Pa = 1.0e5;  // intake manifold pressure before boost
};

inline void validate_reference(const ReferenceState& env) {
    if (!(env.T0_K > 0.0)) throw ValidationError("reference state: T0 must be positive");
    if (!(env.P0_Pa > 0.0)) throw ValidationError("reference state: P0 must be positive");
    if (!(env.R > 0.0)) throw ValidationError("reference state: R must be positive");
    validate_fractions(env.f0, 1e-9, "reference ambient");
}

inline void validate_intake(const IntakeState& in) {
    if (!(in.TI_K > 0.0)) throw ValidationError("intake state: T_I must be positive");
    if (!(in.PI_Pa > 0.0)) throw ValidationError("intake state: P_I must be positive");
}

// Per-mole-fuel stoichiometric mole counts on each side of the cylinder,
// under the converged EGR loop.  nu vectors are mole counts, not fractions.
struct Stoichiometry {
    Composition nu_I;      // trapped charge [mol per mol fuel]
    Composition nu_E;      // cylinder-out products [mol per mol fuel]
    Composition f_I, f_E;  // the matching mole fractions
    double lambda = 1.0;
    double x_egr = 0.0;
};

// Steady flows through the engine.  ndot_1/ndot_E are the *total* trapped and
// cylinder-out molar flows, i.e. they include the recirculated EGR stream.
struct FlowState {
    double mdot_f_kg_s = 0.0;
    double ndot_f_mol_s = 0.0;
    double ndot_1_mol_s = 0.0;
    double ndot_E_mol_s = 0.0;
    Composition f_I, f_E;
};

// Stoichiometric air mass per fuel mass: O2 demand (x + y/4) mol/mol fuel,
// 3.76 mol N2 accompanying each mol O2.
inline double stoich_air_fuel_ratio(const FuelThermo& fuel) {
    if (!(fuel.x > 0.0 && fuel.y > 0.0))
        throw ValidationError("stoich_air_fuel_ratio: fuel formula coefficients must be positive");
    const double o2_demand = fuel.x + fuel.y / 4.0;
    const double air_mass_per_mol_o2 = molar_mass(Species::O2) + 3.76 * molar_mass(Species::N2);
    return o2_demand * air_mass_per_mol_o2 / fuel.molar_mass_kg_per_mol;
}

// Fresh-air mass flow [kg/s]: speed-density with volumetric efficiency and a
// load-dependent boost on the charge pressure.  Four-stroke: one intake event
// per 4 pi rad.
inline double air_mass_flow(const OperatingPoint& op, const IntakeState& intake,
                            const EngineSpec& engine) {
    if (!(op.omega_radps > 0.0))
        throw DomainError("air_mass_flow: engine speed must be positive (got " +
                          std::to_string(op.omega_radps) + " rad/s)");
    validate_intake(intake);
    const double p_charge = intake.PI_Pa * boost_ratio(engine.breathing, bmep_Pa(op, engine.geometry));
    const double rho = p_charge / (kAirGasConstant * intake.TI_K);
    return engine.breathing.eta_vol * rho * engine.geometry.displacement_m3 * op.omega_radps /
           (4.0 * kPi);
}

inline constexpr double kSmokeLimitLambda = 1.2;

// Air-fuel equivalence ratio.  Rich mixtures (lambda < 1) violate the
// complete-combustion assumption and are rejected; values below the smoke
// limit are legal but callers may warn (see kSmokeLimitLambda).
inline double lambda_ratio(double air_kg_s, double fuel_kg_s, const FuelThermo& fuel) {
    if (!(fuel_kg_s > 0.0))
        throw DomainError("lambda: fuel flow must be positive for lambda to be defined (got " +
                          std::to_string(fuel_kg_s) + " kg/s)");
    if (air_kg_s < 0.0) throw ValidationError("lambda: air flow must be non-negative");
    const double lam = air_kg_s / (fuel_kg_s * stoich_air_fuel_ratio(fuel));
    if (lam < 1.0)
        throw DomainError("lambda: rich mixture (lambda = " + std::to_string(lam) +
                          " < 1) breaks the complete-combustion assumption");
    return lam;
}

namespace detail {

// Product mole counts per mole fuel for complete lean combustion of the given
// trapped charge (charge_moles per mole fuel at composition f_charge).
inline Composition products_per_mol_fuel(double charge_moles, const Composition& f_charge,
                                         const FuelThermo& fuel) {
    const double o2_demand = fuel.x + fuel.y / 4.0;
    Composition n;
    for (Species s : kAllSpecies) n[s] = charge_moles * f_charge[s];
    n[Species::CO2] += fuel.x;
    n[Species::H2O] += fuel.y / 2.0;
    n[Species::O2] -= o2_demand;
    if (n[Species::O2] < -1e-9 * charge_moles)
        throw DomainError("combustion products: trapped O2 below stoichiometric demand");
    if (n[Species::O2] < 0.0) n[Species::O2] = 0.0;  // scrub rounding at lambda = 1
    return n;
}

} // namespace detail

// Complete lean combustion products of fresh ambient air, as mole fractions.
inline Composition exhaust_composition(double lam, const FuelThermo& fuel, const Composition& ambient) {
    if (!(lam >= 1.0))
        throw DomainError("exhaust_composition: lambda = " + std::to_string(lam) + " below 1");
    validate_fractions(ambient, 1e-9, "exhaust_composition ambient");
    const double f_o2 = ambient[Species::O2];
    if (!(f_o2 > 0.0)) throw DomainError("exhaust_composition: ambient contains no O2");
    const double fresh_moles = lam * (fuel.x + fuel.y / 4.0) / f_o2;
    return detail::products_per_mol_fuel(fresh_moles, ambient, fuel).normalized();
}

// Steady-state EGR loop: the trapped charge is (1 - x_EGR) fresh ambient plus
// x_EGR recirculated exhaust on a molar basis, and the exhaust is the burnt
// charge.  Successive substitution to 1e-12 on the max fraction change.
inline std::pair<Composition, Composition> egr_fixed_point(double lam, double x_egr,
                                                           const FuelThermo& fuel,
                                                           const Composition& ambient) {
    if (!(lam >= 1.0))
        throw DomainError("egr_fixed_point: lambda = " + std::to_string(lam) + " below 1");
    if (!(x_egr >= 0.0 && x_egr < 0.6))
        throw ValidationError("egr_fixed_point: x_EGR = " + std::to_string(x_egr) +
                              " outside [0, 0.6)");
    validate_fractions(ambient, 1e-9, "egr_fixed_point ambient");
    const double f_o2 = ambient[Species::O2];
    if (!(f_o2 > 0.0)) throw DomainError("egr_fixed_point: ambient contains no O2");

    const double fresh_moles = lam * (fuel.x + fuel.y / 4.0) / f_o2;  // per mol fuel
    const double charge_moles = fresh_moles / (1.0 - x_egr);

    constexpr int kMaxIter = 200;
    constexpr double kTol = 1e-12;
    Composition f_e = exhaust_composition(lam, fuel, ambient);  // no-EGR guess
    Composition f_i;
    for (int it = 0; it < kMaxIter; ++it) {
        for (Species s : kAllSpecies) f_i[s] = (1.0 - x_egr) * ambient[s] + x_egr * f_e[s];
        const Composition f_e_next =
            detail::products_per_mol_fuel(charge_moles, f_i, fuel).normalized();
        double resid = 0.0;
        for (Species s : kAllSpecies) resid = std::max(resid, std::abs(f_e_next[s] - f_e[s]));
        f_e = f_e_next;
        if (resid < kTol) {
            for (Species s : kAllSpecies) f_i[s] = (1.0 - x_egr) * ambient[s] + x_egr * f_e[s];
            return {f_i, f_e};
        }
    }
    double resid = 0.0;
    {
        Composition f_i_last;
        for (Species s : kAllSpecies) f_i_last[s] = (1.0 - x_egr) * ambient[s] + x_egr * f_e[s];
        const Composition f_e_next =
            detail::products_per_mol_fuel(charge_moles, f_i_last, fuel).normalized();
        for (Species s : kAllSpecies) resid = std::max(resid, std::abs(f_e_next[s] - f_e[s]));
    }
    throw ConvergenceError("egr_fixed_point: no convergence after " + std::to_string(kMaxIter) +
                           " iterations (residual " + std::to_string(resid) + ")");
}

// Per-mole-fuel stoichiometric vectors under the converged EGR loop.
inline Stoichiometry make_stoichiometry(double lam, double x_egr, const FuelThermo& fuel,
                                        const Composition& ambient) {
    Stoichiometry st;
    st.lambda = lam;
    st.x_egr = x_egr;
    auto [f_i, f_e] = egr_fixed_point(lam, x_egr, fuel, ambient);
    st.f_I = f_i;
    st.f_E = f_e;
    const double charge_moles = lam * (fuel.x + fuel.y / 4.0) / ambient[Species::O2] / (1.0 - x_egr);
    for (Species s : kAllSpecies) st.nu_I[s] = charge_moles * f_i[s];
    st.nu_E = detail::products_per_mol_fuel(charge_moles, f_i, fuel);
    return st;
}

// Molar flow bookkeeping for a given fuel mass flow.
inline FlowState molar_flows(double mdot_f, double lam, double x_egr, const FuelThermo& fuel,
                             const Composition& ambient) {
    if (mdot_f < 0.0) throw ValidationError("molar_flows: fuel mass flow must be non-negative");
    const Stoichiometry st = make_stoichiometry(lam, x_egr, fuel, ambient);
    FlowState fs;
    fs.mdot_f_kg_s = mdot_f;
    fs.ndot_f_mol_s = mdot_f / fuel.molar_mass_kg_per_mol;
    fs.f_I = st.f_I;
    fs.f_E = st.f_E;
    fs.ndot_1_mol_s = fs.ndot_f_mol_s * st.nu_I.sum();
    fs.ndot_E_mol_s = fs.ndot_f_mol_s * st.nu_E.sum();
    return fs;
}

// Elemental atom counts of a species mole vector (fuel contributions added
// separately by callers).
struct AtomCounts {
    double C = 0.0, H = 0.0, O = 0.0, N = 0.0;
};

inline AtomCounts atom_counts(const Composition& moles) {
    AtomCounts a;
    a.C = moles[Species::CO2];
    a.H = 2.0 * moles[Species::H2O];
    a.O = 2.0 * moles[Species::CO2] + moles[Species::H2O] + 2.0 * moles[Species::O2];
    a.N = 2.0 * moles[Species::N2];
    return a;
}

} // namespace exeng
