#pragma once

// Ideal-gas caloric properties: 7-coefficient NASA polynomials per species
// (two temperature ranges), plus a lumped CxHy fuel-vapor model anchored to
// the fuel's lower heating value.

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "exeng/errors.hpp"
#include "exeng/species.hpp"

namespace exeng {

// One 7-coefficient fit:
//   cp/R   = a1 + a2 T + a3 T^2 + a4 T^3 + a5 T^4
//   h/(RT) = a1 + a2 T/2 + a3 T^2/3 + a4 T^3/4 + a5 T^4/5 + a6/T
//   s/R    = a1 ln T + a2 T + a3 T^2/2 + a4 T^3/3 + a5 T^4/4 + a7
// h is formation-referenced (h(298.15 K) = standard enthalpy of formation);
// s is the standard-state absolute entropy at 1 bar.
struct Nasa7Range {
    std::array<double, 7> a{};
};

struct PropertyCurve {
    double t_min_K = 200.0;
    double t_break_K = 1000.0;
    double t_max_K = 3500.0;
    Nasa7Range low;   // [t_min, t_break]
    Nasa7Range high;  // [t_break, t_max]
};

// Property fits for the four tracked species plus the gas constant they are
// evaluated with.
struct PropertyTable {
    std::array<PropertyCurve, kNumSpecies> curves{};
    double R = kGasConstant;  // J/(mol K)

    const PropertyCurve& curve(Species s) const { return curves[static_cast<std::size_t>(s)]; }
    PropertyCurve& curve(Species s) { return curves[static_cast<std::size_t>(s)]; }
};

namespace detail {

inline const Nasa7Range& pick_range(const PropertyCurve& c, double T, const char* op, Species s) {
    if (!(T >= c.t_min_K && T <= c.t_max_K))
        throw DomainError(std::string(op) + ": T = " + std::to_string(T) + " K outside fit range [" +
                          std::to_string(c.t_min_K) + ", " + std::to_string(c.t_max_K) + "] K for " +
                          species_name(s));
    return T < c.t_break_K ? c.low : c.high;
}

} // namespace detail

// Molar heat capacity at constant pressure [J/(mol K)].
inline double heat_capacity(const PropertyTable& tab, Species s, double T) {
    const auto& a = detail::pick_range(tab.curve(s), T, "heat_capacity", s).a;
    return tab.R * (a[0] + T * (a[1] + T * (a[2] + T * (a[3] + T * a[4]))));
}

// Molar enthalpy [J/mol], formation-referenced.
inline double enthalpy(const PropertyTable& tab, Species s, double T) {
    const auto& a = detail::pick_range(tab.curve(s), T, "enthalpy", s).a;
    return tab.R * T *
           (a[0] + T * (a[1] / 2.0 + T * (a[2] / 3.0 + T * (a[3] / 4.0 + T * a[4] / 5.0))) + a[5] / T);
}

// Standard-state molar entropy [J/(mol K)] at the reference pressure.
inline double entropy(const PropertyTable& tab, Species s, double T) {
    const auto& a = detail::pick_range(tab.curve(s), T, "entropy", s).a;
    return tab.R * (a[0] * std::log(T) + T * (a[1] + T * (a[2] / 2.0 + T * (a[3] / 3.0 + T * a[4] / 4.0))) +
                    a[6]);
}

// Molar Gibbs energy [J/mol]: g = h - T s.
inline double gibbs(const PropertyTable& tab, Species s, double T) {
    return enthalpy(tab, s, T) - T * entropy(tab, s, T);
}

// Built-in fits (GRI-Mech 3.0 release), break at 1000 K.  Declared validity
// is clamped to [200, 3500] K: in-cylinder states stay well below 3500 K and
// ambient sweeps stay above 200 K.
inline PropertyTable builtin_property_table(double R = kGasConstant) {
    PropertyTable tab;
    tab.R = R;

    auto set = [&tab](Species s, std::array<double, 7> low, std::array<double, 7> high) {
        PropertyCurve c;
        c.t_min_K = 200.0;
        c.t_break_K = 1000.0;
        c.t_max_K = 3500.0;
        c.low.a = low;
        c.high.a = high;
        tab.curve(s) = c;
    };

    set(Species::N2,
        {3.298677e+00, 1.4082404e-03, -3.963222e-06, 5.641515e-09, -2.444854e-12, -1.0208999e+03,
         3.950372e+00},
        {2.92664e+00, 1.4879768e-03, -5.68476e-07, 1.0097038e-10, -6.753351e-15, -9.227977e+02,
         5.980528e+00});
    set(Species::O2,
        {3.78245636e+00, -2.99673416e-03, 9.84730201e-06, -9.68129509e-09, 3.24372837e-12,
         -1.06394356e+03, 3.65767573e+00},
        {3.28253784e+00, 1.48308754e-03, -7.57966669e-07, 2.09470555e-10, -2.16717794e-14,
         -1.08845772e+03, 5.45323129e+00});
    set(Species::H2O,
        {4.19864056e+00, -2.03643410e-03, 6.52040211e-06, -5.48797062e-09, 1.77197817e-12,
         -3.02937267e+04, -8.49032208e-01},
        {3.03399249e+00, 2.17691804e-03, -1.64072518e-07, -9.70419870e-11, 1.68200992e-14,
         -3.00042971e+04, 4.96677010e+00});
    set(Species::CO2,
        {2.35677352e+00, 8.98459677e-03, -7.12356269e-06, 2.45919022e-09, -1.43699548e-13,
         -4.83719697e+04, 9.90105222e+00},
        {3.85746029e+00, 4.41437026e-03, -2.21481404e-06, 5.23490188e-10, -4.72084164e-14,
         -4.87591660e+04, 2.27163806e+00});

    return tab;
}

// Optional coefficient override, one row per species:
//   species,t_min_K,t_break_K,t_max_K,low_a1..low_a7,high_a1..high_a7
// '#' comments and a header row are skipped.  Missing species keep the
// built-in fit.
inline PropertyTable load_property_table(const std::string& path, double R = kGasConstant) {
    std::ifstream in(path);
    if (!in) throw ValidationError("load_property_table: cannot open " + path);
    PropertyTable tab = builtin_property_table(R);

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::vector<std::string> cells;
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!cells.empty() && cells[0] == "species") continue;  // header
        if (cells.size() != 18)
            throw ValidationError("load_property_table: " + path + ":" + std::to_string(lineno) +
                                  ": expected 18 columns, got " + std::to_string(cells.size()));

        Species sp;
        if (cells[0] == "N2") sp = Species::N2;
        else if (cells[0] == "CO2") sp = Species::CO2;
        else if (cells[0] == "H2O") sp = Species::H2O;
        else if (cells[0] == "O2") sp = Species::O2;
        else
            throw ValidationError("load_property_table: " + path + ":" + std::to_string(lineno) +
                                  ": unknown species '" + cells[0] + "'");

        auto num = [&](std::size_t i) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(cells[i], &pos);
                if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
                return v;
            } catch (const std::exception&) {
                throw ValidationError("load_property_table: " + path + ":" + std::to_string(lineno) +
                                      ": bad number '" + cells[i] + "'");
            }
        };

        PropertyCurve c;
        c.t_min_K = num(1);
        c.t_break_K = num(2);
        c.t_max_K = num(3);
        if (!(c.t_min_K < c.t_break_K && c.t_break_K < c.t_max_K))
            throw ValidationError("load_property_table: " + path + ":" + std::to_string(lineno) +
                                  ": temperature ranges must satisfy t_min < t_break < t_max");
        for (int i = 0; i < 7; ++i) c.low.a[static_cast<std::size_t>(i)] = num(static_cast<std::size_t>(4 + i));
        for (int i = 0; i < 7; ++i) c.high.a[static_cast<std::size_t>(i)] = num(static_cast<std::size_t>(11 + i));
        tab.curve(sp) = c;
    }
    return tab;
}

// Lumped CxHy fuel vapor.  Constant cp and an enthalpy anchor chosen so the
// gaseous-product combustion enthalpy at 298.15 K equals -LHV exactly:
//   h_f(298.15) = x h_CO2(298.15) + (y/2) h_H2O(298.15) + LHV M_fuel.
struct FuelThermo {
    double x = 14.4;                 // carbon atoms per molecule [-]
    double y = 24.9;                 // hydrogen atoms per molecule [-]
    double lhv_J_per_kg = 42.50e6;   // lower heating value [J/kg]
    double molar_mass_kg_per_mol = 0.0;
    double h_ref_J_per_mol = 0.0;    // formation-referenced enthalpy at 298.15 K
    double s_ref_J_per_molK = 550.0; // absolute entropy at 298.15 K, 1 bar
    double cp_J_per_molK = 450.0;    // constant vapor heat capacity
};

inline constexpr double kFuelRefT_K = 298.15;

inline double fuel_molar_mass(double x, double y) { return kMolarMassC * x + kMolarMassH * y; }

inline FuelThermo make_fuel(const PropertyTable& tab, double x = 14.4, double y = 24.9,
                            double lhv_J_per_kg = 42.50e6, double s_ref = 550.0, double cp = 450.0) {
    if (!(x > 0.0) || !(y > 0.0)) throw ValidationError("make_fuel: x and y must be positive");
    if (!(lhv_J_per_kg > 0.0)) throw ValidationError("make_fuel: LHV must be positive");
    if (!(cp > 0.0) || !(s_ref > 0.0)) throw ValidationError("make_fuel: cp and s_ref must be positive");
    FuelThermo f;
    f.x = x;
    f.y = y;
    f.lhv_J_per_kg = lhv_J_per_kg;
    f.molar_mass_kg_per_mol = fuel_molar_mass(x, y);
    f.s_ref_J_per_molK = s_ref;
    f.cp_J_per_molK = cp;
    f.h_ref_J_per_mol = x * enthalpy(tab, Species::CO2, kFuelRefT_K) +
                        (y / 2.0) * enthalpy(tab, Species::H2O, kFuelRefT_K) +
                        lhv_J_per_kg * f.molar_mass_kg_per_mol;
    return f;
}

inline double fuel_enthalpy(const FuelThermo& f, double T) {
    return f.h_ref_J_per_mol + f.cp_J_per_molK * (T - kFuelRefT_K);
}

inline double fuel_entropy(const FuelThermo& f, double T) {
    if (!(T > 0.0)) throw DomainError("fuel_entropy: T = " + std::to_string(T) + " K must be positive");
    return f.s_ref_J_per_molK + f.cp_J_per_molK * std::log(T / kFuelRefT_K);
}

inline double fuel_gibbs(const FuelThermo& f, double T) {
    return fuel_enthalpy(f, T) - T * fuel_entropy(f, T);
}

} // namespace exeng
