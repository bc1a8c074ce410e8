#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "exeng/errors.hpp"

namespace exeng {

// Universal gas constant [J/(mol K)].  Exposed as a default; everything that
// uses R takes it from ReferenceState so a config can override it.
inline constexpr double kGasConstant = 8.314;

// Gas-side species tracked through intake, cylinder and exhaust.
enum class Species : std::size_t { N2 = 0, CO2 = 1, H2O = 2, O2 = 3 };

inline constexpr std::size_t kNumSpecies = 4;
inline constexpr std::array<Species, kNumSpecies> kAllSpecies = {
    Species::N2, Species::CO2, Species::H2O, Species::O2};

inline const char* species_name(Species s) {
    switch (s) {
        case Species::N2: return "N2";
        case Species::CO2: return "CO2";
        case Species::H2O: return "H2O";
        case Species::O2: return "O2";
    }
    return "?";
}

// Molar masses [kg/mol], 2021 IUPAC atomic weights.
inline constexpr double kMolarMassC = 12.011e-3;
inline constexpr double kMolarMassH = 1.008e-3;
inline constexpr double kMolarMassN = 14.007e-3;
inline constexpr double kMolarMassO = 15.999e-3;

inline constexpr double molar_mass(Species s) {
    switch (s) {
        case Species::N2: return 2.0 * kMolarMassN;
        case Species::CO2: return kMolarMassC + 2.0 * kMolarMassO;
        case Species::H2O: return 2.0 * kMolarMassH + kMolarMassO;
        case Species::O2: return 2.0 * kMolarMassO;
    }
    return 0.0;
}

// Mole-fraction (or mole-count) vector over the tracked species.
struct Composition {
    std::array<double, kNumSpecies> f{};  // [-] indexed by Species

    double& operator[](Species s) { return f[static_cast<std::size_t>(s)]; }
    double operator[](Species s) const { return f[static_cast<std::size_t>(s)]; }

    double sum() const {
        double t = 0.0;
        for (double v : f) t += v;
        return t;
    }

    // Mean molar mass [kg/mol] of the mixture (expects fractions).
    double mean_molar_mass() const {
        double m = 0.0;
        for (Species s : kAllSpecies) m += (*this)[s] * molar_mass(s);
        return m;
    }

    Composition normalized() const {
        const double t = sum();
        if (!(t > 0.0)) throw DomainError("Composition::normalized: non-positive total " + std::to_string(t));
        Composition out = *this;
        for (double& v : out.f) v /= t;
        return out;
    }
};

// Every entry in [0,1] and the fractions close to 1 within tol.
inline void validate_fractions(const Composition& c, double tol = 1e-9,
                               const std::string& who = "composition") {
    for (Species s : kAllSpecies) {
        const double v = c[s];
        if (!(v >= 0.0 && v <= 1.0) || !std::isfinite(v))
            throw ValidationError(who + ": mole fraction of " + species_name(s) + " = " +
                                  std::to_string(v) + " outside [0,1]");
    }
    if (std::abs(c.sum() - 1.0) > tol)
        throw ValidationError(who + ": mole fractions sum to " + std::to_string(c.sum()) +
                              ", expected 1 within " + std::to_string(tol));
}

// Ambient air from the reference tables, trace species folded into N2
// (0.7567 N2 + 0.0092 other inerts -> 0.7659).
inline Composition ambient_air() {
    Composition c;
    c[Species::N2] = 0.7659;
    c[Species::CO2] = 0.0003;
    c[Species::H2O] = 0.0303;
    c[Species::O2] = 0.2035;
    return c;
}

} // namespace exeng
