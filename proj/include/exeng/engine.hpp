#pragma once

// Engine hardware description shared by the breathing, cylinder-process and
// friction models, plus the operating-point tuple everything is evaluated at.

#include <cmath>
#include <numbers>
#include <string>

#include "exeng/errors.hpp"

namespace exeng {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kAirGasConstant = 287.0;  // J/(kg K), dry air

inline double rpm_to_radps(double rpm) { return rpm * kPi / 30.0; }
inline double radps_to_rpm(double omega) { return omega * 30.0 / kPi; }

struct OperatingPoint {
    double omega_radps = 0.0;  // engine speed [rad/s]
    double torque_Nm = 0.0;    // brake torque [Nm]

    double power_W() const { return omega_radps * torque_Nm; }
};

// FMEP = 1000 (c1 + c2 omega + c3 Sp^2)  [Pa]
struct FmepCoeffs {
    double c1_kPa = 75.0;       // [kPa]
    double c2_kPa_s = 0.458;    // [kPa s]
    double c3_kPa_s2_m2 = 0.4;  // [kPa s^2/m^2]
};

// Speed-density breathing.  The charge pressure is P_I times a boost ratio
// that grows linearly with BMEP above a threshold (turbocharger stand-in;
// boost = 1 at low load so the naturally-aspirated formula is recovered).
struct Breathing {
    double eta_vol = 0.90;                 // volumetric efficiency [-]
    double boost_slope_per_Pa = 1.15e-6;   // boost gain per Pa of BMEP above threshold [1/Pa]
    double boost_threshold_Pa = 3.0e5;     // BMEP where boost starts [Pa]
};

struct EngineGeometry {
    int n_cyl = 8;
    double displacement_m3 = 6.4e-3;   // total swept volume V_d,tot
    double compression_ratio = 17.5;   // [-]
    double bore_m = 0.0982;
    double stroke_m = 0.105;
    double conrod_ratio = 3.2;         // conrod length / crank radius [-]
    double wall_temp_K = 560.0;        // lumped liner/head/piston temperature

    double swept_per_cyl_m3() const { return displacement_m3 / n_cyl; }
    double clearance_per_cyl_m3() const { return swept_per_cyl_m3() / (compression_ratio - 1.0); }
    double piston_area_m2() const { return kPi / 4.0 * bore_m * bore_m; }
};

struct EngineSpec {
    EngineGeometry geometry;
    FmepCoeffs fmep;
    Breathing breathing;
};

inline void validate_engine(const EngineSpec& e) {
    const auto& g = e.geometry;
    if (g.n_cyl < 1) throw ValidationError("engine: n_cyl must be >= 1");
    if (!(g.displacement_m3 > 0.0)) throw ValidationError("engine: displacement must be positive");
    if (!(g.compression_ratio > 1.0)) throw ValidationError("engine: compression ratio must exceed 1");
    if (!(g.bore_m > 0.0 && g.stroke_m > 0.0)) throw ValidationError("engine: bore/stroke must be positive");
    if (!(g.conrod_ratio > 1.0)) throw ValidationError("engine: conrod ratio must exceed 1");
    if (!(g.wall_temp_K > 0.0)) throw ValidationError("engine: wall temperature must be positive");
    const double swept = g.n_cyl * g.piston_area_m2() * g.stroke_m;
    if (std::abs(swept - g.displacement_m3) > 0.01 * g.displacement_m3)
        throw ValidationError("engine: n_cyl*(pi/4)*bore^2*stroke = " + std::to_string(swept) +
                              " m^3 disagrees with displacement " + std::to_string(g.displacement_m3) +
                              " m^3 by more than 1%");
    if (!(e.breathing.eta_vol > 0.0 && e.breathing.eta_vol <= 1.2))
        throw ValidationError("engine: volumetric efficiency outside (0, 1.2]");
    if (e.breathing.boost_slope_per_Pa < 0.0 || e.breathing.boost_threshold_Pa < 0.0)
        throw ValidationError("engine: boost parameters must be non-negative");
}

// Mean piston speed [m/s].
inline double mean_piston_speed(const EngineGeometry& g, double omega_radps) {
    return g.stroke_m * omega_radps / kPi;
}

// Brake mean effective pressure [Pa] (four-stroke: 4 pi rad per cycle).
inline double bmep_Pa(const OperatingPoint& op, const EngineGeometry& g) {
    return 4.0 * kPi * op.torque_Nm / g.displacement_m3;
}

inline double boost_ratio(const Breathing& b, double bmep) {
    return 1.0 + b.boost_slope_per_Pa * std::max(0.0, bmep - b.boost_threshold_Pa);
}

// Friction mean effective pressure [Pa].
inline double fmep_Pa(const FmepCoeffs& c, double omega_radps, double piston_speed_m_s) {
    return 1000.0 * (c.c1_kPa + c.c2_kPa_s * omega_radps +
                     c.c3_kPa_s2_m2 * piston_speed_m_s * piston_speed_m_s);
}

} // namespace exeng
