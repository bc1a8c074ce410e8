// Eight-term exergy balance at the rated-power operating point, plus the
// reference-temperature sensitivity of the percentage breakdown.

#include <exeng/exergy.hpp>

#include <cstdio>

using namespace exeng;

int main() {
    const CylinderModel mdl;
    const EngineMaps maps = synth_maps(mdl.engine, mdl.fuel, {});
    const ReferenceState env;
    const IntakeState intake;
    const double x_egr = 0.2;
    const MeanValueMaps mvm = generate_maps(mdl, maps, x_egr, env, intake);

    const OperatingPoint op{rpm_to_radps(1973.0), 512.0};
    const ExergyRates r =
        balance(op, x_egr, maps, mvm, mdl.engine, mdl.fuel, mdl.props, env, intake);

    std::printf("operating point: %.0f rpm, %.0f Nm (%.1f kW), x_EGR = %.2f, T0 = %.2f K\n\n",
                radps_to_rpm(op.omega_radps), op.torque_Nm, op.power_W() / 1e3, x_egr, env.T0_K);
    std::printf("%-12s %14s\n", "term", "rate [kW]");
    const struct {
        const char* name;
        double value;
    } rows[] = {{"fuel", r.fuel},         {"intake", r.intake},     {"work", r.work},
                {"heat", r.heat},         {"exhaust", r.exhaust},   {"combustion", r.combustion},
                {"friction", r.friction}, {"others", r.others}};
    for (const auto& row : rows) std::printf("%-12s %14.2f\n", row.name, row.value / 1e3);
    std::printf("%-12s %14.2f  (steady state)\n\n", "sum", r.sum() / 1e3);

    std::printf("percentage breakdown vs reference temperature (x_EGR = %.2f):\n", x_egr);
    std::printf("%8s %8s %8s %8s %8s %8s %8s\n", "T0 [K]", "work", "heat", "exh", "comb", "fric",
                "others");
    for (double t0 : {263.15, 273.15, 283.15, 293.15, 303.15, 313.15}) {
        ReferenceState cold = env;
        cold.T0_K = t0;
        const ExergyRates rt =
            balance(op, x_egr, maps, mvm, mdl.engine, mdl.fuel, mdl.props, cold, intake);
        const PercentBreakdown b = percentages(scale_to_totals(rt, 1.0));
        std::printf("%8.2f %8.2f %8.2f %8.2f %8.2f %8.2f %8.2f\n", t0, b.work, b.heat, b.exhaust,
                    b.combustion, b.friction, b.others);
    }
    return 0;
}
