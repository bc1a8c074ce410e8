// Drive-cycle exergy accounting: evaluates one trace over the EGR grid and
// prints how the integrated breakdown shifts.

#include <exeng/sweep.hpp>

#include <cstdio>

using namespace exeng;

int main(int argc, char** argv) {
    const char* path = argc > 1 ? argv[1] : "data/cycles/urban.csv";
    const CycleTrace trace = load_cycle_trace(path);

    SweepModels m;
    m.maps = synth_maps(m.mdl.engine, m.mdl.fuel, {});

    std::printf("cycle '%s': %zu samples, dt = %g s\n\n", trace.name.c_str(), trace.size(),
                trace.dt_s());
    std::printf("%6s %8s %8s %8s %8s %8s %8s %12s\n", "x_EGR", "work", "heat", "exh", "comb",
                "fric", "others", "fuel [MJ]");
    for (double x_egr : {0.0, 0.1, 0.2, 0.3}) {
        const MeanValueMaps mvm = generate_maps(m.mdl, m.maps, x_egr, m.env, m.intake);
        const CycleResult r = evaluate_cycle(trace, m.env.T0_K, x_egr, m, mvm);
        std::printf("%6.2f %8.2f %8.2f %8.2f %8.2f %8.2f %8.2f %12.2f\n", x_egr, r.percent.work,
                    r.percent.heat, r.percent.exhaust, r.percent.combustion, r.percent.friction,
                    r.percent.others, r.totals.fuel / 1e6);
    }
    return 0;
}
