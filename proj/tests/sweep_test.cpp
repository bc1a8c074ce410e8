#include <catch2/catch_amalgamated.hpp>

#include <exeng/sweep.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>

using namespace exeng;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("exeng_sweep_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const char* name) const { return (path / name).string(); }
};

struct SweepFixture {
    SweepModels m;
    MeanValueMaps mvm02;
    SweepFixture() {
        m.maps = synth_maps(m.mdl.engine, m.mdl.fuel, {});
        mvm02 = generate_maps(m.mdl, m.maps, 0.2, m.env, m.intake);
    }
};

const SweepFixture& fixture() {
    static const SweepFixture f;
    return f;
}

CycleTrace constant_trace(std::size_t n, double rpm, double torque, const char* name = "const") {
    CycleTrace c;
    c.name = name;
    for (std::size_t i = 0; i < n; ++i) {
        c.t_s.push_back(static_cast<double>(i));
        c.omega_radps.push_back(rpm_to_radps(rpm));
        c.torque_Nm.push_back(torque);
    }
    return c;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string data_cycle(const char* name) {
    return std::string(EXENG_DATA_DIR) + "/cycles/" + name;
}

} // namespace

TEST_CASE("cycle trace validation", "[sweep]") {
    CycleTrace c = constant_trace(5, 1500.0, 200.0);

    SECTION("well-formed trace passes") { CHECK_NOTHROW(validate_cycle_trace(c)); }
    SECTION("too few samples") {
        c.t_s.resize(1), c.omega_radps.resize(1), c.torque_Nm.resize(1);
        CHECK_THROWS_AS(validate_cycle_trace(c), ValidationError);
    }
    SECTION("column lengths must agree") {
        c.torque_Nm.pop_back();
        CHECK_THROWS_AS(validate_cycle_trace(c), ValidationError);
    }
    SECTION("time must increase") {
        c.t_s[1] = c.t_s[0];
        CHECK_THROWS_AS(validate_cycle_trace(c), ValidationError);
    }
    SECTION("non-uniform timestep is named by sample") {
        c.t_s[3] = 2.5;
        CHECK_THROWS_WITH(validate_cycle_trace(c), ContainsSubstring("sample 3"));
    }
    SECTION("negative speed") {
        c.omega_radps[2] = -1.0;
        CHECK_THROWS_AS(validate_cycle_trace(c), ValidationError);
    }
    SECTION("non-finite sample") {
        c.torque_Nm[4] = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(validate_cycle_trace(c), ValidationError);
    }
}

TEST_CASE("cycle trace CSV round trip", "[sweep]") {
    TempDir tmp;
    const CycleTrace c = constant_trace(7, 1234.5, 321.25, "roundtrip");
    write_text(tmp.file("roundtrip.csv"), to_csv(c));
    const CycleTrace back = load_cycle_trace(tmp.file("roundtrip.csv"));

    SECTION("name comes from the file stem") { CHECK(back.name == "roundtrip"); }
    SECTION("payload survives exactly") {
        REQUIRE(back.size() == c.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
            CHECK(back.t_s[i] == c.t_s[i]);
            CHECK(back.omega_radps[i] == c.omega_radps[i]);
            CHECK(back.torque_Nm[i] == c.torque_Nm[i]);
        }
    }
    SECTION("explicit name overrides the stem") {
        CHECK(load_cycle_trace(tmp.file("roundtrip.csv"), "other").name == "other");
    }
    SECTION("missing file") {
        CHECK_THROWS_AS(load_cycle_trace(tmp.file("nope.csv")), ValidationError);
    }
    SECTION("wrong header is rejected") {
        write_text(tmp.file("bad.csv"), "time,speed,torque\n0,1,2\n1,1,2\n");
        CHECK_THROWS_WITH(load_cycle_trace(tmp.file("bad.csv")),
                          ContainsSubstring("t_s,omega_radps,torque_Nm"));
    }
    SECTION("bad number is located by row") {
        write_text(tmp.file("bad.csv"), "t_s,omega_radps,torque_Nm\n0,1,2\n1,abc,2\n");
        CHECK_THROWS_WITH(load_cycle_trace(tmp.file("bad.csv")), ContainsSubstring("row 3"));
    }
    SECTION("cell count is enforced") {
        write_text(tmp.file("bad.csv"), "t_s,omega_radps,torque_Nm\n0,1\n");
        CHECK_THROWS_AS(load_cycle_trace(tmp.file("bad.csv")), ValidationError);
        write_text(tmp.file("bad2.csv"), "t_s,omega_radps,torque_Nm\n0,1,2,3\n");
        CHECK_THROWS_AS(load_cycle_trace(tmp.file("bad2.csv")), ValidationError);
    }
    SECTION("CRLF endings and trailing blank lines are tolerated") {
        write_text(tmp.file("crlf.csv"), "t_s,omega_radps,torque_Nm\r\n0,10,20\r\n1,10,20\r\n\r\n");
        const CycleTrace t = load_cycle_trace(tmp.file("crlf.csv"));
        CHECK(t.size() == 2);
        CHECK(t.torque_Nm[1] == 20.0);
    }
}

TEST_CASE("sweep grid validation", "[sweep]") {
    SECTION("published defaults pass and have 24 combinations") {
        const SweepGrid g;
        CHECK_NOTHROW(validate_sweep_grid(g));
        CHECK(g.t0_K.size() * g.x_egr.size() == 24);
    }
    SECTION("empty axis") {
        SweepGrid g;
        g.t0_K.clear();
        CHECK_THROWS_AS(validate_sweep_grid(g), ValidationError);
    }
    SECTION("axes must increase strictly") {
        SweepGrid g;
        g.x_egr = {0.0, 0.2, 0.2};
        CHECK_THROWS_AS(validate_sweep_grid(g), ValidationError);
    }
    SECTION("documented bounds are enforced") {
        SweepGrid cold;
        cold.t0_K = {200.0, 293.15};
        CHECK_THROWS_AS(validate_sweep_grid(cold), ValidationError);
        SweepGrid rich;
        rich.x_egr = {0.0, 0.7};
        CHECK_THROWS_AS(validate_sweep_grid(rich), ValidationError);
    }
}

TEST_CASE("evaluate_cycle matches the constant-point balance", "[sweep]") {
    const SweepFixture& f = fixture();
    const OperatingPoint op{rpm_to_radps(1973.0), 512.0};
    ReferenceState env = f.m.env;
    const ExergyRates rate = balance(op, 0.2, f.m.maps, f.mvm02, f.m.mdl.engine, f.m.mdl.fuel,
                                     f.m.mdl.props, env, f.m.intake);
    const PercentBreakdown ref = percentages(scale_to_totals(rate, 1.0));

    const CycleTrace c = constant_trace(21, 1973.0, 512.0);
    const CycleResult r = evaluate_cycle(c, env.T0_K, 0.2, f.m, f.mvm02);

    CHECK_THAT(r.totals.fuel, WithinRel(rate.fuel * 20.0, 1e-12));
    CHECK_THAT(r.percent.work, WithinRel(ref.work, 1e-12));
    CHECK_THAT(r.percent.heat, WithinRel(ref.heat, 1e-12));
    CHECK_THAT(r.percent.exhaust, WithinRel(ref.exhaust, 1e-12));
    CHECK_THAT(r.percent.combustion, WithinRel(ref.combustion, 1e-12));
    CHECK_THAT(r.percent.friction, WithinRel(ref.friction, 1e-12));
    CHECK_THAT(r.percent.others, WithinRel(ref.others, 1e-12));
    CHECK_THAT(r.percent.sum(), WithinAbs(100.0, 1e-6));
}

TEST_CASE("engine-off convention", "[sweep]") {
    const SweepFixture& f = fixture();
    const double t0 = f.m.env.T0_K;

    SECTION("zero-torque and below-idle samples contribute nothing") {
        // bookend the same constant block with off samples: the integral picks
        // up exactly the two extra full-weight intervals of the on block
        CycleTrace on = constant_trace(3, 1973.0, 512.0);
        CycleTrace padded = constant_trace(5, 1973.0, 512.0);
        padded.torque_Nm.front() = 0.0;
        padded.omega_radps.back() = rpm_to_radps(600.0);  // below mapped idle
        const CycleResult a = evaluate_cycle(on, t0, 0.2, f.m, f.mvm02);
        const CycleResult b = evaluate_cycle(padded, t0, 0.2, f.m, f.mvm02);
        CHECK_THAT(b.totals.fuel, WithinRel(a.totals.fuel * 3.0 / 2.0, 1e-12));
        CHECK_THAT(b.percent.work, WithinRel(a.percent.work, 1e-12));
    }
    SECTION("below-idle bookends behave exactly like parked bookends") {
        CycleTrace parked = constant_trace(6, 1973.0, 512.0);
        parked.omega_radps.front() = 0.0;
        parked.torque_Nm.front() = 0.0;
        CycleTrace creeping = parked;
        creeping.omega_radps.front() = rpm_to_radps(620.0);
        creeping.torque_Nm.front() = 80.0;
        const CycleResult a = evaluate_cycle(parked, t0, 0.2, f.m, f.mvm02);
        const CycleResult b = evaluate_cycle(creeping, t0, 0.2, f.m, f.mvm02);
        CHECK(a.totals.fuel == b.totals.fuel);
        CHECK(a.percent.work == b.percent.work);
    }
    SECTION("all-engine-off trace fails with the cycle name") {
        const CycleTrace off = constant_trace(10, 0.0, 0.0, "coasting");
        CHECK_THROWS_MATCHES(evaluate_cycle(off, t0, 0.2, f.m, f.mvm02), DomainError,
                             Catch::Matchers::MessageMatches(ContainsSubstring("coasting")));
    }
    SECTION("out-of-map sample is reported with its timestamp") {
        CycleTrace c = constant_trace(10, 1973.0, 512.0, "hotlap");
        c.torque_Nm[7] = 900.0;  // beyond the map box
        CHECK_THROWS_MATCHES(evaluate_cycle(c, t0, 0.2, f.m, f.mvm02), DomainError,
                             Catch::Matchers::MessageMatches(ContainsSubstring("t = 7 s")));
    }
}

TEST_CASE("evaluate_cycle invariances", "[sweep]") {
    const SweepFixture& f = fixture();
    const double t0 = f.m.env.T0_K;

    // an off-bookended cycle, so concatenation cannot create a seam artifact
    CycleTrace base = constant_trace(9, 1900.0, 400.0, "loop");
    base.torque_Nm.front() = 0.0;
    base.omega_radps.front() = 0.0;
    base.torque_Nm.back() = 0.0;
    base.omega_radps.back() = 0.0;
    for (std::size_t i = 1; i + 1 < base.size(); ++i)
        base.torque_Nm[i] = 250.0 + 40.0 * static_cast<double>(i);

    SECTION("repeating the cycle leaves the percentages unchanged") {
        CycleTrace twice = base;
        for (std::size_t i = 0; i < base.size(); ++i) {
            twice.t_s.push_back(twice.t_s.back() + 1.0);
            twice.omega_radps.push_back(base.omega_radps[i]);
            twice.torque_Nm.push_back(base.torque_Nm[i]);
        }
        const CycleResult one = evaluate_cycle(base, t0, 0.2, f.m, f.mvm02);
        const CycleResult two = evaluate_cycle(twice, t0, 0.2, f.m, f.mvm02);
        CHECK_THAT(two.totals.fuel, WithinRel(2.0 * one.totals.fuel, 1e-12));
        CHECK_THAT(two.percent.work, WithinRel(one.percent.work, 1e-12));
        CHECK_THAT(two.percent.others, WithinRel(one.percent.others, 1e-12));
    }
    SECTION("uniform time shift changes nothing") {
        CycleTrace shifted = base;
        for (double& t : shifted.t_s) t += 1000.0;
        const CycleResult a = evaluate_cycle(base, t0, 0.2, f.m, f.mvm02);
        const CycleResult b = evaluate_cycle(shifted, t0, 0.2, f.m, f.mvm02);
        CHECK(a.totals.fuel == b.totals.fuel);
        CHECK(a.totals.work == b.totals.work);
        CHECK(a.percent.heat == b.percent.heat);
    }
    SECTION("mean-value maps for the wrong EGR rate are rejected") {
        CHECK_THROWS_AS(evaluate_cycle(base, t0, 0.1, f.m, f.mvm02), ValidationError);
    }
}

TEST_CASE("run_sweep produces a complete deterministic cube", "[sweep]") {
    const SweepFixture& f = fixture();
    std::vector<CycleTrace> cycles;
    CycleTrace a = constant_trace(15, 1700.0, 350.0, "steady_a");
    a.torque_Nm.front() = a.torque_Nm.back() = 0.0;
    CycleTrace b = constant_trace(15, 2200.0, 550.0, "steady_b");
    b.torque_Nm.front() = b.torque_Nm.back() = 0.0;
    cycles.push_back(a);
    cycles.push_back(b);
    SweepGrid grid;
    grid.t0_K = {283.15, 293.15};
    grid.x_egr = {0.0, 0.2};

    SECTION("every combination is present, in deterministic order") {
        const SweepResult r = run_sweep(cycles, grid, f.m, 1);
        REQUIRE(r.entries.size() == 8);
        for (std::size_t ic = 0; ic < 2; ++ic)
            for (std::size_t it = 0; it < 2; ++it)
                for (std::size_t ix = 0; ix < 2; ++ix) {
                    const SweepEntry& e = r.at(ic, it, ix);
                    CHECK(e.cycle == cycles[ic].name);
                    CHECK(e.t0_K == grid.t0_K[it]);
                    CHECK(e.x_egr == grid.x_egr[ix]);
                    CHECK_THAT(e.percent.sum(), WithinAbs(100.0, 1e-6));
                }
    }
    SECTION("parallel and serial runs are byte-identical") {
        const std::string serial = to_csv(run_sweep(cycles, grid, f.m, 1));
        const std::string par = to_csv(run_sweep(cycles, grid, f.m, 4));
        const std::string par2 = to_csv(run_sweep(cycles, grid, f.m, 4));
        CHECK(serial == par);
        CHECK(par == par2);
    }
    SECTION("single-element grid reduces to evaluate_cycle") {
        SweepGrid point;
        point.t0_K = {293.15};
        point.x_egr = {0.2};
        const SweepResult r = run_sweep({a}, point, f.m, 1);
        REQUIRE(r.entries.size() == 1);
        const CycleResult direct = evaluate_cycle(a, 293.15, 0.2, f.m, f.mvm02);
        CHECK(r.entries[0].percent.work == direct.percent.work);
        CHECK(r.entries[0].totals.fuel == direct.totals.fuel);
    }
    SECTION("duplicate cycle names are rejected") {
        CycleTrace dup = b;
        dup.name = "steady_a";
        CHECK_THROWS_AS(run_sweep({a, dup}, grid, f.m, 1), ValidationError);
    }
    SECTION("no cycles is an error") {
        CHECK_THROWS_AS(run_sweep({}, grid, f.m, 1), ValidationError);
    }
    SECTION("config hash is stable and sensitive to calibration") {
        const SweepResult r1 = run_sweep({a}, grid, f.m, 1);
        const SweepResult r2 = run_sweep({a}, grid, f.m, 4);
        CHECK(r1.config_hash.size() == 16);
        CHECK(r1.config_hash == r2.config_hash);
        SweepModels warm = f.m;
        warm.mdl.engine.geometry.wall_temp_K += 10.0;
        warm.mdl.comb.htc_c1 += 1.0;  // keep the cylinder model consistent
        CHECK(config_fingerprint(warm, grid) != r1.config_hash);
    }
}

TEST_CASE("sweep CSV export", "[sweep]") {
    const SweepFixture& f = fixture();
    CycleTrace a = constant_trace(11, 1973.0, 512.0, "nominal");
    a.torque_Nm.front() = a.torque_Nm.back() = 0.0;
    SweepGrid grid;
    grid.t0_K = {263.15, 293.15};
    grid.x_egr = {0.0, 0.2};
    const SweepResult r = run_sweep({a}, grid, f.m, 0);
    const std::string csv = to_csv(r);

    SECTION("layout: provenance comment, header, six rows per cell") {
        CHECK(csv.rfind("# config " + r.config_hash + "\n", 0) == 0);
        CHECK_THAT(csv, ContainsSubstring("cycle,T0_K,xEGR,term,percent,signed_value_J\n"));
        std::size_t rows = 0;
        for (char ch : csv)
            if (ch == '\n') ++rows;
        CHECK(rows == 2 + 6 * r.entries.size());
        CHECK_THAT(csv, ContainsSubstring("nominal,263.15,0,work,"));
        CHECK_THAT(csv, ContainsSubstring("nominal,293.15,0.2,others,"));
    }
    SECTION("file save round trip") {
        TempDir tmp;
        save_sweep_csv(r, tmp.file("sweep.csv"));
        std::ifstream in(tmp.file("sweep.csv"));
        std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        CHECK(body == csv);
    }
    SECTION("unwritable path") {
        CHECK_THROWS_AS(save_sweep_csv(r, "/nonexistent_dir_zz/s.csv"), ValidationError);
    }
}

TEST_CASE("cross-cycle statistics", "[sweep]") {
    // hand-built cube: three cycles at one grid point
    SweepResult r;
    r.grid.t0_K = {293.15};
    r.grid.x_egr = {0.2};
    r.cycles = {"a", "b", "c"};
    for (double w : {30.0, 32.0, 34.0}) {
        SweepEntry e;
        e.cycle = "x";
        e.t0_K = 293.15;
        e.x_egr = 0.2;
        e.percent.work = w;
        e.percent.heat = 5.0;
        r.entries.push_back(e);
    }

    SECTION("hand-picked spread: mean 32, population SD") {
        const CycleStats s = cycle_stats(r, 293.15, 0.2);
        CHECK(s.n == 3);
        CHECK_THAT(s.mean.work, WithinRel(32.0, 1e-12));
        CHECK_THAT(s.sd.work, WithinRel(std::sqrt(8.0 / 3.0), 1e-12));
        CHECK_THAT(s.sd.work, WithinAbs(1.632993, 1e-6));
    }
    SECTION("identical cycles have zero spread") {
        const CycleStats s = cycle_stats(r, 293.15, 0.2);
        CHECK(s.sd.heat == 0.0);
        CHECK(s.mean.heat == 5.0);
    }
    SECTION("fewer than two cycles is an error") {
        r.entries.resize(1);
        CHECK_THROWS_AS(cycle_stats(r, 293.15, 0.2), ValidationError);
        CHECK_THROWS_AS(cycle_stats(r, 263.15, 0.2), ValidationError);  // no such point
    }
}

TEST_CASE("trend classification", "[sweep]") {
    // synthetic cube with known monotonicities: 3 T0 x 3 x_EGR, one cycle
    SweepResult r;
    r.grid.t0_K = {263.15, 283.15, 303.15};
    r.grid.x_egr = {0.0, 0.15, 0.3};
    r.cycles = {"toy"};
    for (std::size_t it = 0; it < 3; ++it) {
        for (std::size_t ix = 0; ix < 3; ++ix) {
            SweepEntry e;
            e.cycle = "toy";
            e.t0_K = r.grid.t0_K[it];
            e.x_egr = r.grid.x_egr[ix];
            const double t = static_cast<double>(it), x = static_cast<double>(ix);
            e.percent.work = 36.0 + 0.1 * t - 0.1 * x;          // flat but monotone
            e.percent.heat = 8.0 - 3.0 * t - 3.0 * x;           // decreasing both ways
            e.percent.exhaust = 15.0 + 4.0 * x - 4.0 * t;       // opposite directions
            e.percent.combustion = 30.0 + (ix == 1 ? 5.0 : 0.0);  // mixed along x
            r.entries.push_back(e);
        }
    }

    const TrendReport rep = trend_report(r);
    auto find = [&](const char* term, const char* axis) -> const TrendEntry& {
        for (const TrendEntry& e : rep.entries)
            if (e.term == term && e.axis == axis) return e;
        FAIL("missing entry");
        return rep.entries.front();
    };

    SECTION("directions") {
        CHECK(find("heat", "T0").direction == "decreasing");
        CHECK(find("heat", "xEGR").direction == "decreasing");
        CHECK(find("exhaust", "T0").direction == "decreasing");
        CHECK(find("exhaust", "xEGR").direction == "increasing");
        CHECK(find("work", "T0").direction == "increasing");
        CHECK(find("combustion", "xEGR").direction == "mixed");
    }
    SECTION("flat annotation reflects the whole-grid range") {
        CHECK(find("work", "T0").flat);
        CHECK_THAT(find("work", "T0").range_pp, WithinRel(0.4, 1e-12));
        CHECK_FALSE(find("heat", "T0").flat);
        CHECK(find("heat", "T0").range_pp == 12.0);
    }
    SECTION("report text carries one line per cycle, term, and axis") {
        const std::string text = to_string(rep);
        CHECK_THAT(text, ContainsSubstring("cycle,term,axis,direction,flat,range_pp"));
        CHECK_THAT(text, ContainsSubstring("toy,heat,T0,decreasing,no,12"));
    }
    SECTION("degenerate grid is rejected") {
        SweepResult thin = r;
        thin.grid.x_egr = {0.2};
        CHECK_THROWS_AS(trend_report(thin), ValidationError);
    }
}

TEST_CASE("shipped demo cycles", "[sweep]") {
    std::vector<CycleTrace> cycles;
    for (const char* n : {"highway.csv", "mixed.csv", "rolling.csv", "urban.csv"})
        cycles.push_back(load_cycle_trace(data_cycle(n)));

    SECTION("all four load, bookended engine-off, distinct statistics") {
        for (const CycleTrace& c : cycles) {
            CHECK(c.size() == 600);
            CHECK(c.torque_Nm.front() == 0.0);
            CHECK(c.torque_Nm.back() == 0.0);
        }
        // mean on-torque separates the profiles
        std::vector<double> mean_tq;
        for (const CycleTrace& c : cycles) {
            double acc = 0.0;
            std::size_t n = 0;
            for (std::size_t i = 0; i < c.size(); ++i)
                if (c.torque_Nm[i] > 0.0) acc += c.torque_Nm[i], ++n;
            mean_tq.push_back(acc / static_cast<double>(n));
        }
        for (std::size_t i = 0; i < mean_tq.size(); ++i)
            for (std::size_t j = i + 1; j < mean_tq.size(); ++j)
                CHECK(std::abs(mean_tq[i] - mean_tq[j]) > 20.0);
    }
    SECTION("published trends hold on a reduced grid") {
        const SweepFixture& f = fixture();
        SweepGrid grid;
        grid.t0_K = {273.15, 293.15, 313.15};
        grid.x_egr = {0.0, 0.15, 0.3};
        const SweepResult r = run_sweep(cycles, grid, f.m, 0);
        const TrendReport rep = trend_report(r);
        for (const TrendEntry& e : rep.entries) {
            if (e.term == "heat") CHECK(e.direction == "decreasing");
            if (e.term == "exhaust" && e.axis == "xEGR") CHECK(e.direction == "increasing");
            if (e.term == "exhaust" && e.axis == "T0") CHECK(e.direction == "decreasing");
            if (e.term == "combustion") CHECK(e.direction == "increasing");
            if (e.term == "work") CHECK(e.flat);
            if (e.term == "friction") CHECK(e.flat);
        }
        const CycleStats st = cycle_stats(r, 293.15, 0.15);
        CHECK(st.n == 4);
        CHECK(st.sd.work > 0.0);
    }
}
