#pragma once

// JSON run configuration: every calibration knob with its built-in default,
// overridable field by field.  Unknown keys are rejected so typos cannot
// silently fall back to defaults.

#include <exeng/sweep.hpp>

#include <json.hpp>

#include <fstream>
#include <initializer_list>
#include <string>

namespace exeng::cli {

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
    CylinderModel mdl;
    SynthMapParams synth;
    ReferenceState env;
    IntakeState intake;
};

namespace detail {

using nlohmann::json;

inline void expect_keys(const json& j, std::initializer_list<const char*> allowed,
                        const std::string& where) {
    if (!j.is_object()) throw ValidationError("config: " + where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
    }
}

inline void read(const json& j, const char* key, double& out, const std::string& where) {
    if (!j.contains(key)) return;
    if (!j[key].is_number())
        throw ValidationError("config: " + where + "." + key + " must be a number");
    out = j[key].get<double>();
}

inline void read(const json& j, const char* key, int& out, const std::string& where) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer())
        throw ValidationError("config: " + where + "." + key + " must be an integer");
    out = j[key].get<int>();
}

inline void read(const json& j, const char* key, std::size_t& out, const std::string& where) {
    int v = static_cast<int>(out);
    read(j, key, v, where);
    if (v < 0) throw ValidationError("config: " + where + "." + key + " must be non-negative");
    out = static_cast<std::size_t>(v);
}

} // namespace detail

inline RunConfig default_run_config() { return RunConfig{}; }

inline RunConfig load_run_config(const std::string& path) {
    using detail::expect_keys;
    using detail::read;
    using nlohmann::json;

    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config: " + path + ": " + e.what());
    }

    expect_keys(j,
                {"schema_version", "reference", "intake", "engine", "fuel", "combustion", "synth",
                 "thermo_override_csv"},
                "top level");
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
        throw ValidationError("config: schema_version (integer) is required");
    if (j["schema_version"].get<int>() != kSchemaVersion)
        throw ValidationError("config: unsupported schema_version " +
                              j["schema_version"].dump() + " (expected " +
                              std::to_string(kSchemaVersion) + ")");

    RunConfig rc;

    if (j.contains("thermo_override_csv")) {
        if (!j["thermo_override_csv"].is_string())
            throw ValidationError("config: thermo_override_csv must be a string path");
        rc.mdl.props = load_property_table(j["thermo_override_csv"].get<std::string>());
    }

    // fuel depends on the property table, so rebuild it after any override
    FuelThermo seed;  // defaults
    if (j.contains("fuel")) {
        const json& f = j["fuel"];
        expect_keys(f, {"x", "y", "lhv_J_per_kg", "s_ref_J_per_molK", "cp_J_per_molK"}, "fuel");
        read(f, "x", seed.x, "fuel");
        read(f, "y", seed.y, "fuel");
        read(f, "lhv_J_per_kg", seed.lhv_J_per_kg, "fuel");
        read(f, "s_ref_J_per_molK", seed.s_ref_J_per_molK, "fuel");
        read(f, "cp_J_per_molK", seed.cp_J_per_molK, "fuel");
    }
    rc.mdl.fuel = make_fuel(rc.mdl.props, seed.x, seed.y, seed.lhv_J_per_kg,
                            seed.s_ref_J_per_molK, seed.cp_J_per_molK);

    if (j.contains("reference")) {
        const json& r = j["reference"];
        expect_keys(r, {"T0_K", "P0_Pa", "composition"}, "reference");
        read(r, "T0_K", rc.env.T0_K, "reference");
        read(r, "P0_Pa", rc.env.P0_Pa, "reference");
        if (r.contains("composition")) {
            const json& c = r["composition"];
            expect_keys(c, {"N2", "CO2", "H2O", "O2"}, "reference.composition");
            for (const auto& [name, sp] : {std::pair{"N2", Species::N2}, {"CO2", Species::CO2},
                                           {"H2O", Species::H2O}, {"O2", Species::O2}}) {
                if (!c.contains(name))
                    throw ValidationError(std::string("config: reference.composition.") + name +
                                          " is required when composition is given");
                double v = rc.env.f0[sp];
                read(c, name, v, "reference.composition");
                rc.env.f0[sp] = v;
            }
        }
    }

    if (j.contains("intake")) {
        const json& i = j["intake"];
        expect_keys(i, {"TI_K", "PI_Pa"}, "intake");
        read(i, "TI_K", rc.intake.TI_K, "intake");
        read(i, "PI_Pa", rc.intake.PI_Pa, "intake");
    }

    if (j.contains("engine")) {
        const json& e = j["engine"];
        expect_keys(e, {"geometry", "fmep", "breathing"}, "engine");
        if (e.contains("geometry")) {
            const json& g = e["geometry"];
            expect_keys(g,
                        {"n_cyl", "displacement_m3", "compression_ratio", "bore_m", "stroke_m",
                         "conrod_ratio", "wall_temp_K"},
                        "engine.geometry");
            EngineGeometry& out = rc.mdl.engine.geometry;
            read(g, "n_cyl", out.n_cyl, "engine.geometry");
            read(g, "displacement_m3", out.displacement_m3, "engine.geometry");
            read(g, "compression_ratio", out.compression_ratio, "engine.geometry");
            read(g, "bore_m", out.bore_m, "engine.geometry");
            read(g, "stroke_m", out.stroke_m, "engine.geometry");
            read(g, "conrod_ratio", out.conrod_ratio, "engine.geometry");
            read(g, "wall_temp_K", out.wall_temp_K, "engine.geometry");
        }
        if (e.contains("fmep")) {
            const json& f = e["fmep"];
            expect_keys(f, {"c1_kPa", "c2_kPa_s", "c3_kPa_s2_m2"}, "engine.fmep");
            read(f, "c1_kPa", rc.mdl.engine.fmep.c1_kPa, "engine.fmep");
            read(f, "c2_kPa_s", rc.mdl.engine.fmep.c2_kPa_s, "engine.fmep");
            read(f, "c3_kPa_s2_m2", rc.mdl.engine.fmep.c3_kPa_s2_m2, "engine.fmep");
        }
        if (e.contains("breathing")) {
            const json& b = e["breathing"];
            expect_keys(b, {"eta_vol", "boost_slope_per_Pa", "boost_threshold_Pa"},
                        "engine.breathing");
            read(b, "eta_vol", rc.mdl.engine.breathing.eta_vol, "engine.breathing");
            read(b, "boost_slope_per_Pa", rc.mdl.engine.breathing.boost_slope_per_Pa,
                 "engine.breathing");
            read(b, "boost_threshold_Pa", rc.mdl.engine.breathing.boost_threshold_Pa,
                 "engine.breathing");
        }
    }

    if (j.contains("combustion")) {
        const json& c = j["combustion"];
        expect_keys(c,
                    {"wiebe_a", "wiebe_m", "soc_deg", "duration_deg", "window_lo_deg",
                     "window_hi_deg", "ivc_deg", "evo_deg", "step_deg", "htc_c1", "htc_c2"},
                    "combustion");
        CombustionParams& out = rc.mdl.comb;
        read(c, "wiebe_a", out.wiebe_a, "combustion");
        read(c, "wiebe_m", out.wiebe_m, "combustion");
        read(c, "soc_deg", out.soc_deg, "combustion");
        read(c, "duration_deg", out.duration_deg, "combustion");
        read(c, "window_lo_deg", out.window_lo_deg, "combustion");
        read(c, "window_hi_deg", out.window_hi_deg, "combustion");
        read(c, "ivc_deg", out.ivc_deg, "combustion");
        read(c, "evo_deg", out.evo_deg, "combustion");
        read(c, "step_deg", out.step_deg, "combustion");
        read(c, "htc_c1", out.htc_c1, "combustion");
        read(c, "htc_c2", out.htc_c2, "combustion");
    }

    if (j.contains("synth")) {
        const json& s = j["synth"];
        expect_keys(s, {"idle_rpm", "max_rpm", "peak_power_W", "n_speed", "n_torque", "willans",
                        "texh"},
                    "synth");
        read(s, "idle_rpm", rc.synth.idle_rpm, "synth");
        read(s, "max_rpm", rc.synth.max_rpm, "synth");
        read(s, "peak_power_W", rc.synth.peak_power_W, "synth");
        read(s, "n_speed", rc.synth.n_speed, "synth");
        read(s, "n_torque", rc.synth.n_torque, "synth");
        if (s.contains("willans")) {
            const json& w = s["willans"];
            expect_keys(w, {"eta_peak", "omega_peak_radps", "curvature_per_radps2", "loss_factor"},
                        "synth.willans");
            read(w, "eta_peak", rc.synth.willans.eta_peak, "synth.willans");
            read(w, "omega_peak_radps", rc.synth.willans.omega_peak_radps, "synth.willans");
            read(w, "curvature_per_radps2", rc.synth.willans.curvature_per_radps2,
                 "synth.willans");
            read(w, "loss_factor", rc.synth.willans.loss_factor, "synth.willans");
        }
        if (s.contains("texh")) {
            const json& t = s["texh"];
            expect_keys(t, {"base_K", "per_bmep_K_per_Pa", "per_speed_K_per_radps",
                            "omega_idle_radps"},
                        "synth.texh");
            read(t, "base_K", rc.synth.texh.base_K, "synth.texh");
            read(t, "per_bmep_K_per_Pa", rc.synth.texh.per_bmep_K_per_Pa, "synth.texh");
            read(t, "per_speed_K_per_radps", rc.synth.texh.per_speed_K_per_radps, "synth.texh");
            read(t, "omega_idle_radps", rc.synth.texh.omega_idle_radps, "synth.texh");
        }
    }

    validate_engine(rc.mdl.engine);
    validate_combustion(rc.mdl.comb);
    validate_reference(rc.env);
    validate_intake(rc.intake);
    return rc;
}

} // namespace exeng::cli
