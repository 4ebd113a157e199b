#pragma once

// Scenario configuration: JSON text -> validated ScenarioConfig. Unknown keys
// are rejected with their full path; exactly one of "model" (effective
// parameters) or "lab" (laboratory parameters, linearized through the
// mean-field map) must be present.

#include <json.hpp>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nrb/errors.hpp"
#include "nrb/hilbert.hpp"
#include "nrb/model.hpp"

namespace nrb {

enum class ScenarioKind {
    spectrum,
    closed_dynamics,
    open_dynamics,
    trajectory,
    correlation_sweep,
    witness_sweep,
    resonance_table,
};

inline const char* scenario_name(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::spectrum: return "spectrum";
        case ScenarioKind::closed_dynamics: return "closed_dynamics";
        case ScenarioKind::open_dynamics: return "open_dynamics";
        case ScenarioKind::trajectory: return "trajectory";
        case ScenarioKind::correlation_sweep: return "correlation_sweep";
        case ScenarioKind::witness_sweep: return "witness_sweep";
        case ScenarioKind::resonance_table: return "resonance_table";
    }
    throw InvalidArgument("scenario_name: unknown kind");
}

inline ScenarioKind scenario_of(const std::string& name) {
    for (ScenarioKind k :
         {ScenarioKind::spectrum, ScenarioKind::closed_dynamics, ScenarioKind::open_dynamics,
          ScenarioKind::trajectory, ScenarioKind::correlation_sweep, ScenarioKind::witness_sweep,
          ScenarioKind::resonance_table})
        if (name == scenario_name(k)) return k;
    throw ConfigError("unknown scenario '" + name + "'");
}

// How the working detuning is chosen for kappa sweeps and dynamics.
enum class DetuningMode { explicit_value, closed_form, effective_resonance };

struct DetuningSpec {
    DetuningMode mode = DetuningMode::effective_resonance;
    ResonanceKind kind = ResonanceKind::photon_magnon;
    double value = 0.0; // used by explicit_value
};

struct InitialStateSpec {
    bool dressed_vacuum = true; // |0,0,0;+> built from the dressed pair
    BasisLabels labels{0, 0, 0, 0}; // used when dressed_vacuum is false
};

struct SeedSpec {
    uint64_t seed0 = 1;
    int n_trajectories = 1;
};

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::spectrum;
    SpaceDescriptor space{3, 2, 2};
    ModelParams model; // effective parameters (resolved from lab when from_lab)
    bool from_lab = false;
    LabParams lab;
    std::vector<DriveSide> sides{DriveSide::left};
    std::vector<double> detuning_grid; // spectrum
    std::vector<double> kappa_grid;    // correlation/witness sweeps
    std::vector<double> time_grid;     // dynamics/trajectory
    std::vector<double> tau_grid;      // delayed correlations (optional)
    DetuningSpec detuning;
    InitialStateSpec initial_state;
    SeedSpec seeds;
    std::string raw_text; // verbatim config for hashing
};

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void config_fail(const std::string& path, const std::string& what) {
    throw ConfigError("config error at '" + path + "': " + what);
}

inline void require_keys(const json& obj, const std::string& path,
                         const std::set<std::string>& allowed) {
    if (!obj.is_object()) config_fail(path, "expected an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) config_fail(path + "/" + key, "unknown key");
}

inline double get_number(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) config_fail(path + "/" + key, "missing required key");
    if (!obj.at(key).is_number()) config_fail(path + "/" + key, "expected a number");
    return obj.at(key).get<double>();
}

inline double get_number_or(const json& obj, const std::string& path, const std::string& key,
                            double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number()) config_fail(path + "/" + key, "expected a number");
    return obj.at(key).get<double>();
}

inline int get_int_or(const json& obj, const std::string& path, const std::string& key,
                      int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number_integer()) config_fail(path + "/" + key, "expected an integer");
    return obj.at(key).get<int>();
}

inline std::string get_string(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) config_fail(path + "/" + key, "missing required key");
    if (!obj.at(key).is_string()) config_fail(path + "/" + key, "expected a string");
    return obj.at(key).get<std::string>();
}

inline std::vector<double> parse_grid(const json& g, const std::string& path) {
    if (g.is_array()) {
        std::vector<double> v;
        for (size_t i = 0; i < g.size(); ++i) {
            if (!g[i].is_number()) config_fail(path + "[" + std::to_string(i) + "]", "expected a number");
            v.push_back(g[i].get<double>());
        }
        if (v.empty()) config_fail(path, "grid must be nonempty");
        return v;
    }
    require_keys(g, path, {"start", "stop", "count"});
    double start = get_number(g, path, "start");
    double stop = get_number(g, path, "stop");
    int count = get_int_or(g, path, "count", -1);
    if (count < 1) config_fail(path + "/count", "need count >= 1");
    if (count == 1 && start != stop) config_fail(path, "count 1 requires start == stop");
    std::vector<double> v(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i)
        v[size_t(i)] = count == 1 ? start : start + (stop - start) * double(i) / double(count - 1);
    return v;
}

inline ModelParams parse_model(const json& m, const std::string& path) {
    require_keys(m, path,
                 {"delta_ad", "delta_sigma_a", "omega_b", "omega_m", "delta_f_abs", "lambda_ab",
                  "lambda_am", "lambda_a_sigma", "xi", "gamma", "kappa", "kappa_a", "kappa_b",
                  "kappa_m"});
    ModelParams p;
    p.delta_ad = get_number_or(m, path, "delta_ad", 0.0);
    p.delta_sigma_a = get_number(m, path, "delta_sigma_a");
    p.omega_b = get_number_or(m, path, "omega_b", 1.0);
    p.omega_m = get_number(m, path, "omega_m");
    double df = get_number(m, path, "delta_f_abs");
    if (df < 0) config_fail(path + "/delta_f_abs", "must be >= 0 (sign comes from drive_side)");
    p.delta_f = df;
    p.lambda_ab = get_number(m, path, "lambda_ab");
    p.lambda_am = get_number(m, path, "lambda_am");
    p.lambda_a_sigma = get_number(m, path, "lambda_a_sigma");
    p.xi = get_number(m, path, "xi");
    p.gamma = get_number(m, path, "gamma");
    if (p.gamma < 0) config_fail(path + "/gamma", "must be >= 0");
    if (m.contains("kappa")) {
        double k = get_number(m, path, "kappa");
        if (k < 0) config_fail(path + "/kappa", "must be >= 0");
        p.set_kappa(k);
    }
    p.kappa_a = get_number_or(m, path, "kappa_a", p.kappa_a);
    p.kappa_b = get_number_or(m, path, "kappa_b", p.kappa_b);
    p.kappa_m = get_number_or(m, path, "kappa_m", p.kappa_m);
    if (p.kappa_a < 0 || p.kappa_b < 0 || p.kappa_m < 0)
        config_fail(path, "kappa values must be >= 0");
    try {
        p.validate();
    } catch (const Error& e) {
        config_fail(path, e.what());
    }
    return p;
}

inline LabParams parse_lab(const json& m, const std::string& path) {
    require_keys(m, path,
                 {"omega_a", "omega_sigma", "omega_b", "omega_m", "omega_d", "delta_f_abs",
                  "lambda_ab_bare", "lambda_am_bare", "lambda_a_sigma", "xi_d", "xi_p", "gamma",
                  "kappa", "kappa_a", "kappa_b", "kappa_m", "geometry"});
    LabParams p;
    p.omega_a = get_number(m, path, "omega_a");
    p.omega_sigma = get_number(m, path, "omega_sigma");
    p.omega_b = get_number_or(m, path, "omega_b", 1.0);
    p.omega_m = get_number(m, path, "omega_m");
    p.omega_d = get_number(m, path, "omega_d");
    p.lambda_ab_bare = get_number(m, path, "lambda_ab_bare");
    p.lambda_am_bare = get_number(m, path, "lambda_am_bare");
    p.lambda_a_sigma = get_number(m, path, "lambda_a_sigma");
    p.xi_d = get_number(m, path, "xi_d");
    p.xi_p = get_number_or(m, path, "xi_p", 0.0);
    p.gamma = get_number(m, path, "gamma");
    if (m.contains("kappa")) {
        double k = get_number(m, path, "kappa");
        p.kappa_a = p.kappa_b = p.kappa_m = k;
    }
    p.kappa_a = get_number_or(m, path, "kappa_a", p.kappa_a);
    p.kappa_b = get_number_or(m, path, "kappa_b", p.kappa_b);
    p.kappa_m = get_number_or(m, path, "kappa_m", p.kappa_m);

    bool has_df = m.contains("delta_f_abs");
    bool has_geom = m.contains("geometry");
    if (has_df == has_geom)
        config_fail(path, "provide exactly one of 'delta_f_abs' or 'geometry'");
    if (has_df) {
        double df = get_number(m, path, "delta_f_abs");
        if (df < 0) config_fail(path + "/delta_f_abs", "must be >= 0");
        p.delta_f = df;
    } else {
        const json& g = m.at("geometry");
        std::string gp = path + "/geometry";
        require_keys(g, gp,
                     {"radius", "refractive_index", "wavelength", "dispersion", "spin_rate"});
        ResonatorGeometry geom;
        geom.radius = get_number(g, gp, "radius");
        geom.refractive_index = get_number(g, gp, "refractive_index");
        geom.wavelength = get_number(g, gp, "wavelength");
        geom.dispersion = get_number_or(g, gp, "dispersion", 0.0);
        geom.omega_a = p.omega_a;
        double spin = get_number(g, gp, "spin_rate");
        p.delta_f = std::abs(fizeau_shift(geom, spin, DriveSide::left));
    }
    try {
        p.validate();
    } catch (const Error& e) {
        config_fail(path, e.what());
    }
    return p;
}

inline DriveSide parse_side(const std::string& s, const std::string& path) {
    if (s == "left") return DriveSide::left;
    if (s == "right") return DriveSide::right;
    config_fail(path, "expected 'left' or 'right', got '" + s + "'");
}

inline ResonanceKind parse_kind(const std::string& s, const std::string& path) {
    if (s == "photon_phonon" || s == "ab") return ResonanceKind::photon_phonon;
    if (s == "photon_magnon" || s == "am") return ResonanceKind::photon_magnon;
    config_fail(path, "expected 'photon_phonon' or 'photon_magnon', got '" + s + "'");
}

} // namespace detail

inline ScenarioConfig parse_config(const std::string& text) {
    detail::json root;
    try {
        root = detail::json::parse(text);
    } catch (const detail::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    detail::require_keys(root, "",
                         {"scenario", "space", "model", "lab", "drive_sides", "drive_side",
                          "grids", "detuning", "initial_state", "seeds"});

    ScenarioConfig cfg;
    cfg.raw_text = text;
    cfg.kind = scenario_of(detail::get_string(root, "", "scenario"));

    if (root.contains("space")) {
        const auto& s = root.at("space");
        detail::require_keys(s, "/space", {"photon_cutoff", "phonon_cutoff", "magnon_cutoff"});
        int pc = detail::get_int_or(s, "/space", "photon_cutoff", 3);
        int bc = detail::get_int_or(s, "/space", "phonon_cutoff", 2);
        int mc = detail::get_int_or(s, "/space", "magnon_cutoff", 2);
        try {
            cfg.space = build_space(pc, bc, mc);
        } catch (const Error& e) {
            detail::config_fail("/space", e.what());
        }
    }

    bool has_model = root.contains("model");
    bool has_lab = root.contains("lab");
    if (has_model == has_lab)
        throw ConfigError("config error at '': provide exactly one of 'model' or 'lab'");
    if (has_model) {
        cfg.model = detail::parse_model(root.at("model"), "/model");
    } else {
        cfg.from_lab = true;
        cfg.lab = detail::parse_lab(root.at("lab"), "/lab");
        MeanFieldSolution mf = mean_field_steady(cfg.lab);
        cfg.model = mf.effective;
        cfg.model.delta_f = std::abs(cfg.model.delta_f);
    }

    if (root.contains("drive_sides") && root.contains("drive_side"))
        throw ConfigError("config error at '': provide only one of 'drive_side'/'drive_sides'");
    if (root.contains("drive_side")) {
        cfg.sides = {detail::parse_side(detail::get_string(root, "", "drive_side"), "/drive_side")};
    } else if (root.contains("drive_sides")) {
        const auto& arr = root.at("drive_sides");
        if (!arr.is_array() || arr.empty())
            detail::config_fail("/drive_sides", "expected a nonempty array");
        cfg.sides.clear();
        for (size_t i = 0; i < arr.size(); ++i) {
            if (!arr[i].is_string())
                detail::config_fail("/drive_sides[" + std::to_string(i) + "]", "expected a string");
            cfg.sides.push_back(detail::parse_side(arr[i].get<std::string>(),
                                                   "/drive_sides[" + std::to_string(i) + "]"));
        }
    }

    if (root.contains("grids")) {
        const auto& g = root.at("grids");
        detail::require_keys(g, "/grids", {"detuning", "kappa", "time", "tau"});
        if (g.contains("detuning")) cfg.detuning_grid = detail::parse_grid(g.at("detuning"), "/grids/detuning");
        if (g.contains("kappa")) {
            cfg.kappa_grid = detail::parse_grid(g.at("kappa"), "/grids/kappa");
            for (double k : cfg.kappa_grid)
                if (k < 0) detail::config_fail("/grids/kappa", "kappa values must be >= 0");
        }
        if (g.contains("time")) {
            cfg.time_grid = detail::parse_grid(g.at("time"), "/grids/time");
            for (size_t i = 1; i < cfg.time_grid.size(); ++i)
                if (cfg.time_grid[i] < cfg.time_grid[i - 1])
                    detail::config_fail("/grids/time", "must be ascending");
        }
        if (g.contains("tau")) {
            cfg.tau_grid = detail::parse_grid(g.at("tau"), "/grids/tau");
            for (size_t i = 1; i < cfg.tau_grid.size(); ++i)
                if (cfg.tau_grid[i] < cfg.tau_grid[i - 1])
                    detail::config_fail("/grids/tau", "must be ascending");
        }
    }

    if (root.contains("detuning")) {
        const auto& d = root.at("detuning");
        detail::require_keys(d, "/detuning", {"mode", "resonance", "value"});
        std::string mode = detail::get_string(d, "/detuning", "mode");
        if (mode == "explicit") {
            cfg.detuning.mode = DetuningMode::explicit_value;
            cfg.detuning.value = detail::get_number(d, "/detuning", "value");
        } else if (mode == "closed_form" || mode == "effective_resonance") {
            cfg.detuning.mode = mode == "closed_form" ? DetuningMode::closed_form
                                                      : DetuningMode::effective_resonance;
            cfg.detuning.kind = detail::parse_kind(
                detail::get_string(d, "/detuning", "resonance"), "/detuning/resonance");
            if (d.contains("value"))
                detail::config_fail("/detuning/value", "'value' only applies to mode 'explicit'");
        } else {
            detail::config_fail("/detuning/mode",
                                "expected 'explicit', 'closed_form', or 'effective_resonance'");
        }
    }

    if (root.contains("initial_state")) {
        const auto& s = root.at("initial_state");
        detail::require_keys(s, "/initial_state", {"kind", "atom", "n_a", "n_b", "n_m"});
        std::string kind = detail::get_string(s, "/initial_state", "kind");
        if (kind == "dressed_vacuum") {
            cfg.initial_state.dressed_vacuum = true;
        } else if (kind == "basis") {
            cfg.initial_state.dressed_vacuum = false;
            cfg.initial_state.labels.atom = detail::get_int_or(s, "/initial_state", "atom", 0);
            cfg.initial_state.labels.n_a = detail::get_int_or(s, "/initial_state", "n_a", 0);
            cfg.initial_state.labels.n_b = detail::get_int_or(s, "/initial_state", "n_b", 0);
            cfg.initial_state.labels.n_m = detail::get_int_or(s, "/initial_state", "n_m", 0);
        } else {
            detail::config_fail("/initial_state/kind", "expected 'dressed_vacuum' or 'basis'");
        }
    }

    if (root.contains("seeds")) {
        const auto& s = root.at("seeds");
        detail::require_keys(s, "/seeds", {"seed0", "n_trajectories"});
        if (s.contains("seed0")) {
            if (!s.at("seed0").is_number_unsigned())
                detail::config_fail("/seeds/seed0", "expected an unsigned integer");
            cfg.seeds.seed0 = s.at("seed0").get<uint64_t>();
        }
        cfg.seeds.n_trajectories = detail::get_int_or(s, "/seeds", "n_trajectories", 1);
        if (cfg.seeds.n_trajectories < 1)
            detail::config_fail("/seeds/n_trajectories", "must be >= 1");
    }

    // scenario-specific requirements
    switch (cfg.kind) {
        case ScenarioKind::spectrum:
            if (cfg.detuning_grid.empty())
                throw ConfigError("config error at '/grids/detuning': required for 'spectrum'");
            break;
        case ScenarioKind::closed_dynamics:
        case ScenarioKind::open_dynamics:
        case ScenarioKind::trajectory:
            if (cfg.time_grid.empty())
                throw ConfigError("config error at '/grids/time': required for dynamics scenarios");
            break;
        case ScenarioKind::correlation_sweep:
        case ScenarioKind::witness_sweep:
            if (cfg.kappa_grid.empty())
                throw ConfigError("config error at '/grids/kappa': required for sweep scenarios");
            break;
        case ScenarioKind::resonance_table:
            break;
    }
    return cfg;
}

} // namespace nrb
