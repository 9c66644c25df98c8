#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "dicke/classical.hpp"
#include "dicke/io.hpp"
#include "dicke/model.hpp"
#include "dicke/phase_space.hpp"
#include "dicke/quantum_dynamics.hpp"
#include "dicke/scan.hpp"
#include "dicke/sp_analytic.hpp"

// Run configuration: one JSON file per job, schema-checked strictly (every
// unknown key is an error naming the key) with physical invariants re-checked
// after parsing. CLI flags may override individual fields afterwards.

namespace dicke {

// phase point given either as surface labels (resolved against the surface
// energy through the q+ branch) or as explicit coordinates
struct StateSpec {
    bool on_surface = true;
    double phi = 0.0;
    double jz_tilde = 0.0;
    PhasePoint point;  // used when on_surface is false

    PhasePoint resolve(double surface_energy, const ModelParams& params) const {
        if (!on_surface) return point;
        PoincareSurface surface{surface_energy};
        const auto pt = surface.point_at(phi, jz_tilde, params);
        if (!pt)
            throw std::invalid_argument(
                "state: (phi, jz_tilde) = (" + io::format_g17(phi) + ", " +
                io::format_g17(jz_tilde) + ") lies outside the energy shell");
        return *pt;
    }
};

struct TimesConfig {
    double t_max = 0.0;
    int n_points = 2000;
};

struct IoConfig {
    std::string output_dir = "out";
    std::string cache_dir = "cache";
    bool plot = false;
};

struct RunConfig {
    ModelParams model;
    int n_max = 0;  // 0 selects the truncation automatically from the state
    std::optional<double> surface_energy;
    std::optional<StateSpec> state;
    std::optional<TimesConfig> times;
    GridSpec grid;
    BenettinOptions dynamics;
    int n_crossings = 200;
    double sp_min_capture = 0.99;
    DetectOptions detect;
    int spectrum_n_levels = 0;  // 0 reports every level
    double spectrum_tail_tol = 1e-6;
    std::uint64_t seed = 1;
    int threads = 1;
    IoConfig io;
};

namespace detail {

inline void check_keys(const nlohmann::json& obj, const std::string& scope,
                       std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw std::invalid_argument("config: unknown key '" + scope + item.key() + "'");
    }
}

inline double require_number(const nlohmann::json& obj, const std::string& scope,
                             const char* key) {
    if (!obj.contains(key))
        throw std::invalid_argument("config: missing required key '" + scope + key + "'");
    if (!obj[key].is_number())
        throw std::invalid_argument("config: key '" + scope + key + "' must be a number");
    return obj[key].get<double>();
}

inline double number_or(const nlohmann::json& obj, const std::string& scope, const char* key,
                        double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number())
        throw std::invalid_argument("config: key '" + scope + key + "' must be a number");
    return obj[key].get<double>();
}

inline int int_or(const nlohmann::json& obj, const std::string& scope, const char* key,
                  int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer())
        throw std::invalid_argument("config: key '" + scope + key + "' must be an integer");
    return obj[key].get<int>();
}

inline std::string string_or(const nlohmann::json& obj, const std::string& scope,
                             const char* key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string())
        throw std::invalid_argument("config: key '" + scope + key + "' must be a string");
    return obj[key].get<std::string>();
}

}  // namespace detail

inline RunConfig parse_config(const nlohmann::json& root) {
    using detail::check_keys;
    using detail::int_or;
    using detail::number_or;
    using detail::require_number;
    using detail::string_or;

    if (!root.is_object()) throw std::invalid_argument("config: top level must be an object");
    check_keys(root, "",
               {"model", "basis", "surface", "state", "times", "grid", "dynamics", "sections",
                "sp", "spectrum", "seed", "threads", "io"});

    RunConfig cfg;

    if (!root.contains("model"))
        throw std::invalid_argument("config: missing required key 'model'");
    const auto& model = root["model"];
    check_keys(model, "model.", {"omega", "omega0", "gamma", "j"});
    cfg.model.omega = require_number(model, "model.", "omega");
    cfg.model.omega0 = require_number(model, "model.", "omega0");
    cfg.model.gamma = require_number(model, "model.", "gamma");
    cfg.model.j = require_number(model, "model.", "j");
    cfg.model.validate();

    if (root.contains("basis")) {
        const auto& basis = root["basis"];
        check_keys(basis, "basis.", {"n_max"});
        cfg.n_max = int_or(basis, "basis.", "n_max", 0);
        if (cfg.n_max < 0) throw std::invalid_argument("config: basis.n_max must be >= 0");
    }

    if (root.contains("surface")) {
        const auto& surface = root["surface"];
        check_keys(surface, "surface.", {"energy", "energy_per_j"});
        if (surface.contains("energy") == surface.contains("energy_per_j"))
            throw std::invalid_argument(
                "config: surface needs exactly one of 'energy' or 'energy_per_j'");
        cfg.surface_energy = surface.contains("energy")
                                 ? require_number(surface, "surface.", "energy")
                                 : require_number(surface, "surface.", "energy_per_j") *
                                       cfg.model.j;
    }

    if (root.contains("state")) {
        const auto& state = root["state"];
        StateSpec spec;
        if (state.contains("q") || state.contains("p") || state.contains("jz")) {
            check_keys(state, "state.", {"q", "p", "jz", "phi"});
            spec.on_surface = false;
            spec.point.q = require_number(state, "state.", "q");
            spec.point.p = require_number(state, "state.", "p");
            spec.point.jz = require_number(state, "state.", "jz");
            spec.point.phi = require_number(state, "state.", "phi");
            validate_phase_point(spec.point, cfg.model);
        } else {
            check_keys(state, "state.", {"phi", "jz_tilde"});
            spec.on_surface = true;
            spec.phi = require_number(state, "state.", "phi");
            spec.jz_tilde = require_number(state, "state.", "jz_tilde");
            if (!(spec.jz_tilde > -1.0 && spec.jz_tilde < 1.0))
                throw std::invalid_argument("config: state.jz_tilde must lie in (-1, 1)");
        }
        cfg.state = spec;
    }

    if (root.contains("times")) {
        const auto& times = root["times"];
        check_keys(times, "times.", {"t_max", "n_points"});
        TimesConfig tc;
        tc.t_max = require_number(times, "times.", "t_max");
        tc.n_points = int_or(times, "times.", "n_points", 2000);
        if (!(tc.t_max > 0.0) || tc.n_points < 2)
            throw std::invalid_argument("config: times needs t_max > 0 and n_points >= 2");
        cfg.times = tc;
    }

    if (root.contains("grid")) {
        const auto& grid = root["grid"];
        check_keys(grid, "grid.", {"n_phi", "n_jz"});
        cfg.grid.n_phi = int_or(grid, "grid.", "n_phi", 100);
        cfg.grid.n_jz = int_or(grid, "grid.", "n_jz", 100);
        cfg.grid.validate();
    }

    if (root.contains("dynamics")) {
        const auto& dyn = root["dynamics"];
        check_keys(dyn, "dynamics.",
                   {"t_total", "renorm_interval", "d0", "rtol", "atol", "cutoff"});
        cfg.dynamics.t_total = number_or(dyn, "dynamics.", "t_total", cfg.dynamics.t_total);
        cfg.dynamics.renorm_interval =
            number_or(dyn, "dynamics.", "renorm_interval", cfg.dynamics.renorm_interval);
        cfg.dynamics.d0 = number_or(dyn, "dynamics.", "d0", cfg.dynamics.d0);
        cfg.dynamics.rtol = number_or(dyn, "dynamics.", "rtol", cfg.dynamics.rtol);
        cfg.dynamics.atol = number_or(dyn, "dynamics.", "atol", cfg.dynamics.atol);
        cfg.dynamics.cutoff = number_or(dyn, "dynamics.", "cutoff", cfg.dynamics.cutoff);
        if (!(cfg.dynamics.t_total > 0.0) || !(cfg.dynamics.renorm_interval > 0.0) ||
            !(cfg.dynamics.d0 > 0.0))
            throw std::invalid_argument("config: dynamics times and d0 must be positive");
    }

    if (root.contains("sections")) {
        const auto& sec = root["sections"];
        check_keys(sec, "sections.", {"n_crossings"});
        cfg.n_crossings = int_or(sec, "sections.", "n_crossings", cfg.n_crossings);
        if (cfg.n_crossings < 1)
            throw std::invalid_argument("config: sections.n_crossings must be >= 1");
    }

    if (root.contains("sp")) {
        const auto& sp = root["sp"];
        check_keys(sp, "sp.",
                   {"min_capture", "weight_threshold", "frac_tol", "min_members", "min_r2",
                    "m_override"});
        cfg.sp_min_capture = number_or(sp, "sp.", "min_capture", cfg.sp_min_capture);
        cfg.detect.weight_threshold =
            number_or(sp, "sp.", "weight_threshold", cfg.detect.weight_threshold);
        cfg.detect.frac_tol = number_or(sp, "sp.", "frac_tol", cfg.detect.frac_tol);
        cfg.detect.min_members = int_or(sp, "sp.", "min_members", cfg.detect.min_members);
        cfg.detect.min_r2 = number_or(sp, "sp.", "min_r2", cfg.detect.min_r2);
        cfg.detect.m_override = int_or(sp, "sp.", "m_override", cfg.detect.m_override);
    }

    if (root.contains("spectrum")) {
        const auto& spec = root["spectrum"];
        check_keys(spec, "spectrum.", {"n_levels", "tail_tol"});
        cfg.spectrum_n_levels = int_or(spec, "spectrum.", "n_levels", cfg.spectrum_n_levels);
        cfg.spectrum_tail_tol = number_or(spec, "spectrum.", "tail_tol", cfg.spectrum_tail_tol);
        if (cfg.spectrum_n_levels < 0 || !(cfg.spectrum_tail_tol > 0.0))
            throw std::invalid_argument("config: spectrum block values out of range");
    }

    if (root.contains("seed")) {
        if (!root["seed"].is_number_integer() || root["seed"].get<std::int64_t>() < 0)
            throw std::invalid_argument("config: seed must be a non-negative integer");
        cfg.seed = root["seed"].get<std::uint64_t>();
    }
    if (root.contains("threads")) {
        cfg.threads = int_or(root, "", "threads", 1);
        if (cfg.threads < 1) throw std::invalid_argument("config: threads must be >= 1");
    }

    if (root.contains("io")) {
        const auto& io_block = root["io"];
        check_keys(io_block, "io.", {"output_dir", "cache_dir", "plot"});
        cfg.io.output_dir = string_or(io_block, "io.", "output_dir", cfg.io.output_dir);
        cfg.io.cache_dir = string_or(io_block, "io.", "cache_dir", cfg.io.cache_dir);
        if (io_block.contains("plot")) {
            if (!io_block["plot"].is_boolean())
                throw std::invalid_argument("config: key 'io.plot' must be a boolean");
            cfg.io.plot = io_block["plot"].get<bool>();
        }
    }

    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    if (!io::file_exists(path))
        throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(io::read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("config: " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(root);
}

}  // namespace dicke
