#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdiff/dephasing.hpp"
#include "qdiff/errors.hpp"
#include "qdiff/geometry.hpp"
#include "qdiff/lindblad.hpp"
#include "qdiff/potential.hpp"

namespace qdiff {

using json = nlohmann::json;

struct ModelConfig {
    std::string kind;  // "free" | "disordered" | "harper" — the one required field
    double V = 1.0;    // disordered amplitude (not given by the source model; echoed as
    int L = 100;       // a non-paper default together with L)
    double Delta = 0.5;
    double beta = kGoldenBeta;
    double phi = 0.0;
};

struct RunConfig {
    ModelConfig model;
    double hopping_J = -1.0;
    double gamma = 0.0;
    std::vector<double> gamma_table;  // optional per-site rates; overrides `gamma`
    double t_max = 50.0;
    int record_points = 60;
    double record_span = 100.0;  // grid covers [t_max/span, t_max]
    double dt = 0.0;             // 0 => auto
    std::string error_control = "fixed";  // "fixed" | "adaptive"
    double step_tolerance = 1e-8;
    double convergence_tol = 1e-6;
    int lead_length = -1;  // -1 => auto from the light cone
    int boundary_margin = 10;
    int realizations = -1;  // -1 => 20 for disordered, 1 otherwise
    std::uint64_t master_seed = 12345;
    int workers = 1;
    double fit_t_lo = 0.0;  // 0 => last decade of valid times
    double fit_t_hi = 0.0;
    double fit_epsilon = 0.05;
    std::vector<double> checkpoint_times;
    bool check_positivity = false;
    bool keep_populations = false;
    std::string output_dir = "run";
};

namespace detail {

template <typename T>
void get_if_present(const json& j, const char* key, T& out, const std::string& path) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config field '" + path + key + "': " + e.what());
    }
}

}  // namespace detail

inline json to_json(const RunConfig& c) {
    json j;
    j["model"] = {{"kind", c.model.kind}, {"V", c.model.V},       {"L", c.model.L},
                  {"Delta", c.model.Delta}, {"beta", c.model.beta}, {"phi", c.model.phi}};
    j["hopping_J"] = c.hopping_J;
    if (c.gamma_table.empty())
        j["gamma"] = c.gamma;
    else
        j["gamma"] = c.gamma_table;
    j["t_max"] = c.t_max;
    j["record"] = {{"points", c.record_points}, {"span", c.record_span}};
    j["integrator"] = {{"dt", c.dt},
                       {"error_control", c.error_control},
                       {"step_tolerance", c.step_tolerance},
                       {"convergence_tol", c.convergence_tol}};
    j["lead_length"] = c.lead_length;
    j["boundary_margin"] = c.boundary_margin;
    j["ensemble"] = {{"realizations", c.realizations},
                     {"master_seed", c.master_seed},
                     {"workers", c.workers}};
    j["fit"] = {{"t_lo", c.fit_t_lo}, {"t_hi", c.fit_t_hi}, {"epsilon", c.fit_epsilon}};
    j["checkpoint_times"] = c.checkpoint_times;
    j["check_positivity"] = c.check_positivity;
    j["keep_populations"] = c.keep_populations;
    j["output_dir"] = c.output_dir;
    return j;
}

inline RunConfig config_from_json(const json& jin) {
    // a run's metadata.json (which nests the config under "config") is itself
    // accepted, so emitted metadata reproduces the run
    const json& j = jin.contains("config") ? jin.at("config") : jin;
    RunConfig c;
    if (!j.contains("model") || !j.at("model").contains("kind"))
        throw ConfigError("config field 'model.kind' is required");
    const json& jm = j.at("model");
    detail::get_if_present(jm, "kind", c.model.kind, "model.");
    if (c.model.kind != "free" && c.model.kind != "disordered" && c.model.kind != "harper")
        throw ConfigError("model.kind must be free|disordered|harper, got '" + c.model.kind +
                          "'");
    detail::get_if_present(jm, "V", c.model.V, "model.");
    detail::get_if_present(jm, "L", c.model.L, "model.");
    detail::get_if_present(jm, "Delta", c.model.Delta, "model.");
    detail::get_if_present(jm, "beta", c.model.beta, "model.");
    detail::get_if_present(jm, "phi", c.model.phi, "model.");
    detail::get_if_present(j, "hopping_J", c.hopping_J, "");
    if (j.contains("gamma")) {
        if (j.at("gamma").is_array())
            c.gamma_table = j.at("gamma").get<std::vector<double>>();
        else
            detail::get_if_present(j, "gamma", c.gamma, "");
    }
    detail::get_if_present(j, "t_max", c.t_max, "");
    if (j.contains("record")) {
        detail::get_if_present(j.at("record"), "points", c.record_points, "record.");
        detail::get_if_present(j.at("record"), "span", c.record_span, "record.");
    }
    if (j.contains("integrator")) {
        const json& ji = j.at("integrator");
        detail::get_if_present(ji, "dt", c.dt, "integrator.");
        detail::get_if_present(ji, "error_control", c.error_control, "integrator.");
        detail::get_if_present(ji, "step_tolerance", c.step_tolerance, "integrator.");
        detail::get_if_present(ji, "convergence_tol", c.convergence_tol, "integrator.");
    }
    detail::get_if_present(j, "lead_length", c.lead_length, "");
    detail::get_if_present(j, "boundary_margin", c.boundary_margin, "");
    if (j.contains("ensemble")) {
        const json& je = j.at("ensemble");
        detail::get_if_present(je, "realizations", c.realizations, "ensemble.");
        detail::get_if_present(je, "master_seed", c.master_seed, "ensemble.");
        detail::get_if_present(je, "workers", c.workers, "ensemble.");
    }
    if (j.contains("fit")) {
        const json& jf = j.at("fit");
        detail::get_if_present(jf, "t_lo", c.fit_t_lo, "fit.");
        detail::get_if_present(jf, "t_hi", c.fit_t_hi, "fit.");
        detail::get_if_present(jf, "epsilon", c.fit_epsilon, "fit.");
    }
    detail::get_if_present(j, "checkpoint_times", c.checkpoint_times, "");
    detail::get_if_present(j, "check_positivity", c.check_positivity, "");
    detail::get_if_present(j, "keep_populations", c.keep_populations, "");
    detail::get_if_present(j, "output_dir", c.output_dir, "");

    if (c.t_max <= 0.0) throw ConfigError("t_max must be > 0");
    if (c.error_control != "fixed" && c.error_control != "adaptive")
        throw ConfigError("integrator.error_control must be fixed|adaptive");
    if (c.model.kind == "disordered" && c.model.V <= 0.0)
        throw ConfigError("model.V must be > 0 for the disordered model");
    if (c.model.L < 0) throw ConfigError("model.L must be >= 0");
    if (c.hopping_J == 0.0) throw ConfigError("hopping_J must be nonzero");
    if (c.checkpoint_times.size() > 8)
        throw ConfigError("at most 8 checkpoint_times are retained");
    return c;
}

// Every config field can be overridden by QDIFF_<PATH> (nested keys joined by
// '_', uppercased), e.g. QDIFF_MODEL_DELTA=1.5, QDIFF_T_MAX=20.
inline void apply_env_overrides(json& j, const std::string& prefix = "QDIFF_",
                                const std::string& path = "") {
    if (!j.is_object()) return;
    for (auto& [key, value] : j.items()) {
        std::string name = path + key;
        for (auto& ch : name) ch = static_cast<char>(std::toupper(ch));
        if (value.is_object()) {
            apply_env_overrides(value, prefix, name + "_");
            continue;
        }
        const char* env = std::getenv((prefix + name).c_str());
        if (!env) continue;
        try {
            value = json::parse(env);
        } catch (const json::exception&) {
            value = std::string(env);  // unquoted strings are taken verbatim
        }
    }
}

inline RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    json& body = j.contains("config") ? j.at("config") : j;
    apply_env_overrides(body);
    return config_from_json(j);
}

}  // namespace qdiff
