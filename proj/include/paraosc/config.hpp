#pragma once

// JSON run configuration: parsing, schema validation with field-path error
// messages, and a normalized echo that re-validates to the same run.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evolution.hpp"
#include "master.hpp"

namespace paraosc {

class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& path, const std::string& what)
        : std::invalid_argument("config error at " + (path.empty() ? "$" : path) + ": " + what),
          field_path(path) {}
    std::string field_path;
};

struct InitialStateSpec {
    bool vacuum = true;
    Spin spin = Spin::down;
    int n_x = 0;
    int n_y = 0;
};

struct TimeGridSpec {
    bool dimensionless = false;   // values are g*t when true, seconds otherwise
    std::vector<double> values;   // resolved grid, ascending
};

struct SamplingSpec {
    bool enabled = false;
    int shots = 300;
    std::uint64_t seed = 1;
};

struct OutputSpec {
    std::string csv = "trajectory.csv";
    std::string svg;              // empty: no plot
    bool snapshots = false;
    std::string json;             // empty: no trajectory JSON
};

struct RunConfig {
    ParaModel model;
    double g = 0.0;
    std::optional<std::pair<double, double>> envelope;  // (omega_r, omega_b)
    SpaceSpec space;
    InitialStateSpec initial;
    TimeGridSpec grid;
    NoiseSpec noise;
    SamplingSpec sampling;
    OutputSpec outputs;
    EvolveMethod method = EvolveMethod::matrix_exponential;
    double max_step = 0.0;
    nlohmann::json metadata;      // free-form, echoed untouched

    double coupling() const {
        return envelope ? 0.5 * (envelope->first + envelope->second) : g;
    }

    std::vector<double> times_seconds() const {
        if (!grid.dimensionless) return grid.values;
        std::vector<double> t = grid.values;
        for (double& v : t) v /= coupling();
        return t;
    }
};

namespace cfg_detail {

using nlohmann::json;

inline std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

inline const json& require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    return j;
}

inline void reject_unknown(const json& obj, const std::string& path,
                           std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (item.key() == a) { ok = true; break; }
        if (!ok) throw ConfigError(join(path, item.key()), "unknown field");
    }
}

inline const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

inline double get_number(const json& obj, const char* key, const std::string& path) {
    const json* v = find(obj, key);
    if (!v) throw ConfigError(join(path, key), "required field missing");
    if (!v->is_number()) throw ConfigError(join(path, key), "expected a number");
    return v->get<double>();
}

inline double get_number_or(const json& obj, const char* key, const std::string& path,
                            double fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(join(path, key), "expected a number");
    return v->get<double>();
}

inline int get_int(const json& obj, const char* key, const std::string& path) {
    const json* v = find(obj, key);
    if (!v) throw ConfigError(join(path, key), "required field missing");
    if (!v->is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
    return v->get<int>();
}

inline int get_int_or(const json& obj, const char* key, const std::string& path, int fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
    return v->get<int>();
}

inline bool get_bool_or(const json& obj, const char* key, const std::string& path,
                        bool fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(join(path, key), "expected a boolean");
    return v->get<bool>();
}

inline std::string get_string(const json& obj, const char* key, const std::string& path) {
    const json* v = find(obj, key);
    if (!v) throw ConfigError(join(path, key), "required field missing");
    if (!v->is_string()) throw ConfigError(join(path, key), "expected a string");
    return v->get<std::string>();
}

inline std::string get_string_or(const json& obj, const char* key, const std::string& path,
                                 const std::string& fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(join(path, key), "expected a string");
    return v->get<std::string>();
}

}  // namespace cfg_detail

inline RunConfig parse_run_config(const nlohmann::json& root) {
    using namespace cfg_detail;
    require_object(root, "");
    reject_unknown(root, "",
                   {"model", "coupling", "truncation", "initial", "time_grid", "noise",
                    "sampling", "outputs", "method", "max_step", "metadata"});
    RunConfig cfg;

    // model
    {
        const json* m = find(root, "model");
        if (!m) throw ConfigError("model", "required field missing");
        require_object(*m, "model");
        reject_unknown(*m, "model", {"kind", "order", "branch"});
        const std::string kind = get_string(*m, "kind", "model");
        ParaKind k;
        if (kind == "para_fermi" || kind == "pF") k = ParaKind::para_fermi;
        else if (kind == "para_bose" || kind == "pB") k = ParaKind::para_bose;
        else throw ConfigError("model.kind", "expected 'para_fermi' or 'para_bose'");
        const int order = get_int(*m, "order", "model");
        if (order < 2 || order % 2 != 0)
            throw ConfigError("model.order", "must be a positive even integer");
        const std::string branch = get_string_or(*m, "branch", "model", "spin_down");
        ParaBranch b;
        if (branch == "spin_down") b = ParaBranch::spin_down;
        else if (branch == "spin_up") b = ParaBranch::spin_up;
        else throw ConfigError("model.branch", "expected 'spin_down' or 'spin_up'");
        cfg.model = make_model(k, order, b);
    }

    // coupling: either {g} or {omega_r, omega_b}
    {
        const json* c = find(root, "coupling");
        if (!c) throw ConfigError("coupling", "required field missing");
        require_object(*c, "coupling");
        reject_unknown(*c, "coupling", {"g", "omega_r", "omega_b"});
        const bool has_g = find(*c, "g") != nullptr;
        const bool has_rb = find(*c, "omega_r") != nullptr || find(*c, "omega_b") != nullptr;
        if (has_g == has_rb)
            throw ConfigError("coupling", "specify either g or the pair omega_r/omega_b");
        if (has_g) {
            cfg.g = get_number(*c, "g", "coupling");
            if (cfg.g < 0.0) throw ConfigError("coupling.g", "must be nonnegative");
        } else {
            const double wr = get_number(*c, "omega_r", "coupling");
            const double wb = get_number(*c, "omega_b", "coupling");
            if (wr <= 0.0 || wb <= 0.0)
                throw ConfigError("coupling.omega_r", "sideband frequencies must be positive");
            cfg.envelope = std::make_pair(wr, wb);
            cfg.g = 0.5 * (wr + wb);
        }
    }

    // truncation
    {
        const json* t = find(root, "truncation");
        if (!t) throw ConfigError("truncation", "required field missing");
        require_object(*t, "truncation");
        reject_unknown(*t, "truncation", {"d_x", "d_y"});
        const int dx = get_int(*t, "d_x", "truncation");
        const int dy = get_int(*t, "d_y", "truncation");
        if (dx < 1 || dy < 1)
            throw ConfigError("truncation.d_x", "must keep at least one Fock level per mode");
        cfg.space = make_space(dx, dy);
        try {
            require_model_fits(cfg.space, cfg.model);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("truncation", e.what());
        }
    }

    // initial state
    {
        const json* s = find(root, "initial");
        if (!s) {
            cfg.initial.vacuum = true;
        } else if (s->is_string()) {
            if (s->get<std::string>() != "vacuum")
                throw ConfigError("initial", "expected 'vacuum' or an explicit state object");
            cfg.initial.vacuum = true;
        } else {
            require_object(*s, "initial");
            reject_unknown(*s, "initial", {"spin", "n_x", "n_y"});
            cfg.initial.vacuum = false;
            const std::string spin = get_string(*s, "spin", "initial");
            if (spin == "down") cfg.initial.spin = Spin::down;
            else if (spin == "up") cfg.initial.spin = Spin::up;
            else throw ConfigError("initial.spin", "expected 'down' or 'up'");
            cfg.initial.n_x = get_int(*s, "n_x", "initial");
            cfg.initial.n_y = get_int(*s, "n_y", "initial");
            if (cfg.initial.n_x < 0 || cfg.initial.n_x >= cfg.space.d_x)
                throw ConfigError("initial.n_x", "outside truncation");
            if (cfg.initial.n_y < 0 || cfg.initial.n_y >= cfg.space.d_y)
                throw ConfigError("initial.n_y", "outside truncation");
        }
    }

    // time grid
    {
        const json* t = find(root, "time_grid");
        if (!t) throw ConfigError("time_grid", "required field missing");
        require_object(*t, "time_grid");
        reject_unknown(*t, "time_grid", {"unit", "t_max", "points", "values"});
        const std::string unit = get_string_or(*t, "unit", "time_grid", "seconds");
        if (unit == "dimensionless") cfg.grid.dimensionless = true;
        else if (unit == "seconds") cfg.grid.dimensionless = false;
        else throw ConfigError("time_grid.unit", "expected 'seconds' or 'dimensionless'");
        const json* values = find(*t, "values");
        if (values) {
            if (find(*t, "t_max") || find(*t, "points"))
                throw ConfigError("time_grid", "give either values or t_max/points, not both");
            if (!values->is_array() || values->empty())
                throw ConfigError("time_grid.values", "expected a nonempty array of numbers");
            for (const auto& v : *values) {
                if (!v.is_number())
                    throw ConfigError("time_grid.values", "expected a nonempty array of numbers");
                cfg.grid.values.push_back(v.get<double>());
            }
            try {
                detail::check_times(cfg.grid.values);
            } catch (const std::invalid_argument&) {
                throw ConfigError("time_grid.values", "must be sorted and nonnegative");
            }
        } else {
            const double t_max = get_number(*t, "t_max", "time_grid");
            const int points = get_int(*t, "points", "time_grid");
            if (t_max <= 0.0) throw ConfigError("time_grid.t_max", "must be positive");
            if (points < 2) throw ConfigError("time_grid.points", "must be at least 2");
            cfg.grid.values.resize(static_cast<size_t>(points));
            for (int i = 0; i < points; ++i)
                cfg.grid.values[static_cast<size_t>(i)] = t_max * i / (points - 1);
        }
        if (cfg.grid.dimensionless && cfg.coupling() <= 0.0)
            throw ConfigError("time_grid.unit", "dimensionless grid requires a positive coupling");
    }

    // noise
    if (const json* n = find(root, "noise")) {
        require_object(*n, "noise");
        reject_unknown(*n, "noise", {"enabled", "heating_rate_x", "heating_rate_y", "n_th"});
        cfg.noise.enabled = get_bool_or(*n, "enabled", "noise", true);
        cfg.noise.heating_rate_x = get_number_or(*n, "heating_rate_x", "noise", 0.0);
        cfg.noise.heating_rate_y = get_number_or(*n, "heating_rate_y", "noise", 0.0);
        if (cfg.noise.heating_rate_x < 0.0)
            throw ConfigError("noise.heating_rate_x", "must be nonnegative");
        if (cfg.noise.heating_rate_y < 0.0)
            throw ConfigError("noise.heating_rate_y", "must be nonnegative");
        if (const json* nth = find(*n, "n_th")) {
            if (!nth->is_number() || nth->get<double>() <= 0.0)
                throw ConfigError("noise.n_th", "must be a positive number");
            cfg.noise.n_th = nth->get<double>();
        }
        if (cfg.noise.enabled && cfg.grid.dimensionless)
            throw ConfigError("noise.enabled",
                              "noise rates are per second; use a time grid in seconds");
    }

    // sampling
    if (const json* s = find(root, "sampling")) {
        require_object(*s, "sampling");
        reject_unknown(*s, "sampling", {"enabled", "shots", "seed"});
        cfg.sampling.enabled = get_bool_or(*s, "enabled", "sampling", true);
        cfg.sampling.shots = get_int_or(*s, "shots", "sampling", 300);
        if (cfg.sampling.shots < 1) throw ConfigError("sampling.shots", "must be at least 1");
        const json* seed = find(*s, "seed");
        if (seed) {
            if (!seed->is_number_integer() || seed->get<long long>() < 0)
                throw ConfigError("sampling.seed", "expected a nonnegative integer");
            cfg.sampling.seed = seed->get<std::uint64_t>();
        }
    }

    // outputs
    if (const json* o = find(root, "outputs")) {
        require_object(*o, "outputs");
        reject_unknown(*o, "outputs", {"csv", "svg", "json", "snapshots"});
        cfg.outputs.csv = get_string_or(*o, "csv", "outputs", "trajectory.csv");
        cfg.outputs.svg = get_string_or(*o, "svg", "outputs", "");
        cfg.outputs.json = get_string_or(*o, "json", "outputs", "");
        cfg.outputs.snapshots = get_bool_or(*o, "snapshots", "outputs", false);
        if (cfg.outputs.csv.empty()) throw ConfigError("outputs.csv", "must not be empty");
    }

    // method / step
    {
        const std::string method = get_string_or(root, "method", "", "matrix_exponential");
        if (method == "matrix_exponential") cfg.method = EvolveMethod::matrix_exponential;
        else if (method == "ode_rk") cfg.method = EvolveMethod::ode_rk;
        else throw ConfigError("method", "expected 'matrix_exponential' or 'ode_rk'");
        cfg.max_step = get_number_or(root, "max_step", "", 0.0);
        if (cfg.max_step < 0.0) throw ConfigError("max_step", "must be nonnegative");
    }

    if (const json* meta = find(root, "metadata")) cfg.metadata = *meta;
    return cfg;
}

inline StateVector initial_state(const RunConfig& cfg) {
    if (cfg.initial.vacuum) return vacuum_state(cfg.space, cfg.model);
    return basis_state(cfg.space, cfg.initial.spin, cfg.initial.n_x, cfg.initial.n_y);
}

inline nlohmann::json config_to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["model"] = {{"kind", to_string(cfg.model.kind)},
                  {"order", cfg.model.order},
                  {"branch", to_string(cfg.model.branch)}};
    if (cfg.envelope)
        j["coupling"] = {{"omega_r", cfg.envelope->first}, {"omega_b", cfg.envelope->second}};
    else
        j["coupling"] = {{"g", cfg.g}};
    j["truncation"] = {{"d_x", cfg.space.d_x}, {"d_y", cfg.space.d_y}};
    if (cfg.initial.vacuum)
        j["initial"] = "vacuum";
    else
        j["initial"] = {{"spin", to_string(cfg.initial.spin)},
                        {"n_x", cfg.initial.n_x},
                        {"n_y", cfg.initial.n_y}};
    j["time_grid"] = {{"unit", cfg.grid.dimensionless ? "dimensionless" : "seconds"},
                      {"values", cfg.grid.values}};
    j["noise"] = {{"enabled", cfg.noise.enabled},
                  {"heating_rate_x", cfg.noise.heating_rate_x},
                  {"heating_rate_y", cfg.noise.heating_rate_y}};
    if (cfg.noise.n_th) j["noise"]["n_th"] = *cfg.noise.n_th;
    j["sampling"] = {{"enabled", cfg.sampling.enabled},
                     {"shots", cfg.sampling.shots},
                     {"seed", cfg.sampling.seed}};
    j["outputs"] = {{"csv", cfg.outputs.csv}, {"snapshots", cfg.outputs.snapshots}};
    if (!cfg.outputs.svg.empty()) j["outputs"]["svg"] = cfg.outputs.svg;
    if (!cfg.outputs.json.empty()) j["outputs"]["json"] = cfg.outputs.json;
    j["method"] = to_string(cfg.method);
    if (cfg.max_step > 0.0) j["max_step"] = cfg.max_step;
    if (!cfg.metadata.is_null()) j["metadata"] = cfg.metadata;
    return j;
}

}  // namespace paraosc
