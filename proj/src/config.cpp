#include "laneform/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "laneform/common.hpp"

namespace laneform {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void require_keys(const json& j, const std::string& prefix,
                  const std::set<std::string>& allowed) {
    if (!j.is_object()) fail("config section '" + prefix + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            fail("unknown config key '" + (prefix.empty() ? it.key() : prefix + "." + it.key()) +
                 "'");
    }
}

double get_num(const json& j, const std::string& path, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number()) fail("config key '" + path + "." + key + "' must be a number");
    return v.get<double>();
}

int get_int(const json& j, const std::string& path, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) fail("config key '" + path + "." + key + "' must be an integer");
    return v.get<int>();
}

std::string get_str(const json& j, const std::string& path, const char* key,
                    const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_string()) fail("config key '" + path + "." + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> get_vec(const json& j, const std::string& path, const char* key,
                            std::vector<double> fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_array()) fail("config key '" + path + "." + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number())
            fail("config key '" + path + "." + key + "' must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

}  // namespace

Config parse_config(const json& j) {
    Config c;
    require_keys(j, "", {"model", "grid", "initial", "time", "scheme", "seed", "sample",
                         "stationary", "compare"});

    if (j.contains("model")) {
        const auto& m = j.at("model");
        require_keys(m, "model", {"h", "gamma0", "gamma1", "gamma2", "alpha"});
        c.model.h = get_num(m, "model", "h", c.model.h);
        c.model.gamma0 = get_num(m, "model", "gamma0", c.model.gamma0);
        c.model.gamma1 = get_num(m, "model", "gamma1", c.model.gamma1);
        c.model.gamma2 = get_num(m, "model", "gamma2", c.model.gamma2);
        c.model.alpha = get_num(m, "model", "alpha", c.model.alpha);
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        require_keys(g, "grid", {"nx", "ny", "x0", "y0", "wx", "wy"});
        c.grid.nx = get_int(g, "grid", "nx", c.grid.nx);
        c.grid.ny = get_int(g, "grid", "ny", c.grid.ny);
        c.grid.x0 = get_num(g, "grid", "x0", c.grid.x0);
        c.grid.y0 = get_num(g, "grid", "y0", c.grid.y0);
        c.grid.wx = get_num(g, "grid", "wx", c.grid.wx);
        c.grid.wy = get_num(g, "grid", "wy", c.grid.wy);
    }
    if (j.contains("initial")) {
        const auto& s = j.at("initial");
        require_keys(s, "initial", {"kind", "c_r", "c_b", "amplitude"});
        c.initial.kind = get_str(s, "initial", "kind", c.initial.kind);
        if (c.initial.kind != "constant" && c.initial.kind != "sinusoidal")
            fail("config key 'initial.kind' must be \"constant\" or \"sinusoidal\"");
        c.initial.c_r = get_num(s, "initial", "c_r", c.initial.c_r);
        c.initial.c_b = get_num(s, "initial", "c_b", c.initial.c_b);
        c.initial.amplitude = get_num(s, "initial", "amplitude", c.initial.amplitude);
    }
    if (j.contains("time")) {
        const auto& t = j.at("time");
        require_keys(t, "time", {"t_end", "output_every"});
        c.time.t_end = get_num(t, "time", "t_end", c.time.t_end);
        c.time.output_every = get_num(t, "time", "output_every", c.time.output_every);
        if (!(c.time.t_end > 0.0)) fail("config key 'time.t_end' must be > 0");
        if (c.time.output_every < 0.0) fail("config key 'time.output_every' must be >= 0");
    }
    if (j.contains("scheme")) {
        const auto& s = j.at("scheme");
        require_keys(s, "scheme",
                     {"type", "variant", "dt", "tau", "cfl_safety", "fp_tol", "fp_maxiter",
                      "clip_eps", "reg_weight"});
        c.scheme.type = get_str(s, "scheme", "type", c.scheme.type);
        if (c.scheme.type != "explicit" && c.scheme.type != "implicit")
            fail("config key 'scheme.type' must be \"explicit\" or \"implicit\"");
        c.scheme.variant = variant_from_name(
            get_str(s, "scheme", "variant", variant_name(c.scheme.variant)));
        c.scheme.dt = get_num(s, "scheme", "dt", c.scheme.dt);
        c.scheme.tau = get_num(s, "scheme", "tau", c.scheme.tau);
        c.scheme.cfl_safety = get_num(s, "scheme", "cfl_safety", c.scheme.cfl_safety);
        c.scheme.fp_tol = get_num(s, "scheme", "fp_tol", c.scheme.fp_tol);
        c.scheme.fp_maxiter = get_int(s, "scheme", "fp_maxiter", c.scheme.fp_maxiter);
        c.scheme.clip_eps = get_num(s, "scheme", "clip_eps", c.scheme.clip_eps);
        c.scheme.reg_weight = get_num(s, "scheme", "reg_weight", c.scheme.reg_weight);
    }
    if (j.contains("seed")) {
        const auto& v = j.at("seed");
        if (!v.is_number_unsigned() &&
            !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            fail("config key 'seed' must be a non-negative integer");
        c.seed = v.get<std::uint64_t>();
    }
    if (j.contains("sample")) {
        const auto& s = j.at("sample");
        require_keys(s, "sample", {"trajectories", "sweeps"});
        c.sample.trajectories = get_int(s, "sample", "trajectories", c.sample.trajectories);
        c.sample.sweeps = get_int(s, "sample", "sweeps", c.sample.sweeps);
        if (c.sample.trajectories < 1) fail("config key 'sample.trajectories' must be >= 1");
        if (c.sample.sweeps < 0) fail("config key 'sample.sweeps' must be >= 0");
    }
    if (j.contains("stationary")) {
        const auto& s = j.at("stationary");
        require_keys(s, "stationary",
                     {"dy", "mass_r", "mass_b", "curve_constants", "gamma0_values"});
        c.stationary.dy = get_num(s, "stationary", "dy", c.stationary.dy);
        c.stationary.mass_r = get_num(s, "stationary", "mass_r", c.stationary.mass_r);
        c.stationary.mass_b = get_num(s, "stationary", "mass_b", c.stationary.mass_b);
        c.stationary.curve_constants =
            get_vec(s, "stationary", "curve_constants", c.stationary.curve_constants);
        c.stationary.gamma0_values =
            get_vec(s, "stationary", "gamma0_values", c.stationary.gamma0_values);
        if (!(c.stationary.dy > 0.0)) fail("config key 'stationary.dy' must be > 0");
    }
    if (j.contains("compare")) {
        const auto& s = j.at("compare");
        require_keys(s, "compare", {"h_levels", "t_end"});
        c.compare.h_levels = get_vec(s, "compare", "h_levels", c.compare.h_levels);
        c.compare.t_end = get_num(s, "compare", "t_end", c.compare.t_end);
        if (!(c.compare.t_end > 0.0)) fail("config key 'compare.t_end' must be > 0");
    }

    c.model.validate();
    c.grid.validate();
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

json config_to_json(const Config& c) {
    json j;
    j["model"] = {{"h", c.model.h},
                  {"gamma0", c.model.gamma0},
                  {"gamma1", c.model.gamma1},
                  {"gamma2", c.model.gamma2},
                  {"alpha", c.model.alpha}};
    j["grid"] = {{"nx", c.grid.nx}, {"ny", c.grid.ny}, {"x0", c.grid.x0},
                 {"y0", c.grid.y0}, {"wx", c.grid.wx}, {"wy", c.grid.wy}};
    j["initial"] = {{"kind", c.initial.kind},
                    {"c_r", c.initial.c_r},
                    {"c_b", c.initial.c_b},
                    {"amplitude", c.initial.amplitude}};
    j["time"] = {{"t_end", c.time.t_end}, {"output_every", c.time.output_every}};
    j["scheme"] = {{"type", c.scheme.type},
                   {"variant", variant_name(c.scheme.variant)},
                   {"dt", c.scheme.dt},
                   {"tau", c.scheme.tau},
                   {"cfl_safety", c.scheme.cfl_safety},
                   {"fp_tol", c.scheme.fp_tol},
                   {"fp_maxiter", c.scheme.fp_maxiter},
                   {"clip_eps", c.scheme.clip_eps},
                   {"reg_weight", c.scheme.reg_weight}};
    j["seed"] = c.seed;
    j["sample"] = {{"trajectories", c.sample.trajectories}, {"sweeps", c.sample.sweeps}};
    j["stationary"] = {{"dy", c.stationary.dy},
                       {"mass_r", c.stationary.mass_r},
                       {"mass_b", c.stationary.mass_b},
                       {"curve_constants", c.stationary.curve_constants},
                       {"gamma0_values", c.stationary.gamma0_values}};
    j["compare"] = {{"h_levels", c.compare.h_levels}, {"t_end", c.compare.t_end}};
    return j;
}

Config scenario_config(int id) {
    Config c;
    c.grid = Grid::corridor(100, 10);
    c.initial.kind = "sinusoidal";
    c.initial.amplitude = 0.02;
    switch (id) {
        case 1:  // symmetric relaxation toward the flat state
            c.model = ModelParams{0.3, 0.1, 0.2, 0.2, 0.0};
            c.initial.c_r = c.initial.c_b = 0.4;
            c.time.t_end = 5.0;
            c.time.output_every = 0.1;
            c.scheme.type = "explicit";
            c.scheme.variant = Variant::ReducedSymmetric;
            break;
        case 2:  // asymmetric dodging: lane formation
            c.model = ModelParams{0.1, 0.001, 0.5, 0.4, 0.2};
            c.initial.c_r = c.initial.c_b = 0.4;
            c.time.t_end = 100.0;
            c.time.output_every = 2.0;
            c.scheme.type = "explicit";
            c.scheme.variant = Variant::DodgeScaled;
            break;
        case 3:  // weak lateral diffusion at near-saturation load: congestion
            c.model = ModelParams{0.1, 1e-4, 0.5, 0.4, 0.2};
            c.initial.c_r = c.initial.c_b = 0.499;
            c.time.t_end = 100.0;
            c.time.output_every = 2.0;
            c.scheme.type = "explicit";
            c.scheme.variant = Variant::DodgeScaled;
            break;
        default:
            fail("unknown scenario id " + std::to_string(id) + " (expected 1, 2 or 3)");
    }
    return c;
}

State build_initial(const Config& c) {
    const Grid& g = c.grid;
    State s(g.nx, g.ny);
    const double pi = std::acos(-1.0);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            double mod = 0.0;
            if (c.initial.kind == "sinusoidal") {
                mod = c.initial.amplitude * std::sin(pi * (g.cx(i) - g.x0) / g.wx) *
                      std::cos(pi * (g.cy(j) - g.y0) / g.wy);
            }
            s.r.at(i, j) = c.initial.c_r + mod;
            s.b.at(i, j) = c.initial.c_b - mod;
        }
    }
    s.t = 0.0;
    s.check_box(0.0, "initial state");
    return s;
}

void set_by_path(json& j, const std::string& dotted, double value) {
    std::istringstream ss(dotted);
    std::string part;
    json* cur = &j;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) fail("bad config path '" + dotted + "'");
        parts.push_back(part);
    }
    if (parts.empty()) fail("bad config path '" + dotted + "'");
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) cur = &((*cur)[parts[k]]);
    (*cur)[parts.back()] = value;
}

}  // namespace laneform
