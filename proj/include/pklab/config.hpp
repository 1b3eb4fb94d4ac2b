#pragma once

// Run configuration: `section.key = value` lines, '#' comments. Parsing is
// strict (unknown or repeated keys are errors) and collects every problem
// before failing. emit() writes every key, so parse(emit(c)) == c.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "pklab/embedding.hpp"
#include "pklab/error.hpp"
#include "pklab/field_spec.hpp"
#include "pklab/grid.hpp"
#include "pklab/initial_data.hpp"
#include "pklab/model.hpp"
#include "pklab/run.hpp"

namespace pklab {

struct RunConfig {
    std::string name = "run";
    std::uint64_t seed = 1;

    // grid (n counts interior nodes)
    int dim = 1;
    double length_x = 1.0;
    double length_y = 1.0;
    int n_x = 100;
    int n_y = 1;

    // model
    double a = 1.0;
    double b = 1.0;
    double gamma = 1.0;
    std::string m = "constant:2";
    std::string p = "constant:5";
    bool strict = true;
    double strong_damping = 1.0;
    double weak_damping = 1.0;
    double source = 1.0;

    InitialDataSpec initial;

    // time; dt0 and dt_ceiling are resolved at parse time when omitted
    double horizon = 1.0;
    double dt0 = 0.0;
    double dt_floor = 1e-10;
    double dt_ceiling = 0.0;
    int sample_stride = 10;
    bool adaptive = true;
    double growth_max = 1.25;
    double growth_min = 1.01;
    int calm_steps = 20;
    double blowup_norm = 1e8;
    long max_steps = 50'000'000;
    std::string solver = "auto";

    // constants
    std::string constants_mode = "estimate";
    std::optional<double> user_B, user_S, user_S_star;
    double q_star = 6.0;
    int starts = 6;
    double safety = 1.0;

    // monitors
    bool mon_H = false, mon_Psi = false, mon_F = false, mon_Upsilon = false;

    // bounds
    bool tighten = false;

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline bool parse_int(std::string_view s, long& out) {
    s = trim(s);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

inline bool parse_bool(std::string_view s, bool& out) {
    s = trim(s);
    if (s == "true" || s == "yes" || s == "1" || s == "on") return out = true, true;
    if (s == "false" || s == "no" || s == "0" || s == "off") return out = false, true;
    return false;
}

struct ConfigKey {
    const char* name;
    // Returns false on a malformed value.
    std::function<bool(RunConfig&, std::string_view)> set;
    std::function<std::optional<std::string>(const RunConfig&)> get;
};

template <class T>
ConfigKey real_key(const char* name, T RunConfig::*field) {
    return {name,
            [field](RunConfig& c, std::string_view v) {
                double x;
                if (!parse_double(trim(v), x)) return false;
                c.*field = x;
                return true;
            },
            [field](const RunConfig& c) -> std::optional<std::string> { return format_double(c.*field); }};
}

template <class T>
ConfigKey int_key(const char* name, T RunConfig::*field) {
    return {name,
            [field](RunConfig& c, std::string_view v) {
                long x;
                if (!parse_int(v, x)) return false;
                c.*field = static_cast<T>(x);
                return true;
            },
            [field](const RunConfig& c) -> std::optional<std::string> { return std::to_string(c.*field); }};
}

inline ConfigKey bool_key(const char* name, bool RunConfig::*field) {
    return {name, [field](RunConfig& c, std::string_view v) { return parse_bool(v, c.*field); },
            [field](const RunConfig& c) -> std::optional<std::string> { return c.*field ? "true" : "false"; }};
}

inline ConfigKey text_key(const char* name, std::string RunConfig::*field) {
    return {name,
            [field](RunConfig& c, std::string_view v) {
                c.*field = std::string(trim(v));
                return true;
            },
            [field](const RunConfig& c) -> std::optional<std::string> { return c.*field; }};
}

inline ConfigKey optional_key(const char* name, std::optional<double> RunConfig::*field) {
    return {name,
            [field](RunConfig& c, std::string_view v) {
                double x;
                if (!parse_double(trim(v), x)) return false;
                c.*field = x;
                return true;
            },
            [field](const RunConfig& c) -> std::optional<std::string> {
                if (!(c.*field)) return std::nullopt;
                return format_double(*(c.*field));
            }};
}

// Initial-data fields live in a nested struct.
template <class T>
ConfigKey initial_key(const char* name, T InitialDataSpec::*field) {
    return {name,
            [field](RunConfig& c, std::string_view v) {
                if constexpr (std::is_same_v<T, std::string>) {
                    c.initial.*field = std::string(trim(v));
                    return true;
                } else if constexpr (std::is_same_v<T, int>) {
                    long x;
                    if (!parse_int(v, x)) return false;
                    c.initial.*field = static_cast<int>(x);
                    return true;
                } else {
                    double x;
                    if (!parse_double(trim(v), x)) return false;
                    c.initial.*field = x;
                    return true;
                }
            },
            [field](const RunConfig& c) -> std::optional<std::string> {
                if constexpr (std::is_same_v<T, std::string>) return c.initial.*field;
                else if constexpr (std::is_same_v<T, int>) return std::to_string(c.initial.*field);
                else return format_double(c.initial.*field);
            }};
}

inline std::string monitor_list(const RunConfig& c) {
    std::string s;
    auto add = [&](bool on, const char* n) {
        if (!on) return;
        if (!s.empty()) s += ",";
        s += n;
    };
    add(c.mon_H, "H");
    add(c.mon_Psi, "Psi");
    add(c.mon_F, "F");
    add(c.mon_Upsilon, "Upsilon");
    return s.empty() ? "none" : s;
}

inline const std::vector<ConfigKey>& schema() {
    static const std::vector<ConfigKey> keys = {
        text_key("run.name", &RunConfig::name),
        int_key("run.seed", &RunConfig::seed),
        int_key("grid.dim", &RunConfig::dim),
        real_key("grid.length_x", &RunConfig::length_x),
        real_key("grid.length_y", &RunConfig::length_y),
        int_key("grid.n_x", &RunConfig::n_x),
        int_key("grid.n_y", &RunConfig::n_y),
        real_key("model.a", &RunConfig::a),
        real_key("model.b", &RunConfig::b),
        real_key("model.gamma", &RunConfig::gamma),
        text_key("model.m", &RunConfig::m),
        text_key("model.p", &RunConfig::p),
        bool_key("model.strict", &RunConfig::strict),
        real_key("model.strong_damping", &RunConfig::strong_damping),
        real_key("model.weak_damping", &RunConfig::weak_damping),
        real_key("model.source", &RunConfig::source),
        initial_key("initial.family", &InitialDataSpec::family),
        initial_key("initial.amplitude", &InitialDataSpec::amplitude),
        initial_key("initial.mode_x", &InitialDataSpec::mode_x),
        initial_key("initial.mode_y", &InitialDataSpec::mode_y),
        initial_key("initial.center_x", &InitialDataSpec::center_x),
        initial_key("initial.center_y", &InitialDataSpec::center_y),
        initial_key("initial.radius", &InitialDataSpec::radius),
        initial_key("initial.file", &InitialDataSpec::file),
        initial_key("initial.velocity_scale", &InitialDataSpec::velocity_scale),
        real_key("time.horizon", &RunConfig::horizon),
        real_key("time.dt0", &RunConfig::dt0),
        real_key("time.dt_floor", &RunConfig::dt_floor),
        real_key("time.dt_ceiling", &RunConfig::dt_ceiling),
        int_key("time.sample_stride", &RunConfig::sample_stride),
        bool_key("time.adaptive", &RunConfig::adaptive),
        real_key("time.growth_max", &RunConfig::growth_max),
        real_key("time.growth_min", &RunConfig::growth_min),
        int_key("time.calm_steps", &RunConfig::calm_steps),
        real_key("time.blowup_norm", &RunConfig::blowup_norm),
        int_key("time.max_steps", &RunConfig::max_steps),
        text_key("time.solver", &RunConfig::solver),
        text_key("constants.mode", &RunConfig::constants_mode),
        optional_key("constants.B", &RunConfig::user_B),
        optional_key("constants.S", &RunConfig::user_S),
        optional_key("constants.S_star", &RunConfig::user_S_star),
        real_key("constants.q_star", &RunConfig::q_star),
        int_key("constants.starts", &RunConfig::starts),
        real_key("constants.safety", &RunConfig::safety),
        {"monitors.enabled",
         [](RunConfig& c, std::string_view v) {
             c.mon_H = c.mon_Psi = c.mon_F = c.mon_Upsilon = false;
             std::string s(trim(v));
             if (s == "none" || s.empty()) return true;
             std::stringstream ss(s);
             std::string item;
             while (std::getline(ss, item, ',')) {
                 const auto t = trim(item);
                 if (t == "H") c.mon_H = true;
                 else if (t == "Psi") c.mon_Psi = true;
                 else if (t == "F") c.mon_F = true;
                 else if (t == "Upsilon") c.mon_Upsilon = true;
                 else return false;
             }
             return true;
         },
         [](const RunConfig& c) -> std::optional<std::string> { return monitor_list(c); }},
        bool_key("bounds.tighten", &RunConfig::tighten),
    };
    return keys;
}

inline const ConfigKey* find_key(std::string_view name) {
    for (const auto& k : schema())
        if (name == k.name) return &k;
    return nullptr;
}

}  // namespace detail

inline Grid make_grid(const RunConfig& c) {
    return c.dim == 2 ? Grid::rect(c.length_x, c.length_y, c.n_x, c.n_y) : Grid::line(c.length_x, c.n_x);
}

/// Range and consistency problems; empty when the config is usable.
inline std::vector<std::string> validate(const RunConfig& c) {
    std::vector<std::string> v;
    auto bad = [&](const std::string& key, const std::string& what) { v.push_back(key + ": " + what); };
    auto num = [](double x) { return detail::format_double(x); };

    if (c.dim != 1 && c.dim != 2) bad("grid.dim", "must be 1 or 2 (got " + std::to_string(c.dim) + ")");
    if (!(c.length_x > 0.0)) bad("grid.length_x", "must be > 0");
    if (c.dim == 2 && !(c.length_y > 0.0)) bad("grid.length_y", "must be > 0");
    if (c.n_x < 3) bad("grid.n_x", "needs at least 3 interior nodes");
    if (c.dim == 2 && c.n_y < 3) bad("grid.n_y", "needs at least 3 interior nodes");

    if (!(c.a > 0.0)) bad("model.a", "must be > 0 (got " + num(c.a) + ")");
    if (c.strict ? !(c.b > 0.0) : !(c.b >= 0.0)) bad("model.b", c.strict ? "must be > 0" : "must be >= 0");
    if (!(c.gamma >= 1.0)) bad("model.gamma", "must be >= 1 (got " + num(c.gamma) + ")");
    const double lo_x = 0.0, hi_x = c.length_x;
    try {
        const auto m = FieldSpec::parse(c.m);
        const double mlo = m.min_over(lo_x, hi_x);
        if (c.strict && !(mlo >= 2.0))
            bad("model.m", "m- = " + num(mlo) + " but strict mode requires m- >= 2 (set model.strict = false)");
        else if (!(mlo > 1.0))
            bad("model.m", "m- = " + num(mlo) + " must exceed 1");
    } catch (const Error& e) {
        bad("model.m", e.what());
    }
    try {
        const auto p = FieldSpec::parse(c.p);
        const double plo = p.min_over(lo_x, hi_x);
        if (!(plo > 2.0)) bad("model.p", "p- = " + num(plo) + " must exceed 2");
    } catch (const Error& e) {
        bad("model.p", e.what());
    }
    for (auto [key, val] : {std::pair{"model.strong_damping", c.strong_damping}, std::pair{"model.weak_damping", c.weak_damping},
                            std::pair{"model.source", c.source}})
        if (!(val >= 0.0)) bad(key, "must be >= 0");

    const auto& f = c.initial.family;
    if (f != "zero" && f != "mode" && f != "bump" && f != "file")
        bad("initial.family", "must be zero, mode, bump or file (got '" + f + "')");
    if (!std::isfinite(c.initial.amplitude)) bad("initial.amplitude", "must be finite");
    if (c.initial.mode_x < 1 || c.initial.mode_y < 1) bad("initial.mode_x", "mode numbers start at 1");
    if (!(c.initial.radius > 0.0)) bad("initial.radius", "must be > 0");
    if (f == "file" && c.initial.file.empty()) bad("initial.file", "required when initial.family = file");
    if (!std::isfinite(c.initial.velocity_scale)) bad("initial.velocity_scale", "must be finite");

    if (!(c.horizon > 0.0)) bad("time.horizon", "must be > 0");
    if (!(c.dt_floor > 0.0)) bad("time.dt_floor", "must be > 0");
    if (!(c.dt_floor <= c.dt0)) bad("time.dt0", "must be >= time.dt_floor (" + num(c.dt_floor) + ")");
    if (!(c.dt0 <= c.dt_ceiling)) bad("time.dt0", "must be <= time.dt_ceiling (" + num(c.dt_ceiling) + ")");
    if (c.sample_stride < 1) bad("time.sample_stride", "must be >= 1");
    if (!(c.growth_max > 1.0)) bad("time.growth_max", "must be > 1");
    if (!(c.growth_min >= 1.0 && c.growth_min < c.growth_max)) bad("time.growth_min", "must lie in [1, growth_max)");
    if (c.calm_steps < 1) bad("time.calm_steps", "must be >= 1");
    if (!(c.blowup_norm > 0.0)) bad("time.blowup_norm", "must be > 0");
    if (c.max_steps < 1) bad("time.max_steps", "must be >= 1");
    if (c.solver != "auto" && c.solver != "pcg" && c.solver != "banded") bad("time.solver", "must be auto, pcg or banded");

    const auto& cm = c.constants_mode;
    if (cm != "analytic" && cm != "estimate" && cm != "user") bad("constants.mode", "must be analytic, estimate or user");
    for (auto [key, val] : {std::pair{"constants.B", c.user_B}, std::pair{"constants.S", c.user_S},
                            std::pair{"constants.S_star", c.user_S_star}})
        if (val && !(*val > 0.0)) bad(key, "must be > 0");
    if (!(c.q_star > 2.0)) bad("constants.q_star", "must be > 2");
    if (c.starts < 1) bad("constants.starts", "must be >= 1");
    if (!(c.safety >= 1.0)) bad("constants.safety", "must be >= 1");
    return v;
}

/// Parses and validates; throws ConfigError listing every violation.
inline RunConfig parse_config(std::string_view text) {
    RunConfig c;
    std::vector<std::string> errors;
    std::map<std::string, int> seen;
    bool dt0_set = false, ceiling_set = false;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(line_no);
        if (eq == std::string_view::npos) {
            errors.push_back(where + ": expected 'section.key = value'");
            continue;
        }
        const std::string key(detail::trim(line.substr(0, eq)));
        const auto value = detail::trim(line.substr(eq + 1));
        const auto* k = detail::find_key(key);
        if (!k) {
            errors.push_back(where + ": unknown key '" + key + "'");
            continue;
        }
        if (seen.count(key)) {
            errors.push_back(where + ": '" + key + "' repeats line " + std::to_string(seen[key]));
            continue;
        }
        seen[key] = line_no;
        if (!k->set(c, value)) errors.push_back(where + ": bad value '" + std::string(value) + "' for " + key);
        dt0_set = dt0_set || key == "time.dt0";
        ceiling_set = ceiling_set || key == "time.dt_ceiling";
    }
    try {
        if (!ceiling_set) c.dt_ceiling = default_dt_ceiling(make_grid(c));
        if (!dt0_set) c.dt0 = c.dt_ceiling;
    } catch (const Error& e) {
        errors.push_back(std::string("grid: ") + e.what());
    }
    // Range checks run even after line errors so every violation is reported.
    for (auto& v : validate(c)) errors.push_back(std::move(v));
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return c;
}

/// Every key in schema order, optional keys only when set.
inline std::string emit_config(const RunConfig& c) {
    std::string out;
    for (const auto& k : detail::schema())
        if (const auto v = k.get(c)) out += std::string(k.name) + " = " + *v + "\n";
    return out;
}

/// Replaces (or adds) one key in emitted text and re-parses it.
inline RunConfig with_override(const RunConfig& c, const std::string& key, const std::string& value) {
    if (!detail::find_key(key)) throw ConfigError({"unknown key '" + key + "'"});
    std::string text;
    std::istringstream in(emit_config(c));
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(key + " = ", 0) != 0) text += line + "\n";
    text += key + " = " + value + "\n";
    return parse_config(text);
}

/// FNV-1a 64 of the canonical text.
inline std::uint64_t config_hash(const RunConfig& c) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : emit_config(c)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline ModelParams make_model(const RunConfig& c, const Grid& g) {
    ModelParams mp;
    mp.a = c.a;
    mp.b = c.b;
    mp.gamma = c.gamma;
    mp.m = ExponentField::from_spec(g, c.m);
    mp.p = ExponentField::from_spec(g, c.p);
    mp.strong_damping = c.strong_damping;
    mp.weak_damping = c.weak_damping;
    mp.source = c.source;
    mp.soft_damping = !c.strict && mp.m.lo < 2.0;
    return mp;
}

inline RunOptions make_run_options(const RunConfig& c) {
    RunOptions o;
    o.horizon = c.horizon;
    o.dt0 = c.dt0;
    o.dt_floor = c.dt_floor;
    o.dt_ceiling = c.dt_ceiling;
    o.sample_stride = c.sample_stride;
    o.adaptive = c.adaptive;
    o.growth_max = c.growth_max;
    o.growth_min = c.growth_min;
    o.calm_steps = c.calm_steps;
    o.blowup_norm = c.blowup_norm;
    o.max_steps = c.max_steps;
    o.step.solver = c.solver == "pcg" ? SolverKind::pcg : c.solver == "banded" ? SolverKind::banded : SolverKind::automatic;
    return o;
}

inline EmbeddingOptions make_embedding_options(const RunConfig& c) {
    EmbeddingOptions o;
    o.mode = c.constants_mode == "analytic" ? ConstantsMode::analytic
             : c.constants_mode == "user"   ? ConstantsMode::user_supplied
                                            : ConstantsMode::estimate;
    o.q_star = c.q_star;
    o.starts = c.starts;
    o.seed = c.seed;
    o.safety = c.safety;
    o.user_B = c.user_B;
    o.user_S = c.user_S;
    o.user_S_star = c.user_S_star;
    return o;
}

}  // namespace pklab
