#pragma once

// Orchestration behind the CLI: simulate, bounds, sweep and norms.
// Artifacts go to $PKLAB_OUTPUT_DIR (default ./pklab-out):
//   <name>.config  canonical config echo
//   <name>.csv     sampled trace
//   <name>.report  key-value report, referencing the config hash

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pklab/bounds.hpp"
#include "pklab/config.hpp"
#include "pklab/embedding.hpp"
#include "pklab/error.hpp"
#include "pklab/initial_data.hpp"
#include "pklab/report.hpp"
#include "pklab/run.hpp"
#include "pklab/scenarios.hpp"
#include "pklab/varexp.hpp"

namespace pklab {

inline constexpr const char* output_dir_env = "PKLAB_OUTPUT_DIR";

inline std::filesystem::path output_dir() {
    const char* env = std::getenv(output_dir_env);
    std::filesystem::path dir = env && *env ? env : "pklab-out";
    std::filesystem::create_directories(dir);
    return dir;
}

/// "scenario:<name>" or a config file path.
inline RunConfig load_config(const std::string& arg) {
    if (arg.rfind("scenario:", 0) == 0) return scenario(arg.substr(9));
    std::ifstream in(arg);
    if (!in) throw ConfigError({"cannot read config file '" + arg + "'"});
    std::stringstream ss;
    ss << in.rdbuf();
    auto c = parse_config(ss.str());
    return c;
}

struct Setup {
    Grid grid;
    ModelParams model;
    SimState initial;
    EmbeddingConstants constants;
    InitialFunctionals functionals;
    BoundsReport bounds;
    std::optional<BoundsReport> bounds_safety;
};

inline BoundsOptions bounds_options(const RunConfig& c) {
    BoundsOptions o;
    o.tighten = c.tighten;
    return o;
}

inline Setup prepare(const RunConfig& c) {
    Setup s{make_grid(c), {}, {}, {}, {}, {}, {}};
    s.model = make_model(c, s.grid);
    const auto bad = s.model.violations(c.strict);
    if (!bad.empty()) throw ConfigError(bad);
    auto [u0, u1] = make_initial_data(s.grid, c.initial);
    s.initial = SimState(0.0, std::move(u0), std::move(u1), c.dt0);
    s.constants = estimate_embedding_constants(s.grid, s.model.p, make_embedding_options(c));
    s.functionals = initial_functionals(s.initial, s.model);
    const auto& f = s.functionals;
    for (double x : {f.E0, f.l2_u0, f.l2_u1, f.grad_u0, f.lap_u0, f.uv0})
        if (!std::isfinite(x)) throw NumericError("initial data gives non-finite energy functionals");
    const auto pb = summarize(s.model);
    s.bounds = full_report(pb, s.constants, s.functionals, bounds_options(c));
    if (c.safety > 1.0) {
        auto k = s.constants;
        k.B *= c.safety;
        k.B1 = std::fmax(1.0, k.B);
        s.bounds_safety = full_report(pb, k, s.functionals, bounds_options(c));
    }
    return s;
}

inline Monitors monitors_for(const RunConfig& c, const Setup& s) {
    Monitors m;
    const auto& b = s.bounds;
    if (c.mon_H && b.E2) m.E2 = b.E2;
    if (c.mon_Psi && b.C) m.psi = std::pair{*b.C, s.model.p.lo};
    if (c.mon_F && b.E2 && b.sigma && b.eps) m.F = Monitors::FParams{*b.E2, *b.sigma, *b.eps};
    if (c.mon_Upsilon && b.rho && b.omega && b.T_upper_thm42)
        m.upsilon = UpsilonParams{*b.T_upper_thm42, *b.rho, *b.omega, s.functionals.l2_u0, s.functionals.grad_u0};
    return m;
}

/// Observed-versus-predicted checks on a finished run.
struct Comparison {
    std::optional<bool> lower_ok, upper31_ok, upper42_ok;
    std::optional<long> envelope_violations;
    std::optional<double> decay_rate;
    std::optional<long> invariant_violations;
    std::string invariant_kind;
    std::optional<long> psi_violations;
    std::optional<double> psi_min_ratio;

    /// "consistent", "violated" or "n/a".
    std::string verdict() const {
        bool any = false, bad = false;
        for (const auto& v : {lower_ok, upper31_ok, upper42_ok})
            if (v) any = true, bad = bad || !*v;
        for (const auto& v : {envelope_violations, invariant_violations, psi_violations})
            if (v) any = true, bad = bad || *v > 0;
        if (!any) return "n/a";
        return bad ? "violated" : "consistent";
    }
};

/// Least-squares slope of -log E over samples with E > 0.
inline std::optional<double> fitted_decay_rate(const std::vector<EnergySample>& trace) {
    double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
    for (const auto& e : trace) {
        if (!(e.E > 0.0)) continue;
        const double y = std::log(e.E);
        n += 1;
        st += e.t;
        sy += y;
        stt += e.t * e.t;
        sty += e.t * y;
    }
    const double det = n * stt - st * st;
    if (n < 3 || !(det > 0.0)) return std::nullopt;
    return -(n * sty - st * sy) / det;
}

inline Comparison compare(const Setup& s, const RunResult& r, double C) {
    Comparison cmp;
    const auto& b = s.bounds;
    const double B1sq = s.constants.B1 * s.constants.B1;
    if (r.T_num) {
        if (b.T_lower) cmp.lower_ok = *b.T_lower <= *r.T_num;
        if (b.T_upper_thm31) cmp.upper31_ok = *r.T_num <= *b.T_upper_thm31;
        if (b.T_upper_thm42) cmp.upper42_ok = *r.T_num <= *b.T_upper_thm42;
    }
    if (b.K_decay) {
        long bad = 0;
        for (const auto& e : r.trace)
            if (e.E > b.E0 * std::exp(1.0 - *b.K_decay * e.t) + 1e-12 * std::fabs(b.E0)) ++bad;
        cmp.envelope_violations = bad;
        cmp.decay_rate = fitted_decay_rate(r.trace);
    }
    if (b.regime == Regime::global_candidate && b.alpha2_tilde) {
        long bad = 0;
        for (const auto& e : r.trace)
            if (B1sq * e.norm_lap_u_2 * e.norm_lap_u_2 > *b.alpha2_tilde * 1.001) ++bad;
        cmp.invariant_violations = bad;
        cmp.invariant_kind = "B1^2 ||Lap u||^2 <= alpha2~ (1 + 1e-3)";
    } else if (b.regime == Regime::blowup_low_energy && b.alpha2) {
        long bad = 0;
        for (const auto& e : r.trace)
            if (std::isfinite(e.norm_lap_u_2) && B1sq * e.norm_lap_u_2 * e.norm_lap_u_2 < *b.alpha2 * 0.999) ++bad;
        cmp.invariant_violations = bad;
        cmp.invariant_kind = "B1^2 ||Lap u||^2 >= alpha2 (1 - 1e-3)";
    }
    if (b.regime == Regime::blowup_high_energy && !r.trace.empty() && r.trace.front().Psi) {
        const double psi0 = *r.trace.front().Psi;
        long bad = 0;
        double mn = std::numeric_limits<double>::infinity();
        for (const auto& e : r.trace) {
            if (!e.Psi || !std::isfinite(*e.Psi)) continue;
            const double ratio = *e.Psi / (psi0 * std::exp(C * e.t));
            mn = std::fmin(mn, ratio);
            if (ratio < 0.95) ++bad;
        }
        cmp.psi_violations = bad;
        cmp.psi_min_ratio = mn;
    }
    return cmp;
}

struct Artifacts {
    RunConfig config;
    std::string hash;
    std::filesystem::path config_path, csv_path, report_path;
    Setup setup;
    std::optional<RunResult> result;
    Comparison comparison;
    KeyValueReport report;
    ExitCode exit = ExitCode::success;
    std::string error;
};

inline void add_run(KeyValueReport& kv, const RunResult& r) {
    kv.enumeration("run.outcome", to_string(r.outcome));
    kv.real("run.T_num", r.T_num, "no blow-up");
    if (r.fit) {
        kv.real("run.fit_kappa", r.fit->kappa);
        kv.real("run.fit_c", r.fit->c);
        kv.real("run.fit_rms", r.fit->rms);
        kv.integer("run.fit_crossings", r.fit->crossings);
    }
    kv.real("run.final_t", r.final_state.t);
    kv.integer("run.accepted_steps", r.accepted);
    kv.integer("run.rejected_steps", r.rejected);
    kv.real("run.min_dt", r.min_dt);
    kv.real("run.max_dt", r.max_dt);
    kv.real("run.max_abs_residual", r.max_abs_residual);
    kv.real("run.sum_abs_residual", r.sum_abs_residual);
    kv.integer("run.energy_increase_violations", r.energy_increase_violations);
    kv.integer("run.samples", static_cast<long long>(r.trace.size()));
    kv.text("run.message", r.message.empty() ? "-" : r.message);
}

inline void add_comparison(KeyValueReport& kv, const Comparison& c) {
    auto flag = [&](const char* k, const std::optional<bool>& v) {
        if (v) kv.boolean(k, *v);
        else kv.real(k, std::nullopt, "not applicable");
    };
    flag("compare.T_lower_le_T_num", c.lower_ok);
    flag("compare.T_num_le_T_upper_thm31", c.upper31_ok);
    flag("compare.T_num_le_T_upper_thm42", c.upper42_ok);
    auto count = [&](const char* k, const std::optional<long>& v) {
        if (v) kv.integer(k, *v);
        else kv.real(k, std::nullopt, "not applicable");
    };
    count("compare.envelope_violations", c.envelope_violations);
    kv.real("compare.decay_rate_fit", c.decay_rate, "not applicable");
    count("compare.invariant_violations", c.invariant_violations);
    if (!c.invariant_kind.empty()) kv.text("compare.invariant", c.invariant_kind);
    count("compare.psi_violations", c.psi_violations);
    kv.real("compare.psi_min_ratio", c.psi_min_ratio, "not applicable");
    kv.enumeration("compare.verdict", c.verdict());
}

inline void add_header(KeyValueReport& kv, const RunConfig& c, const std::string& hash, const std::string& kind) {
    kv.text("report.format", "pklab-report-1");
    kv.enumeration("report.kind", kind);
    kv.text("config.name", c.name);
    kv.text("config.hash", hash);
}

namespace detail {

inline void add_setup(KeyValueReport& kv, const Setup& s) {
    kv.real("initial.E0", s.functionals.E0);
    kv.real("initial.l2_u0", s.functionals.l2_u0);
    kv.real("initial.l2_u1", s.functionals.l2_u1);
    kv.real("initial.grad_u0", s.functionals.grad_u0);
    kv.real("initial.lap_u0", s.functionals.lap_u0);
    kv.real("initial.uv0", s.functionals.uv0);
    add_constants(kv, s.constants);
    add_bounds(kv, s.bounds);
    if (s.bounds_safety) add_bounds(kv, *s.bounds_safety, "bounds_safety.");
}

}  // namespace detail

/// Runs the configured simulation. Numeric failures are reported (exit 3),
/// never thrown; config problems throw ConfigError.
inline Artifacts simulate(const RunConfig& c, const std::filesystem::path& dir, bool write = true) {
    Artifacts a;
    a.config = c;
    a.hash = hash_hex(config_hash(c));
    a.config_path = dir / (c.name + ".config");
    a.csv_path = dir / (c.name + ".csv");
    a.report_path = dir / (c.name + ".report");
    add_header(a.report, c, a.hash, "simulate");
    try {
        a.setup = prepare(c);
        detail::add_setup(a.report, a.setup);
        std::optional<CsvTrace> csv;
        if (write) {
            write_atomic(a.config_path, emit_config(c));
            csv.emplace(a.csv_path);
        }
        SampleSink sink;
        if (csv) sink = [&](const EnergySample& e) { csv->add(e); };
        try {
            a.result = run(a.setup.model, a.setup.initial, make_run_options(c), monitors_for(c, a.setup), sink);
        } catch (const RunFailure& f) {
            a.result = f.partial();
            a.error = f.what();
            a.exit = ExitCode::numeric_failure;
        }
        if (csv) csv->commit();
        if (a.result->outcome == Outcome::step_floor_abort) a.exit = ExitCode::numeric_failure;
        a.comparison = compare(a.setup, *a.result, a.setup.bounds.C.value_or(0.0));
        add_run(a.report, *a.result);
        add_comparison(a.report, a.comparison);
        if (write) a.report.text("files.trace", a.csv_path.filename().string());
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        a.exit = ExitCode::numeric_failure;
        a.error = e.what();
    }
    if (!a.error.empty()) a.report.text("run.error", a.error);
    a.report.integer("run.exit_code", static_cast<int>(a.exit));
    if (write) a.report.write(a.report_path);
    return a;
}

/// Bounds only, no time integration.
inline Artifacts bounds_only(const RunConfig& c, const std::filesystem::path& dir, bool write = true) {
    Artifacts a;
    a.config = c;
    a.hash = hash_hex(config_hash(c));
    a.config_path = dir / (c.name + ".config");
    a.report_path = dir / (c.name + ".bounds.report");
    add_header(a.report, c, a.hash, "bounds");
    try {
        a.setup = prepare(c);
        detail::add_setup(a.report, a.setup);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        a.exit = ExitCode::numeric_failure;
        a.error = e.what();
        a.report.text("run.error", a.error);
    }
    if (write) {
        write_atomic(a.config_path, emit_config(c));
        a.report.write(a.report_path);
    }
    return a;
}

struct SweepRow {
    std::string value;
    std::string outcome = "-";
    std::string regime = "-";
    std::optional<double> T_num, T_upper_thm31, T_upper_thm42, T_lower, K_decay;
    std::string verdict = "-";
    std::string error;
};

inline std::vector<std::string> split_values(const std::string& list) {
    const char sep = list.find(';') != std::string::npos ? ';' : ',';
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, sep)) {
        const auto t = detail::trim(item);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

/// One variant per value, run concurrently. A failing variant only marks
/// its own row.
inline std::vector<SweepRow> sweep(const RunConfig& base, const std::string& axis, const std::vector<std::string>& values,
                                   const std::filesystem::path& dir, bool simulate_runs = true, int threads = 0) {
    if (values.empty()) throw ConfigError({"sweep needs at least one value"});
    if (!detail::find_key(axis)) throw ConfigError({"unknown sweep axis '" + axis + "'"});
    std::vector<SweepRow> rows(values.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            SweepRow& row = rows[i];
            row.value = values[i];
            try {
                RunConfig c = with_override(base, axis, values[i]);
                if (values.size() > 1) c.name = base.name + "." + std::to_string(i);
                const auto a = simulate_runs ? simulate(c, dir) : bounds_only(c, dir);
                row.regime = to_string(a.setup.bounds.regime);
                row.T_upper_thm31 = a.setup.bounds.T_upper_thm31;
                row.T_upper_thm42 = a.setup.bounds.T_upper_thm42;
                row.T_lower = a.setup.bounds.T_lower;
                row.K_decay = a.setup.bounds.K_decay;
                if (a.result) {
                    row.outcome = to_string(a.result->outcome);
                    row.T_num = a.result->T_num;
                    row.verdict = a.comparison.verdict();
                }
                row.error = a.error;
            } catch (const ConfigError& e) {
                row.error = std::string("config: ") + e.what();
            } catch (const std::exception& e) {
                row.error = e.what();
            } catch (...) {
                row.error = "unknown failure";
            }
        }
    };
    const int n = threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min<int>(n, static_cast<int>(values.size())); ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    return rows;
}

inline std::string sweep_table(const std::string& axis, const std::vector<SweepRow>& rows) {
    auto opt = [](const std::optional<double>& x) { return x ? detail::format_double(*x) : std::string(); };
    auto quote = [](std::string s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return q + "\"";
    };
    std::string out = axis + ",outcome,regime,T_num,T_upper_thm31,T_upper_thm42,T_lower,K_decay,verdict,error\n";
    for (const auto& r : rows)
        out += quote(r.value) + "," + r.outcome + "," + r.regime + "," + opt(r.T_num) + "," + opt(r.T_upper_thm31) + "," +
               opt(r.T_upper_thm42) + "," + opt(r.T_lower) + "," + opt(r.K_decay) + "," + r.verdict + "," +
               quote(r.error) + "\n";
    return out;
}

struct NormsResult {
    double modular = 0.0;
    double norm = 0.0;
    SandwichReport sandwich;
};

/// Modular, Luxemburg norm and sandwich check of f in L^{p(.)} on a
/// cell-centered grid of [0, length].
inline NormsResult norms(const std::string& f_spec, const std::string& p_spec, double length = 1.0, int cells = 200) {
    const Grid g = Grid::cells(length, cells);
    const auto f = FieldSpec::parse(f_spec).sample(g);
    const auto p = ExponentField::from_spec(g, p_spec);
    if (!(p.lo > 1.0)) throw ConfigError({"exponent must exceed 1 everywhere (p- = " + detail::format_double(p.lo) + ")"});
    NormsResult r;
    r.modular = modular(f, p);
    r.norm = luxemburg_norm(f, p);
    r.sandwich = check_sandwich(f, p);
    return r;
}

}  // namespace pklab
