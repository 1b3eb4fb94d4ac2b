#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pklab/pklab.hpp"
#include "support/gen.hpp"

using namespace pklab;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / ("pklab-test-" + name);
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> violations_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.violations();
    }
    return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& s : v)
        if (s.find(needle) != std::string::npos) return true;
    return false;
}

// E(A phi) with zero velocity, written out term by term for constant p.
double mode_energy_poly(const RunConfig& c, const GridFunction& phi, double A) {
    const double lap = lap_norm_sq(phi), grad = grad_norm_sq(phi);
    const double p = std::stod(c.p.substr(c.p.find(':') + 1));
    const auto pf = ExponentField::constant(phi.grid, p);
    const double s = A * A * grad;
    return 0.5 * A * A * lap + 0.5 * c.a * s + c.b * std::pow(s, c.gamma + 1.0) / (2.0 * (c.gamma + 1.0)) -
           std::pow(A, p) * modular(phi, pf) / p;
}

}  // namespace

TEST(Config, MinimalConfigGetsDefaultCeiling) {
    const auto c = parse_config("grid.dim = 1\ngrid.n_x = 50\n");
    const double h = 1.0 / 51.0;
    EXPECT_NEAR(c.dt_ceiling, h * h / 4.0, 1e-15);
    EXPECT_EQ(c.dt0, c.dt_ceiling);
}

TEST(Config, EmitParseRoundTrip) {
    for (const auto& name : scenario_names()) {
        const auto c = scenario(name);
        const auto back = parse_config(emit_config(c));
        EXPECT_EQ(back, c) << name;
        EXPECT_EQ(config_hash(back), config_hash(c));
    }
}

TEST(Config, RoundTripRandomOverrides) {
    check::Gen gen(5);
    for (int i = 0; i < 50; ++i) {
        RunConfig c = scenario("decay");
        c = with_override(c, "model.a", std::to_string(gen.uniform(0.1, 5.0)));
        c = with_override(c, "model.b", std::to_string(gen.uniform(0.1, 5.0)));
        c = with_override(c, "model.gamma", std::to_string(gen.uniform(1.0, 3.0)));
        c = with_override(c, "time.horizon", std::to_string(gen.uniform(0.1, 3.0)));
        EXPECT_EQ(parse_config(emit_config(c)), c);
    }
}

TEST(Config, CommentsAndBlankLines) {
    const auto c = parse_config("# comment\n\n  grid.n_x = 40  \n");
    EXPECT_EQ(c.n_x, 40);
}

TEST(Config, StrictModeRejectsSublinearDamping) {
    const auto v = violations_of("grid.dim = 1\nmodel.m = constant:1.5\n");
    EXPECT_TRUE(mentions(v, "m- >= 2")) << v.size();
}

TEST(Config, GammaBelowOneRejected) {
    EXPECT_TRUE(mentions(violations_of("grid.dim = 1\nmodel.gamma = 0.5\n"), "model.gamma"));
}

TEST(Config, NonStrictAllowsSublinearDamping) {
    const auto c = parse_config("grid.dim = 1\nmodel.strict = false\nmodel.m = constant:1.5\n");
    EXPECT_FALSE(c.strict);
}

TEST(Config, UnknownAndDuplicateKeys) {
    const auto v = violations_of("grid.dim = 1\ngrid.bogus = 3\ngrid.dim = 1\n");
    EXPECT_TRUE(mentions(v, "unknown key 'grid.bogus'"));
    EXPECT_TRUE(mentions(v, "repeats line 1"));
}

TEST(Config, AllViolationsCollected) {
    const auto v = violations_of("foo.bar = 1\nmodel.gamma = 0.5\nmodel.m = constant:1.5\nmodel.a = -1\n");
    EXPECT_EQ(v.size(), 4u);
    EXPECT_TRUE(mentions(v, "foo.bar"));
    EXPECT_TRUE(mentions(v, "model.gamma"));
    EXPECT_TRUE(mentions(v, "model.m"));
    EXPECT_TRUE(mentions(v, "model.a"));
}

TEST(Config, BadValueAndMalformedLine) {
    const auto v = violations_of("grid.n_x = many\nno equals sign\n");
    EXPECT_TRUE(mentions(v, "bad value"));
    EXPECT_TRUE(mentions(v, "expected 'section.key = value'"));
}

TEST(Config, HashTracksContent) {
    const auto c = scenario("global");
    EXPECT_EQ(config_hash(c), config_hash(scenario("global")));
    EXPECT_NE(config_hash(c), config_hash(with_override(c, "model.a", "2")));
    EXPECT_EQ(hash_hex(config_hash(c)).size(), 16u);
}

TEST(Config, OverrideUnknownKeyThrows) {
    EXPECT_THROW(with_override(scenario("global"), "grid.nope", "1"), ConfigError);
}

TEST(Scenarios, UnknownNameIsConfigError) { EXPECT_THROW(scenario("nope"), ConfigError); }

TEST(Scenarios, RegimesAsDesigned) {
    EXPECT_EQ(prepare(scenario("global")).bounds.regime, Regime::global_candidate);
    EXPECT_EQ(prepare(scenario("decay")).bounds.regime, Regime::global_candidate);
    EXPECT_EQ(prepare(scenario("blowup-low")).bounds.regime, Regime::blowup_low_energy);
    EXPECT_EQ(prepare(scenario("blowup-high")).bounds.regime, Regime::blowup_high_energy);
}

TEST(Scenarios, RefinementKeepsAmplitude) {
    EXPECT_EQ(scenario("blowup-low", 128).initial.amplitude, scenario("blowup-low").initial.amplitude);
    EXPECT_EQ(scenario("blowup-low", 128).n_x, 128);
}

TEST(Report, CsvHeaderHasFixedColumns) {
    EXPECT_EQ(csv_header(),
              "t,dt,E,H,Psi,F,Upsilon,R,norm_u_2,norm_grad_u_2,norm_lap_u_2,norm_u_px,modular_u_p,modular_v_m,diss_residual");
}

TEST(Report, AbsentValuesCarryReason) {
    KeyValueReport kv;
    kv.real("x", std::optional<double>{}, "no reason needed");
    kv.real("y", std::optional<double>{2.5});
    EXPECT_EQ(kv.str(), "x : absent = no reason needed\ny : real = 2.5\n");
}

TEST(Report, AtomicWriteLeavesNoTemporary) {
    const auto d = fresh_dir("atomic");
    write_atomic(d / "a.txt", "hello\n");
    EXPECT_EQ(slurp(d / "a.txt"), "hello\n");
    EXPECT_FALSE(std::filesystem::exists(d / "a.txt.tmp"));
}

TEST(Harness, SimulateWritesReportWithHash) {
    const auto d = fresh_dir("simulate");
    const auto a = simulate(scenario("blowup-low"), d);
    EXPECT_EQ(a.exit, ExitCode::success);
    const auto text = slurp(a.report_path);
    EXPECT_NE(text.find("config.hash : text = " + a.hash), std::string::npos);
    EXPECT_NE(text.find("bounds.T_upper_thm31 : real"), std::string::npos);
    EXPECT_NE(text.find("bounds.T_lower : real"), std::string::npos);
    EXPECT_NE(text.find("bounds.K_decay : absent"), std::string::npos);
    EXPECT_NE(text.find("run.T_num : real"), std::string::npos);
    EXPECT_EQ(parse_config(slurp(a.config_path)), a.config);
    const auto csv = slurp(a.csv_path);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), csv_header());
    for (const auto& e : std::filesystem::directory_iterator(d))
        EXPECT_NE(e.path().extension(), ".tmp") << e.path();
}

TEST(Harness, DecayReportHasCertificate) {
    const auto a = simulate(scenario("decay"), ".", false);
    EXPECT_TRUE(a.report.find("bounds.K_decay : real"));
    EXPECT_EQ(a.comparison.envelope_violations, 0L);
    EXPECT_EQ(a.comparison.verdict(), "consistent");
}

TEST(Harness, DeterministicOutputs) {
    const auto d1 = fresh_dir("det1"), d2 = fresh_dir("det2");
    const auto a = simulate(scenario("blowup-high"), d1);
    const auto b = simulate(scenario("blowup-high"), d2);
    EXPECT_EQ(slurp(a.csv_path), slurp(b.csv_path));
    EXPECT_EQ(slurp(a.report_path), slurp(b.report_path));
    EXPECT_EQ(slurp(a.config_path), slurp(b.config_path));
}

TEST(Harness, ZeroDataIsGlobalCandidate) {
    auto c = with_override(scenario("global"), "initial.amplitude", "0");
    const auto a = bounds_only(c, ".", false);
    EXPECT_EQ(a.setup.bounds.regime, Regime::global_candidate);
}

TEST(Harness, NonFiniteDataIsNumericFailure) {
    auto c = with_override(scenario("blowup-low"), "initial.amplitude", "1e200");
    const auto a = simulate(c, ".", false);
    EXPECT_EQ(a.exit, ExitCode::numeric_failure);
}

TEST(Sweep, EmptyListIsConfigError) {
    EXPECT_THROW(sweep(scenario("global"), "initial.amplitude", split_values(" , "), ".", false), ConfigError);
    EXPECT_THROW(sweep(scenario("global"), "grid.nope", {"1"}, ".", false), ConfigError);
}

TEST(Sweep, SplitValues) {
    EXPECT_EQ(split_values("1, 2,3"), (std::vector<std::string>{"1", "2", "3"}));
    EXPECT_EQ(split_values("piecewise:2,3@0.5; constant:4"),
              (std::vector<std::string>{"piecewise:2,3@0.5", "constant:4"}));
}

TEST(Sweep, FailingVariantIsIsolated) {
    const auto d = fresh_dir("isolation");
    const auto base = scenario("blowup-high");
    const std::vector<std::string> values{"1", "-1", "2", "oops", "1.5"};
    const auto rows = sweep(base, "model.a", values, d, false, 4);
    ASSERT_EQ(rows.size(), values.size());
    EXPECT_FALSE(rows[1].error.empty());
    EXPECT_FALSE(rows[3].error.empty());
    for (std::size_t i : {0u, 2u, 4u}) {
        EXPECT_TRUE(rows[i].error.empty()) << rows[i].error;
        const auto solo = bounds_only(with_override(base, "model.a", values[i]), ".", false);
        EXPECT_EQ(rows[i].regime, to_string(solo.setup.bounds.regime));
        EXPECT_EQ(rows[i].T_upper_thm42, solo.setup.bounds.T_upper_thm42);
    }
}

TEST(Sweep, SingleValueMatchesSimulate) {
    const auto d1 = fresh_dir("single1"), d2 = fresh_dir("single2");
    const auto base = scenario("blowup-low");
    const auto v = detail::format_double(base.initial.amplitude);
    sweep(base, "initial.amplitude", {v}, d1);
    const auto a = simulate(with_override(base, "initial.amplitude", v), d2);
    EXPECT_EQ(slurp(d1 / (base.name + ".report")), slurp(a.report_path));
    EXPECT_EQ(slurp(d1 / (base.name + ".csv")), slurp(a.csv_path));
}

// The regime leaves global_candidate once alpha0 reaches alpha1 and becomes
// blowup_low_energy once E(0) drops below E1; both flips must land within
// one sweep step of the amplitudes predicted from the mode's norms.
TEST(Sweep, AmplitudeSweepFlipsAtPredictedThresholds) {
    const auto base = scenario("global");
    const auto s = prepare(base);
    const GridFunction phi = beam_mode(s.grid, base.initial.mode_x, base.initial.mode_y);
    const double B1 = s.constants.B1, alpha1 = s.bounds.alpha1, E1 = s.bounds.E1;
    const double A1 = std::sqrt(alpha1 / (B1 * B1 * lap_norm_sq(phi)));

    // E decreases past its maximum; find where it crosses E1.
    double lo = A1, hi = 2.0 * A1;
    while (mode_energy_poly(base, phi, hi) > E1) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mode_energy_poly(base, phi, mid) > E1 ? lo : hi) = mid;
    }
    const double A_low = hi;
    ASSERT_GT(A_low, A1);

    const double start = 0.5 * A1, step = (1.3 * A_low - start) / 80.0;
    std::vector<std::string> values;
    for (int i = 0; i <= 80; ++i) values.push_back(detail::format_double(start + step * i));
    const auto rows = sweep(base, "initial.amplitude", values, fresh_dir("flip"), false);

    int first_non_global = -1, first_low = -1;
    for (int i = 0; i <= 80; ++i) {
        ASSERT_TRUE(rows[i].error.empty()) << rows[i].error;
        if (first_non_global < 0 && rows[i].regime != "global_candidate") first_non_global = i;
        if (first_low < 0 && rows[i].regime == "blowup_low_energy") first_low = i;
        if (first_non_global >= 0) EXPECT_NE(rows[i].regime, "global_candidate") << i;
        if (first_low >= 0) EXPECT_EQ(rows[i].regime, "blowup_low_energy") << i;
    }
    const double predicted_non_global = (A1 - start) / step, predicted_low = (A_low - start) / step;
    EXPECT_LE(std::fabs(first_non_global - predicted_non_global), 1.0);
    EXPECT_LE(std::fabs(first_low - predicted_low), 1.0);
}

TEST(Norms, PlasticNumberExample) {
    const auto r = norms("constant:1", "piecewise:2,3@1", 2.0, 64);
    EXPECT_NEAR(r.norm, 1.324717957244746, 1e-9);
    EXPECT_NEAR(r.modular, 2.0, 1e-12);
    EXPECT_TRUE(r.sandwich.holds);
}

TEST(Norms, ConstantExponentReducesToLp) {
    const auto r = norms("constant:3", "constant:4", 1.0, 100);
    EXPECT_NEAR(r.norm, 3.0, 1e-10);
    EXPECT_NEAR(r.modular, 81.0, 1e-9);
}

TEST(Norms, ExponentAtMostOneRejected) { EXPECT_THROW(norms("constant:1", "constant:1"), ConfigError); }
