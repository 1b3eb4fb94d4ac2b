#include <gtest/gtest.h>

#include <cmath>

#include "pklab/varexp.hpp"
#include "support/gen.hpp"

using namespace pklab;

namespace {

// Scalar bisection for lambda^-2 + lambda^-3 = 1 (f = 1 on [0,2], p = 2 | 3).
double plastic_oracle() {
    double lo = 1.0, hi = 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (1.0 / (mid * mid) + 1.0 / (mid * mid * mid) > 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST(ExponentField, ConstantPasses) {
    auto f = ExponentField::constant(Grid::line(1.0, 20), 4.0);
    auto r = validate_exponent_field(f, 2.0, 10.0);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.lo, 4.0);
}

TEST(ExponentField, NodeAtOneFails) {
    auto g = Grid::line(1.0, 10);
    std::vector<double> v(10, 3.0);
    v[6] = 1.0;
    ExponentField f(g, v);
    auto r = validate_exponent_field(f, 2.0, 10.0);
    EXPECT_FALSE(r.passed);
    ASSERT_EQ(r.offending.size(), 1u);
    EXPECT_EQ(r.offending[0], 6u);
}

TEST(ExponentField, PiecewiseExtrema) {
    auto f = ExponentField::from_spec(Grid::line(1.0, 40), "piecewise:2,3@0.5");
    auto r = validate_exponent_field(f, 2.0, 6.0);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.lo, 2.0);
    EXPECT_EQ(r.hi, 3.0);
}

TEST(ExponentField, EmptyThrows) {
    ExponentField f;
    EXPECT_THROW(validate_exponent_field(f, 2.0, 3.0), InvalidInput);
}

TEST(FieldSpec, ParseAndPrint) {
    for (const char* s : {"constant:4", "piecewise:2,3@0.5", "affine:2+1*x", "affine:2.5-0.5*x", "affine:1e-3+2E+1*x"}) {
        const auto spec = FieldSpec::parse(s);
        const auto again = FieldSpec::parse(spec.to_string());
        EXPECT_EQ(again.kind, spec.kind);
        EXPECT_EQ(again.v1, spec.v1);
        EXPECT_EQ(again.v2, spec.v2);
        EXPECT_EQ(again.split, spec.split);
    }
    EXPECT_EQ(FieldSpec::parse("affine:2.5-0.5*x").v2, -0.5);
    EXPECT_EQ(FieldSpec::parse("affine:1e-3+2E+1*x").v2, 20.0);
    EXPECT_THROW(FieldSpec::parse("quadratic:1"), InvalidInput);
    EXPECT_THROW(FieldSpec::parse("constant:abc"), InvalidInput);
    EXPECT_THROW(FieldSpec::parse("piecewise:2@3,1"), InvalidInput);
}

TEST(LogHolder, ConstantFieldHasNoViolation) {
    auto f = ExponentField::constant(Grid::line(1.0, 50), 3.0);
    auto r = log_holder_check(f, 1.0, 0.5);
    EXPECT_EQ(r.max_violation, 0.0);
    EXPECT_TRUE(r.passed);
}

TEST(LogHolder, SmoothFieldMatchesExhaustiveScan) {
    auto g = Grid::line(1.0, 60);
    auto f = ExponentField::from_spec(g, "affine:2+1*x");
    auto r = log_holder_check(f, 10.0, 0.5);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double d = std::fabs(g.position(i)[0] - g.position(j)[0]);
            if (d > 0 && d < 0.5) worst = std::max(worst, std::fabs(f[i] - f[j]) * -std::log(d));
        }
    EXPECT_NEAR(r.max_violation, worst, 1e-12);
    EXPECT_TRUE(r.passed);
}

TEST(LogHolder, JumpFieldFails) {
    // Nodes at spacing 0.01 straddling a unit jump.
    auto g = Grid::line(1.0, 99);
    auto f = ExponentField::from_spec(g, "piecewise:2,3@0.505");
    auto r = log_holder_check(f, 0.1, 0.5);
    EXPECT_FALSE(r.passed);
    EXPECT_NEAR(r.max_violation, -std::log(0.01), 1e-9);
}

TEST(LogHolder, RejectsBadArguments) {
    auto f = ExponentField::constant(Grid::line(1.0, 5), 3.0);
    EXPECT_THROW(log_holder_check(f, 1.0, 1.5), InvalidInput);
    EXPECT_THROW(log_holder_check(f, 0.0, 0.5), InvalidInput);
}

TEST(Modular, Examples) {
    auto g = Grid::cells(1.0, 16);
    auto p = ExponentField::from_spec(g, "affine:2+3*x");
    EXPECT_EQ(modular(GridFunction(g, 0.0), p), 0.0);
    EXPECT_NEAR(modular(GridFunction(g, 1.0), p), 1.0, 1e-15);
    EXPECT_NEAR(modular(GridFunction(g, 2.0), ExponentField::constant(g, 2.0)), 4.0, 1e-14);
    EXPECT_THROW(modular(GridFunction(Grid::cells(1.0, 8), 1.0), p), InvalidInput);
}

TEST(Luxemburg, Examples) {
    auto g = Grid::cells(1.0, 32);
    auto p = ExponentField::from_spec(g, "affine:2+1.5*x");
    EXPECT_EQ(luxemburg_norm(GridFunction(g, 0.0), p), 0.0);
    EXPECT_NEAR(luxemburg_norm(GridFunction(g, 3.0), p), 3.0, 3e-12);

    auto g2 = Grid::cells(2.0, 64);
    auto p2 = ExponentField::from_spec(g2, "piecewise:2,3@1");
    EXPECT_NEAR(luxemburg_norm(GridFunction(g2, 1.0), p2), plastic_oracle(), 1e-9);
    EXPECT_NEAR(plastic_oracle(), 1.324718, 1e-6);
}

TEST(Luxemburg, NonFiniteThrows) {
    auto g = Grid::cells(1.0, 4);
    GridFunction f(g, 1.0);
    f[2] = NAN;
    EXPECT_THROW(luxemburg_norm(f, ExponentField::constant(g, 2.0)), InvalidInput);
}

TEST(LuxemburgProperty, ConstantExponentReduction) {
    check::Gen gen(11);
    for (int trial = 0; trial < 300; ++trial) {
        auto g = gen.grid(gen.coin());
        const double q = gen.uniform(1.1, 8.0);
        auto f = gen.function(g);
        auto p = ExponentField::constant(g, q);
        const double n = luxemburg_norm(f, p);
        EXPECT_LE(std::fabs(n - std::pow(modular(f, p), 1.0 / q)), 1e-10 * n) << "trial " << trial;
    }
}

TEST(LuxemburgProperty, Homogeneity) {
    check::Gen gen(12);
    for (int trial = 0; trial < 300; ++trial) {
        auto g = gen.grid(gen.coin());
        auto f = gen.function(g);
        auto p = gen.exponent(g, 1.2, 7.0);
        const double c = (gen.coin() ? 1 : -1) * std::pow(10.0, gen.uniform(-3, 3));
        const double n1 = luxemburg_norm(f, p);
        const double n2 = luxemburg_norm(c * f, p);
        EXPECT_NEAR(n2, std::fabs(c) * n1, 1e-10 * std::fabs(c) * n1) << "trial " << trial;
    }
}

TEST(LuxemburgProperty, ModularAtNormIsJustBelowOne) {
    check::Gen gen(13);
    for (int trial = 0; trial < 300; ++trial) {
        auto g = gen.grid(gen.coin());
        auto f = gen.function(g);
        auto p = gen.exponent(g, 1.2, 7.0);
        const double n = luxemburg_norm(f, p);
        const double m = modular((1.0 / n) * f, p);
        EXPECT_LE(m, 1.0 + 1e-14);
        EXPECT_GE(m, 1.0 - 10 * p.hi * default_norm_tol);
    }
}

TEST(LuxemburgProperty, EmbeddingMonotonicity) {
    check::Gen gen(14);
    for (int trial = 0; trial < 300; ++trial) {
        auto g = gen.grid(gen.coin());
        auto f = gen.function(g);
        auto q = gen.exponent(g, 1.2, 4.0);
        std::vector<double> pv = q.values;
        for (double& x : pv) x += gen.uniform(0.0, 3.0);
        ExponentField p(g, pv);
        EXPECT_LE(luxemburg_norm(f, q), (1.0 + g.measure()) * luxemburg_norm(f, p) * (1 + 1e-11));
    }
}

TEST(Sandwich, ConstantExponentCollapses) {
    auto g = Grid::cells(1.0, 20);
    check::Gen gen(3);
    auto f = gen.function(g);
    auto r = check_sandwich(f, ExponentField::constant(g, 3.0));
    EXPECT_TRUE(r.holds);
    EXPECT_EQ(r.lower, r.upper);
    EXPECT_NEAR(r.modular, r.lower, 1e-10 * r.modular);
}

TEST(Sandwich, NormOneFunction) {
    auto g = Grid::cells(1.0, 20);
    auto r = check_sandwich(GridFunction(g, 1.0), ExponentField::from_spec(g, "piecewise:2,3@0.5"));
    EXPECT_TRUE(r.holds);
    EXPECT_NEAR(r.norm, 1.0, 1e-11);
    EXPECT_NEAR(r.modular, 1.0, 1e-14);
}

TEST(SandwichProperty, RandomPiecewiseFields) {
    check::Gen gen(21);
    auto g = Grid::cells(1.0, 50);
    auto p = ExponentField::from_spec(g, "piecewise:2,3@0.5");
    for (int trial = 0; trial < 500; ++trial) EXPECT_TRUE(check_sandwich(gen.function(g), p).holds);
}
