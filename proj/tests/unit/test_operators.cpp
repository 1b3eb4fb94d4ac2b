#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles/dense.hpp"
#include "pklab/embedding.hpp"
#include "pklab/operators.hpp"
#include "support/gen.hpp"

using namespace pklab;
using std::numbers::pi;

namespace {

auto neg_lap(const Grid& g) {
    return [g](std::span<const double> x, std::span<double> y) {
        stencil::laplacian(g, x, y);
        for (double& v : y) v = -v;
    };
}

auto bih(const Grid& g) {
    return [g](std::span<const double> x, std::span<double> y) {
        std::vector<double> s(x.size());
        stencil::biharmonic(g, x, y, s);
    };
}

}  // namespace

TEST(Laplacian, ZeroAndQuadratic) {
    auto g = Grid::line(1.0, 49);
    EXPECT_TRUE(laplacian(GridFunction(g)).is_zero());
    auto u = GridFunction::sample(g, [](double x) { return x * (1 - x); });
    auto l = laplacian(u);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(l[i], -2.0, 1e-9);
}

TEST(Laplacian, SineEigenRelation) {
    auto g = Grid::line(1.0, 199);
    auto u = GridFunction::sample(g, [](double x) { return std::sin(pi * x); });
    auto l = laplacian(u);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(l[i], -pi * pi * u[i], 1e-3 * pi * pi * std::fabs(u[i]) + 1e-14);
}

TEST(Laplacian, RejectsCellGrid) { EXPECT_THROW(laplacian(GridFunction(Grid::cells(1.0, 4))), InvalidInput); }

TEST(Biharmonic, FirstRowsOneD) {
    auto g = Grid::line(1.0, 9);
    const double h4 = std::pow(0.1, 4);
    GridFunction e(g);
    e[0] = 1.0;
    auto b = biharmonic(e);
    EXPECT_NEAR(b[0] * h4, 7.0, 1e-9);
    EXPECT_NEAR(b[1] * h4, -4.0, 1e-9);
    EXPECT_NEAR(b[2] * h4, 1.0, 1e-9);
    EXPECT_NEAR(b[3], 0.0, 1e-9);
}

TEST(Biharmonic, QuadraticInDeepInterior) {
    auto g = Grid::rect(1.0, 1.0, 12, 12);
    auto u = GridFunction::sample(g, [](double x, double y) { return x * x + 3 * x * y - y * y; });
    auto b = biharmonic(u);
    for (int j = 2; j < 10; ++j)
        for (int i = 2; i < 10; ++i) EXPECT_NEAR(b[g.index(i, j)], 0.0, 1e-6);
}

TEST(Biharmonic, DiagonalsMatchAssembledMatrix) {
    for (const auto& g : {Grid::line(1.0, 7), Grid::rect(1.0, 2.0, 5, 6)}) {
        auto B = oracle::dense_matrix(g.size(), bih(g));
        auto A = oracle::dense_matrix(g.size(), neg_lap(g));
        for (std::size_t k = 0; k < g.size(); ++k) {
            EXPECT_NEAR(B(k, k), stencil::biharmonic_diag(g, k), 1e-9 * B(k, k));
            EXPECT_NEAR(A(k, k), stencil::neg_laplacian_diag(g), 1e-12 * A(k, k));
        }
        EXPECT_LT((B - B.transpose()).norm(), 1e-9 * B.norm());
        EXPECT_LT((A - A.transpose()).norm(), 1e-12 * A.norm());
        EXPECT_GT(oracle::smallest_eigenvalue(B), 0.0);
        EXPECT_GT(oracle::smallest_eigenvalue(A), 0.0);
    }
}

TEST(Biharmonic, ClampedBeamEigenvalue) {
    // The dense solve loses about eps * ||B|| absolutely, so compare on a modest grid.
    auto g = Grid::line(1.0, 100);
    const double dense = oracle::smallest_eigenvalue(oracle::dense_matrix(g.size(), bih(g)));
    EXPECT_NEAR(biharmonic_ground_state(g).value, dense, 1e-8 * dense);
    const double fine = biharmonic_ground_state(Grid::line(1.0, 400)).value;
    EXPECT_NEAR(fine, std::pow(4.73004074, 4), 0.01 * 500.56);
}

TEST(GradNorm, Examples) {
    auto g = Grid::line(1.0, 999);
    EXPECT_EQ(grad_norm_sq(GridFunction(g)), 0.0);
    auto u = GridFunction::sample(g, [](double x) { return std::sin(pi * x); });
    EXPECT_NEAR(grad_norm_sq(u), pi * pi / 2, 1e-3 * pi * pi / 2);
    EXPECT_DOUBLE_EQ(grad_norm_sq(2.0 * u), 4.0 * grad_norm_sq(u));
}

TEST(L2Inner, Examples) {
    auto g = Grid::line(1.0, 99);
    GridFunction one(g, 1.0);
    EXPECT_NEAR(l2_inner(one, one), 0.99, 1e-12);
    EXPECT_EQ(l2_inner(one, GridFunction(g)), 0.0);
    EXPECT_THROW(l2_inner(one, GridFunction(Grid::line(1.0, 98))), InvalidInput);
}

TEST(OperatorProperty, SymmetryAndQuadraticForms) {
    check::Gen gen(31);
    for (int trial = 0; trial < 200; ++trial) {
        auto g = gen.grid(false);
        auto u = gen.function(g);
        auto v = gen.function(g);
        const double luv = l2_inner(laplacian(u), v);
        const double ulv = l2_inner(u, laplacian(v));
        EXPECT_NEAR(luv, ulv, 1e-10 * (std::fabs(luv) + 1e-300) + 1e-12 * std::sqrt(l2_norm_sq(u) * l2_norm_sq(v)) *
                                  stencil::neg_laplacian_diag(g));
        // -<L u, u> is exactly the forward-difference Dirichlet energy.
        const double a = -l2_inner(laplacian(u), u);
        EXPECT_NEAR(a, grad_norm_sq(u), 1e-11 * a);
        // ||Delta u||^2 with the half-weighted boundary values equals <B u, u>.
        const double b = l2_inner(biharmonic(u), u);
        EXPECT_GT(b, 0.0);
        EXPECT_NEAR(lap_norm_sq(u), b, 1e-10 * b);
    }
}

TEST(Embedding, SConvergesToOneOverPi) {
    const double S = 1.0 / std::sqrt(laplacian_ground_state(Grid::line(1.0, 800)).value);
    EXPECT_NEAR(S, 1.0 / pi, 1e-3);
    const double S2 = 1.0 / std::sqrt(laplacian_ground_state(Grid::line(2.0, 800)).value);
    EXPECT_NEAR(S2, 2.0 * S, 1e-3);
    EXPECT_NEAR(analytic_S(Grid::rect(1.0, 1.0, 4, 4)), 1.0 / (pi * std::sqrt(2.0)), 1e-15);
}

TEST(Embedding, SecondOrderConvergence) {
    std::vector<double> errs_s, errs_b;
    const double beam = std::pow(4.730040744862704, 4);
    for (int n : {49, 99, 199, 399}) {
        const auto g = Grid::line(1.0, n);
        errs_s.push_back(std::fabs(laplacian_ground_state(g).value - pi * pi));
        errs_b.push_back(std::fabs(biharmonic_ground_state(g).value - beam));
    }
    for (std::size_t i = 1; i < errs_s.size(); ++i) {
        EXPECT_GE(std::log2(errs_s[i - 1] / errs_s[i]), 1.9);
        EXPECT_GE(std::log2(errs_b[i - 1] / errs_b[i]), 1.9);
    }
}

TEST(Embedding, QuadraticExponentGivesBiharmonicEigenvalue) {
    auto g = Grid::line(1.0, 200);
    auto r = estimate_B(g, ExponentField::constant(g, 2.0));
    const double dense = oracle::smallest_eigenvalue(oracle::dense_matrix(g.size(), bih(g)));
    EXPECT_NEAR(r.ratio, 1.0 / std::sqrt(dense), 1e-8);
    EXPECT_NEAR(r.ratio, 0.0447, 2e-4);
}

TEST(Embedding, EstimateIsAnUpperEnvelopeOnRandomFunctions) {
    check::Gen gen(41);
    for (const auto& g : {Grid::line(1.0, 64), Grid::rect(1.0, 1.0, 12, 10)}) {
        auto p = ExponentField::from_spec(g, "piecewise:3,5@0.5");
        auto c = estimate_embedding_constants(g, p);
        EXPECT_GE(c.B1, 1.0);
        EXPECT_GE(c.B1, c.B);
        EXPECT_EQ(c.provenance_B, Provenance::sampled_ascent);
        EXPECT_EQ(c.provenance_S, Provenance::eigensolve);
        const auto q = ExponentField::constant(g, c.q_star);
        for (int trial = 0; trial < 2000; ++trial) {
            auto u = gen.function(g);
            if (gen.coin()) {
                // Smooth the sample so it is not dominated by grid-scale noise.
                auto l = laplacian(u);
                u = GridFunction(g, std::vector<double>(l.values.begin(), l.values.end()));
                for (double& x : u.values) x = -x;
                auto f = detail::factor_biharmonic(g);
                f.solve(u.values);
            }
            EXPECT_LE(luxemburg_norm(u, p), (1 + c.eps_est) * c.B * std::sqrt(lap_norm_sq(u)) * (1 + 1e-12));
            EXPECT_LE(luxemburg_norm(u, q), (1 + 1e-9) * c.S_star * std::sqrt(grad_norm_sq(u)));
            EXPECT_LE(std::sqrt(l2_norm_sq(u)), (1 + 1e-9) * c.S * std::sqrt(grad_norm_sq(u)));
        }
    }
}

TEST(Embedding, ModesAndUserValues) {
    auto g = Grid::line(1.0, 50);
    auto p = ExponentField::constant(g, 4.0);
    EmbeddingOptions opt;
    opt.mode = ConstantsMode::analytic;
    auto c = estimate_embedding_constants(g, p, opt);
    EXPECT_EQ(c.provenance_S, Provenance::analytic);
    EXPECT_NEAR(c.S, 1.0 / pi, 1e-15);
    opt.mode = ConstantsMode::user_supplied;
    opt.user_B = 2.5;
    opt.user_S = 0.4;
    opt.user_S_star = 0.7;
    c = estimate_embedding_constants(g, p, opt);
    EXPECT_EQ(c.B, 2.5);
    EXPECT_EQ(c.B1, 2.5);
    EXPECT_EQ(c.provenance_S_star, Provenance::user_supplied);
}
