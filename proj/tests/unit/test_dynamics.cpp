#include <gtest/gtest.h>

#include <cmath>

#include "pklab/functionals.hpp"
#include "pklab/initial_data.hpp"
#include "pklab/integrator.hpp"

using namespace pklab;

namespace {

ModelParams params(const Grid& g, double m, double p) {
    ModelParams mp;
    mp.m = ExponentField::constant(g, m);
    mp.p = ExponentField::constant(g, p);
    return mp;
}

SimState mode_state(const Grid& g, double amp, double vel = 0.0) {
    auto u = beam_mode(g);
    u *= amp;
    auto v = u;
    v *= vel;
    return {0.0, u, v, 0.0};
}

}  // namespace

TEST(BeamRoots, KnownValues) {
    EXPECT_NEAR(clamped_beam_root(1), 4.730040744862704, 1e-12);
    EXPECT_NEAR(clamped_beam_root(2), 7.853204624095838, 1e-12);
    EXPECT_NEAR(clamped_beam_root(3), 10.995607838001671, 1e-12);
    EXPECT_NEAR(clamped_beam_shape(1, 0.0, 1.0), 0.0, 1e-12);
    EXPECT_NEAR(clamped_beam_shape(4, 1.0, 1.0), 0.0, 1e-9);
}

TEST(BeamMode, IsNearADiscreteEigenvector) {
    auto g = Grid::line(1.0, 200);
    auto phi = beam_mode(g);
    EXPECT_NEAR(l2_norm_sq(phi), 1.0, 1e-14);
    const double rq = l2_inner(biharmonic(phi), phi);
    EXPECT_NEAR(rq, std::pow(4.730040744862704, 4), 0.01 * 500.56);
}

TEST(Step, EquilibriumIsFixed) {
    for (const auto& g : {Grid::line(1.0, 30), Grid::rect(1.0, 1.0, 8, 9)}) {
        SimState s(0.0, GridFunction(g), GridFunction(g), 0.0);
        for (double dt : {1e-6, 1e-2, 10.0}) {
            auto n = step(s, params(g, 2.5, 4.0), dt);
            EXPECT_TRUE(n.u.is_zero());
            EXPECT_TRUE(n.v.is_zero());
            EXPECT_DOUBLE_EQ(n.t, dt);
        }
    }
}

TEST(Step, LinearPlateEnergyNonIncreasing) {
    for (const auto& g : {Grid::line(1.0, 40), Grid::rect(1.0, 1.0, 10, 10)}) {
        auto mp = params(g, 2.0, 2.0);
        mp.b = 0.0;
        SimState s = mode_state(g, 0.3, 2.0);
        double e = energy(s, mp);
        for (int k = 0; k < 200; ++k) {
            s = step(s, mp, 1e-3);
            const double en = energy(s, mp);
            EXPECT_LE(en, e + 1e-14 * std::fabs(e));
            e = en;
        }
    }
}

TEST(Step, RejectsBadArguments) {
    auto g = Grid::line(1.0, 10);
    SimState s(0.0, GridFunction(g), GridFunction(g), 0.0);
    EXPECT_THROW(step(s, params(g, 2, 4), 0.0), InvalidInput);
    s.u[3] = NAN;
    EXPECT_THROW(step(s, params(g, 2, 4), 1e-3), InvalidInput);
}

TEST(Step, KirchhoffAndSourceAverages) {
    auto g = Grid::line(1.0, 4);
    auto mp = params(g, 2.0, 5.0);
    mp.a = 1.5;
    mp.b = 2.0;
    mp.gamma = 2.0;
    Integrator it(mp, g);
    // Discrete gradient of a s + b s^3 / 3.
    const double g0 = 0.7, g1 = 1.3;
    const double expect = 1.5 + 2.0 * (g1 * g1 * g1 - g0 * g0 * g0) / (3 * (g1 - g0));
    EXPECT_NEAR(it.kirchhoff_average(g0, g1), expect, 1e-14);
    EXPECT_NEAR(it.kirchhoff_average(g0, g0), mp.kirchhoff(g0), 1e-14);
    EXPECT_NEAR(it.source_average(0, 0.5, 0.9), (std::pow(0.9, 5) - std::pow(0.5, 5)) / 5 / 0.4, 1e-14);
    EXPECT_NEAR(it.source_average(0, -0.3, -0.3), -std::pow(0.3, 4), 1e-15);
}

TEST(Step, ManufacturedSolutionSecondOrder) {
    // u* = e^{-t} s with the forcing that makes it an exact solution of the
    // semi-discrete system, so only the time error remains.
    auto g = Grid::line(1.0, 40);
    auto mp = params(g, 3.0, 5.0);
    auto s = beam_mode(g);
    auto As = laplacian(s);
    for (double& x : As.values) x = -x;
    auto Bs = biharmonic(s);
    const double gs = grad_norm_sq(s);
    auto forcing = [&](double t, std::span<double> out) {
        const double e = std::exp(-t);
        const double M = mp.kirchhoff(e * e * gs);
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double u = e * s[i];
            const double v = -e * s[i];
            out[i] = e * s[i] + e * Bs[i] + M * e * As[i] - e * As[i] + damping_term(mp, i, v) - source_term(mp, i, u);
        }
    };
    const double T = 0.5;
    std::vector<double> errs;
    for (double dt : {0.005, 0.0025, 0.00125}) {
        Integrator it(mp, g, {}, forcing);
        SimState st(0.0, s, -1.0 * s, dt), nx = st;
        const int steps = static_cast<int>(std::lround(T / dt));
        for (int k = 0; k < steps; ++k) {
            ASSERT_EQ(it.advance(st, dt, nx).status, StepStatus::ok);
            std::swap(st, nx);
        }
        double err = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) err = std::fmax(err, std::fabs(st.u[i] - std::exp(-T) * s[i]));
        errs.push_back(err);
    }
    EXPECT_GE(std::log2(errs[0] / errs[1]), 1.9);
    EXPECT_GE(std::log2(errs[1] / errs[2]), 1.9);
}

TEST(Step, ConservativeCoreDrift) {
    auto g = Grid::line(1.0, 60);
    auto mp = params(g, 2.0, 4.0);
    mp.b = 0.0;
    mp.strong_damping = mp.weak_damping = mp.source = 0.0;
    SimState s = mode_state(g, 0.5, 3.0);
    const double e0 = energy(s, mp);
    for (int k = 0; k < 2000; ++k) s = step(s, mp, 5e-4);
    EXPECT_LE(std::fabs(energy(s, mp) - e0), 1e-6 * e0);
}

TEST(Step, TwoDimensionalPcgMatchesBanded) {
    auto g = Grid::rect(1.0, 1.5, 9, 11);
    auto mp = params(g, 2.5, 4.0);
    SimState s = mode_state(g, 0.8, 1.0);
    StepOptions a, b;
    a.solver = SolverKind::pcg;
    a.cg_tol = 1e-13;
    b.solver = SolverKind::banded;
    auto x = step(s, mp, 1e-3, a);
    auto y = step(s, mp, 1e-3, b);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(x.u[i], y.u[i], 1e-11);
}

TEST(Functionals, EnergyExample) {
    // Hand-built state: ||Delta u||^2, ||grad u||^2 and the source term are
    // read back from the pieces and recombined per the definition.
    auto g = Grid::line(1.0, 50);
    auto mp = params(g, 2.0, 4.0);
    mp.a = 1.0;
    mp.b = 2.0;
    SimState s = mode_state(g, 0.7);
    const auto e = energy_parts(s, mp);
    EXPECT_NEAR(e.total(), 0.5 * e.lap_u + 0.5 * e.grad_u + 2.0 / 4.0 * e.grad_u * e.grad_u - e.source, 1e-12);
    // With ||Delta u||^2 = 2, ||grad u||^2 = 1, a = 1, b = 2, source 0.125: E = 1.875.
    EnergyParts q;
    q.bending = 1.0;
    q.membrane = 0.5;
    q.kirchhoff = 2.0 / 4.0 * 1.0;
    q.source = 0.125;
    EXPECT_DOUBLE_EQ(q.total(), 1.875);
    EXPECT_EQ(energy(SimState(0.0, GridFunction(g), GridFunction(g), 0.0), mp), 0.0);
    mp.source = 0.0;
    EXPECT_GE(energy(mode_state(g, 5.0, 3.0), mp), 0.0);
}

TEST(Functionals, PsiAndF) {
    EXPECT_DOUBLE_EQ(psi_from(1.0, 0.2, 1.6, 4.0), 0.5);
    EXPECT_DOUBLE_EQ(F_from(1.0, 2.0, 4.0, 0.3, 0.1), 1.4);
    EXPECT_THROW(F_from(0.0, 1.0, 1.0, 0.3, 0.1), DomainError);
    auto g = Grid::line(1.0, 20);
    SimState z(0.0, GridFunction(g), GridFunction(g), 0.0);
    EXPECT_EQ(psi(z, params(g, 2, 4), 1.6, 4.0), 0.0);
    EXPECT_NEAR(F_fn(z, params(g, 2, 4), 0.01, 0.3, 0.1), std::pow(0.01, 0.7), 1e-15);
    EXPECT_LT(F_from(0.5, 1, 1, 0.3, 0.1), F_from(0.6, 1, 1, 0.3, 0.1));
}

TEST(Functionals, Upsilon) {
    UpsilonParams q;
    q.rho = 1.0;
    q.omega = 2.0;
    EXPECT_DOUBLE_EQ(upsilon_from(0.0, 0.0, 0.0, q), 4.0);
    EXPECT_DOUBLE_EQ(upsilon0_printed(q), 4.0);
    q.T_star = 3.0;
    q.l2_u0 = 0.5;
    q.grad_u0 = 2.0;
    EXPECT_DOUBLE_EQ(upsilon_from(0.0, 0.5, 0.0, q), 0.5 + 3.0 * 2.5 + 4.0);
    EXPECT_DOUBLE_EQ(upsilon0_printed(q), 0.5 + 3.0 * 2.0 + 4.0);
    // Trapezoid over a trace with constant ||u||^2 + ||grad u||^2 = 2.5.
    auto g = Grid::line(1.0, 10);
    std::vector<EnergySample> tr(3);
    for (int k = 0; k < 3; ++k) {
        tr[k].t = 0.5 * k;
        tr[k].norm_u_2 = std::sqrt(0.5);
        tr[k].norm_grad_u_2 = std::sqrt(2.0);
    }
    SimState s(1.0, GridFunction(g), GridFunction(g), 0.0);
    EXPECT_NEAR(upsilon(tr, s, q), 0.0 + 2.5 + 2.0 * 2.5 + 9.0, 1e-12);
}

TEST(Functionals, DissipationResidualIsSmallAndSigned) {
    auto g = Grid::line(1.0, 100);
    auto mp = params(g, 2.0, 5.0);
    SimState s = mode_state(g, 0.03);
    for (int k = 0; k < 50; ++k) {
        auto n = step(s, mp, 1e-3);
        const double r = dissipation_residual(s, n, mp);
        EXPECT_LE(energy(n, mp) - energy(s, mp), std::fabs(r));
        EXPECT_LT(std::fabs(r), 1e-7);
        s = n;
    }
    EXPECT_EQ(dissipation_residual(SimState(0, GridFunction(g), GridFunction(g), 0),
                                   SimState(1e-3, GridFunction(g), GridFunction(g), 0), mp),
              0.0);
}
