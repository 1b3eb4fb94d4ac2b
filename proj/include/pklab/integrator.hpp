#pragma once

// One time step of the semi-discrete system
//   u' = v,
//   v' = -B u - M A u - A v - d(v) + f(u) (+ forcing),
// with A = -Delta_h, B the clamped biharmonic, d the damping and f the source.
// The linear part is implicit midpoint; M, d and f enter explicitly through a
// predictor, then once more through a corrector that uses discrete-gradient
// averages of the Kirchhoff and source potentials between u^n and the
// predicted state. Each pass solves
//   (I + dt/2 A + dt^2/4 K) v_mid = v^n - dt/2 K u^n + dt/2 N,   K = B + M A,
// then u^{n+1} = u^n + dt v_mid and v^{n+1} = 2 v_mid - v^n.

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pklab/error.hpp"
#include "pklab/linalg.hpp"
#include "pklab/model.hpp"
#include "pklab/operators.hpp"

namespace pklab {

enum class SolverKind { automatic, pcg, banded };

struct StepOptions {
    SolverKind solver = SolverKind::automatic;
    double cg_tol = 1e-10;
    int cg_max_iter = 0;  // 0: 10 n + 100
    bool corrector = true;
};

/// External source term g(t) added to the velocity equation.
using Forcing = std::function<void(double t, std::span<double> out)>;

enum class StepStatus { ok, non_finite, solve_failed };

struct StepInfo {
    StepStatus status = StepStatus::ok;
    int cg_iterations = 0;
    double cg_residual = 0.0;
    double kirchhoff = 0.0;
};

class Integrator {
public:
    Integrator(const ModelParams& mp, const Grid& g, StepOptions opt = {}, Forcing forcing = {})
        : mp_(mp), g_(g), opt_(opt), forcing_(std::move(forcing)) {
        require_pde_grid(g, "Integrator");
        require_same_grid(g, mp.p.grid, "Integrator (p)");
        require_same_grid(g, mp.m.grid, "Integrator (m)");
        const std::size_t n = g.size();
        for (auto* v : {&lu_, &scratch_, &rhs_, &nl_, &vmid_, &ustar_, &vstar_, &tmp_, &inv_diag_}) v->assign(n, 0.0);
        diag_b_.resize(n);
        for (std::size_t k = 0; k < n; ++k) diag_b_[k] = stencil::biharmonic_diag(g, k);
        diag_a_ = stencil::neg_laplacian_diag(g);
        if (opt_.cg_max_iter <= 0) opt_.cg_max_iter = static_cast<int>(10 * n + 100);
        use_banded_ = opt_.solver == SolverKind::banded || (opt_.solver == SolverKind::automatic && g.dim == 1);
    }

    const ModelParams& params() const noexcept { return mp_; }
    const Grid& grid() const noexcept { return g_; }

    /// Advances `in` by dt into `out`. Never throws on numerical trouble;
    /// the status says what happened.
    StepInfo advance(const SimState& in, double dt, SimState& out) {
        StepInfo info;
        const std::size_t n = g_.size();
        if (out.u.grid.size() != n) out = in;
        const auto& u = in.u.values;
        const auto& v = in.v.values;

        const double g0 = stencil::grad_norm_sq(g_, u);
        const double M0 = mp_.kirchhoff(g0);
        for (std::size_t i = 0; i < n; ++i) nl_[i] = -damping_term(mp_, i, v[i]) + source_term(mp_, i, u[i]);
        add_forcing(in.t + 0.5 * dt);
        if (!solve_pass(u, v, dt, M0, info)) return info;

        if (opt_.corrector) {
            for (std::size_t i = 0; i < n; ++i) {
                ustar_[i] = u[i] + dt * vmid_[i];
                vstar_[i] = 2.0 * vmid_[i] - v[i];
            }
            const double g1 = stencil::grad_norm_sq(g_, ustar_);
            const double Mbar = kirchhoff_average(g0, g1);
            for (std::size_t i = 0; i < n; ++i)
                nl_[i] = -damping_term(mp_, i, 0.5 * (v[i] + vstar_[i])) + source_average(i, u[i], ustar_[i]);
            add_forcing(in.t + 0.5 * dt);
            if (!solve_pass(u, v, dt, Mbar, info)) return info;
            info.kirchhoff = Mbar;
        } else {
            info.kirchhoff = M0;
        }

        out.t = in.t + dt;
        out.dt = dt;
        auto& uo = out.u.values;
        auto& vo = out.v.values;
        bool finite = true;
        for (std::size_t i = 0; i < n; ++i) {
            uo[i] = u[i] + dt * vmid_[i];
            vo[i] = 2.0 * vmid_[i] - v[i];
            finite = finite && std::isfinite(uo[i]) && std::isfinite(vo[i]);
        }
        if (!finite) info.status = StepStatus::non_finite;
        return info;
    }

    /// Kirchhoff coefficient between two values of ||grad u||^2: the discrete
    /// gradient of a s + b s^{gamma+1} / (gamma + 1).
    double kirchhoff_average(double g0, double g1) const noexcept {
        const double gp = mp_.gamma + 1.0;
        const double scale = std::fmax(std::fabs(g0), std::fabs(g1));
        if (std::fabs(g1 - g0) <= 1e-10 * scale || scale == 0.0) return mp_.kirchhoff(0.5 * (g0 + g1));
        return mp_.a + mp_.b * (std::pow(g1, gp) - std::pow(g0, gp)) / (gp * (g1 - g0));
    }

    /// Discrete gradient (F(u1) - F(u0)) / (u1 - u0) of F = |u|^p / p, with the
    /// midpoint value of |u|^{p-2} u when the two arguments nearly coincide.
    double source_average(std::size_t i, double u0, double u1) const noexcept {
        const double d = u1 - u0;
        if (std::fabs(d) <= 1e-6 * std::fmax(std::fabs(u0), std::fabs(u1)))
            return source_term(mp_, i, 0.5 * (u0 + u1));
        return (source_density(mp_, i, u1) - source_density(mp_, i, u0)) / d;
    }

private:
    void add_forcing(double t) {
        if (!forcing_) return;
        forcing_(t, tmp_);
        for (std::size_t i = 0; i < nl_.size(); ++i) nl_[i] += tmp_[i];
    }

    // y = x + dt/2 c_s A x + dt^2/4 (B x + M A x)
    void apply_system(std::span<const double> x, std::span<double> y, double dt, double M) {
        stencil::laplacian(g_, x, lu_);
        stencil::laplacian(g_, lu_, y);
        const double c1 = 0.5 * dt * mp_.strong_damping;
        const double c2 = 0.25 * dt * dt;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double bx = y[k] + stencil::clamped_penalty(g_, k) * x[k];
            const double ax = -lu_[k];
            y[k] = x[k] + c1 * ax + c2 * (bx + M * ax);
        }
    }

    bool solve_pass(const std::vector<double>& u, const std::vector<double>& v, double dt, double M, StepInfo& info) {
        const std::size_t n = u.size();
        // rhs = v - dt/2 K u + dt/2 N
        stencil::laplacian(g_, u, lu_);
        stencil::laplacian(g_, lu_, scratch_);
        for (std::size_t k = 0; k < n; ++k) {
            const double ku = scratch_[k] + stencil::clamped_penalty(g_, k) * u[k] - M * lu_[k];
            rhs_[k] = v[k] - 0.5 * dt * ku + 0.5 * dt * nl_[k];
        }
        for (double r : rhs_)
            if (!std::isfinite(r)) {
                info.status = StepStatus::non_finite;
                return false;
            }
        auto apply = [&](std::span<const double> x, std::span<double> y) { apply_system(x, y, dt, M); };

        if (use_banded_) {
            try {
                const auto f = BandedCholesky::from_operator(n, g_.dim == 1 ? 2 : 2 * static_cast<std::size_t>(g_.n[0]), apply);
                vmid_ = rhs_;
                f.solve(vmid_);
            } catch (const NumericError&) {
                info.status = StepStatus::solve_failed;
                return false;
            }
            return true;
        }

        const double c1 = 0.5 * dt * mp_.strong_damping;
        const double c2 = 0.25 * dt * dt;
        for (std::size_t k = 0; k < n; ++k) inv_diag_[k] = 1.0 / (1.0 + c1 * diag_a_ + c2 * (diag_b_[k] + M * diag_a_));
        vmid_ = v;
        const auto r = pcg(apply, inv_diag_, rhs_, vmid_, opt_.cg_tol, opt_.cg_max_iter, ws_);
        info.cg_iterations += r.iterations;
        info.cg_residual = std::fmax(info.cg_residual, r.relative_residual);
        if (!r.converged) {
            info.status = StepStatus::solve_failed;
            return false;
        }
        return true;
    }

    ModelParams mp_;
    Grid g_;
    StepOptions opt_;
    Forcing forcing_;
    bool use_banded_ = false;
    double diag_a_ = 0.0;
    std::vector<double> diag_b_;
    std::vector<double> lu_, scratch_, rhs_, nl_, vmid_, ustar_, vstar_, tmp_, inv_diag_;
    PcgWorkspace ws_;
};

/// Single step; numeric trouble in the linear solve is an error here.
/// Non-finite results are returned as they are for the caller to inspect.
inline SimState step(const SimState& s, const ModelParams& mp, double dt, StepOptions opt = {}) {
    if (!(dt > 0.0)) throw InvalidInput("step needs dt > 0");
    if (!s.finite()) throw InvalidInput("step needs a finite state");
    Integrator it(mp, s.grid(), opt);
    SimState out = s;
    const auto info = it.advance(s, dt, out);
    if (info.status == StepStatus::solve_failed)
        throw NumericError("linear solve did not converge (relative residual " +
                           detail::format_double(info.cg_residual) + ")");
    return out;
}

}  // namespace pklab
