#pragma once

// Monitored functionals: the energy E and its parts, the dissipation
// residual of a step, and the auxiliary functions H, Psi, F, R, Upsilon.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "pklab/error.hpp"
#include "pklab/model.hpp"
#include "pklab/operators.hpp"
#include "pklab/varexp.hpp"

namespace pklab {

struct EnergyParts {
    double l2_u = 0.0;     // ||u||^2
    double l2_v = 0.0;     // ||v||^2
    double grad_u = 0.0;   // ||grad u||^2
    double lap_u = 0.0;    // ||Delta u||^2
    double source = 0.0;   // int |u|^p / p
    double kinetic = 0.0;
    double bending = 0.0;
    double membrane = 0.0;
    double kirchhoff = 0.0;

    /// E = kinetic + bending + membrane + kirchhoff - source.
    double total() const noexcept { return kinetic + bending + membrane + kirchhoff - source; }
    /// R = E + source, the nonnegative part.
    double positive() const noexcept { return kinetic + bending + membrane + kirchhoff; }
};

inline double source_potential(const GridFunction& u, const ModelParams& mp) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += source_density(mp, i, u.values[i]);
    return s * u.grid.cell_volume();
}

inline EnergyParts energy_parts(const GridFunction& u, const GridFunction& v, const ModelParams& mp,
                                std::span<double> scratch) {
    const Grid& g = u.grid;
    const double w = g.cell_volume();
    EnergyParts e;
    e.l2_u = stencil::dot(u.values, u.values) * w;
    e.l2_v = stencil::dot(v.values, v.values) * w;
    e.grad_u = stencil::grad_norm_sq(g, u.values);
    e.lap_u = stencil::lap_norm_sq(g, u.values, scratch);
    e.source = source_potential(u, mp);
    e.kinetic = 0.5 * e.l2_v;
    e.bending = 0.5 * e.lap_u;
    e.membrane = 0.5 * mp.a * e.grad_u;
    e.kirchhoff = mp.b / (2.0 * (mp.gamma + 1.0)) * std::pow(e.grad_u, mp.gamma + 1.0);
    return e;
}

inline EnergyParts energy_parts(const SimState& s, const ModelParams& mp) {
    require_pde_grid(s.grid(), "energy");
    std::vector<double> scratch(s.u.size());
    return energy_parts(s.u, s.v, mp, scratch);
}

inline double energy(const SimState& s, const ModelParams& mp) { return energy_parts(s, mp).total(); }

/// Dissipation rate int |v|^m + ||grad v||^2 (with the damping switches).
inline double dissipation_rate(const GridFunction& v, const ModelParams& mp) {
    return mp.weak_damping * modular(v, mp.m) + mp.strong_damping * stencil::grad_norm_sq(v.grid, v.values);
}

/// r = E(next) - E(prev) + dt [ int |v_mid|^m + ||grad v_mid||^2 ], v_mid = (v^n + v^{n+1}) / 2.
inline double dissipation_residual(const SimState& prev, const SimState& next, const ModelParams& mp) {
    require_same_grid(prev.grid(), next.grid(), "dissipation_residual");
    const double dt = next.t - prev.t;
    GridFunction mid(prev.grid());
    for (std::size_t i = 0; i < mid.size(); ++i) mid.values[i] = 0.5 * (prev.v.values[i] + next.v.values[i]);
    return energy(next, mp) - energy(prev, mp) + dt * dissipation_rate(mid, mp);
}

/// Psi = int u v - (p- / C) E.
inline double psi(const SimState& s, const ModelParams& mp, double C, double p_minus) {
    if (!(C > 0.0)) throw DomainError("psi needs C > 0");
    return l2_inner(s.u, s.v) - p_minus / C * energy(s, mp);
}

inline double psi_from(double uv, double E, double C, double p_minus) { return uv - p_minus / C * E; }

/// F = H^{1-sigma} + eps (int u v + ||grad u||^2 / 2), H = E2 - E.
inline double F_from(double H, double uv, double grad_sq, double sigma, double eps) {
    if (!(H > 0.0)) throw DomainError("F needs H = E2 - E > 0 (E2 misconfigured)");
    return std::pow(H, 1.0 - sigma) + eps * (uv + 0.5 * grad_sq);
}

inline double F_fn(const SimState& s, const ModelParams& mp, double E2, double sigma, double eps) {
    if (!(sigma > 0.0 && sigma < 0.5)) throw DomainError("F needs 0 < sigma < 1/2");
    if (!(eps > 0.0)) throw DomainError("F needs eps > 0");
    return F_from(E2 - energy(s, mp), l2_inner(s.u, s.v), grad_norm_sq(s.u), sigma, eps);
}

/// Accumulates int_0^t (||u||^2 + ||grad u||^2) by the trapezoid rule.
class UpsilonIntegral {
public:
    void add(double t, double l2_u, double grad_u) {
        const double f = l2_u + grad_u;
        if (started_) integral_ += 0.5 * (t - t_) * (f + f_);
        started_ = true;
        t_ = t;
        f_ = f;
    }
    double value() const noexcept { return integral_; }

private:
    bool started_ = false;
    double t_ = 0.0;
    double f_ = 0.0;
    double integral_ = 0.0;
};

struct UpsilonParams {
    double T_star = 0.0;
    double rho = 0.0;
    double omega = 0.0;
    double l2_u0 = 0.0;
    double grad_u0 = 0.0;
};

/// Upsilon(t) = ||u||^2 + int_0^t (||u||^2 + ||grad u||^2) + (T* - t)(||u0||^2 + ||grad u0||^2) + rho (t + omega)^2.
inline double upsilon_from(double t, double l2_u, double integral, const UpsilonParams& q) {
    if (!(q.rho > 0.0) || !(q.omega > 0.0)) throw DomainError("Upsilon needs rho > 0 and omega > 0");
    return l2_u + integral + (q.T_star - t) * (q.l2_u0 + q.grad_u0) + q.rho * (t + q.omega) * (t + q.omega);
}

/// Upsilon(0) as printed in the theorem's proof: ||u0||^2 + T* ||grad u0||^2 + rho omega^2.
/// It drops the T* ||u0||^2 term that the definition carries.
inline double upsilon0_printed(const UpsilonParams& q) {
    return q.l2_u0 + q.T_star * q.grad_u0 + q.rho * q.omega * q.omega;
}

/// One monitored row. Norms are unsquared; H, Psi, F and Upsilon are
/// present only when their parameters are configured.
struct EnergySample {
    double t = 0.0;
    double dt = 0.0;
    double E = 0.0;
    std::optional<double> H, Psi, F, Upsilon;
    double R = 0.0;
    double norm_u_2 = 0.0;
    double norm_grad_u_2 = 0.0;
    double norm_lap_u_2 = 0.0;
    double norm_u_px = 0.0;
    double modular_u_p = 0.0;
    double modular_v_m = 0.0;
    double diss_residual = 0.0;
};

/// Upsilon at the state's time with the integral taken over the trace
/// (samples up to state.t) by the trapezoid rule.
inline double upsilon(const std::vector<EnergySample>& trace, const SimState& s, const UpsilonParams& q) {
    UpsilonIntegral acc;
    for (const auto& e : trace) {
        if (e.t > s.t) break;
        acc.add(e.t, e.norm_u_2 * e.norm_u_2, e.norm_grad_u_2 * e.norm_grad_u_2);
    }
    const double l2 = l2_norm_sq(s.u);
    const double gr = grad_norm_sq(s.u);
    if (trace.empty() || trace.back().t < s.t) acc.add(s.t, l2, gr);
    return upsilon_from(s.t, l2, acc.value(), q);
}

}  // namespace pklab
