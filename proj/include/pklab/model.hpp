#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pklab/error.hpp"
#include "pklab/grid.hpp"
#include "pklab/varexp.hpp"

namespace pklab {

/// Coefficients of
///   u_tt + D^2 u - M(||grad u||^2) Lap u - Lap u_t + |u_t|^{m-2} u_t = |u|^{p-2} u,
/// M(s) = a + b s^gamma. The three switch coefficients multiply the strong
/// damping, the weak damping and the source; all equal 1 for the model itself.
struct ModelParams {
    double a = 1.0;
    double b = 1.0;
    double gamma = 1.0;
    ExponentField m;
    ExponentField p;
    double strong_damping = 1.0;
    double weak_damping = 1.0;
    double source = 1.0;
    /// Regularize |v|^{m-2} v as (v^2 + eta^2)^{(m-2)/2} v (exploratory runs with m < 2).
    bool soft_damping = false;
    double eta = 1e-8;

    double kirchhoff(double s) const noexcept { return a + b * std::pow(s, gamma); }

    /// Range problems with the parameters; the strict flag adds m- >= 2.
    std::vector<std::string> violations(bool strict) const {
        std::vector<std::string> out;
        if (!(a > 0.0)) out.push_back("model.a must be > 0");
        if (!(b >= 0.0)) out.push_back("model.b must be >= 0");
        if (!(gamma >= 1.0)) out.push_back("model.gamma must be >= 1");
        if (m.values.empty() || p.values.empty()) {
            out.push_back("model exponents are empty");
            return out;
        }
        if (!(m.lo > 1.0)) out.push_back("model.m must exceed 1 everywhere");
        if (!(p.lo > 2.0)) out.push_back("model.p must exceed 2 everywhere");
        if (strict && !(m.lo >= 2.0)) out.push_back("model.m requires m- >= 2 (set model.strict = false to regularize)");
        if (!(m.grid == p.grid)) out.push_back("model.m and model.p live on different grids");
        return out;
    }
};

struct SimState {
    double t = 0.0;
    GridFunction u;
    GridFunction v;
    double dt = 0.0;

    SimState() = default;
    SimState(double t0, GridFunction u0, GridFunction v0, double dt0)
        : t(t0), u(std::move(u0)), v(std::move(v0)), dt(dt0) {
        require_same_grid(u.grid, v.grid, "SimState");
    }

    const Grid& grid() const noexcept { return u.grid; }
    bool finite() const noexcept { return u.all_finite() && v.all_finite(); }
};

/// |v|^{m-2} v, or its regularization, times the weak-damping switch.
inline double damping_term(const ModelParams& mp, std::size_t i, double v) noexcept {
    const double m = mp.m.values[i];
    if (v == 0.0) return 0.0;
    if (mp.soft_damping) return mp.weak_damping * std::pow(v * v + mp.eta * mp.eta, 0.5 * (m - 2.0)) * v;
    return mp.weak_damping * std::pow(std::fabs(v), m - 2.0) * v;
}

/// |u|^{p-2} u times the source switch.
inline double source_term(const ModelParams& mp, std::size_t i, double u) noexcept {
    if (u == 0.0) return 0.0;
    return mp.source * std::pow(std::fabs(u), mp.p.values[i] - 2.0) * u;
}

/// |u|^p / p times the source switch.
inline double source_density(const ModelParams& mp, std::size_t i, double u) noexcept {
    if (u == 0.0) return 0.0;
    const double q = mp.p.values[i];
    return mp.source * std::pow(std::fabs(u), q) / q;
}

}  // namespace pklab
