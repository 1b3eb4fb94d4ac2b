#pragma once

// Estimates of the embedding constants
//   ||u||_2       <= S  ||grad u||_2      (H_0^1 into L^2)
//   ||u||_{q*}    <= S* ||grad u||_2      (H_0^1 into L^{q*})
//   ||u||_{p(.)}  <= B  ||Delta u||_2     (H_0^2 into L^{p(.)})
// on the discrete spaces. S comes from the smallest eigenvalue of -Delta_h;
// S* and B are maximized by a nonlinear power iteration, which only ever
// produces lower bounds of the discrete optimum.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pklab/error.hpp"
#include "pklab/grid.hpp"
#include "pklab/linalg.hpp"
#include "pklab/operators.hpp"
#include "pklab/varexp.hpp"

namespace pklab {

enum class Provenance { analytic, eigensolve, sampled_ascent, user_supplied };

inline const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::analytic: return "analytic";
        case Provenance::eigensolve: return "eigensolve";
        case Provenance::sampled_ascent: return "sampled-ascent";
        case Provenance::user_supplied: return "user-supplied";
    }
    return "?";
}

struct EmbeddingConstants {
    double B = 0.0;
    double B1 = 1.0;
    double S = 0.0;
    double S_star = 0.0;
    /// Exponent used for S_star (a surrogate when N <= 2).
    double q_star = 6.0;
    bool q_star_surrogate = true;
    /// Relative slack of the ascent that produced B.
    double eps_est = 0.0;
    /// Multiplier applied to B in the "_safety" variants of the bounds.
    double safety = 1.0;
    double lambda1_laplacian = 0.0;
    double lambda1_biharmonic = 0.0;
    Provenance provenance_B = Provenance::sampled_ascent;
    Provenance provenance_S = Provenance::eigensolve;
    Provenance provenance_S_star = Provenance::sampled_ascent;
};

enum class ConstantsMode { analytic, estimate, user_supplied };

struct EmbeddingOptions {
    ConstantsMode mode = ConstantsMode::estimate;
    double q_star = 6.0;
    int starts = 6;
    int max_iter = 300;
    double tol = 1e-12;
    std::uint64_t seed = 1;
    double safety = 1.0;
    std::optional<double> user_B, user_S, user_S_star;
};

struct EigenPair {
    double value = 0.0;
    std::vector<double> vector;
    int iterations = 0;
};

namespace detail {

inline std::size_t laplacian_bandwidth(const Grid& g) { return g.dim == 1 ? 1 : static_cast<std::size_t>(g.n[0]); }
inline std::size_t biharmonic_bandwidth(const Grid& g) {
    return g.dim == 1 ? 2 : 2 * static_cast<std::size_t>(g.n[0]);
}

inline BandedCholesky factor_neg_laplacian(const Grid& g) {
    return BandedCholesky::from_operator(g.size(), laplacian_bandwidth(g),
                                         [&](std::span<const double> x, std::span<double> y) {
                                             stencil::laplacian(g, x, y);
                                             for (double& v : y) v = -v;
                                         });
}

inline BandedCholesky factor_biharmonic(const Grid& g) {
    std::vector<double> scratch(g.size());
    return BandedCholesky::from_operator(g.size(), biharmonic_bandwidth(g),
                                         [&](std::span<const double> x, std::span<double> y) {
                                             stencil::biharmonic(g, x, y, scratch);
                                         });
}

// Positive start vector with a large component along the ground state.
inline std::vector<double> bubble(const Grid& g) {
    std::vector<double> x(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto pos = g.position(k);
        double v = pos[0] * (g.extent[0] - pos[0]);
        if (g.dim == 2) v *= pos[1] * (g.extent[1] - pos[1]);
        x[k] = v * v;
    }
    return x;
}

inline void normalize(std::vector<double>& x) {
    const double n = std::sqrt(stencil::dot(x, x));
    for (double& v : x) v /= n;
}

}  // namespace detail

/// Smallest eigenvalue of an SPD operator by inverse iteration with a
/// banded Cholesky factorization. `apply` evaluates the operator for the
/// Rayleigh quotient.
template <class Apply>
EigenPair smallest_eigenpair(const Grid& g, const BandedCholesky& factor, Apply&& apply, double tol = 1e-13,
                             int max_iter = 1000) {
    EigenPair out;
    std::vector<double> x = detail::bubble(g);
    std::vector<double> y(x.size());
    detail::normalize(x);
    double prev = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        factor.solve(x);
        detail::normalize(x);
        apply(std::span<const double>(x), std::span<double>(y));
        const double lam = stencil::dot(x, y);
        if (!std::isfinite(lam)) throw NumericError("inverse iteration produced a non-finite Rayleigh quotient");
        out.iterations = it;
        if (it > 1 && std::fabs(lam - prev) <= tol * lam) {
            out.value = lam;
            out.vector = std::move(x);
            return out;
        }
        prev = lam;
    }
    throw NumericError("inverse iteration did not converge in " + std::to_string(max_iter) +
                       " iterations on " + g.describe() + " (last Rayleigh quotient " + detail::format_double(prev) + ")");
}

/// Smallest eigenvalue of -Delta_h (Dirichlet).
inline EigenPair laplacian_ground_state(const Grid& g) {
    require_pde_grid(g, "laplacian_ground_state");
    const auto f = detail::factor_neg_laplacian(g);
    return smallest_eigenpair(g, f, [&](std::span<const double> x, std::span<double> y) {
        stencil::laplacian(g, x, y);
        for (double& v : y) v = -v;
    });
}

/// Smallest eigenvalue of the clamped biharmonic.
inline EigenPair biharmonic_ground_state(const Grid& g) {
    require_pde_grid(g, "biharmonic_ground_state");
    const auto f = detail::factor_biharmonic(g);
    std::vector<double> scratch(g.size());
    return smallest_eigenpair(g, f, [&](std::span<const double> x, std::span<double> y) {
        stencil::biharmonic(g, x, y, scratch);
    });
}

/// Continuum value of S on a rectangle: 1 / (pi sqrt(sum 1/L_a^2)).
inline double analytic_S(const Grid& g) {
    double s = 1.0 / (g.extent[0] * g.extent[0]);
    if (g.dim == 2) s += 1.0 / (g.extent[1] * g.extent[1]);
    return 1.0 / (std::numbers::pi * std::sqrt(s));
}

/// Gradient of the Luxemburg norm with respect to the nodal values.
/// Both the quadrature weight and the norm itself cancel from the formula.
inline void luxemburg_gradient(std::span<const double> u, const ExponentField& p, double norm, std::span<double> grad) {
    double denom = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double t = std::fabs(u[i]) / norm;
        if (t == 0.0) {
            grad[i] = 0.0;
            continue;
        }
        const double tp1 = std::pow(t, p.values[i] - 1.0);
        grad[i] = p.values[i] * tp1 * (u[i] < 0 ? -1.0 : 1.0);
        denom += p.values[i] * tp1 * t;
    }
    for (double& v : grad) v /= denom;
}

struct AscentResult {
    /// Best ratio ||u||_{p(.)} / ||L u||, L the operator whose quadratic form is the denominator.
    double ratio = 0.0;
    /// Relative increment of the ratio on the winning start's last iteration.
    double slack = 0.0;
    int winning_start = -1;
    std::vector<double> maximizer;
    /// Smallest eigenvalue of K, found while seeding the starts.
    double lambda1 = 0.0;
};

/// Maximizes ||u||_{p(.)} / sqrt(h^N u^T K u) for an SPD K given by its
/// factorization. Each start runs u <- normalize(K^{-1} grad ||u||_{p(.)}).
/// For a convex 1-homogeneous numerator this iteration is monotone.
template <class Apply>
AscentResult maximize_embedding_ratio(const Grid& g, const ExponentField& p, const BandedCholesky& factor,
                                      Apply&& apply, std::vector<std::vector<double>> starts, int max_iter,
                                      double tol) {
    const double w = g.cell_volume();
    std::vector<double> ku(g.size()), grad(g.size());
    auto energy_norm = [&](const std::vector<double>& u) {
        apply(std::span<const double>(u), std::span<double>(ku));
        return std::sqrt(w * stencil::dot(u, ku));
    };
    AscentResult best;
    for (std::size_t s = 0; s < starts.size(); ++s) {
        std::vector<double> u = std::move(starts[s]);
        double ratio = 0.0;
        double slack = 1.0;
        for (int it = 0; it < max_iter; ++it) {
            const double en = energy_norm(u);
            if (!(en > 0.0) || !std::isfinite(en)) break;
            for (double& v : u) v /= en;
            const double num = luxemburg_norm(GridFunction(g, u), p);
            if (it > 0) slack = std::fabs(num - ratio) / num;
            ratio = std::fmax(ratio, num);
            if (ratio > best.ratio) {
                best.ratio = ratio;
                best.slack = slack;
                best.winning_start = static_cast<int>(s);
                best.maximizer = u;
            } else if (best.winning_start == static_cast<int>(s)) {
                best.slack = slack;
            }
            if (it > 0 && slack <= tol) break;
            luxemburg_gradient(u, p, num, grad);
            u = grad;
            factor.solve(u);
        }
    }
    return best;
}

namespace detail {

inline std::vector<std::vector<double>> ascent_starts(const Grid& g, const BandedCholesky& factor,
                                                      const std::vector<double>& ground, int count,
                                                      std::uint64_t seed) {
    std::vector<std::vector<double>> starts;
    starts.push_back(ground);
    auto point_load = [&](double fx, double fy) {
        std::vector<double> e(g.size(), 0.0);
        const int i = std::clamp(static_cast<int>(fx * g.n[0]), 0, g.n[0] - 1);
        const int j = std::clamp(static_cast<int>(fy * g.n[1]), 0, g.n[1] - 1);
        e[g.index(i, j)] = 1.0;
        factor.solve(e);
        return e;
    };
    starts.push_back(point_load(0.5, 0.5));
    starts.push_back(point_load(0.25, 0.25));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    while (static_cast<int>(starts.size()) < count) {
        std::vector<double> r(g.size());
        for (double& v : r) v = nd(rng);
        factor.solve(r);
        starts.push_back(std::move(r));
    }
    starts.resize(static_cast<std::size_t>(std::max(count, 1)));
    return starts;
}

}  // namespace detail

/// B for the exponent field p, maximized over `starts` initial guesses.
inline AscentResult estimate_B(const Grid& g, const ExponentField& p, const EmbeddingOptions& opt = {}) {
    require_pde_grid(g, "estimate_B");
    require_same_grid(g, p.grid, "estimate_B");
    const auto factor = detail::factor_biharmonic(g);
    std::vector<double> scratch(g.size());
    auto apply = [&](std::span<const double> x, std::span<double> y) { stencil::biharmonic(g, x, y, scratch); };
    const auto ground = smallest_eigenpair(g, factor, apply);
    auto r = maximize_embedding_ratio(g, p, factor, apply,
                                      detail::ascent_starts(g, factor, ground.vector, opt.starts, opt.seed),
                                      opt.max_iter, opt.tol);
    r.lambda1 = ground.value;
    return r;
}

/// S* for a constant exponent q, maximized like B but against ||grad u||.
inline AscentResult estimate_S_star(const Grid& g, double q, const EmbeddingOptions& opt = {}) {
    require_pde_grid(g, "estimate_S_star");
    const auto factor = detail::factor_neg_laplacian(g);
    auto apply = [&](std::span<const double> x, std::span<double> y) {
        stencil::laplacian(g, x, y);
        for (double& v : y) v = -v;
    };
    const auto ground = smallest_eigenpair(g, factor, apply);
    return maximize_embedding_ratio(g, ExponentField::constant(g, q), factor, apply,
                                    detail::ascent_starts(g, factor, ground.vector, opt.starts, opt.seed + 17),
                                    opt.max_iter, opt.tol);
}

inline EmbeddingConstants estimate_embedding_constants(const Grid& g, const ExponentField& p,
                                                       const EmbeddingOptions& opt = {}) {
    require_pde_grid(g, "estimate_embedding_constants");
    EmbeddingConstants c;
    c.safety = opt.safety;
    c.q_star = g.dim >= 3 ? 2.0 * g.dim / (g.dim - 2.0) : opt.q_star;
    c.q_star_surrogate = g.dim < 3;
    const bool user = opt.mode == ConstantsMode::user_supplied;

    if (user && opt.user_S) {
        c.S = *opt.user_S;
        c.provenance_S = Provenance::user_supplied;
    } else if (opt.mode == ConstantsMode::analytic) {
        c.S = analytic_S(g);
        c.provenance_S = Provenance::analytic;
    } else {
        c.lambda1_laplacian = laplacian_ground_state(g).value;
        c.S = 1.0 / std::sqrt(c.lambda1_laplacian);
        c.provenance_S = Provenance::eigensolve;
    }

    if (user && opt.user_B) {
        c.B = *opt.user_B;
        c.provenance_B = Provenance::user_supplied;
    } else {
        const auto r = estimate_B(g, p, opt);
        c.B = r.ratio;
        c.eps_est = r.slack;
        c.lambda1_biharmonic = r.lambda1;
        c.provenance_B = Provenance::sampled_ascent;
    }

    if (user && opt.user_S_star) {
        c.S_star = *opt.user_S_star;
        c.provenance_S_star = Provenance::user_supplied;
    } else {
        c.S_star = estimate_S_star(g, c.q_star, opt).ratio;
        c.provenance_S_star = Provenance::sampled_ascent;
    }

    if (!(c.B > 0.0) || !(c.S > 0.0) || !(c.S_star > 0.0))
        throw NumericError("embedding constants must be positive (B=" + detail::format_double(c.B) +
                           ", S=" + detail::format_double(c.S) + ", S*=" + detail::format_double(c.S_star) + ")");
    c.B1 = std::fmax(1.0, c.B);
    return c;
}

}  // namespace pklab
