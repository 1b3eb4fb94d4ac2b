#pragma once

// Potential-well thresholds, regime classification and the blow-up and
// decay bounds. Free parameters (eps1, E2, eps2, eps, omega) follow fixed
// selection rules so every bound is reproducible; each choice is recorded.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "pklab/embedding.hpp"
#include "pklab/error.hpp"
#include "pklab/functionals.hpp"
#include "pklab/model.hpp"
#include "pklab/quadrature.hpp"

namespace pklab {

enum class Regime { global_candidate, blowup_low_energy, blowup_high_energy, indeterminate };

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::global_candidate: return "global_candidate";
        case Regime::blowup_low_energy: return "blowup_low_energy";
        case Regime::blowup_high_energy: return "blowup_high_energy";
        case Regime::indeterminate: return "indeterminate";
    }
    return "?";
}

/// alpha1 = (B1^2)^{-2/(p- - 2)}, E1 = (1/2 - 1/p-) alpha1^{p-/2}.
inline std::pair<double, double> alpha1_E1(double B1, double p_minus) {
    if (!(p_minus > 2.0)) throw DomainError("alpha1/E1 need p- > 2");
    if (!(B1 >= 1.0)) throw DomainError("alpha1/E1 need B1 >= 1");
    const double alpha1 = std::pow(B1 * B1, -2.0 / (p_minus - 2.0));
    return {alpha1, (0.5 - 1.0 / p_minus) * std::pow(alpha1, 0.5 * p_minus)};
}

/// G(alpha) = alpha / (2 B1^2) - max(alpha^{p+/2}, alpha^{p-/2}) / p-.
inline double G_of_alpha(double alpha, double B1, double p_minus, double p_plus) {
    const double big = std::fmax(std::pow(alpha, 0.5 * p_plus), std::pow(alpha, 0.5 * p_minus));
    return alpha / (2.0 * B1 * B1) - big / p_minus;
}

namespace detail {

// Root of a monotone g on [lo, hi] with g(lo), g(hi) of opposite signs.
template <class F>
double bisect(F&& g, double lo, double hi) {
    double glo = g(lo);
    for (int it = 0; it < 300 && hi - lo > 1e-16 * std::fmax(std::fabs(lo), std::fabs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if ((gm > 0.0) == (glo > 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// Root of G(alpha) = E on (alpha1, inf), where G decreases. Any E < E1.
inline double upper_alpha_root(double E, double B1, double p_minus, double p_plus) {
    const auto [alpha1, E1] = alpha1_E1(B1, p_minus);
    if (!(E < E1)) throw DomainError("upper alpha root needs E < E1");
    auto g = [&](double a) { return G_of_alpha(a, B1, p_minus, p_plus) - E; };
    double hi = 2.0 * alpha1;
    while (g(hi) > 0.0) {
        hi *= 2.0;
        if (!std::isfinite(hi)) throw NumericError("upper alpha root bracket overflow");
    }
    return detail::bisect(g, alpha1, hi);
}

struct AlphaRoots {
    double tilde = 0.0;  // in (0, alpha1)
    double upper = 0.0;  // in (alpha1, inf)
};

inline AlphaRoots solve_alpha_roots(double E0, double B1, double p_minus, double p_plus) {
    const auto [alpha1, E1] = alpha1_E1(B1, p_minus);
    if (!(E0 > 0.0)) throw DomainError("alpha roots need E(0) > 0");
    if (!(E0 < E1)) throw DomainError("alpha roots need E(0) < E1");
    auto g = [&](double a) { return G_of_alpha(a, B1, p_minus, p_plus) - E0; };
    return {detail::bisect(g, 0.0, alpha1), upper_alpha_root(E0, B1, p_minus, p_plus)};
}

/// Hypotheses of the high-energy blow-up result.
struct HighEnergyCheck {
    bool m_is_two = false;
    bool p_gap = false;         // p- > 2 (gamma + 1)
    bool energy_window = false; // 0 < E(0) < (C / p-) int u0 u1

    bool ok() const noexcept { return m_is_two && p_gap && energy_window; }
    std::string failed() const {
        if (!m_is_two) return "m is not identically 2";
        if (!p_gap) return "p- <= 2 (gamma + 1)";
        if (!energy_window) return "E(0) outside (0, (C / p-) int u0 u1)";
        return "";
    }
};

inline HighEnergyCheck high_energy_conditions(bool m_is_two, double p_minus, double gamma, double E0, double C,
                                              double uv0) {
    HighEnergyCheck h;
    h.m_is_two = m_is_two;
    h.p_gap = p_minus > 2.0 * (gamma + 1.0);
    h.energy_window = E0 > 0.0 && E0 < C / p_minus * uv0;
    return h;
}

inline Regime classify_regime(double E0, double alpha0, double alpha1, double E1, const HighEnergyCheck& high) {
    if (E0 < E1 && alpha0 > alpha1) return Regime::blowup_low_energy;
    if (E0 < E1 && alpha0 < alpha1) return Regime::global_candidate;
    if (high.ok()) return Regime::blowup_high_energy;
    return Regime::indeterminate;
}

/// min{(p- - m+)/(p- (m+ - 1)), (p- - 2)/(2 p-), gamma/(gamma + 1)}.
inline double sigma_max(double p_minus, double p_plus, double m_plus, double gamma) {
    (void)p_plus;
    if (!(p_minus > m_plus)) throw DomainError("sigma needs p- > m+");
    if (!(p_minus > 2.0 * (gamma + 1.0))) throw DomainError("sigma needs p- > 2 (gamma + 1)");
    if (!(m_plus > 1.0)) throw DomainError("sigma needs m+ > 1");
    const double s = std::min({(p_minus - m_plus) / (p_minus * (m_plus - 1.0)), (p_minus - 2.0) / (2.0 * p_minus),
                               gamma / (gamma + 1.0)});
    if (!(s > 0.0 && s < 0.5)) throw DomainError("sigma out of (0, 1/2)");
    return s;
}

// ---------------------------------------------------------------------------
// Low-energy blow-up time

struct Thm31Inputs {
    double a = 1.0, b = 1.0, gamma = 1.0;
    double p_minus = 0.0, p_plus = 0.0, m_minus = 0.0, m_plus = 0.0;
    double B1 = 1.0;
    double volume = 1.0;  // |Omega|
    double E0 = 0.0;
    double uv0 = 0.0;      // int u0 u1
    double grad_u0 = 0.0;  // ||grad u0||^2
};

struct Thm31Choices {
    /// eps1 as a fraction of its supremum (p- - 2(gamma+1)) / p-.
    double eps1_fraction = 0.5;
    /// eps2 = safety * max(1, threshold).
    double eps2_safety = 1.01;
    /// E2 = E(0) + gap * |E(0)| (gap itself when E(0) = 0).
    double E2_gap = 1e-6;
};

struct Thm31Result {
    bool feasible = false;
    std::string reason;
    double sigma = 0.0, eps1 = 0.0, E2 = 0.0, H0 = 0.0;
    double C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0, C5 = 0.0, C6 = 0.0, C7 = 1.0;
    double eps2 = 0.0, eps = 0.0, J0 = 0.0, F0 = 0.0;
    double M1 = 0.0, M2 = 0.0;
    std::string M1_binding;
    /// F0^{-s/(1-s)} (M2/M1) (1-s)/s, the form the ODE comparison yields.
    double T_upper = 0.0;
    /// Same with M1/M2 as the statement prints it.
    double T_upper_statement = 0.0;
};

/// F0^{-s/(1-s)} (M2/M1) (1-s)/s.
inline double thm31_time(double F0, double M1, double M2, double sigma) {
    if (!(F0 > 0.0) || !(M1 > 0.0) || !(M2 > 0.0) || !(sigma > 0.0 && sigma < 1.0))
        throw DomainError("blow-up time needs F0, M1, M2 > 0 and 0 < sigma < 1");
    return std::pow(F0, -sigma / (1.0 - sigma)) * (M2 / M1) * (1.0 - sigma) / sigma;
}

inline Thm31Result thm31_bound(const Thm31Inputs& in, const Thm31Choices& ch = {}) {
    Thm31Result r;
    const double pm = in.p_minus, pp = in.p_plus, mm = in.m_minus, mp = in.m_plus;
    r.sigma = sigma_max(pm, pp, mp, in.gamma);
    const double s = r.sigma;
    const auto [alpha1, E1] = alpha1_E1(in.B1, pm);
    (void)E1;

    if (!(ch.eps1_fraction > 0.0 && ch.eps1_fraction < 1.0)) throw InvalidInput("eps1 fraction must lie in (0, 1)");
    r.eps1 = ch.eps1_fraction * (pm - 2.0 * (in.gamma + 1.0)) / pm;

    const double cap = (0.5 - 1.0 / (pm * (1.0 - r.eps1))) * std::pow(alpha1, 0.5 * pm);
    const double gap = in.E0 == 0.0 ? ch.E2_gap : ch.E2_gap * std::fabs(in.E0);
    r.E2 = std::fmin(in.E0 + gap, cap);
    if (!(r.E2 > in.E0)) {
        r.reason = "E2 cap [1/2 - 1/(p-(1-eps1))] alpha1^{p-/2} does not exceed E(0)";
        return r;
    }
    r.H0 = r.E2 - in.E0;

    r.C1 = std::fmin(r.H0, 1.0);
    r.C2 = std::pow(1.0 + in.volume, mp) * std::pow(r.C1, s * (mm - mp));
    const double ph = std::fmin(pm * r.H0, 1.0);
    r.C3 = 2.0 * std::pow(ph, mm / pp - mp / pm);
    const double X = std::pow(r.C1, s * (mp - 1.0) + mp / pm - 1.0) * r.C2 * r.C3 * std::pow(1.0 / pm, 1.0 - mp / pm);
    if (!(mm > 1.0)) throw DomainError("eps2 selection needs m- > 1");
    const double threshold = std::pow(X / r.eps1, 1.0 / (mm - 1.0));
    r.eps2 = ch.eps2_safety * std::fmax(1.0, threshold);
    if (!std::isfinite(r.eps2)) {
        r.reason = "eps2 threshold is not finite";
        return r;
    }

    r.J0 = in.uv0 + 0.5 * in.grad_u0;
    r.eps = (1.0 - s) / (2.0 * r.eps2);
    if (r.J0 < 0.0) r.eps = std::fmin(r.eps, 0.5 * std::pow(r.H0, 1.0 - s) / std::fabs(r.J0));
    r.F0 = std::pow(r.H0, 1.0 - s) + r.eps * r.J0;

    const double q = pm * (1.0 - r.eps1);
    const std::pair<const char*, double> terms[] = {
        {"u_t", 1.0 + 0.5 * q},
        {"H", q},
        {"a-gradient", in.a * (0.5 * q - 1.0)},
        {"b-gradient", in.b * (q / (2.0 * (in.gamma + 1.0)) - 1.0)},
        {"source", r.eps1 - X / std::pow(r.eps2, mm - 1.0)},
    };
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& [name, v] : terms)
        if (v < mn) {
            mn = v;
            r.M1_binding = name;
        }
    r.M1 = r.eps * mn;
    if (!(r.M1 > 0.0)) {
        r.reason = "M1 <= 0 (binding term: " + r.M1_binding + ")";
        return r;
    }

    const double inv = 1.0 / (1.0 - s);
    const double k = 2.0 * (1.0 - s) - 1.0;
    r.C4 = std::pow(1.0 + in.volume, inv) / (2.0 * (1.0 - s));
    r.C5 = r.C4 * k;
    r.C6 = std::pow(ph, (2.0 - pp * k) / (pp * k));
    r.C7 = 1.0;
    const double ei = std::pow(r.eps, inv);
    r.M2 = std::pow(2.0, 2.0 * s * inv) * std::max({1.0, ei * r.C4, ei * r.C5 * r.C6, std::pow(0.5, inv) * r.C7});

    if (!(r.F0 > 0.0)) {
        r.reason = "F(0) <= 0";
        return r;
    }
    r.T_upper = thm31_time(r.F0, r.M1, r.M2, s);
    r.T_upper_statement = thm31_time(r.F0, r.M2, r.M1, s);
    r.feasible = std::isfinite(r.T_upper) && r.T_upper > 0.0;
    if (!r.feasible) r.reason = "T_upper not finite";
    return r;
}

/// Grid search over eps1 and eps2 for the smallest T_upper.
inline Thm31Result thm31_tightened(const Thm31Inputs& in, Thm31Choices ch = {}) {
    Thm31Result best = thm31_bound(in, ch);
    for (double f : {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95})
        for (double sf : {1.01, 1.1, 1.5, 2.0, 4.0, 10.0}) {
            ch.eps1_fraction = f;
            ch.eps2_safety = sf;
            const auto r = thm31_bound(in, ch);
            if (r.feasible && (!best.feasible || r.T_upper < best.T_upper)) best = r;
        }
    return best;
}

// ---------------------------------------------------------------------------
// High-energy blow-up time

/// C = min{2 + p-, 2 p- (p- - 2) a / (1 + (2 p- + 1) S^2)}.
inline double C_constant(double a, double p_minus, double S) {
    if (!(a > 0.0) || !(p_minus > 2.0) || !(S > 0.0)) throw DomainError("C needs a > 0, p- > 2, S > 0");
    return std::fmin(2.0 + p_minus, 2.0 * p_minus * (p_minus - 2.0) * a / (1.0 + (2.0 * p_minus + 1.0) * S * S));
}

/// Concavity blow-up time psi(0) / (theta psi'(0)).
inline double levine_time(double psi0, double dpsi0, double theta) {
    if (!(psi0 > 0.0) || !(dpsi0 > 0.0) || !(theta > 0.0)) throw DomainError("levine time needs psi0, psi0', theta > 0");
    return psi0 / (theta * dpsi0);
}

/// 2 (||u0||^2 + rho omega^2) / ((p- - 2)(int u0 u1 + rho omega) - 2 ||grad u0||^2).
inline double thm42_time(double l2_u0, double grad_u0, double uv0, double rho, double omega, double p_minus) {
    const double den = (p_minus - 2.0) * (uv0 + rho * omega) - 2.0 * grad_u0;
    if (!(den > 0.0)) throw DomainError("(p- - 2)(int u0 u1 + rho omega) - 2 ||grad u0||^2 must be > 0");
    return 2.0 * (l2_u0 + rho * omega * omega) / den;
}

struct Thm42Inputs {
    bool m_is_two = true;
    double p_minus = 0.0, gamma = 1.0;
    double E0 = 0.0, C = 0.0;
    double l2_u0 = 0.0, grad_u0 = 0.0, uv0 = 0.0;
};

struct Thm42Result {
    double rho = 0.0, omega = 0.0, T_upper = 0.0;
    double theta = 0.0;
    /// The concavity time with T* = T_upper in Upsilon(0); equals T_upper.
    double levine_t2 = 0.0;
};

inline Thm42Result thm42_bound(const Thm42Inputs& in, double margin = 1.1) {
    const double pm = in.p_minus;
    const auto he = high_energy_conditions(in.m_is_two, pm, in.gamma, in.E0, in.C, in.uv0);
    if (!he.ok()) throw DomainError("high-energy bound: " + he.failed());
    if (!(in.E0 <= in.C / (2.0 * pm) * in.l2_u0)) throw DomainError("high-energy bound: E(0) > C ||u0||^2 / (2 p-)");
    Thm42Result r;
    r.rho = (in.C * in.l2_u0 - 2.0 * pm * in.E0) / (2.0 * pm);
    r.omega = 1.0;
    auto ok = [&](double w) { return (pm - 2.0) * (in.uv0 + r.rho * w) >= margin * 2.0 * in.grad_u0; };
    while (!ok(r.omega)) {
        if (r.omega >= std::ldexp(1.0, 60))
            throw DomainError("high-energy bound: no omega makes (p- - 2)(int u0 u1 + rho omega) > 2 ||grad u0||^2");
        r.omega *= 2.0;
    }
    r.T_upper = thm42_time(in.l2_u0, in.grad_u0, in.uv0, r.rho, r.omega, pm);
    r.theta = 0.25 * (pm - 2.0);
    const double ups0 = in.l2_u0 + r.T_upper * in.grad_u0 + r.rho * r.omega * r.omega;
    r.levine_t2 = levine_time(ups0, 2.0 * (in.uv0 + r.rho * r.omega), r.theta);
    return r;
}

// ---------------------------------------------------------------------------
// Lower bound and decay

/// R(0) = ||u1||^2/2 + ||Lap u0||^2/2 + a ||grad u0||^2/2 + b ||grad u0||^{2(gamma+1)} / (2(gamma+1)).
inline double thm43_R0(double l2_u1, double lap_u0, double grad_u0, double a, double b, double gamma) {
    return 0.5 * l2_u1 + 0.5 * lap_u0 + 0.5 * a * grad_u0 + b / (2.0 * (gamma + 1.0)) * std::pow(grad_u0, gamma + 1.0);
}

/// K1 = (S*^2/4) B^{2(p+ - 1)} (2/a)^{p+ - 1}, K2 = (S*^2/4) |Omega|^{(N+2)/N}.
inline std::pair<double, double> thm43_K(double S_star, double B, double a, double p_plus, double volume, int dim) {
    const double s = 0.25 * S_star * S_star;
    return {s * std::pow(B, 2.0 * (p_plus - 1.0)) * std::pow(2.0 / a, p_plus - 1.0),
            s * std::pow(volume, (dim + 2.0) / dim)};
}

/// int_{R0}^inf dy / (K1 y^{p+ - 1} + K2).
inline double thm43_lower_bound(double R0, double K1, double K2, double p_plus, double quad_tol = 1e-10) {
    if (!(p_plus > 2.0)) throw DomainError("lower bound integral diverges for p+ <= 2");
    return reciprocal_power_tail(R0, K1, K2, p_plus - 1.0, quad_tol).value;
}

/// (p- / (2 p+))^{2/(p- - 2)} (1/2 - 1/p+) alpha1^{p-/2}.
inline double E2_tilde(double B1, double p_minus, double p_plus) {
    const double alpha1 = alpha1_E1(B1, p_minus).first;
    return std::pow(p_minus / (2.0 * p_plus), 2.0 / (p_minus - 2.0)) * (0.5 - 1.0 / p_plus) *
           std::pow(alpha1, 0.5 * p_minus);
}

struct Thm54Result {
    double delta = 0.0, eps4 = 0.0, eps5 = 0.0, K = 0.0, E2_tilde = 0.0;
};

inline Thm54Result thm54_decay(double E0, double alpha2_tilde, double B1, double p_minus, double p_plus,
                               double m_minus, double S) {
    Thm54Result r;
    const double pm = p_minus;
    r.E2_tilde = E2_tilde(B1, pm, p_plus);
    if (!(E0 > 0.0 && E0 < r.E2_tilde)) throw DomainError("decay rate needs 0 < E(0) < E2~");
    const double w = 2.0 * B1 * B1 * std::pow(alpha2_tilde, 0.5 * (pm - 2.0));
    if (!(pm - w > 0.0)) throw DomainError("decay rate: p- <= 2 B1^2 alpha2~^{(p- - 2)/2}");
    r.delta = (p_plus - 1.0) * w / (pm - w);
    if (!(r.delta < 1.0)) throw DomainError("decay rate: delta >= 1 (E(0) too large for the certificate)");
    r.eps5 = (1.0 - r.delta) * (pm - 2.0) / (4.0 * pm);
    const double lead = std::pow(2.0 * pm * E0 / (pm - 2.0), 0.5 * (m_minus - 2.0)) * 2.0 * pm *
                        std::pow(B1, m_minus) / (pm - 2.0);
    r.eps4 = 0.25 * (1.0 - r.delta) / lead;
    const double den = 1.5 * S * S + std::pow(r.eps4, 1.0 / (1.0 - m_minus)) + 2.0 * pm * B1 * B1 / (pm - 2.0) +
                       2.0 * pm / (pm - 2.0) + 1.0 / (2.0 * r.eps5);
    r.K = 0.5 * (1.0 - r.delta) / den;
    return r;
}

// ---------------------------------------------------------------------------
// Report

struct ProblemSummary {
    double a = 1.0, b = 1.0, gamma = 1.0;
    double p_minus = 0.0, p_plus = 0.0, m_minus = 0.0, m_plus = 0.0;
    bool m_is_two = false;
    int dim = 1;
    double volume = 1.0;
};

inline ProblemSummary summarize(const ModelParams& mp) {
    ProblemSummary s;
    s.a = mp.a;
    s.b = mp.b;
    s.gamma = mp.gamma;
    s.p_minus = mp.p.lo;
    s.p_plus = mp.p.hi;
    s.m_minus = mp.m.lo;
    s.m_plus = mp.m.hi;
    s.m_is_two = mp.m.lo == 2.0 && mp.m.hi == 2.0;
    s.dim = mp.p.grid.dim;
    s.volume = mp.p.grid.measure();
    return s;
}

struct InitialFunctionals {
    double E0 = 0.0;
    double l2_u0 = 0.0, l2_u1 = 0.0;
    double grad_u0 = 0.0, lap_u0 = 0.0;
    double uv0 = 0.0;
};

inline InitialFunctionals initial_functionals(const SimState& s, const ModelParams& mp) {
    const auto e = energy_parts(s, mp);
    InitialFunctionals f;
    f.E0 = e.total();
    f.l2_u0 = e.l2_u;
    f.l2_u1 = e.l2_v;
    f.grad_u0 = e.grad_u;
    f.lap_u0 = e.lap_u;
    f.uv0 = l2_inner(s.u, s.v);
    return f;
}

struct BoundsOptions {
    bool tighten = false;
    Thm31Choices thm31;
    double omega_margin = 1.1;
    double quad_tol = 1e-10;
};

struct BoundsReport {
    double alpha1 = 0.0, E1 = 0.0, alpha0 = 0.0, E0 = 0.0;
    Regime regime = Regime::indeterminate;
    std::optional<double> alpha2, alpha2_tilde;
    std::optional<double> E2;
    std::optional<double> sigma, eps1, eps2, eps;
    std::optional<double> M1, M2, F0, T_upper_thm31, T_upper_thm31_statement;
    std::optional<double> C, rho, omega, T_upper_thm42, levine_t2;
    std::optional<double> R0, K1, K2, T_lower;
    bool T_lower_heuristic = false;
    std::optional<double> delta, eps4, eps5, K_decay, E2_tilde;
    bool tightened = false;
    EmbeddingConstants constants;
    /// (field, reason) for every bound left out.
    std::vector<std::pair<std::string, std::string>> absent;
};

inline BoundsReport full_report(const ProblemSummary& pb, const EmbeddingConstants& k, const InitialFunctionals& in,
                                const BoundsOptions& opt = {}) {
    BoundsReport r;
    r.constants = k;
    r.tightened = opt.tighten;
    r.E0 = in.E0;
    std::tie(r.alpha1, r.E1) = alpha1_E1(k.B1, pb.p_minus);
    r.alpha0 = k.B1 * k.B1 * in.lap_u0;
    r.C = C_constant(pb.a, pb.p_minus, k.S);
    const auto high = high_energy_conditions(pb.m_is_two, pb.p_minus, pb.gamma, in.E0, *r.C, in.uv0);
    r.regime = classify_regime(in.E0, r.alpha0, r.alpha1, r.E1, high);
    auto skip = [&](const char* field, std::string why) { r.absent.emplace_back(field, std::move(why)); };

    if (in.E0 > 0.0 && in.E0 < r.E1) {
        const auto roots = solve_alpha_roots(in.E0, k.B1, pb.p_minus, pb.p_plus);
        r.alpha2_tilde = roots.tilde;
        r.alpha2 = roots.upper;
    } else if (in.E0 < r.E1) {
        r.alpha2 = upper_alpha_root(in.E0, k.B1, pb.p_minus, pb.p_plus);
        if (in.E0 == 0.0) r.alpha2_tilde = 0.0;
        else skip("alpha2_tilde", "E(0) < 0");
    } else {
        skip("alpha2", "E(0) >= E1");
        skip("alpha2_tilde", "E(0) >= E1");
    }

    const bool blowup = r.regime == Regime::blowup_low_energy || r.regime == Regime::blowup_high_energy;

    if (r.regime == Regime::blowup_low_energy) {
        Thm31Inputs ti{pb.a, pb.b, pb.gamma, pb.p_minus, pb.p_plus, pb.m_minus, pb.m_plus, k.B1, pb.volume,
                       in.E0, in.uv0, in.grad_u0};
        try {
            const auto t = opt.tighten ? thm31_tightened(ti, opt.thm31) : thm31_bound(ti, opt.thm31);
            r.sigma = t.sigma;
            r.eps1 = t.eps1;
            if (t.E2 > in.E0) r.E2 = t.E2;
            if (t.eps2 > 0.0) r.eps2 = t.eps2;
            if (t.eps > 0.0) r.eps = t.eps;
            if (t.feasible) {
                r.M1 = t.M1;
                r.M2 = t.M2;
                r.F0 = t.F0;
                r.T_upper_thm31 = t.T_upper;
                r.T_upper_thm31_statement = t.T_upper_statement;
            } else {
                skip("T_upper_thm31", "infeasible selection: " + t.reason);
            }
        } catch (const DomainError& e) {
            skip("T_upper_thm31", e.what());
        }
    } else {
        skip("T_upper_thm31", std::string("regime is ") + to_string(r.regime));
    }

    if (r.regime == Regime::blowup_high_energy) {
        try {
            const auto t = thm42_bound({pb.m_is_two, pb.p_minus, pb.gamma, in.E0, *r.C, in.l2_u0, in.grad_u0, in.uv0},
                                       opt.omega_margin);
            r.rho = t.rho;
            r.omega = t.omega;
            r.T_upper_thm42 = t.T_upper;
            r.levine_t2 = t.levine_t2;
            if (opt.tighten) {
                // Larger omega can shorten the bound; scan a few doublings.
                for (int j = 1; j <= 20; ++j) {
                    const double w = t.omega * std::ldexp(1.0, j);
                    try {
                        const double T = thm42_time(in.l2_u0, in.grad_u0, in.uv0, t.rho, w, pb.p_minus);
                        if (T < *r.T_upper_thm42) {
                            r.T_upper_thm42 = T;
                            r.omega = w;
                        }
                    } catch (const DomainError&) {
                    }
                }
            }
        } catch (const DomainError& e) {
            skip("T_upper_thm42", e.what());
        }
    } else {
        skip("T_upper_thm42", std::string("regime is ") + to_string(r.regime));
    }

    if (blowup) {
        try {
            r.R0 = thm43_R0(in.l2_u1, in.lap_u0, in.grad_u0, pb.a, pb.b, pb.gamma);
            const auto [K1, K2] = thm43_K(k.S_star, k.B, pb.a, pb.p_plus, pb.volume, pb.dim);
            r.K1 = K1;
            r.K2 = K2;
            r.T_lower = thm43_lower_bound(*r.R0, K1, K2, pb.p_plus, opt.quad_tol);
            r.T_lower_heuristic = pb.dim < 5;
        } catch (const DomainError& e) {
            skip("T_lower", e.what());
        }
    } else {
        skip("T_lower", "no blow-up predicted");
    }

    if (r.regime == Regime::global_candidate) {
        r.E2_tilde = E2_tilde(k.B1, pb.p_minus, pb.p_plus);
        if (!(in.E0 > 0.0)) {
            skip("K_decay", "E(0) <= 0");
        } else if (!(in.E0 < *r.E2_tilde)) {
            skip("K_decay", "E(0) >= E2~");
        } else {
            try {
                const auto d = thm54_decay(in.E0, *r.alpha2_tilde, k.B1, pb.p_minus, pb.p_plus, pb.m_minus, k.S);
                r.delta = d.delta;
                r.eps4 = d.eps4;
                r.eps5 = d.eps5;
                r.K_decay = d.K;
            } catch (const DomainError& e) {
                skip("K_decay", e.what());
            }
        }
    } else {
        skip("K_decay", std::string("regime is ") + to_string(r.regime));
    }
    return r;
}

}  // namespace pklab
