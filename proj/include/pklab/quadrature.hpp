#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature and the improper integral
//   int_{R0}^inf dy / (K1 y^q + K2)
// used by the blow-up lower bound.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "pklab/error.hpp"

namespace pklab {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
    bool converged = true;
};

namespace detail {

inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd Kronrod nodes (x[1], x[3], x[5], x[7]).
inline constexpr std::array<double, 4> gauss_w = {0.129484966168869693270611432679082,
                                                  0.279705391489276667901467771423780,
                                                  0.381830050505118944950369775488975,
                                                  0.417959183673469387755102040816327};

template <class F>
void gk15(F& f, double a, double b, double& k, double& err) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double kr = kronrod_w[7] * fc;
    double ga = gauss_w[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kronrod_x[i];
        const double s = f(c - dx) + f(c + dx);
        kr += kronrod_w[i] * s;
        if (i % 2 == 1) ga += gauss_w[i / 2] * s;
    }
    k = kr * h;
    err = std::fabs((kr - ga) * h);
}

template <class F>
void adapt(F& f, double a, double b, double tol, int depth, QuadResult& out) {
    double k, err;
    gk15(f, a, b, k, err);
    out.evaluations += 15;
    if (err <= tol || depth <= 0 || b - a <= 1e-15 * std::fmax(std::fabs(a), std::fabs(b))) {
        if (err > tol) out.converged = false;
        out.value += k;
        out.error += err;
        return;
    }
    const double m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1, out);
    adapt(f, m, b, 0.5 * tol, depth - 1, out);
}

}  // namespace detail

/// int_a^b f by recursive bisection until each panel's Kronrod-Gauss
/// difference is below its share of abs_tol.
template <class F>
QuadResult integrate(F&& f, double a, double b, double abs_tol = 1e-10, int max_depth = 40) {
    QuadResult out;
    if (a == b) return out;
    if (!(std::isfinite(a) && std::isfinite(b))) throw InvalidInput("integrate needs finite limits");
    detail::adapt(f, a, b, abs_tol, max_depth, out);
    return out;
}

/// int_{R0}^inf dy / (K1 y^q + K2), q > 1. [R0, Y] is integrated in log y
/// (in y below 1); beyond Y the integrand is expanded in K2 / (K1 y^q) and
/// the alternating series is summed analytically.
inline QuadResult reciprocal_power_tail(double R0, double K1, double K2, double q, double abs_tol = 1e-10) {
    if (!(q > 1.0)) throw DomainError("integral of 1/(K1 y^q + K2) diverges for q <= 1");
    if (!(K1 > 0.0) || !(K2 >= 0.0) || !(R0 >= 0.0)) throw DomainError("need K1 > 0, K2 >= 0, R0 >= 0");
    if (R0 == 0.0 && K2 == 0.0) return {std::numeric_limits<double>::infinity(), 0.0, 0, true};

    // Y with K2 / (K1 Y^q) <= 1e-3, so a handful of series terms reach roundoff.
    const double Y = std::max({R0, 1.0, std::pow(1e3 * K2 / K1, 1.0 / q)});
    double tail = 0.0;
    double term_coeff = 1.0 / K1;
    for (int k = 0; k < 60; ++k) {
        const double e = q * (k + 1) - 1.0;
        const double term = term_coeff / (e * std::pow(Y, e));
        tail += (k % 2 == 0 ? term : -term);
        if (term < 1e-18 * std::fabs(tail)) break;
        term_coeff *= K2 / K1;
    }

    QuadResult out;
    auto lin = [&](double y) { return 1.0 / (K1 * std::pow(y, q) + K2); };
    auto lg = [&](double s) {
        const double y = std::exp(s);
        return y / (K1 * std::pow(y, q) + K2);
    };
    const double split = std::fmax(R0, 1.0);
    if (R0 < split) {
        const auto r = integrate(lin, R0, split, 0.5 * abs_tol);
        out.value += r.value;
        out.error += r.error;
        out.evaluations += r.evaluations;
        out.converged = out.converged && r.converged;
    }
    if (split < Y) {
        const auto r = integrate(lg, std::log(split), std::log(Y), 0.5 * abs_tol);
        out.value += r.value;
        out.error += r.error;
        out.evaluations += r.evaluations;
        out.converged = out.converged && r.converged;
    }
    out.value += tail;
    return out;
}

}  // namespace pklab
