#pragma once

// Numerical blow-up time: first-passage times t_k of ||u(t)||_{p(.)} through
// thresholds Theta_k, fitted to t_k = T - c Theta_k^{-kappa}.

#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace pklab {

/// Theta_k = 10^{2+k}, k = 1..5.
inline std::vector<double> default_thresholds() { return {1e3, 1e4, 1e5, 1e6, 1e7}; }

struct BlowupFit {
    double T = 0.0;
    double c = 0.0;
    double kappa = 0.0;
    double rms = 0.0;
    int crossings = 0;
};

/// First time the sampled (t, value) history exceeds each threshold, by
/// log-linear interpolation between the bracketing samples. NaN where the
/// threshold is never crossed from below.
inline std::vector<double> crossing_times(const std::vector<std::pair<double, double>>& history,
                                          const std::vector<double>& thresholds) {
    std::vector<double> out(thresholds.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
        const double th = thresholds[k];
        for (std::size_t i = 1; i < history.size(); ++i) {
            const auto [t0, n0] = history[i - 1];
            const auto [t1, n1] = history[i];
            if (!(n0 < th && n1 >= th)) continue;
            if (n0 > 0.0 && std::isfinite(n1)) {
                const double s = (std::log(th) - std::log(n0)) / (std::log(n1) - std::log(n0));
                out[k] = t0 + s * (t1 - t0);
            } else {
                out[k] = t1;
            }
            break;
        }
    }
    return out;
}

namespace detail {

// Least squares of t = T - c x for fixed kappa; returns the sum of squares.
inline double fit_linear(const std::vector<double>& th, const std::vector<double>& t, double kappa, double& T,
                         double& c) {
    const std::size_t n = th.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::pow(th[i], -kappa);
        sx += x[i];
        sy += t[i];
        sxx += x[i] * x[i];
        sxy += x[i] * t[i];
    }
    const double det = n * sxx - sx * sx;
    if (!(std::fabs(det) > 0.0)) {
        T = sy / n;
        c = 0.0;
    } else {
        const double slope = (n * sxy - sx * sy) / det;
        T = (sy - slope * sx) / n;
        c = -slope;
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = t[i] - (T - c * x[i]);
        ss += r * r;
    }
    return ss;
}

}  // namespace detail

/// Fits T from (Theta_k, t_k) pairs. kappa is chosen on a log grid in
/// [1e-2, 10] and refined by golden-section search.
inline std::optional<BlowupFit> fit_blowup_time(const std::vector<double>& thresholds, const std::vector<double>& times) {
    std::vector<double> th, t;
    for (std::size_t k = 0; k < thresholds.size() && k < times.size(); ++k)
        if (std::isfinite(times[k])) {
            th.push_back(thresholds[k]);
            t.push_back(times[k]);
        }
    if (th.size() < 3) return std::nullopt;

    // Work in log(kappa) so the grid resolves both slow and fast blow-up.
    auto objective = [&](double lk) {
        double T, c;
        return detail::fit_linear(th, t, std::exp(lk), T, c);
    };
    const double lo = std::log(1e-2), hi = std::log(10.0);
    const int grid = 400;
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= grid; ++i) {
        const double v = objective(lo + (hi - lo) * i / grid);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    double a = lo + (hi - lo) * std::max(best - 1, 0) / grid;
    double b = lo + (hi - lo) * std::min(best + 1, grid) / grid;
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = objective(x1), f2 = objective(x2);
    for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = objective(x2);
        }
    }
    BlowupFit fit;
    fit.kappa = std::exp(0.5 * (a + b));
    const double ss = detail::fit_linear(th, t, fit.kappa, fit.T, fit.c);
    fit.rms = std::sqrt(ss / th.size());
    fit.crossings = static_cast<int>(th.size());
    // The extrapolated time never precedes the last observed crossing.
    double last = t.front();
    for (double x : t) last = std::fmax(last, x);
    fit.T = std::fmax(fit.T, last);
    return fit;
}

/// Extrapolated blow-up time from a (t, norm) history, absent with fewer
/// than three threshold crossings.
inline std::optional<double> detect_blowup(const std::vector<std::pair<double, double>>& history,
                                           const std::vector<double>& thresholds = default_thresholds()) {
    if (history.empty()) return std::nullopt;
    const auto fit = fit_blowup_time(thresholds, crossing_times(history, thresholds));
    if (!fit) return std::nullopt;
    return fit->T;
}

}  // namespace pklab
