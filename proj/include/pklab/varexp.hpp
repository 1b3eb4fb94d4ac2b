#pragma once

// Variable-exponent Lebesgue space computations on grid functions:
// exponent fields, the modular, the Luxemburg norm and the modular/norm
// sandwich min{n^p-, n^p+} <= A(f) <= max{n^p-, n^p+}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pklab/error.hpp"
#include "pklab/field_spec.hpp"
#include "pklab/grid.hpp"

namespace pklab {

/// Grid-sampled exponent m(x) or p(x) with cached extrema.
struct ExponentField {
    Grid grid;
    std::vector<double> values;
    double lo = 0.0;
    double hi = 0.0;

    ExponentField() = default;
    ExponentField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.size()) throw InvalidInput("exponent field size does not match grid");
        for (double x : values)
            if (!std::isfinite(x)) throw InvalidInput("exponent field has non-finite values");
        refresh();
    }

    static ExponentField constant(const Grid& g, double q) { return {g, std::vector<double>(g.size(), q)}; }
    static ExponentField from_spec(const Grid& g, const FieldSpec& s) { return {g, s.sample(g).values}; }
    static ExponentField from_spec(const Grid& g, std::string_view text) { return from_spec(g, FieldSpec::parse(text)); }

    void refresh() noexcept {
        if (values.empty()) {
            lo = hi = 0.0;
            return;
        }
        const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
        lo = *mn;
        hi = *mx;
    }

    bool is_constant() const noexcept { return lo == hi; }
    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const noexcept { return values[i]; }
};

struct ExponentValidation {
    bool passed = false;
    double lo = 0.0;
    double hi = 0.0;
    /// Nodes violating 1 < q(x) or the required range.
    std::vector<std::size_t> offending;
    std::string message;
};

/// Checks required_lo <= lo and hi <= required_hi and the strict 1 < q(x)
/// bound at every node. Recomputes the cached extrema in place.
inline ExponentValidation validate_exponent_field(ExponentField& field, double required_lo, double required_hi) {
    if (field.values.empty()) throw InvalidInput("exponent field is empty");
    field.refresh();
    ExponentValidation r;
    r.lo = field.lo;
    r.hi = field.hi;
    for (std::size_t i = 0; i < field.values.size(); ++i) {
        const double q = field.values[i];
        if (!(q > 1.0) || q < required_lo || q > required_hi || !std::isfinite(q)) r.offending.push_back(i);
    }
    r.passed = r.offending.empty();
    if (!r.passed) {
        const std::size_t i = r.offending.front();
        r.message = "exponent " + detail::format_double(field.values[i]) + " at node " + std::to_string(i) +
                    " outside [" + detail::format_double(required_lo) + ", " + detail::format_double(required_hi) +
                    "] or not > 1";
    }
    return r;
}

struct LogHolderReport {
    /// Largest |q(x) - q(y)| * (-log|x - y|) over the sampled pairs with |x - y| < delta.
    double max_violation = 0.0;
    /// Smallest A consistent with the sampled pairs (equals max_violation).
    double A_estimate = 0.0;
    /// Configured A the field was tested against.
    double A = 0.0;
    std::size_t pairs_checked = 0;
    bool passed = true;
};

/// Scans node pairs closer than delta. Grids larger than max_nodes are
/// subsampled with a uniform stride on the first member of each pair.
inline LogHolderReport log_holder_check(const ExponentField& field, double A, double delta,
                                        std::size_t max_nodes = 4096) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("log-Hoelder check needs 0 < delta < 1");
    if (!(A > 0.0)) throw InvalidInput("log-Hoelder check needs A > 0");
    LogHolderReport r;
    r.A = A;
    const Grid& g = field.grid;
    const std::size_t n = field.size();
    const std::size_t stride = n > max_nodes ? (n + max_nodes - 1) / max_nodes : 1;
    for (std::size_t i = 0; i < n; i += stride) {
        const auto xi = g.position(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto xj = g.position(j);
            const double d = std::hypot(xi[0] - xj[0], xi[1] - xj[1]);
            if (!(d < delta) || d <= 0.0) continue;
            ++r.pairs_checked;
            const double v = std::fabs(field.values[i] - field.values[j]) * (-std::log(d));
            r.max_violation = std::fmax(r.max_violation, v);
        }
    }
    r.A_estimate = r.max_violation;
    r.passed = r.max_violation <= A;
    return r;
}

/// Discrete modular: sum over nodes of |f|^{p(x)} times the cell volume.
inline double modular(const GridFunction& f, const ExponentField& p) {
    require_same_grid(f.grid, p.grid, "modular");
    const double w = f.grid.cell_volume();
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double a = std::fabs(f.values[i]);
        if (a != 0.0) s += std::pow(a, p.values[i]);
    }
    return s * w;
}

namespace detail {

// modular(f / lambda) with log|f| precomputed; zero entries carry -inf.
inline double scaled_modular(const std::vector<double>& logf, const std::vector<double>& q, double w, double lambda) {
    const double ll = std::log(lambda);
    double s = 0.0;
    for (std::size_t i = 0; i < logf.size(); ++i) {
        if (logf[i] == -std::numeric_limits<double>::infinity()) continue;
        s += std::exp(q[i] * (logf[i] - ll));
    }
    return s * w;
}

}  // namespace detail

inline constexpr double default_norm_tol = 1e-12;

/// Luxemburg norm inf{lambda > 0 : modular(f / lambda) <= 1}. The returned
/// value is the upper end of the final bracket, so modular(f / norm) <= 1.
inline double luxemburg_norm(const GridFunction& f, const ExponentField& p, double tol = default_norm_tol) {
    require_same_grid(f.grid, p.grid, "luxemburg_norm");
    if (!(tol > 0.0)) throw InvalidInput("luxemburg_norm needs tol > 0");
    if (!f.all_finite()) throw InvalidInput("luxemburg_norm: non-finite values");
    if (f.is_zero()) return 0.0;

    const double w = f.grid.cell_volume();
    std::vector<double> logf(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double a = std::fabs(f.values[i]);
        logf[i] = a == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(a);
    }
    auto mod = [&](double lam) { return detail::scaled_modular(logf, p.values, w, lam); };

    const double sup = max_abs(f.values);
    double hi = std::fmax(1.0, sup * f.grid.measure());
    while (mod(hi) > 1.0) hi *= 2.0;
    double lo = std::fmin(hi, sup) * std::numeric_limits<double>::epsilon();
    while (mod(lo) <= 1.0) lo *= 0.5;

    // Geometric bisection keeps the relative bracket shrinking at a fixed rate.
    for (int it = 0; it < 400 && hi - lo > tol * hi; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (mod(mid) > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

struct SandwichReport {
    double norm = 0.0;
    double modular = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool holds = false;
};

/// Compares the modular against min/max{n^p-, n^p+}, n the Luxemburg norm.
/// The comparison allows the slack the norm's relative tolerance implies.
inline SandwichReport check_sandwich(const GridFunction& f, const ExponentField& p, double tol = default_norm_tol) {
    SandwichReport r;
    r.norm = luxemburg_norm(f, p, tol);
    r.modular = modular(f, p);
    const double a = std::pow(r.norm, p.lo);
    const double b = std::pow(r.norm, p.hi);
    r.lower = std::fmin(a, b);
    r.upper = std::fmax(a, b);
    const double slack = 4.0 * p.hi * tol + 1e-14;
    r.holds = r.lower * (1.0 - slack) <= r.modular && r.modular <= r.upper * (1.0 + slack);
    return r;
}

}  // namespace pklab
