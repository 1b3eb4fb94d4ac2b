#pragma once

// Initial-data families: zero, clamped-beam modes, polynomial bumps and raw
// values from a file. The velocity is a multiple of the displacement.

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pklab/error.hpp"
#include "pklab/field_spec.hpp"
#include "pklab/grid.hpp"
#include "pklab/operators.hpp"

namespace pklab {

/// k-th positive root of cos(x) cosh(x) = 1 (k >= 1), by Newton from the
/// asymptotic guess (k + 1/2) pi.
inline double clamped_beam_root(int k) {
    if (k < 1) throw InvalidInput("clamped beam modes start at k = 1");
    double x = (k + 0.5) * std::numbers::pi;
    // f = cos x - 1/cosh x keeps the iteration well scaled for large x.
    for (int it = 0; it < 60; ++it) {
        const double f = std::cos(x) - 1.0 / std::cosh(x);
        const double df = -std::sin(x) + std::tanh(x) / std::cosh(x);
        const double dx = f / df;
        x -= dx;
        if (std::fabs(dx) < 1e-15 * x) break;
    }
    return x;
}

/// Continuum clamped-beam mode on [0, L], unnormalized, written so that
/// the exponential growth cancels analytically.
inline double clamped_beam_shape(int k, double x, double L) {
    const double beta = clamped_beam_root(k);
    const double z = beta * x / L;
    const double denom = std::sinh(beta) - std::sin(beta);
    const double sigma = (std::cosh(beta) - std::cos(beta)) / denom;
    const double one_minus_sigma = (-std::exp(-beta) - std::sin(beta) + std::cos(beta)) / denom;
    // cosh z - sigma sinh z = ((1 - sigma) e^z + (1 + sigma) e^{-z}) / 2
    const double hyper = 0.5 * (one_minus_sigma * std::exp(z) + (1.0 + sigma) * std::exp(-z));
    return hyper - std::cos(z) + sigma * std::sin(z);
}

/// Clamped mode (product of beam modes in 2D) sampled on the grid and scaled
/// to unit discrete L^2 norm with positive mean.
inline GridFunction beam_mode(const Grid& g, int kx = 1, int ky = 1) {
    auto f = g.dim == 1 ? GridFunction::sample(g, [&](double x) { return clamped_beam_shape(kx, x, g.extent[0]); })
                        : GridFunction::sample(g, [&](double x, double y) {
                              return clamped_beam_shape(kx, x, g.extent[0]) * clamped_beam_shape(ky, y, g.extent[1]);
                          });
    double sum = 0.0;
    for (double x : f.values) sum += x;
    const double n = std::sqrt(l2_norm_sq(f));
    if (!(n > 0.0)) throw NumericError("beam mode vanishes on this grid");
    f *= (sum < 0 ? -1.0 : 1.0) / n;
    return f;
}

/// (1 - r^2)^4 on the disc r < 1 in coordinates scaled by the radius.
inline GridFunction bump(const Grid& g, double cx, double cy, double radius) {
    if (!(radius > 0.0)) throw InvalidInput("bump radius must be positive");
    return GridFunction::sample(g, [&](double x, double y = 0.0) {
        const double dx = (x - cx) / radius;
        const double dy = g.dim == 2 ? (y - cy) / radius : 0.0;
        const double r2 = dx * dx + dy * dy;
        if (r2 >= 1.0) return 0.0;
        const double s = 1.0 - r2;
        return s * s * s * s;
    });
}

inline GridFunction read_values(const Grid& g, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open initial data file '" + path + "'");
    std::vector<double> vals;
    std::string tok;
    while (in >> tok) {
        double x = 0.0;
        if (!detail::parse_double(tok, x)) throw InvalidInput("bad number '" + tok + "' in '" + path + "'");
        vals.push_back(x);
    }
    if (vals.size() != g.size())
        throw InvalidInput("'" + path + "' has " + std::to_string(vals.size()) + " values, grid needs " +
                           std::to_string(g.size()));
    return {g, std::move(vals)};
}

struct InitialDataSpec {
    std::string family = "zero";  // zero | mode | bump | file
    double amplitude = 0.0;
    int mode_x = 1;
    int mode_y = 1;
    /// Bump center and radius as fractions of the extents.
    double center_x = 0.5;
    double center_y = 0.5;
    double radius = 0.25;
    std::string file;
    /// u1 = velocity_scale * u0.
    double velocity_scale = 0.0;

    bool operator==(const InitialDataSpec&) const = default;
};

/// The unit-amplitude shape of a family ("file" data is taken as is).
inline GridFunction initial_shape(const Grid& g, const InitialDataSpec& s) {
    if (s.family == "zero") return GridFunction(g);
    if (s.family == "mode") return beam_mode(g, s.mode_x, s.mode_y);
    if (s.family == "bump") {
        const double r = s.radius * (g.dim == 2 ? std::fmin(g.extent[0], g.extent[1]) : g.extent[0]);
        return bump(g, s.center_x * g.extent[0], s.center_y * g.extent[1], r);
    }
    if (s.family == "file") return read_values(g, s.file);
    throw InvalidInput("unknown initial data family '" + s.family + "'");
}

inline std::pair<GridFunction, GridFunction> make_initial_data(const Grid& g, const InitialDataSpec& s) {
    GridFunction u0 = initial_shape(g, s);
    if (s.family != "file") u0 *= s.amplitude;
    GridFunction u1 = u0;
    u1 *= s.velocity_scale;
    return {std::move(u0), std::move(u1)};
}

}  // namespace pklab
