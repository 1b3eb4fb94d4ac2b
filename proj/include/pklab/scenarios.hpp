#pragma once

// Named scenarios built from the first clamped mode. Amplitudes are computed
// on the base grid, so refining a scenario keeps the same initial data.
//   global       B1^2 ||Lap u0||^2 = alpha1 / 2, u1 = 0
//   decay        B1^2 ||Lap u0||^2 = alpha1 / 4, u1 = 0 (E(0) below E2~)
//   blowup-low   u1 = 0, amplitude 5% above the positive root of E(0) = 0
//   blowup-high  u1 = u0, E(0) = C ||u0||^2 / (4 p-)

#include <cmath>
#include <string>
#include <vector>

#include "pklab/bounds.hpp"
#include "pklab/config.hpp"
#include "pklab/embedding.hpp"
#include "pklab/functionals.hpp"
#include "pklab/initial_data.hpp"

namespace pklab {

inline std::vector<std::string> scenario_names() { return {"global", "decay", "blowup-low", "blowup-high"}; }

namespace detail {

inline RunConfig scenario_base(const std::string& name) {
    RunConfig c;
    c.name = name;
    c.dim = 1;
    c.length_x = 1.0;
    c.a = 1.0;
    c.b = 1.0;
    c.gamma = 1.0;
    c.m = "constant:2";
    c.p = "constant:5";
    c.initial.family = "mode";
    c.initial.mode_x = 1;
    c.sample_stride = 20;
    return c;
}

// Energy of (A phi, s A phi) for the mode phi of the config's grid.
inline double mode_energy(const RunConfig& c, double A) {
    const Grid g = make_grid(c);
    const auto mp = make_model(c, g);
    auto spec = c.initial;
    spec.amplitude = A;
    auto [u0, u1] = make_initial_data(g, spec);
    return energy(SimState(0.0, std::move(u0), std::move(u1), 0.0), mp);
}

inline double mode_lap_sq(const RunConfig& c) {
    const Grid g = make_grid(c);
    return lap_norm_sq(beam_mode(g, c.initial.mode_x, c.initial.mode_y));
}

// Largest A in [lo, hi] with E(A) = target, E decreasing through it.
inline double energy_root(const RunConfig& c, double target, double lo, double hi) {
    auto f = [&](double A) { return mode_energy(c, A) - target; };
    while (f(hi) > 0.0) hi *= 2.0;
    return bisect(f, lo, hi);
}

inline void finish_grid(RunConfig& c, int n) {
    c.n_x = n;
    c.dt_ceiling = default_dt_ceiling(make_grid(c));
    c.dt0 = c.dt_ceiling;
}

}  // namespace detail

/// Scenario config; n = 0 keeps the base grid, otherwise the grid is
/// refined with the base-grid amplitude.
inline RunConfig scenario(const std::string& name, int n = 0) {
    RunConfig c = detail::scenario_base(name);
    const int base_n = name == "blowup-low" || name == "blowup-high" ? 64 : 100;
    detail::finish_grid(c, base_n);
    const Grid g = make_grid(c);
    const auto mp = make_model(c, g);

    if (name == "global" || name == "decay") {
        const auto k = estimate_embedding_constants(g, mp.p, make_embedding_options(c));
        const double alpha1 = alpha1_E1(k.B1, mp.p.lo).first;
        const double frac = name == "global" ? 0.5 : 0.25;
        c.initial.amplitude = std::sqrt(frac * alpha1 / (k.B1 * k.B1 * detail::mode_lap_sq(c)));
        c.horizon = name == "global" ? 2.0 : 1.0;
    } else if (name == "blowup-low") {
        // E(A) > 0 on the rising branch; bracket the sign change above its top.
        double top = 1.0;
        while (detail::mode_energy(c, 2.0 * top) > detail::mode_energy(c, top)) top *= 2.0;
        c.initial.amplitude = 1.05 * detail::energy_root(c, 0.0, top, 2.0 * top);
        c.horizon = 1.0;
        c.sample_stride = 1;
        c.mon_H = c.mon_F = true;
    } else if (name == "blowup-high") {
        c.initial.velocity_scale = 1.0;
        const double S = 1.0 / std::sqrt(laplacian_ground_state(g).value);
        const double C = C_constant(c.a, mp.p.lo, S);
        const double q = C / (4.0 * mp.p.lo);  // ||phi|| = 1, so target E = q A^2
        auto f = [&](double A) { return detail::mode_energy(c, A) - q * A * A; };
        double top = 1.0;
        while (f(2.0 * top) > f(top)) top *= 2.0;
        double hi = 2.0 * top;
        while (f(hi) > 0.0) hi *= 2.0;
        c.initial.amplitude = detail::bisect(f, top, hi);
        c.horizon = 1.0;
        c.sample_stride = 1;
        c.mon_Psi = c.mon_Upsilon = true;
    } else {
        throw ConfigError({"unknown scenario '" + name + "' (known: global, decay, blowup-low, blowup-high)"});
    }
    if (n > 0 && n != base_n) detail::finish_grid(c, n);
    return c;
}

}  // namespace pklab
