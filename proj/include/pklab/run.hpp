#pragma once

// Time loop: adaptive step control, sampling of the monitored functionals,
// and blow-up declaration.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pklab/blowup.hpp"
#include "pklab/error.hpp"
#include "pklab/functionals.hpp"
#include "pklab/integrator.hpp"
#include "pklab/model.hpp"
#include "pklab/varexp.hpp"

namespace pklab {

enum class Outcome { completed_horizon, numerical_blowup, step_floor_abort };

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::completed_horizon: return "completed_horizon";
        case Outcome::numerical_blowup: return "numerical_blowup";
        case Outcome::step_floor_abort: return "step_floor_abort";
    }
    return "?";
}

/// Step-size rule driven by the sup-norm growth factor of the last step.
struct StepController {
    double dt = 1e-4;
    double dt_floor = 1e-10;
    double dt_ceiling = 1.0;
    double growth_max = 1.25;
    double growth_min = 1.01;
    int calm_steps = 20;
    bool adaptive = true;
    int calm = 0;

    /// Applies the rule and returns the new dt: halve above growth_max,
    /// double (capped) after calm_steps consecutive steps below growth_min.
    double adapt_dt(double growth) {
        if (!adaptive) return dt;
        if (growth > growth_max) {
            dt = std::fmax(0.5 * dt, dt_floor);
            calm = 0;
        } else if (growth < growth_min) {
            if (++calm >= calm_steps) {
                dt = std::fmin(2.0 * dt, dt_ceiling);
                calm = 0;
            }
        } else {
            calm = 0;
        }
        return dt;
    }

    bool at_floor() const noexcept { return dt <= dt_floor; }
};

struct Monitors {
    std::optional<double> E2;
    /// Psi needs C and p-.
    std::optional<std::pair<double, double>> psi;
    /// F needs E2, sigma and eps.
    struct FParams {
        double E2, sigma, eps;
    };
    std::optional<FParams> F;
    std::optional<UpsilonParams> upsilon;
};

struct RunOptions {
    double horizon = 1.0;
    double dt0 = 1e-4;
    double dt_floor = 1e-10;
    /// Non-positive: h^2/4 with h the smallest spacing.
    double dt_ceiling = 0.0;
    int sample_stride = 1;
    bool adaptive = true;
    double growth_max = 1.25;
    double growth_min = 1.01;
    int calm_steps = 20;
    /// Sup norms below this count as this value in the growth factor, so
    /// relative noise near zero does not drive the step size.
    double growth_floor = 1.0;
    double blowup_norm = 1e8;
    std::vector<double> thresholds = default_thresholds();
    /// Consecutive steps at dt_floor that still exceed growth_max.
    int max_floor_steps = 10000;
    long max_steps = 50'000'000;
    bool record_steps = false;
    StepOptions step;
};

struct StepRecord {
    double t = 0.0;
    double dt = 0.0;
    double E = 0.0;
    double residual = 0.0;
};

struct RunResult {
    Outcome outcome = Outcome::completed_horizon;
    std::optional<double> T_num;
    std::optional<BlowupFit> fit;
    std::vector<EnergySample> trace;
    SimState final_state;
    std::vector<std::pair<double, double>> norm_history;
    std::vector<double> crossings;
    std::vector<StepRecord> steps;
    long accepted = 0;
    long rejected = 0;
    double max_abs_residual = 0.0;
    double sum_abs_residual = 0.0;
    /// Steps with E(t_{n+1}) > E(t_n) + |r_n|.
    long energy_increase_violations = 0;
    double min_dt = 0.0;
    double max_dt = 0.0;
    std::string message;
};

/// A numeric failure during run, carrying everything computed up to it.
class RunFailure : public NumericError {
public:
    RunFailure(const std::string& what, RunResult partial) : NumericError(what), partial_(std::move(partial)) {}
    const RunResult& partial() const noexcept { return partial_; }

private:
    RunResult partial_;
};

using SampleSink = std::function<void(const EnergySample&)>;

inline double default_dt_ceiling(const Grid& g) {
    const double h = g.dim == 1 ? g.h[0] : std::fmin(g.h[0], g.h[1]);
    return 0.25 * h * h;
}

/// Upper bound of ||u||_{p(.)} from the sup norm.
inline double luxemburg_upper_bound(const GridFunction& u, const ExponentField& p) {
    return max_abs(u.values) * std::fmax(1.0, std::pow(u.grid.measure(), 1.0 / p.lo));
}

namespace detail {

class Sampler {
public:
    Sampler(const ModelParams& mp, const Monitors& mon) : mp_(mp), mon_(mon) {}

    EnergySample operator()(const SimState& s, const EnergyParts& e, double upsilon_integral, double residual,
                            double norm_px) const {
        EnergySample r;
        r.t = s.t;
        r.dt = s.dt;
        r.E = e.total();
        r.R = e.positive();
        r.norm_u_2 = std::sqrt(e.l2_u);
        r.norm_grad_u_2 = std::sqrt(e.grad_u);
        r.norm_lap_u_2 = std::sqrt(e.lap_u);
        r.norm_u_px = norm_px;
        r.modular_u_p = modular(s.u, mp_.p);
        r.modular_v_m = modular(s.v, mp_.m);
        r.diss_residual = residual;
        const double uv = l2_inner(s.u, s.v);
        if (mon_.E2) r.H = *mon_.E2 - r.E;
        if (mon_.psi) r.Psi = psi_from(uv, r.E, mon_.psi->first, mon_.psi->second);
        if (mon_.F) {
            const double H = mon_.F->E2 - r.E;
            if (H > 0.0) r.F = F_from(H, uv, e.grad_u, mon_.F->sigma, mon_.F->eps);
        }
        if (mon_.upsilon) r.Upsilon = upsilon_from(s.t, e.l2_u, upsilon_integral, *mon_.upsilon);
        return r;
    }

private:
    const ModelParams& mp_;
    const Monitors& mon_;
};

}  // namespace detail

/// Integrates from `initial` to the horizon or to numerical blow-up.
/// Throws RunFailure (with the partial result) on a linear-solve failure
/// that step halving cannot cure.
inline RunResult run(const ModelParams& mp, SimState initial, const RunOptions& opt, const Monitors& mon = {},
                     const SampleSink& sink = {}, Forcing forcing = {}) {
    const Grid g = initial.grid();
    if (!(opt.horizon > 0.0)) throw InvalidInput("run needs horizon > 0");
    if (opt.sample_stride < 1) throw InvalidInput("run needs sample_stride >= 1");
    if (!initial.finite()) throw InvalidInput("run needs finite initial data");

    StepController ctl;
    ctl.dt_floor = opt.dt_floor;
    ctl.dt_ceiling = opt.dt_ceiling > 0.0 ? opt.dt_ceiling : default_dt_ceiling(g);
    ctl.dt = opt.adaptive ? std::clamp(opt.dt0, ctl.dt_floor, ctl.dt_ceiling) : opt.dt0;
    ctl.growth_max = opt.growth_max;
    ctl.growth_min = opt.growth_min;
    ctl.calm_steps = opt.calm_steps;
    ctl.adaptive = opt.adaptive;
    if (!(ctl.dt > 0.0)) throw InvalidInput("run needs dt0 > 0");

    Integrator integ(mp, g, opt.step, std::move(forcing));
    detail::Sampler sampler(mp, mon);
    std::vector<double> scratch(g.size());

    RunResult res;
    SimState cur = std::move(initial);
    cur.dt = ctl.dt;
    SimState next = cur;
    EnergyParts e_cur = energy_parts(cur.u, cur.v, mp, scratch);
    UpsilonIntegral ups;
    ups.add(cur.t, e_cur.l2_u, e_cur.grad_u);
    res.min_dt = res.max_dt = ctl.dt;

    auto norm_px = [&](const SimState& s) { return luxemburg_norm(s.u, mp.p); };
    double n_cur = norm_px(cur);
    res.norm_history.emplace_back(cur.t, n_cur);

    auto emit = [&](const SimState& s, const EnergyParts& e, double r, double n) {
        res.trace.push_back(sampler(s, e, ups.value(), r, n));
        if (sink) sink(res.trace.back());
    };
    emit(cur, e_cur, 0.0, n_cur);

    const double next_watch_factor = 0.1;
    std::size_t next_threshold = 0;
    auto watch_level = [&]() {
        while (next_threshold < opt.thresholds.size() && n_cur >= opt.thresholds[next_threshold]) ++next_threshold;
        return next_threshold < opt.thresholds.size() ? opt.thresholds[next_threshold] : opt.blowup_norm;
    };

    int floor_strain = 0;
    long since_sample = 0;
    bool sampled_last = true;
    double last_residual = 0.0;
    const double eps_t = 1e-12 * opt.horizon;

    auto finish = [&](Outcome o, std::string msg) {
        res.outcome = o;
        res.message = std::move(msg);
        if (!sampled_last) {
            n_cur = norm_px(cur);
            emit(cur, e_cur, last_residual, n_cur);
        }
        res.crossings = crossing_times(res.norm_history, opt.thresholds);
        if (o == Outcome::numerical_blowup) {
            res.fit = fit_blowup_time(opt.thresholds, res.crossings);
            res.T_num = res.fit ? res.fit->T : cur.t;
        }
        res.final_state = cur;
        return res;
    };

    while (cur.t < opt.horizon - eps_t) {
        if (res.accepted + res.rejected >= opt.max_steps)
            return finish(Outcome::step_floor_abort, "step budget of " + std::to_string(opt.max_steps) + " exhausted");
        const double dt = std::fmin(ctl.dt, opt.horizon - cur.t);
        const auto info = integ.advance(cur, dt, next);

        if (info.status != StepStatus::ok) {
            const bool can_halve = opt.adaptive && ctl.dt > ctl.dt_floor;
            if (can_halve) {
                ctl.dt = std::fmax(0.5 * ctl.dt, ctl.dt_floor);
                ctl.calm = 0;
                ++res.rejected;
                continue;
            }
            if (info.status == StepStatus::non_finite)
                return finish(Outcome::numerical_blowup, "non-finite state at t = " + detail::format_double(cur.t + dt));
            if (opt.adaptive)
                return finish(Outcome::step_floor_abort,
                              "linear solve failed at the step floor, t = " + detail::format_double(cur.t));
            res.crossings = crossing_times(res.norm_history, opt.thresholds);
            res.final_state = cur;
            throw RunFailure("linear solve failed at t = " + detail::format_double(cur.t) +
                                 " (relative residual " + detail::format_double(info.cg_residual) + ")",
                             std::move(res));
        }

        const double old_sup = std::fmax(max_abs(cur.u.values), opt.growth_floor);
        const double new_sup = std::fmax(max_abs(next.u.values), opt.growth_floor);
        const double growth = new_sup / old_sup;
        if (opt.adaptive && growth > ctl.growth_max) {
            if (ctl.dt > ctl.dt_floor) {
                ctl.adapt_dt(growth);
                ++res.rejected;
                continue;
            }
            if (++floor_strain > opt.max_floor_steps)
                return finish(Outcome::step_floor_abort, "growth exceeds the limit at dt_floor for " +
                                                             std::to_string(opt.max_floor_steps) + " steps");
        } else {
            floor_strain = 0;
        }

        // Accept.
        EnergyParts e_next = energy_parts(next.u, next.v, mp, scratch);
        double diss = 0.0;
        {
            GridFunction mid(g);
            for (std::size_t i = 0; i < mid.size(); ++i) mid.values[i] = 0.5 * (cur.v.values[i] + next.v.values[i]);
            diss = dissipation_rate(mid, mp);
        }
        const double r = e_next.total() - e_cur.total() + dt * diss;
        res.max_abs_residual = std::fmax(res.max_abs_residual, std::fabs(r));
        res.sum_abs_residual += std::fabs(r);
        if (e_next.total() > e_cur.total() + std::fabs(r)) ++res.energy_increase_violations;
        if (opt.record_steps) res.steps.push_back({next.t, dt, e_next.total(), r});
        last_residual = r;

        std::swap(cur, next);
        e_cur = e_next;
        ups.add(cur.t, e_cur.l2_u, e_cur.grad_u);
        ++res.accepted;
        res.min_dt = std::fmin(res.min_dt, dt);
        res.max_dt = std::fmax(res.max_dt, dt);
        if (opt.adaptive && growth <= ctl.growth_max) ctl.adapt_dt(growth);
        cur.dt = ctl.dt;

        const bool sample_now = ++since_sample >= opt.sample_stride;
        const double bound = luxemburg_upper_bound(cur.u, mp.p);
        if (sample_now || bound >= next_watch_factor * watch_level()) {
            n_cur = norm_px(cur);
            res.norm_history.emplace_back(cur.t, n_cur);
        } else {
            n_cur = bound;
        }
        sampled_last = false;
        if (sample_now) {
            emit(cur, e_cur, r, n_cur);
            since_sample = 0;
            sampled_last = true;
        }
        if (n_cur > opt.blowup_norm)
            return finish(Outcome::numerical_blowup,
                          "||u||_p(x) = " + detail::format_double(n_cur) + " at t = " + detail::format_double(cur.t));
    }
    return finish(Outcome::completed_horizon, "");
}

}  // namespace pklab
