#pragma once

// Trajectory production for the fast-money-flow system: wraps the generic
// DOPRI5 stepper around the model rhs, guards the rho boundary, and exposes
// dense interpolation plus the solve-quality diagnostics.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "fmflow/dopri5.hpp"
#include "fmflow/dynamics.hpp"
#include "fmflow/errors.hpp"

namespace fmflow {

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.1;       // tau units
    double rho_epsilon = 1e-12;  // abort when rho leaves [eps, 1-eps]
    double t_end = 50.0;         // tau units

    void validate() const {
        if (!(rel_tol > 0.0 && abs_tol > 0.0 && max_step > 0.0))
            throw ConfigError("IntegratorConfig: tolerances and max_step must be > 0");
        if (!(rho_epsilon > 0.0 && rho_epsilon < 0.5))
            throw ConfigError("IntegratorConfig: rho_epsilon must be in (0, 0.5)");
        if (!(t_end > 0.0)) throw ConfigError("IntegratorConfig: t_end must be > 0");
    }
};

// BoundaryReached and StepFailed are recorded outcomes, not exceptions, so a
// partial trajectory always survives for inspection and file emission.
enum class Termination { Completed, BoundaryReached, StepFailed };

inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::Completed: return "completed";
        case Termination::BoundaryReached: return "boundary-reached";
        default: return "step-failed";
    }
}

struct Sample {
    double tau;
    State state;
    Derivatives deriv;  // rhs at `state`, evaluated during the solve
};

class Trajectory {
  public:
    Trajectory(ModelParams params, double c0, double eta_prime0,
               std::vector<Sample> samples, std::vector<ode::DenseSegment<3>> segments,
               Termination termination, double termination_tau)
        : params_(params),
          c0_(c0),
          eta_prime0_(eta_prime0),
          samples_(std::move(samples)),
          segments_(std::move(segments)),
          termination_(termination),
          termination_tau_(termination_tau) {}

    const ModelParams& params() const { return params_; }
    double c0() const { return c0_; }
    double eta_prime0() const { return eta_prime0_; }
    const std::vector<Sample>& samples() const { return samples_; }
    const std::vector<ode::DenseSegment<3>>& segments() const { return segments_; }
    Termination termination() const { return termination_; }
    double termination_tau() const { return termination_tau_; }
    double t_end() const { return samples_.back().tau; }

    // Dense-output state; tau clamped to the solved span is a caller error.
    State state_at(double tau) const {
        if (segments_.empty() || tau <= 0.0) return samples_.front().state;
        if (tau >= t_end()) return samples_.back().state;
        const auto& seg = segment_for(tau);
        const auto y = seg.eval(tau);
        return State{y[0], y[1], y[2]};
    }

    Derivatives derivative_at(double tau) const {
        return rhs(params_, c0_, state_at(tau));
    }

    double energy_at(double tau) const { return energy(params_, c0_, state_at(tau)); }

  private:
    const ode::DenseSegment<3>& segment_for(double tau) const {
        // first segment whose right end covers tau
        auto it = std::lower_bound(
            segments_.begin(), segments_.end(), tau,
            [](const ode::DenseSegment<3>& s, double v) { return s.t0 + s.h < v; });
        if (it == segments_.end()) --it;
        return *it;
    }

    ModelParams params_;
    double c0_;
    double eta_prime0_;
    std::vector<Sample> samples_;
    std::vector<ode::DenseSegment<3>> segments_;
    Termination termination_;
    double termination_tau_;
};

inline Trajectory integrate(const ModelParams& params, const InitialSpec& spec,
                            const IntegratorConfig& cfg) {
    params.validate();
    cfg.validate();
    const ClosurePair closure = resolve_closure(params, spec);
    const double c0 = closure.c0;

    const State& s0 = spec.state0();
    check_rho_interior(s0.rho, "integrate");

    auto f = [&params, c0](double, const ode::Vec<3>& y) -> ode::Vec<3> {
        const Derivatives d = rhs(params, c0, State{y[0], y[1], y[2]});
        return {d.eta_prime, d.upsilon_prime, d.rho_prime};
    };
    const double eps = cfg.rho_epsilon;
    auto guard = [eps](const ode::Vec<3>& y) {
        return std::min(y[2] - eps, (1.0 - eps) - y[2]);
    };

    ode::StepperOptions opt{cfg.rel_tol, cfg.abs_tol, cfg.max_step};
    ode::OdeSolution<3> sol =
        ode::solve<3>(f, {s0.eta, s0.upsilon, s0.rho}, cfg.t_end, opt, guard);

    Termination term = Termination::Completed;
    if (sol.event_hit)
        term = Termination::BoundaryReached;
    else if (sol.step_failed)
        term = Termination::StepFailed;

    std::vector<Sample> samples;
    samples.reserve(sol.ts.size());
    for (std::size_t i = 0; i < sol.ts.size(); ++i) {
        const State s{sol.ys[i][0], sol.ys[i][1], sol.ys[i][2]};
        samples.push_back(
            {sol.ts[i], s, Derivatives{sol.fs[i][0], sol.fs[i][1], sol.fs[i][2]}});
    }
    const double term_tau =
        sol.event_hit ? sol.event_time : samples.back().tau;
    return Trajectory(params, c0, closure.eta_prime0, std::move(samples),
                      std::move(sol.segments), term, term_tau);
}

// Max over stored samples of |eta' + alpha1 rho' + alpha2 (rho - 1/2) - C0|,
// pairing each sample's recorded rhs output with its recorded state. On an
// untampered trajectory this is an algebraic cancellation (a few ulps); a
// corrupted sample shows up as a residual of order alpha2 * |corruption|.
inline double closure_residual(const Trajectory& traj) {
    const ModelParams& p = traj.params();
    double worst = 0.0;
    for (const Sample& s : traj.samples())
        worst = std::max(worst, closure_identity_residual(p, traj.c0(), s.state, s.deriv));
    return worst;
}

// Max over segment midpoints of the interpolant-derivative vs rhs mismatch;
// bounded by the tolerance budget on a healthy solve.
inline double dense_residual(const Trajectory& traj) {
    double worst = 0.0;
    for (const auto& seg : traj.segments()) {
        const double tm = seg.t0 + 0.5 * seg.h;
        const auto y = seg.eval(tm);
        const auto dy = seg.eval_derivative(tm);
        const Derivatives d = rhs(traj.params(), traj.c0(), State{y[0], y[1], y[2]});
        worst = std::max({worst, std::abs(dy[0] - d.eta_prime),
                          std::abs(dy[1] - d.upsilon_prime),
                          std::abs(dy[2] - d.rho_prime)});
    }
    return worst;
}

// Max over samples of |E(tau) - E(0)|.
inline double energy_drift(const Trajectory& traj) {
    const double e0 = energy(traj.params(), traj.c0(), traj.samples().front().state);
    double worst = 0.0;
    for (const Sample& s : traj.samples())
        worst = std::max(worst, std::abs(energy(traj.params(), traj.c0(), s.state) - e0));
    return worst;
}

}  // namespace fmflow
