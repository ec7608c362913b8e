#pragma once

// Closed-form linearized solutions around (rho, upsilon+eta) = (1/2, 0):
//
//   rho~'' + (alpha1 - k) rho~' + (alpha2 - 4) rho~ = C0,   eta~ = rho~'
//
// with k = alpha1 (Correct, no damping) or k = 1 (erratum, damping
// (alpha1-1)/2). For alpha2 > 4 the solution oscillates about
// C0/(alpha2-4); eta and upsilon pick up opposite linear drifts at rate
// -+ 4 C0 (alpha2-4)^{-1}.

#include <cmath>
#include <limits>
#include <numbers>

#include "fmflow/dynamics.hpp"
#include "fmflow/errors.hpp"

namespace fmflow {

enum class Regime {
    NeutralOscillation,    // C0 = 0, alpha2 > 4
    ExponentialDecayOfS,   // C0 > 0, alpha2 > 4
    ExponentialGrowthOfS,  // C0 < 0, alpha2 > 4
    NonOscillatory         // alpha2 <= 4
};

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::NeutralOscillation: return "neutral-oscillation";
        case Regime::ExponentialDecayOfS: return "exponential-decay-of-S";
        case Regime::ExponentialGrowthOfS: return "exponential-growth-of-S";
        default: return "non-oscillatory";
    }
}

struct Classification {
    Regime regime;
    double tau_c;  // 0.25 (alpha2-4)/|C0|; +inf when C0 = 0, NaN when alpha2 <= 4
};

inline Classification classify(const ModelParams& params, double c0) {
    if (params.alpha2 <= 4.0)
        return {Regime::NonOscillatory, std::numeric_limits<double>::quiet_NaN()};
    if (c0 == 0.0)
        return {Regime::NeutralOscillation, std::numeric_limits<double>::infinity()};
    const double tau_c = 0.25 * (params.alpha2 - 4.0) / std::abs(c0);
    return {c0 > 0.0 ? Regime::ExponentialDecayOfS : Regime::ExponentialGrowthOfS, tau_c};
}

struct LinearPrediction {
    Regime regime = Regime::NeutralOscillation;
    double omega = 0.0;      // angular frequency per tau (damped value for erratum)
    double nu = 0.0;         // omega / 2pi
    double amplitude = 0.0;  // A
    double phase = 0.0;      // theta
    double rho_offset = 0.0;          // C0 (alpha2-4)^{-1}
    double eta_drift_rate = 0.0;      // -4 C0 (alpha2-4)^{-1}
    double upsilon_drift_rate = 0.0;  // opposite sign
    double damping = 0.0;             // 0 (Correct) or (alpha1-1)/2 (erratum)
    double tau_c = 0.0;
    double real_exponent = 0.0;  // dominant growth exponent when NonOscillatory

    // anchors so the closed form can be evaluated at any tau
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    double c0 = 0.0;
    double eta0 = 0.0;
    double rho_tilde0 = 0.0;
};

inline LinearPrediction linearize(const ModelParams& params, const InitialSpec& spec) {
    params.validate();
    if (params.alpha2 == 4.0)
        throw DegenerateError(
            "linearize: alpha2 = 4 is the resonant marginal case; the general "
            "solution formula is invalid there");

    const ClosurePair closure = resolve_closure(params, spec);
    const State& s0 = spec.state0();

    LinearPrediction p;
    p.alpha1 = params.alpha1;
    p.alpha2 = params.alpha2;
    p.c0 = closure.c0;
    p.eta0 = s0.eta;
    p.rho_tilde0 = s0.rho_tilde();
    p.damping = params.variant == Variant::Correct ? 0.0 : 0.5 * (params.alpha1 - 1.0);

    const Classification cls = classify(params, closure.c0);
    p.regime = cls.regime;
    p.tau_c = cls.tau_c;

    if (params.alpha2 < 4.0) {
        // real exponents; report the dominant root of
        // lambda^2 + 2 damping lambda + (alpha2 - 4) = 0
        p.real_exponent =
            -p.damping + std::sqrt(p.damping * p.damping + (4.0 - params.alpha2));
        return p;
    }

    p.rho_offset = closure.c0 / (params.alpha2 - 4.0);
    p.eta_drift_rate = -4.0 * closure.c0 / (params.alpha2 - 4.0);
    p.upsilon_drift_rate = -p.eta_drift_rate;

    const double omega_sq = (params.alpha2 - 4.0) - p.damping * p.damping;
    if (omega_sq <= 0.0) {
        // overdamped erratum system: no oscillation to predict
        p.regime = Regime::NonOscillatory;
        p.real_exponent = -p.damping + std::sqrt(-omega_sq);
        return p;
    }
    p.omega = std::sqrt(omega_sq);
    p.nu = p.omega / (2.0 * std::numbers::pi);

    // A sin(theta) = rho~(0) - offset
    // A (omega cos(theta) - damping sin(theta)) = eta~(0)
    const double a_sin = s0.rho_tilde() - p.rho_offset;
    const double a_cos = (s0.eta_tilde() + p.damping * a_sin) / p.omega;
    p.amplitude = std::hypot(a_sin, a_cos);
    p.phase = (p.amplitude == 0.0) ? 0.0 : std::atan2(a_sin, a_cos);
    return p;
}

struct LinearPoint {
    double rho_tilde;
    double eta_tilde;
    double eta;
    double upsilon;
};

// Evaluates the closed-form linear solution. eta integrates
// eta' = -alpha2 rho~ - alpha1 eta~ + C0 exactly; upsilon = eta~ - eta.
inline LinearPoint linear_trajectory(const LinearPrediction& p, double tau) {
    if (p.omega <= 0.0)
        throw DegenerateError("linear_trajectory: prediction is not oscillatory");

    const double decay = std::exp(-p.damping * tau);
    const double ph = p.omega * tau + p.phase;
    const double s = std::sin(ph), c = std::cos(ph);

    LinearPoint out;
    out.rho_tilde = p.amplitude * decay * s + p.rho_offset;
    out.eta_tilde = p.amplitude * decay * (p.omega * c - p.damping * s);

    // integral of e^{-d s} sin(omega s + theta) from 0 to tau;
    // damping^2 + omega^2 = alpha2 - 4
    const double denom = p.alpha2 - 4.0;
    const double integral =
        (-decay * (p.damping * s + p.omega * c) +
         (p.damping * std::sin(p.phase) + p.omega * std::cos(p.phase))) /
        denom;

    const double rho_tilde_osc0 = p.amplitude * std::sin(p.phase);
    out.eta = p.eta0 + p.eta_drift_rate * tau - p.alpha2 * p.amplitude * integral -
              p.alpha1 * (out.rho_tilde - p.rho_offset - rho_tilde_osc0);
    out.upsilon = out.eta_tilde - out.eta;
    return out;
}

}  // namespace fmflow
