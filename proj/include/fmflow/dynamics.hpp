#pragma once

// Fast-money-flow exchange-rate model: parameter sets, state, the first-order
// equations of motion in both variants, the C0 closure relation, and the
// Lagrangian / first-integral / observable evaluators.
//
// Dimensionless variables throughout: eta = beta*ln(S), tau = h*t,
// rho = fraction of agents holding currency 1, upsilon = phi1 - phi2.

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "fmflow/errors.hpp"

namespace fmflow {

// Which form of the upsilon' equation to integrate. IlinskiErratum replaces
// the coupling alpha1 with unity in the sinh term of upsilon' (and nowhere
// else), reproducing the equations as printed in Ilinski's book.
enum class Variant { Correct, IlinskiErratum };

inline const char* to_string(Variant v) {
    return v == Variant::Correct ? "correct" : "erratum";
}

// Dimensionless couplings of the reduced system.
struct ModelParams {
    double alpha1 = 1.5;   // Farmer strength, 2*beta*f
    double alpha2 = 10.0;  // volatility scale, M*beta^2*sigma^2/h
    double beta = 1.0;     // log-rate scale; only enters S and R, never the dynamics
    Variant variant = Variant::Correct;

    void validate() const {
        if (!(alpha2 > 0.0)) throw DomainError("ModelParams: alpha2 must be > 0");
        if (!(beta > 0.0)) throw DomainError("ModelParams: beta must be > 0");
        if (!(alpha1 >= 0.0)) throw DomainError("ModelParams: alpha1 must be >= 0");
        if (!std::isfinite(alpha1) || !std::isfinite(alpha2) || !std::isfinite(beta))
            throw DomainError("ModelParams: parameters must be finite");
    }
};

// Dimensional inputs; derive() maps them onto the dimensionless couplings.
struct RawParams {
    double sigma2 = 1.0;  // volatility, 1/time
    double h = 1.0;       // transition rate, 1/time
    long agents = 1;      // M
    double f = 0.0;       // Farmer coefficient, dimensionless
    double beta = 1.0;
    double horizon = 1.0;  // investment horizon T, time units

    ModelParams derive(Variant variant = Variant::Correct) const {
        validate();
        return ModelParams{2.0 * beta * f,
                           static_cast<double>(agents) * beta * beta * sigma2 / h,
                           beta, variant};
    }

    void validate() const {
        if (!(sigma2 > 0.0)) throw DomainError("RawParams: sigma2 must be > 0");
        if (!(h > 0.0)) throw DomainError("RawParams: h must be > 0");
        if (agents < 1) throw DomainError("RawParams: agents must be >= 1");
        if (!(f >= 0.0)) throw DomainError("RawParams: f must be >= 0");
        if (!(beta > 0.0)) throw DomainError("RawParams: beta must be > 0");
        if (!(horizon > 0.0)) throw DomainError("RawParams: horizon must be > 0");
    }
};

struct State {
    double eta = 0.0;      // beta * ln S
    double upsilon = 0.0;  // phase difference phi1 - phi2
    double rho = 0.5;      // fraction of agents in currency 1, 0 < rho < 1

    double rho_tilde() const { return rho - 0.5; }
    double eta_tilde() const { return upsilon + eta; }
    double exchange_rate(double beta) const { return std::exp(eta / beta); }
};

struct Derivatives {
    double eta_prime = 0.0;
    double upsilon_prime = 0.0;
    double rho_prime = 0.0;
};

inline void check_rho_interior(double rho, const char* where) {
    if (!(rho > 0.0 && rho < 1.0))
        throw DomainError(std::string(where) + ": rho = " + std::to_string(rho) +
                          " outside (0,1)");
}

// Right-hand side of the first-order equations of motion.
//
//   rho'     = 2 sqrt(rho(1-rho)) sinh(upsilon+eta)
//   eta'     = alpha2 (1/2 - rho) - alpha1 rho' + C0
//   upsilon' = (2rho-1) [rho(1-rho)]^{-1/2} cosh(upsilon+eta) + k rho'
//
// with k = alpha1 (Correct) or k = 1 (IlinskiErratum). eta' is assembled from
// the already-rounded rho' so that eta' + alpha1 rho' + alpha2(rho-1/2) - C0
// cancels to a few ulps at any state, not just on exact trajectories.
inline Derivatives rhs(const ModelParams& params, double c0, const State& s) {
    check_rho_interior(s.rho, "rhs");
    const double g = std::sqrt(s.rho * (1.0 - s.rho));
    const double u = s.upsilon + s.eta;
    const double sh = std::sinh(u);
    const double ch = std::cosh(u);
    const double k = params.variant == Variant::Correct ? params.alpha1 : 1.0;

    Derivatives d;
    d.rho_prime = 2.0 * g * sh;
    d.eta_prime = params.alpha2 * (0.5 - s.rho) - params.alpha1 * d.rho_prime + c0;
    d.upsilon_prime = (2.0 * s.rho - 1.0) / g * ch + k * d.rho_prime;

    if (!std::isfinite(d.eta_prime) || !std::isfinite(d.upsilon_prime) ||
        !std::isfinite(d.rho_prime))
        throw NonFiniteError("rhs: non-finite derivative");
    return d;
}

// Initial state plus exactly one of {C0, eta'(0)}; the other follows from the
// closure relation C0 = eta'(0) + alpha1 rho'(0) + alpha2 (rho(0) - 1/2).
class InitialSpec {
  public:
    static InitialSpec from_c0(const State& s, double c0) {
        InitialSpec spec(s);
        spec.c0_ = c0;
        return spec;
    }
    static InitialSpec from_eta_prime0(const State& s, double eta_prime0) {
        InitialSpec spec(s);
        spec.eta_prime0_ = eta_prime0;
        return spec;
    }

    const State& state0() const { return state0_; }
    bool has_c0() const { return c0_.has_value(); }
    double given_c0() const { return *c0_; }
    double given_eta_prime0() const { return *eta_prime0_; }

  private:
    explicit InitialSpec(const State& s) : state0_(s) {}
    State state0_;
    std::optional<double> c0_;
    std::optional<double> eta_prime0_;
};

struct ClosurePair {
    double c0;
    double eta_prime0;
};

// Completes the closure pair. Round-trips are exact to rounding because both
// directions share the same intermediate alpha1 rho'(0) + alpha2 (rho(0)-1/2).
inline ClosurePair resolve_closure(const ModelParams& params, const InitialSpec& spec) {
    params.validate();
    const State& s = spec.state0();
    check_rho_interior(s.rho, "resolve_closure");
    const double rho_prime0 =
        2.0 * std::sqrt(s.rho * (1.0 - s.rho)) * std::sinh(s.upsilon + s.eta);
    const double rest = params.alpha1 * rho_prime0 + params.alpha2 * (s.rho - 0.5);
    if (spec.has_c0())
        return {spec.given_c0(), spec.given_c0() - rest};
    return {spec.given_eta_prime0() + rest, spec.given_eta_prime0()};
}

// Reduced Lagrangian (the constant-momentum phi2' term is dropped):
//   L = -(2 alpha2)^{-1} (eta' + alpha1 rho')^2 + rho upsilon'
//       + 2 sqrt(rho(1-rho)) cosh(upsilon+eta)
inline double lagrangian(const ModelParams& params, const State& s, const Derivatives& d) {
    check_rho_interior(s.rho, "lagrangian");
    const double p = d.eta_prime + params.alpha1 * d.rho_prime;
    return -p * p / (2.0 * params.alpha2) + s.rho * d.upsilon_prime +
           2.0 * std::sqrt(s.rho * (1.0 - s.rho)) * std::cosh(s.upsilon + s.eta);
}

// First integral of the Correct-variant flow, used as an integration-quality
// oracle:  E = -(alpha2(1/2-rho) + C0)^2 / (2 alpha2) - 2 sqrt(rho(1-rho)) cosh(upsilon+eta).
// dE/dtau vanishes along Correct trajectories; for the erratum variant
// dE/dtau = -4 (1-alpha1) rho(1-rho) sinh^2(upsilon+eta), generically nonzero.
inline double energy(const ModelParams& params, double c0, const State& s) {
    check_rho_interior(s.rho, "energy");
    const double w = params.alpha2 * (0.5 - s.rho) + c0;
    return -w * w / (2.0 * params.alpha2) -
           2.0 * std::sqrt(s.rho * (1.0 - s.rho)) * std::cosh(s.upsilon + s.eta);
}

struct Observables {
    double exchange_rate;  // S = exp(eta/beta)
    double ret;            // R = eta'/beta = S'/S
    double farmer;         // F = f (2rho - 1), f = alpha1/(2 beta)
    std::optional<std::complex<double>> psi1;  // sqrt(M rho) e^{-i upsilon}, gauge phi2 = 0
    std::optional<std::complex<double>> psi2;  // sqrt(M (1-rho))
};

inline Observables observables(const ModelParams& params, const State& s,
                               const Derivatives& d,
                               std::optional<long> agents = std::nullopt) {
    check_rho_interior(s.rho, "observables");
    Observables o;
    o.exchange_rate = s.exchange_rate(params.beta);
    o.ret = d.eta_prime / params.beta;
    o.farmer = params.alpha1 / (2.0 * params.beta) * (2.0 * s.rho - 1.0);
    if (agents) {
        if (*agents < 1) throw DomainError("observables: agents must be >= 1");
        const double m = static_cast<double>(*agents);
        o.psi1 = std::polar(std::sqrt(m * s.rho), -s.upsilon);
        o.psi2 = std::complex<double>(std::sqrt(m * (1.0 - s.rho)), 0.0);
    }
    return o;
}

// Bound used when asserting the algebraic closure identity: 4 ulps of the
// largest participating term.
inline double closure_ulp_bound(const ModelParams& params, double c0, const State& s,
                                const Derivatives& d) {
    const double m = std::max({std::abs(d.eta_prime), std::abs(params.alpha1 * d.rho_prime),
                               std::abs(params.alpha2 * (s.rho - 0.5)), std::abs(c0)});
    return 4.0 * m * 0x1p-52;
}

inline double closure_identity_residual(const ModelParams& params, double c0,
                                        const State& s, const Derivatives& d) {
    return std::abs(d.eta_prime + params.alpha1 * d.rho_prime +
                    params.alpha2 * (s.rho - 0.5) - c0);
}

}  // namespace fmflow
