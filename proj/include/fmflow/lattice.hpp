#pragma once

// Discrete-time lattice layer: plaquette arbitrage returns, the discrete
// curvature action with an injectable coefficient rule, exponential path
// weights, the single-step transition matrix (degenerate by construction),
// and the Hamiltonian matrix whose norm scales as 1/dt.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "fmflow/errors.hpp"

namespace fmflow::lattice {

// Exchange rates S_n > 0 at times t_n = n*dt.
struct RateSequence {
    std::vector<double> rates;
    double dt = 1.0;
    double beta = 1.0;
    double sigma2 = 1.0;  // feeds the default coefficient rule

    void validate() const {
        if (!(dt > 0.0)) throw DomainError("RateSequence: dt must be > 0");
        if (!(sigma2 > 0.0)) throw DomainError("RateSequence: sigma2 must be > 0");
        for (double s : rates)
            if (!(s > 0.0) || !std::isfinite(s))
                throw DomainError("RateSequence: rates must be finite and positive");
    }
};

// Round-trip return of the elementary plaquette between S_n and S_{n+1}:
//   S_n S_{n+1}^{-1} + S_n^{-1} S_{n+1} - 2  =  2 cosh(delta y) - 2  >= 0,
// zero exactly when the two rates agree (no arbitrage on the loop).
inline double plaquette_return(double s_n, double s_next) {
    if (!(s_n > 0.0) || !(s_next > 0.0))
        throw DomainError("plaquette_return: rates must be positive");
    const double r = s_n / s_next + s_next / s_n - 2.0;
    return r < 0.0 ? 0.0 : r;  // expression is >= 0; rounding may dip an ulp under
}

using CoefficientRule = std::function<double(std::size_t n, double dt)>;

// a_n dt -> 1/(2 sigma^2) in the continuum limit.
inline CoefficientRule default_coefficients(double sigma2) {
    return [sigma2](std::size_t, double dt) { return 1.0 / (2.0 * sigma2 * dt); };
}

// A1 = sum_n a_n (S_n S_{n+1}^{-1} + S_n^{-1} S_{n+1} - 2) over consecutive
// pairs; with the default rule this converges (first order in dt) to
// (1/2 sigma^2) integral (d ln S / dt)^2 dt for smooth log-rates.
inline double discrete_action(const RateSequence& seq, const CoefficientRule& rule) {
    seq.validate();
    if (seq.rates.size() < 2)
        throw DomainError("discrete_action: need at least two rates");
    double sum = 0.0;
    for (std::size_t n = 0; n + 1 < seq.rates.size(); ++n)
        sum += rule(n, seq.dt) * plaquette_return(seq.rates[n], seq.rates[n + 1]);
    return sum;
}

inline double discrete_action(const RateSequence& seq) {
    return discrete_action(seq, default_coefficients(seq.sigma2));
}

// Ordered parallel-transport factors U_j along a lattice path; each factor
// is an S_n, an S_n^{-1}, or 1 depending on the step taken.
struct LatticePath {
    std::vector<double> factors;

    // s(Q) = ln(U_1 U_2 ... U_J), accumulated in log space
    double log_return() const {
        double s = 0.0;
        for (double u : factors) {
            if (!(u > 0.0)) throw DomainError("LatticePath: factors must be positive");
            s += std::log(u);
        }
        return s;
    }
};

// Unnormalized weight P(Q) ~ e^{beta s(Q)} = (prod U_j)^beta; the empty
// path carries weight 1.
inline double path_weight(const LatticePath& path, double beta) {
    return std::exp(beta * path.log_return());
}

struct Mat2 {
    double a11, a12, a21, a22;
};

struct StatePair {
    double p1, p2;
};

// Single-step transition matrix  [[1, S^beta], [S^-beta, 1]].  The rows are
// proportional (rank 1), so the determinant vanishes identically; it is
// computed through the cancelling exponent rather than the rounded entries
// so the zero is exact for every (S, beta).
class TransitionMatrix {
  public:
    TransitionMatrix(double s, double beta) : s_(s), beta_(beta) {
        if (!(s > 0.0)) throw DomainError("TransitionMatrix: S must be > 0");
        log_pow_ = beta * std::log(s);
    }

    double rate() const { return s_; }
    double beta() const { return beta_; }
    double upper() const { return std::exp(log_pow_); }    // S^beta
    double lower() const { return std::exp(-log_pow_); }   // S^-beta
    Mat2 entries() const { return {1.0, upper(), lower(), 1.0}; }

    // 1*1 - S^beta * S^-beta = 1 - S^(beta-beta) = 1 - e^0
    double determinant() const { return 1.0 - std::exp(log_pow_ - log_pow_); }

  private:
    double s_;
    double beta_;
    double log_pow_;
};

inline TransitionMatrix transition_matrix(double s, double beta) {
    return TransitionMatrix(s, beta);
}

// Plain matrix-vector product. The optional normalization exists only to
// demonstrate that the matrix is not stochastic; it is off by default.
inline StatePair apply(const TransitionMatrix& m, const StatePair& p,
                       bool normalize = false) {
    StatePair out{p.p1 + m.upper() * p.p2, m.lower() * p.p1 + p.p2};
    if (normalize) {
        const double total = out.p1 + out.p2;
        if (total == 0.0) throw DomainError("apply: cannot normalize zero vector");
        out.p1 /= total;
        out.p2 /= total;
    }
    return out;
}

// H = (1/dt) [[0, S^beta], [S^-beta, 0]]; entries diverge as dt -> 0.
inline Mat2 hamiltonian_matrix(double s, double beta, double dt) {
    if (!(s > 0.0)) throw DomainError("hamiltonian_matrix: S must be > 0");
    if (!(dt > 0.0)) throw DomainError("hamiltonian_matrix: dt must be > 0");
    const double lp = beta * std::log(s);
    return {0.0, std::exp(lp) / dt, std::exp(-lp) / dt, 0.0};
}

// Standard continuum-limit test path: one period of y = ln S = sin(2 pi t),
// N = 1/dt samples with the endpoint excluded. The discrete action on it
// approaches pi^2 with a first-order error in dt.
inline RateSequence sine_log_rate_path(double dt, double sigma2 = 1.0) {
    RateSequence seq;
    seq.dt = dt;
    seq.sigma2 = sigma2;
    const auto n = static_cast<std::size_t>(std::llround(1.0 / dt));
    seq.rates.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        seq.rates.push_back(
            std::exp(std::sin(2.0 * std::numbers::pi * static_cast<double>(i) * dt)));
    return seq;
}

}  // namespace fmflow::lattice
