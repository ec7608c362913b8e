#pragma once

// Measurement oracle for comparing numerical trajectories against the
// closed-form linear prediction: damping from a log-amplitude regression
// over the extrema of rho~, frequency from zero-crossing spacing, drift
// from an ordinary least-squares line through eta.

#include <cmath>
#include <vector>

#include "fmflow/linear.hpp"
#include "fmflow/trajectory.hpp"

namespace fmflow {

struct EnvelopeFit {
    double damping;  // per tau; positive = decaying
    double omega;    // per tau
    double drift;    // d<eta>/dtau
    int extrema_count;
};

namespace detail {

// OLS slope of y over x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

// Bisects f for a sign change on [lo, hi] down to `tol` in tau.
template <typename F>
double bisect(F&& f, double lo, double hi, double f_lo, double tol) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((f_lo <= 0.0) == (fm <= 0.0)) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

inline EnvelopeFit envelope_fit(const Trajectory& traj) {
    const auto& samples = traj.samples();
    if (samples.size() < 4) throw FitError("envelope_fit: trajectory too short");

    const ModelParams& params = traj.params();
    const double offset =
        params.alpha2 > 4.0 ? traj.c0() / (params.alpha2 - 4.0) : 0.0;

    // extrema of rho~: sign changes of rho' between stored samples,
    // refined on the dense output
    std::vector<double> ext_tau, ext_logamp;
    auto rho_prime_at = [&traj](double tau) { return traj.derivative_at(tau).rho_prime; };
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const double f0 = samples[i].deriv.rho_prime;
        const double f1 = samples[i + 1].deriv.rho_prime;
        if (f0 == 0.0 || (f0 < 0.0) == (f1 < 0.0)) continue;
        const double t_ext =
            detail::bisect(rho_prime_at, samples[i].tau, samples[i + 1].tau, f0, 1e-8);
        const double amp = std::abs(traj.state_at(t_ext).rho_tilde() - offset);
        if (amp <= 0.0) continue;  // extremum buried in the offset; no log amplitude
        ext_tau.push_back(t_ext);
        ext_logamp.push_back(std::log(amp));
    }
    if (ext_tau.size() < 3)
        throw FitError("envelope_fit: fewer than 3 extrema of rho~");

    // zero crossings of rho~ - offset; successive crossings are half a period apart
    std::vector<double> zc_tau;
    auto centered_at = [&traj, offset](double tau) {
        return traj.state_at(tau).rho_tilde() - offset;
    };
    for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
        const double f0 = samples[i].state.rho_tilde() - offset;
        const double f1 = samples[i + 1].state.rho_tilde() - offset;
        if (f0 == 0.0 || (f0 < 0.0) == (f1 < 0.0)) continue;
        zc_tau.push_back(
            detail::bisect(centered_at, samples[i].tau, samples[i + 1].tau, f0, 1e-10));
    }
    if (zc_tau.size() < 2)
        throw FitError("envelope_fit: fewer than 2 zero crossings of rho~");
    const double mean_spacing =
        (zc_tau.back() - zc_tau.front()) / static_cast<double>(zc_tau.size() - 1);

    // drift of eta from an OLS line over a uniform grid (stored samples are
    // unevenly spaced by the step controller)
    const std::size_t n_grid = 2001;
    const double span = traj.t_end();
    std::vector<double> gx(n_grid), gy(n_grid);
    for (std::size_t i = 0; i < n_grid; ++i) {
        gx[i] = span * static_cast<double>(i) / static_cast<double>(n_grid - 1);
        gy[i] = traj.state_at(gx[i]).eta;
    }

    EnvelopeFit fit;
    fit.damping = -detail::ols_slope(ext_tau, ext_logamp);
    fit.omega = std::numbers::pi / mean_spacing;
    fit.drift = detail::ols_slope(gx, gy);
    fit.extrema_count = static_cast<int>(ext_tau.size());
    return fit;
}

}  // namespace fmflow
