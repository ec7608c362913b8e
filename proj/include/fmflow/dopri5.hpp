#pragma once

// Embedded Dormand-Prince 5(4) pair with PI step-size control and the
// method's own 4th-order continuous extension (Hairer, Norsett & Wanner,
// "Solving Ordinary Differential Equations I", DOPRI5).
//
// Generic over the right-hand side; the model-specific boundary guard is
// passed in as an event function that is positive inside the admissible
// region. Integration is forward-only in a scaled time variable.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "fmflow/errors.hpp"

namespace fmflow::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

namespace dopri5 {

// Butcher tableau
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;

// y1 - yhat1 (order-4 error estimator)
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// dense-output coefficients
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

// step controller (PI stabilized)
constexpr double safety = 0.9;
constexpr double beta_pi = 0.04;
constexpr double expo1 = 0.2 - beta_pi * 0.75;
constexpr double fac_min = 0.2;   // max step decrease per accept
constexpr double fac_max = 10.0;  // max step increase per accept

}  // namespace dopri5

// One accepted step's quartic interpolant on [t0, t0+h].
template <std::size_t N>
struct DenseSegment {
    double t0 = 0.0;
    double h = 0.0;
    std::array<Vec<N>, 5> cont{};  // rcont1..rcont5

    double theta_of(double t) const { return (t - t0) / h; }

    Vec<N> eval(double t) const {
        const double th = theta_of(t);
        const double th1 = 1.0 - th;
        Vec<N> y;
        for (std::size_t i = 0; i < N; ++i)
            y[i] = cont[0][i] +
                   th * (cont[1][i] +
                         th1 * (cont[2][i] + th * (cont[3][i] + th1 * cont[4][i])));
        return y;
    }

    // d/dt of the interpolant
    Vec<N> eval_derivative(double t) const {
        const double th = theta_of(t);
        Vec<N> dy;
        for (std::size_t i = 0; i < N; ++i) {
            const double p = cont[1][i] + (1.0 - 2.0 * th) * cont[2][i] +
                             th * (2.0 - 3.0 * th) * cont[3][i] +
                             2.0 * th * (1.0 - th) * (1.0 - 2.0 * th) * cont[4][i];
            dy[i] = p / h;
        }
        return dy;
    }
};

template <std::size_t N>
struct OdeSolution {
    std::vector<double> ts;                   // accepted times, ts[0] = 0
    std::vector<Vec<N>> ys;                   // states at ts
    std::vector<Vec<N>> fs;                   // rhs at ts (FSAL byproduct)
    std::vector<DenseSegment<N>> segments;    // segments.size() == ts.size() - 1
    bool event_hit = false;
    double event_time = 0.0;
    // The controller gave up (step underflow / step budget); everything
    // accepted so far is still in ts/ys/segments.
    bool step_failed = false;
    std::string failure;
};

struct StepperOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.1;
    std::size_t max_steps = 20'000'000;
};

namespace detail {

template <std::size_t N, typename RHS>
Vec<N> try_rhs(RHS& f, double t, const Vec<N>& y, bool& ok) {
    // A trial stage may wander outside the rhs domain; treat that like an
    // oversized step and let the controller shrink h.
    try {
        Vec<N> r = f(t, y);
        for (double v : r)
            if (!std::isfinite(v)) {
                ok = false;
                return r;
            }
        ok = true;
        return r;
    } catch (const DomainError&) {
        ok = false;
        return Vec<N>{};
    } catch (const NonFiniteError&) {
        ok = false;
        return Vec<N>{};
    }
}

template <std::size_t N>
double error_norm(const Vec<N>& err, const Vec<N>& y0, const Vec<N>& y1,
                  double atol, double rtol) {
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double q = err[i] / sc;
        sum += q * q;
    }
    return std::sqrt(sum / static_cast<double>(N));
}

// Hairer's starting-step heuristic.
template <std::size_t N, typename RHS>
double initial_step(RHS& f, double t0, const Vec<N>& y0, const Vec<N>& f0,
                    double atol, double rtol, double max_step) {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = atol + rtol * std::abs(y0[i]);
        dnf += (f0[i] / sc) * (f0[i] / sc);
        dny += (y0[i] / sc) * (y0[i] / sc);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, max_step);

    Vec<N> y1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y0[i] + h * f0[i];
    bool ok = false;
    const Vec<N> f1 = try_rhs<N>(f, t0 + h, y1, ok);
    if (!ok) return std::min(h * 0.01, max_step);

    double der2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double sc = atol + rtol * std::abs(y0[i]);
        const double q = (f1[i] - f0[i]) / sc;
        der2 += q * q;
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(der2, std::sqrt(dnf));
    const double h1 = (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3)
                                       : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, max_step});
}

}  // namespace detail

// Integrates dy/dt = f(t, y) from t = 0 to t = t_end.
//
// `event`, when supplied, must be positive on the admissible region; the
// solve stops at the first dense-output crossing of zero, located by
// bisection, and the crossing becomes the final sample.
template <std::size_t N, typename RHS>
OdeSolution<N> solve(RHS f, const Vec<N>& y0, double t_end, const StepperOptions& opt,
                     const std::function<double(const Vec<N>&)>& event = {}) {
    using namespace dopri5;
    if (!(t_end > 0.0)) throw DomainError("solve: t_end must be > 0");
    if (!(opt.rel_tol > 0.0 && opt.abs_tol > 0.0 && opt.max_step > 0.0))
        throw DomainError("solve: tolerances and max_step must be > 0");

    OdeSolution<N> sol;
    sol.ts.push_back(0.0);
    sol.ys.push_back(y0);

    Vec<N> y = y0;
    double t = 0.0;
    Vec<N> k1 = f(0.0, y0);  // initial-state domain errors propagate to the caller
    sol.fs.push_back(k1);

    if (event && event(y0) <= 0.0) {
        sol.event_hit = true;
        sol.event_time = 0.0;
        return sol;
    }

    double h = detail::initial_step<N>(f, 0.0, y0, k1, opt.abs_tol, opt.rel_tol,
                                       std::min(opt.max_step, t_end));
    double fac_old = 1e-4;
    std::size_t n_steps = 0;

    while (t < t_end) {
        if (++n_steps > opt.max_steps) {
            sol.step_failed = true;
            sol.failure = "exceeded max step count at t = " + std::to_string(t);
            return sol;
        }
        const double h_min = 16.0 * 0x1p-52 * std::max(std::abs(t), 1.0);
        if (h < h_min) {
            sol.step_failed = true;
            sol.failure = "step size underflow at t = " + std::to_string(t);
            return sol;
        }
        if (t + h > t_end) h = t_end - t;

        Vec<N> k2, k3, k4, k5, k6, k7, y1, ytmp;
        bool ok = true;
        auto stage = [&](double c, const Vec<N>& yt) {
            bool st_ok = false;
            Vec<N> r = detail::try_rhs<N>(f, t + c * h, yt, st_ok);
            ok = ok && st_ok;
            return r;
        };

        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        k2 = stage(c2, ytmp);
        if (ok) {
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
            k3 = stage(c3, ytmp);
        }
        if (ok) {
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
            k4 = stage(c4, ytmp);
        }
        if (ok) {
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
            k5 = stage(c5, ytmp);
        }
        if (ok) {
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                      a64 * k4[i] + a65 * k5[i]);
            k6 = stage(1.0, ytmp);
        }
        if (ok) {
            for (std::size_t i = 0; i < N; ++i)
                y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] +
                                    a75 * k5[i] + a76 * k6[i]);
            k7 = stage(1.0, y1);  // FSAL
        }

        if (!ok) {
            h *= 0.5;
            continue;
        }

        Vec<N> err;
        for (std::size_t i = 0; i < N; ++i)
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                          e6 * k6[i] + e7 * k7[i]);
        const double err_norm =
            detail::error_norm<N>(err, y, y1, opt.abs_tol, opt.rel_tol);

        const double fac11 = std::pow(err_norm, expo1);
        if (err_norm <= 1.0) {
            // accept
            DenseSegment<N> seg;
            seg.t0 = t;
            seg.h = h;
            for (std::size_t i = 0; i < N; ++i) {
                const double ydiff = y1[i] - y[i];
                const double bspl = h * k1[i] - ydiff;
                seg.cont[0][i] = y[i];
                seg.cont[1][i] = ydiff;
                seg.cont[2][i] = bspl;
                seg.cont[3][i] = ydiff - h * k7[i] - bspl;
                seg.cont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] +
                                      d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
            }

            const double t_new = t + h;
            if (event) {
                // scan the segment for a boundary crossing, then bisect
                double th_lo = 0.0, th_hi = -1.0;
                constexpr int scan = 8;
                for (int j = 1; j <= scan; ++j) {
                    const double th = static_cast<double>(j) / scan;
                    const Vec<N> yj = seg.eval(t + th * h);
                    if (event(yj) <= 0.0) {
                        th_hi = th;
                        break;
                    }
                    th_lo = th;
                }
                if (th_hi > 0.0) {
                    for (int it = 0; it < 80; ++it) {
                        const double mid = 0.5 * (th_lo + th_hi);
                        if (event(seg.eval(t + mid * h)) <= 0.0)
                            th_hi = mid;
                        else
                            th_lo = mid;
                    }
                    const double t_ev = t + th_hi * h;
                    const Vec<N> y_ev = seg.eval(t_ev);
                    sol.segments.push_back(seg);
                    sol.ts.push_back(t_ev);
                    sol.ys.push_back(y_ev);
                    sol.fs.push_back(f(t_ev, y_ev));
                    sol.event_hit = true;
                    sol.event_time = t_ev;
                    return sol;
                }
            }

            sol.segments.push_back(seg);
            sol.ts.push_back(t_new);
            sol.ys.push_back(y1);
            sol.fs.push_back(k7);

            t = t_new;
            y = y1;
            k1 = k7;

            double fac = fac11 / std::pow(fac_old, beta_pi);
            fac = std::max(1.0 / fac_max, std::min(1.0 / fac_min, fac / safety));
            h = std::min(h / fac, opt.max_step);
            fac_old = std::max(err_norm, 1e-4);
        } else {
            // reject
            h = h / std::min(1.0 / fac_min, fac11 / safety);
        }
    }
    return sol;
}

}  // namespace fmflow::ode
