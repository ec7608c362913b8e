#pragma once

// Technical-analysis layer: trading volume V = |rho'|, return R = eta'/beta,
// market-convention recursive PVI/NVI, the stylized continuous PVI read off
// Ilinski's plots, and a divergence report between indicator series.
//
// R always uses eta', never (upsilon+eta)'; conflating the two changes the
// return curve qualitatively.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "fmflow/errors.hpp"
#include "fmflow/trajectory.hpp"

namespace fmflow::indicators {

struct IndicatorSeries {
    std::vector<double> taus;    // uniform grid k * dtau
    std::vector<double> volume;  // V >= 0
    std::vector<double> ret;     // R
    std::vector<double> rate;    // S, for per-step price returns
    std::vector<double> pvi;     // filled by recursive_pvi_nvi
    std::vector<double> nvi;
    double base = 1000.0;

    std::size_t size() const { return taus.size(); }
    double dtau() const { return taus.size() > 1 ? taus[1] - taus[0] : 0.0; }
};

inline IndicatorSeries sample_indicators(const Trajectory& traj, double beta,
                                         double dtau_s) {
    if (!(dtau_s > 0.0)) throw SamplingError("sample_indicators: dtau_s must be > 0");
    const double span = traj.t_end();
    if (span < 2.0 * dtau_s)
        throw SamplingError("sample_indicators: trajectory shorter than 2 sampling steps");

    IndicatorSeries out;
    const auto n = static_cast<std::size_t>(std::floor(span / dtau_s + 1e-9)) + 1;
    out.taus.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double tau = static_cast<double>(k) * dtau_s;
        const State s = traj.state_at(tau);
        const Derivatives d = traj.derivative_at(tau);
        out.taus.push_back(tau);
        out.volume.push_back(std::abs(d.rho_prime));
        out.ret.push_back(d.eta_prime / beta);
        out.rate.push_back(s.exchange_rate(beta));
    }
    return out;
}

// PVI updates by the per-step price return only when volume strictly rises,
// NVI only when it strictly falls; ties update neither. The per-step return
// is the price ratio S_k/S_{k-1} - 1, so the recursion is exact under
// resampling of S.
inline IndicatorSeries recursive_pvi_nvi(IndicatorSeries series) {
    const std::size_t n = series.size();
    if (n == 0) throw SamplingError("recursive_pvi_nvi: empty series");
    series.pvi.assign(n, series.base);
    series.nvi.assign(n, series.base);
    for (std::size_t k = 1; k < n; ++k) {
        const double r = series.rate[k] / series.rate[k - 1] - 1.0;
        series.pvi[k] = series.pvi[k - 1];
        series.nvi[k] = series.nvi[k - 1];
        if (series.volume[k] > series.volume[k - 1])
            series.pvi[k] = series.pvi[k - 1] * (1.0 + r);
        else if (series.volume[k] < series.volume[k - 1])
            series.nvi[k] = series.nvi[k - 1] * (1.0 + r);
    }
    return series;
}

// The continuous PVI as read off Ilinski's plot: flat while volume falls,
// slope +-1 (sign of R) while volume rises. V' is estimated by central
// differences on the uniform grid.
inline std::vector<double> stylized_continuous_pvi(const IndicatorSeries& series) {
    const std::size_t n = series.size();
    if (n < 2) throw SamplingError("stylized_continuous_pvi: need >= 2 samples");
    const double dt = series.dtau();

    auto v_slope = [&](std::size_t k) {
        if (k == 0) return series.volume[1] - series.volume[0];
        if (k == n - 1) return series.volume[n - 1] - series.volume[n - 2];
        return 0.5 * (series.volume[k + 1] - series.volume[k - 1]);
    };

    std::vector<double> level(n);
    level[0] = series.base;
    for (std::size_t k = 1; k < n; ++k) {
        const double dv = v_slope(k - 1);
        double slope = 0.0;
        if (dv > 0.0) slope = series.ret[k - 1] > 0.0 ? 1.0 : (series.ret[k - 1] < 0.0 ? -1.0 : 0.0);
        level[k] = level[k - 1] + slope * dt;
    }
    return level;
}

struct Series {
    std::vector<double> taus;
    std::vector<double> values;
};

struct DivergenceReport {
    double max_gap = 0.0;
    double rank_correlation = 1.0;
    std::optional<double> first_disagreement_tau;
};

namespace detail {

// average ranks, ties shared
inline std::vector<double> ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = shared;
        i = j + 1;
    }
    return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const auto n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 1.0;  // a constant series disagrees nowhere
    return sab / std::sqrt(saa * sbb);
}

}  // namespace detail

// Spearman rank correlation, max pointwise gap, first exact disagreement.
inline DivergenceReport compare_indicators(const Series& a, const Series& b) {
    if (a.taus.size() != b.taus.size() || a.taus.size() != a.values.size() ||
        b.taus.size() != b.values.size())
        throw GridMismatch("compare_indicators: series sizes differ");
    for (std::size_t i = 0; i < a.taus.size(); ++i)
        if (a.taus[i] != b.taus[i])
            throw GridMismatch("compare_indicators: sample grids differ");

    DivergenceReport rep;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        rep.max_gap = std::max(rep.max_gap, std::abs(a.values[i] - b.values[i]));
        if (!rep.first_disagreement_tau && a.values[i] != b.values[i])
            rep.first_disagreement_tau = a.taus[i];
    }
    rep.rank_correlation =
        detail::pearson(detail::ranks(a.values), detail::ranks(b.values));
    return rep;
}

}  // namespace fmflow::indicators
