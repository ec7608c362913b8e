// Indicator layer: volume/return sampling off trajectories, the recursive
// PVI/NVI market convention, the stylized continuous PVI, and divergence
// reports between the two.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fmflow/indicators.hpp"
#include "fmflow/trajectory.hpp"

using namespace fmflow;
using namespace fmflow::indicators;

namespace {

IndicatorSeries hand_series(std::vector<double> volume, std::vector<double> rate,
                            double base = 1000.0) {
    IndicatorSeries s;
    const std::size_t n = volume.size();
    for (std::size_t i = 0; i < n; ++i) s.taus.push_back(static_cast<double>(i));
    s.volume = std::move(volume);
    s.rate = std::move(rate);
    s.ret.assign(n, 0.0);
    s.base = base;
    return s;
}

Trajectory fig_run(double c0 = 0.0, double t_end = 50.0) {
    IntegratorConfig cfg;
    cfg.t_end = t_end;
    return integrate(ModelParams{1.5, 10.0, 1.0, Variant::Correct},
                     InitialSpec::from_c0(State{0.2, 0.0, 0.5}, c0), cfg);
}

}  // namespace

TEST_CASE("recursive PVI/NVI on the hand-checked example") {
    // V = [1, 2, 1], per-step returns 0.05 then 0.03
    auto s = recursive_pvi_nvi(hand_series({1, 2, 1}, {1.0, 1.05, 1.05 * 1.03}));
    CHECK(s.pvi[0] == 1000.0);
    CHECK(s.pvi[1] == doctest::Approx(1050.0).epsilon(1e-12));
    CHECK(s.pvi[2] == doctest::Approx(1050.0).epsilon(1e-12));
    CHECK(s.nvi[0] == 1000.0);
    CHECK(s.nvi[1] == 1000.0);
    CHECK(s.nvi[2] == doctest::Approx(1030.0).epsilon(1e-12));
}

TEST_CASE("constant volume or zero returns freeze both indices") {
    auto flat_v = recursive_pvi_nvi(hand_series({2, 2, 2, 2}, {1.0, 1.1, 0.9, 1.3}));
    for (double v : flat_v.pvi) CHECK(v == 1000.0);
    for (double v : flat_v.nvi) CHECK(v == 1000.0);

    auto flat_r = recursive_pvi_nvi(hand_series({1, 3, 2, 5}, {1.0, 1.0, 1.0, 1.0}));
    for (double v : flat_r.pvi) CHECK(v == 1000.0);
    for (double v : flat_r.nvi) CHECK(v == 1000.0);
}

TEST_CASE("at most one index updates per step; strict moves update exactly one") {
    std::mt19937 rng(59);
    std::uniform_real_distribution<double> uv(0.0, 2.0), ur(-0.04, 0.05);
    std::vector<double> volume{1.0}, rate{1.0};
    for (int i = 0; i < 300; ++i) {
        volume.push_back(uv(rng));
        rate.push_back(rate.back() * (1.0 + ur(rng) + 0.001));  // returns never zero
    }
    const auto s = recursive_pvi_nvi(hand_series(volume, rate));
    for (std::size_t k = 1; k < s.size(); ++k) {
        const bool pvi_moved = s.pvi[k] != s.pvi[k - 1];
        const bool nvi_moved = s.nvi[k] != s.nvi[k - 1];
        CHECK(!(pvi_moved && nvi_moved));
        if (volume[k] > volume[k - 1]) CHECK(!nvi_moved);
        if (volume[k] < volume[k - 1]) CHECK(!pvi_moved);
        if (volume[k] == volume[k - 1]) {
            CHECK(!pvi_moved);
            CHECK(!nvi_moved);
        }
    }
}

TEST_CASE("doubling the base doubles both indices pointwise, exactly") {
    std::vector<double> volume{1, 2, 1.5, 3, 0.5}, rate{1.0, 1.02, 0.99, 1.05, 1.01};
    const auto a = recursive_pvi_nvi(hand_series(volume, rate, 1000.0));
    const auto b = recursive_pvi_nvi(hand_series(volume, rate, 2000.0));
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(b.pvi[k] == 2.0 * a.pvi[k]);
        CHECK(b.nvi[k] == 2.0 * a.nvi[k]);
    }
}

TEST_CASE("sampled indicators from a trajectory") {
    const Trajectory traj = fig_run();

    SUBCASE("V and R on the uniform grid; R scales as 1/beta exactly for beta = 2") {
        const auto s1 = sample_indicators(traj, 1.0, 0.05);
        const auto s2 = sample_indicators(traj, 2.0, 0.05);
        REQUIRE(s1.size() == s2.size());
        CHECK(s1.size() == 1001);
        CHECK(s1.taus.front() == 0.0);
        for (std::size_t k = 0; k < s1.size(); k += 97) {
            CHECK(s1.volume[k] >= 0.0);
            CHECK(s2.ret[k] * 2.0 == s1.ret[k]);
        }
    }
    SUBCASE("extrema of V are half an oscillation period apart") {
        const auto s = sample_indicators(traj, 1.0, 0.05);
        std::vector<double> maxima;
        for (std::size_t k = 1; k + 1 < s.size(); ++k)
            if (s.volume[k] >= s.volume[k - 1] && s.volume[k] > s.volume[k + 1])
                maxima.push_back(s.taus[k]);
        REQUIRE(maxima.size() > 10);
        const double spacing =
            (maxima.back() - maxima.front()) / static_cast<double>(maxima.size() - 1);
        CHECK(spacing == doctest::Approx(2.565 / 2.0).epsilon(0.05));
    }
    SUBCASE("fixed point gives identically zero V and R") {
        IntegratorConfig cfg;
        cfg.t_end = 5.0;
        const Trajectory still = integrate(ModelParams{1.5, 10.0, 1.0, Variant::Correct},
                                           InitialSpec::from_c0(State{0, 0, 0.5}, 0.0), cfg);
        const auto s = sample_indicators(still, 1.0, 0.1);
        for (std::size_t k = 0; k < s.size(); ++k) {
            CHECK(s.volume[k] == 0.0);
            CHECK(s.ret[k] == 0.0);
        }
    }
    SUBCASE("sampling errors") {
        CHECK_THROWS_AS(sample_indicators(traj, 1.0, 0.0), SamplingError);
        CHECK_THROWS_AS(sample_indicators(traj, 1.0, 40.0), SamplingError);
    }
}

TEST_CASE("stylized continuous PVI slopes") {
    SUBCASE("decreasing volume keeps the level flat") {
        IndicatorSeries s = hand_series({5, 4, 3, 2, 1}, {1, 1.1, 1.2, 1.3, 1.4});
        s.ret.assign(5, 1.0);
        const auto level = stylized_continuous_pvi(s);
        for (double v : level) CHECK(v == 1000.0);
    }
    SUBCASE("rising volume with positive return climbs one per tau") {
        IndicatorSeries s;
        const std::size_t n = 11;
        for (std::size_t k = 0; k < n; ++k) {
            s.taus.push_back(0.1 * static_cast<double>(k));
            s.volume.push_back(static_cast<double>(k));
            s.ret.push_back(1.0);
            s.rate.push_back(1.0);
        }
        const auto level = stylized_continuous_pvi(s);
        CHECK(level.back() == doctest::Approx(1000.0 + 1.0).epsilon(1e-12));
        // slope -1 when the return is negative
        IndicatorSeries neg = s;
        neg.ret.assign(n, -2.0);
        CHECK(stylized_continuous_pvi(neg).back() ==
              doctest::Approx(1000.0 - 1.0).epsilon(1e-12));
    }
}

TEST_CASE("divergence report") {
    Series a{{0, 1, 2, 3}, {1, 2, 3, 4}};
    SUBCASE("identical series") {
        const auto rep = compare_indicators(a, a);
        CHECK(rep.max_gap == 0.0);
        CHECK(rep.rank_correlation == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(!rep.first_disagreement_tau.has_value());
    }
    SUBCASE("single differing sample") {
        Series b = a;
        b.values[2] = 3.5;
        const auto rep = compare_indicators(a, b);
        CHECK(rep.max_gap == doctest::Approx(0.5).epsilon(1e-15));
        REQUIRE(rep.first_disagreement_tau.has_value());
        CHECK(*rep.first_disagreement_tau == 2.0);
    }
    SUBCASE("grid mismatch") {
        Series b{{0, 1, 2}, {1, 2, 3}};
        CHECK_THROWS_AS(compare_indicators(a, b), GridMismatch);
        Series c{{0, 1, 2, 3.5}, {1, 2, 3, 4}};
        CHECK_THROWS_AS(compare_indicators(a, c), GridMismatch);
    }
}

TEST_CASE("stylized and recursive PVI diverge on the volume-figure run") {
    const Trajectory traj = fig_run();
    auto s = recursive_pvi_nvi(sample_indicators(traj, 1.0, 0.05));
    const auto stylized = stylized_continuous_pvi(s);
    const auto rep = compare_indicators(Series{s.taus, s.pvi}, Series{s.taus, stylized});
    CHECK(rep.max_gap > 0.0);
    CHECK(rep.first_disagreement_tau.has_value());
    CHECK(rep.rank_correlation < 0.9);
    // golden number for this run configuration, frozen from the first build
    CHECK(rep.rank_correlation == doctest::Approx(0.786344).epsilon(0.02));
    MESSAGE("stylized vs recursive PVI: max_gap=", rep.max_gap,
            " rank_corr=", rep.rank_correlation);
}

TEST_CASE("recursive indices depend materially on the sampling interval") {
    const Trajectory traj = fig_run();
    const auto coarse = recursive_pvi_nvi(sample_indicators(traj, 1.0, 0.05));
    const auto fine = recursive_pvi_nvi(sample_indicators(traj, 1.0, 0.025));
    // restrict the fine series to the coarse grid
    Series fine_on_coarse;
    for (std::size_t k = 0; k < fine.size(); k += 2) {
        fine_on_coarse.taus.push_back(fine.taus[k]);
        fine_on_coarse.values.push_back(fine.pvi[k]);
    }
    REQUIRE(fine_on_coarse.taus.size() == coarse.size());
    Series coarse_s{coarse.taus, coarse.pvi};
    // grids were built as k*dtau with different dtau; align tau values exactly
    fine_on_coarse.taus = coarse.taus;
    const auto rep = compare_indicators(coarse_s, fine_on_coarse);
    CHECK(rep.max_gap > 0.0);
    MESSAGE("PVI sampling sensitivity (dtau 0.05 vs 0.025): max_gap=", rep.max_gap);
}
