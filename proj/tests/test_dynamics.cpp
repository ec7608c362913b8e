// Core dynamics: equations of motion in both variants, the C0 closure,
// Lagrangian / first-integral evaluators, observables, and the algebraic
// identities the rest of the system leans on.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fmflow/dynamics.hpp"

using namespace fmflow;

namespace {

ModelParams fig_params(Variant v = Variant::Correct) {
    return ModelParams{1.5, 10.0, 1.0, v};
}

const State fig_state{0.2, 0.0, 0.5};  // eta(0)=0.2, upsilon(0)=0, rho(0)=0.5

}  // namespace

TEST_CASE("rhs at the figure initial state, both variants") {
    // hand evaluation: sqrt(rho(1-rho)) = 1/2, the (2rho-1) term vanishes,
    // rho' = sinh(0.2), eta' = -alpha1 sinh(0.2), upsilon' = k sinh(0.2)
    const double sh = std::sinh(0.2);

    const Derivatives d = rhs(fig_params(), 0.0, fig_state);
    CHECK(d.rho_prime == doctest::Approx(sh).epsilon(1e-15));
    CHECK(d.rho_prime == doctest::Approx(0.201336).epsilon(1e-5));
    CHECK(d.eta_prime == doctest::Approx(-1.5 * sh).epsilon(1e-15));
    CHECK(d.eta_prime == doctest::Approx(-0.302004).epsilon(1e-5));
    CHECK(d.upsilon_prime == doctest::Approx(1.5 * sh).epsilon(1e-15));

    const Derivatives e = rhs(fig_params(Variant::IlinskiErratum), 0.0, fig_state);
    CHECK(e.upsilon_prime == doctest::Approx(sh).epsilon(1e-15));
    CHECK(e.rho_prime == d.rho_prime);
    CHECK(e.eta_prime == d.eta_prime);
}

TEST_CASE("rhs fixed point family (c, -c, 1/2) with C0 = 0") {
    for (double c : {0.0, 0.3, -1.7, 4.0}) {
        const Derivatives d = rhs(fig_params(), 0.0, State{c, -c, 0.5});
        CHECK(d.eta_prime == 0.0);
        CHECK(d.upsilon_prime == 0.0);
        CHECK(d.rho_prime == 0.0);
    }
}

TEST_CASE("rhs domain and finiteness guards") {
    CHECK_THROWS_AS(rhs(fig_params(), 0.0, State{0, 0, 0.0}), DomainError);
    CHECK_THROWS_AS(rhs(fig_params(), 0.0, State{0, 0, 1.0}), DomainError);
    CHECK_THROWS_AS(rhs(fig_params(), 0.0, State{0, 0, -0.2}), DomainError);
    // sinh overflows to infinity
    CHECK_THROWS_AS(rhs(fig_params(), 0.0, State{800.0, 0.0, 0.5}), NonFiniteError);
}

TEST_CASE("closure identity holds at arbitrary states to 4 ulps") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ua1(0.0, 3.0), ua2(0.5, 30.0), uc(-1.0, 1.0),
        ux(-2.0, 2.0), ur(0.01, 0.99);
    for (int i = 0; i < 2000; ++i) {
        const Variant v = (i % 2) ? Variant::Correct : Variant::IlinskiErratum;
        const ModelParams p{ua1(rng), ua2(rng), 1.0, v};
        const double c0 = uc(rng);
        const State s{ux(rng), ux(rng), ur(rng)};
        const Derivatives d = rhs(p, c0, s);
        CHECK(closure_identity_residual(p, c0, s, d) <= closure_ulp_bound(p, c0, s, d));
    }
}

TEST_CASE("gauge shift (eta+c, upsilon-c) leaves the rhs unchanged") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ux(-0.5, 0.5), ur(0.2, 0.8);
    for (Variant v : {Variant::Correct, Variant::IlinskiErratum}) {
        for (double c : {0.5, -1.25, 3.0}) {
            for (int i = 0; i < 200; ++i) {
                const State s{ux(rng), ux(rng), ur(rng)};
                const State shifted{s.eta + c, s.upsilon - c, s.rho};
                const Derivatives d0 = rhs(fig_params(v), 0.3, s);
                const Derivatives d1 = rhs(fig_params(v), 0.3, shifted);
                CHECK(d1.eta_prime == doctest::Approx(d0.eta_prime).epsilon(1e-12));
                CHECK(d1.upsilon_prime == doctest::Approx(d0.upsilon_prime).epsilon(1e-12));
                CHECK(d1.rho_prime == doctest::Approx(d0.rho_prime).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("currency swap (-eta, -upsilon, 1-rho, -C0) negates the rhs") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> ux(-0.8, 0.8), ur(0.1, 0.9), uc(-0.5, 0.5);
    for (int i = 0; i < 500; ++i) {
        const State s{ux(rng), ux(rng), ur(rng)};
        const double c0 = uc(rng);
        const Derivatives d = rhs(fig_params(), c0, s);
        const Derivatives m =
            rhs(fig_params(), -c0, State{-s.eta, -s.upsilon, 1.0 - s.rho});
        CHECK(m.eta_prime == doctest::Approx(-d.eta_prime).epsilon(1e-13));
        CHECK(m.upsilon_prime == doctest::Approx(-d.upsilon_prime).epsilon(1e-13));
        CHECK(m.rho_prime == doctest::Approx(-d.rho_prime).epsilon(1e-13));
    }
}

TEST_CASE("resolve_closure reproduces eta'(0) = -0.3020 for the figure preset") {
    const auto pair =
        resolve_closure(fig_params(), InitialSpec::from_c0(fig_state, 0.0));
    CHECK(pair.c0 == 0.0);
    CHECK(pair.eta_prime0 == doctest::Approx(-1.5 * std::sinh(0.2)).epsilon(1e-15));
    CHECK(pair.eta_prime0 == doctest::Approx(-0.3020).epsilon(2e-4));
}

TEST_CASE("resolve_closure trivial and alpha1 = 0 cases") {
    const auto trivial = resolve_closure(
        fig_params(), InitialSpec::from_eta_prime0(State{0, 0, 0.5}, 0.0));
    CHECK(trivial.c0 == 0.0);
    CHECK(trivial.eta_prime0 == 0.0);

    const ModelParams no_farmer{0.0, 10.0, 1.0, Variant::Correct};
    const auto pair = resolve_closure(no_farmer, InitialSpec::from_c0(fig_state, 0.0));
    CHECK(pair.eta_prime0 == 0.0);
}

TEST_CASE("resolve_closure round-trips to machine precision") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> ua1(0.0, 3.0), ua2(0.5, 30.0), uc(-1.0, 1.0),
        ux(-1.0, 1.0), ur(0.05, 0.95);
    for (int i = 0; i < 1000; ++i) {
        const ModelParams p{ua1(rng), ua2(rng), 1.0, Variant::Correct};
        const State s{ux(rng), ux(rng), ur(rng)};
        const double c0 = uc(rng);
        const auto fwd = resolve_closure(p, InitialSpec::from_c0(s, c0));
        const auto back =
            resolve_closure(p, InitialSpec::from_eta_prime0(s, fwd.eta_prime0));
        const double scale = std::max({std::abs(c0), std::abs(fwd.eta_prime0), 1.0});
        CHECK(std::abs(back.c0 - c0) <= 4.0 * scale * 0x1p-52);
    }
}

TEST_CASE("resolve_closure rejects boundary rho") {
    CHECK_THROWS_AS(resolve_closure(fig_params(), InitialSpec::from_c0(State{0, 0, 1.0}, 0.0)),
                    DomainError);
}

TEST_CASE("lagrangian values") {
    // only the cosh term survives at the origin with zero derivatives
    CHECK(lagrangian(fig_params(), State{0, 0, 0.5}, Derivatives{}) == 1.0);

    // figure initial state: quadratic term vanishes because
    // eta' + alpha1 rho' = alpha2(1/2 - rho) + C0 = 0 there
    const Derivatives d = rhs(fig_params(), 0.0, fig_state);
    const double expected = 0.5 * (1.5 * std::sinh(0.2)) + std::cosh(0.2);
    CHECK(lagrangian(fig_params(), fig_state, d) ==
          doctest::Approx(expected).epsilon(1e-14));
    CHECK(lagrangian(fig_params(), fig_state, d) ==
          doctest::Approx(1.171069).epsilon(1e-6));
}

TEST_CASE("lagrangian quadratic term scales as 1/alpha2") {
    const State s{0.1, -0.2, 0.4};
    const Derivatives d{0.3, 0.0, 0.1};
    auto quad = [&](double alpha2) {
        const ModelParams p{1.5, alpha2, 1.0, Variant::Correct};
        const double rest = s.rho * d.upsilon_prime +
                            2.0 * std::sqrt(s.rho * (1 - s.rho)) *
                                std::cosh(s.upsilon + s.eta);
        return lagrangian(p, s, d) - rest;
    };
    CHECK(quad(20.0) == doctest::Approx(0.5 * quad(10.0)).epsilon(1e-12));
}

TEST_CASE("energy value at the origin") {
    CHECK(energy(fig_params(), 0.0, State{0, 0, 0.5}) == -1.0);
}

TEST_CASE("lagrangian and energy reject boundary rho") {
    CHECK_THROWS_AS(lagrangian(fig_params(), State{0, 0, 0.0}, Derivatives{}), DomainError);
    CHECK_THROWS_AS(energy(fig_params(), 0.0, State{0, 0, 1.0}), DomainError);
}

TEST_CASE("energy is a first integral of the Correct flow (finite differences)") {
    // directional derivative of E along the rhs must vanish for Correct and
    // equal -4 (1-alpha1) rho(1-rho) sinh^2(upsilon+eta) for the erratum
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> ua1(0.0, 3.0), ua2(4.5, 20.0), uc(-0.5, 0.5),
        ux(-1.0, 1.0), ur(0.1, 0.9);
    const double eps = 1e-6;
    for (int i = 0; i < 400; ++i) {
        const double a1 = ua1(rng), a2 = ua2(rng), c0 = uc(rng);
        const State s{ux(rng), ux(rng), ur(rng)};
        for (Variant v : {Variant::Correct, Variant::IlinskiErratum}) {
            const ModelParams p{a1, a2, 1.0, v};
            const Derivatives f = rhs(p, c0, s);
            const State plus{s.eta + eps * f.eta_prime, s.upsilon + eps * f.upsilon_prime,
                             s.rho + eps * f.rho_prime};
            const State minus{s.eta - eps * f.eta_prime, s.upsilon - eps * f.upsilon_prime,
                              s.rho - eps * f.rho_prime};
            const double fd =
                (energy(p, c0, plus) - energy(p, c0, minus)) / (2.0 * eps);
            const double sh = std::sinh(s.upsilon + s.eta);
            const double expected =
                v == Variant::Correct
                    ? 0.0
                    : -4.0 * (1.0 - a1) * s.rho * (1.0 - s.rho) * sh * sh;
            CHECK(fd == doctest::Approx(expected).epsilon(1e-6).scale(1.0 + std::abs(expected)));
        }
    }
}

TEST_CASE("observables") {
    const ModelParams p{1.0, 10.0, 1.0, Variant::Correct};  // f = alpha1/(2 beta) = 0.5

    SUBCASE("S = 1 at eta = 0") {
        const auto o = observables(p, State{0, 0, 0.5}, Derivatives{});
        CHECK(o.exchange_rate == 1.0);
    }
    SUBCASE("Farmer term f (2 rho - 1)") {
        const auto o = observables(p, State{0, 0, 0.75}, Derivatives{});
        CHECK(o.farmer == 0.25);
    }
    SUBCASE("return scales with 1/beta") {
        const ModelParams p2{1.0, 10.0, 2.0, Variant::Correct};
        const Derivatives d{-0.302004, 0.0, 0.0};
        CHECK(observables(p2, State{0, 0, 0.5}, d).ret ==
              doctest::Approx(-0.151002).epsilon(1e-12));
    }
    SUBCASE("psi reconstruction in the phi2 = 0 gauge") {
        const State s{0.0, 0.3, 0.7};
        const auto o = observables(p, s, Derivatives{}, 16);
        REQUIRE(o.psi1.has_value());
        CHECK(std::norm(*o.psi1) == doctest::Approx(16.0 * 0.7).epsilon(1e-14));
        CHECK(std::arg(*o.psi1) == doctest::Approx(-0.3).epsilon(1e-14));
        CHECK(std::norm(*o.psi2) == doctest::Approx(16.0 * 0.3).epsilon(1e-14));
        // F = (f/M)(|psi1|^2 - |psi2|^2)
        const double f_from_psi =
            0.5 / 16.0 * (std::norm(*o.psi1) - std::norm(*o.psi2));
        CHECK(o.farmer == doctest::Approx(f_from_psi).epsilon(1e-13));
        CHECK_THROWS_AS(observables(p, s, Derivatives{}, 0), DomainError);
    }
}

TEST_CASE("raw parameter derivation") {
    RawParams raw;
    raw.sigma2 = 0.4;
    raw.h = 2.0;
    raw.agents = 50;
    raw.f = 0.75;
    raw.beta = 1.0;
    const ModelParams p = raw.derive();
    CHECK(p.alpha1 == 2.0 * 1.0 * 0.75);
    CHECK(p.alpha2 == 50.0 * 1.0 * 0.4 / 2.0);

    RawParams bad = raw;
    bad.agents = 0;
    CHECK_THROWS_AS(bad.derive(), DomainError);
    bad = raw;
    bad.sigma2 = -1.0;
    CHECK_THROWS_AS(bad.derive(), DomainError);
}

TEST_CASE("model parameter validation") {
    CHECK_THROWS_AS((ModelParams{-0.1, 10.0, 1.0, Variant::Correct}).validate(), DomainError);
    CHECK_THROWS_AS((ModelParams{1.0, 0.0, 1.0, Variant::Correct}).validate(), DomainError);
    CHECK_THROWS_AS((ModelParams{1.0, 10.0, -1.0, Variant::Correct}).validate(), DomainError);
}
