#include <doctest.h>

#include "oracles.hpp"
#include "polymart/martingale.hpp"

using namespace polymart;

namespace {

const MPoly t = MPoly::variable(Var::t);
const MPoly s = MPoly::variable(Var::s);

SpaceTimePoly x_pow(int k) { return SpaceTimePoly::monomial(k); }

SpaceTimePoly from_x_coeffs(std::vector<RatFunc> c) { return SpaceTimePoly(std::move(c)); }

} // namespace

TEST_CASE("wiener family members are the Hermite polynomials in (x, t)") {
    const auto fam = build_family(MomentModel::wiener(8), 4);
    const auto hermite = oracles::monic_hermite(4, RatFunc(t));
    for (int n = 0; n <= 4; ++n) {
        CHECK(fam.member(n) == hermite[static_cast<std::size_t>(n)]);
        CHECK(fam.certified(n));
    }
    CHECK(fam.canonical());
    CHECK(fam.member(3) == from_x_coeffs({RatFunc(), RatFunc(MPoly(-3) * t), RatFunc(), RatFunc(1)}));
}

TEST_CASE("poisson family members are Charlier-style polynomials") {
    const auto fam = build_family(MomentModel::poisson(1, 4), 2);
    CHECK(fam.member(1) == from_x_coeffs({RatFunc(-t), RatFunc(1)}));
    CHECK(fam.member(2) ==
          from_x_coeffs({RatFunc(t * t - t), RatFunc(MPoly(-2) * t), RatFunc(1)}));
}

TEST_CASE("degenerate model: all corrections vanish") {
    const auto zero = MomentModel::from_moments(
        "zero", std::vector<RatFunc>(6, RatFunc()), {});
    const auto fam = build_family(zero, 6);
    for (int n = 0; n <= 6; ++n) CHECK(fam.member(n) == x_pow(n));
}

TEST_CASE("gaussian increment oracle certifies the wiener conditional expectation") {
    // E((X_s + G)^n | X_s) with G ~ N(0, t-s), computed via binomial sums over
    // central moments, must match the operator on x^n.
    const auto fam = build_family(MomentModel::wiener(8), 8);
    const RatFunc variance = RatFunc(t - s);
    for (int n = 0; n <= 8; ++n) {
        SpaceTimePoly expect;
        for (int j = 0; j <= n; ++j) {
            const int k = n - j; // moment order of G
            if (k % 2 != 0) continue;
            RatFunc c(Rational(binomial(static_cast<unsigned>(n), static_cast<unsigned>(j)) *
                               double_factorial(k - 1)));
            c *= variance.pow(k / 2);
            expect += SpaceTimePoly::monomial(j, c);
        }
        CHECK(conditional_expectation(x_pow(n), fam) == expect);
    }
}

TEST_CASE("structural matrix entries and identity") {
    const auto wiener = MomentModel::wiener(4);
    const auto v2 = structural_matrix(wiener, 2);
    CHECK(v2.v.at(0, 0) == RatFunc(1));
    CHECK(v2.v.at(1, 1) == RatFunc(1));
    CHECK(v2.v.at(2, 0) == RatFunc(t));
    CHECK(v2.v.at(2, 1) == RatFunc());
    CHECK(v2.v.at(2, 2) == RatFunc(1));

    const auto poisson = MomentModel::poisson(1, 4);
    const auto p2 = structural_matrix(poisson, 2);
    CHECK(p2.v.at(1, 0) == RatFunc(t));
    CHECK(p2.v.at(2, 0) == RatFunc(t + t * t));
    CHECK(p2.v.at(2, 1) == RatFunc(MPoly(2) * t));
    CHECK_THROWS_AS((void)structural_matrix(poisson, 5), OrderOutOfRange);
}

TEST_CASE("basis expansion and round trip") {
    const auto fam = build_family(MomentModel::wiener(8), 4);
    const auto c = to_martingale_basis(x_pow(2), fam);
    REQUIRE(c.size() == 3);
    CHECK(c[0] == RatFunc(t));
    CHECK(c[1] == RatFunc());
    CHECK(c[2] == RatFunc(1));

    const auto poisson_fam = build_family(MomentModel::poisson(1, 4), 2);
    const auto cp = to_martingale_basis(x_pow(2), poisson_fam);
    CHECK(cp[0] == RatFunc(t + t * t));
    CHECK(cp[1] == RatFunc(MPoly(2) * t));
    CHECK(cp[2] == RatFunc(1));

    // unit coordinates for members, and a full round trip
    for (int n = 0; n <= 4; ++n) {
        const auto cm = to_martingale_basis(fam.member(n), fam);
        for (int k = 0; k < static_cast<int>(cm.size()); ++k)
            CHECK(cm[static_cast<std::size_t>(k)] == (k == n ? RatFunc(1) : RatFunc()));
    }
    std::mt19937 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<RatFunc> coeffs;
        for (int k = 0; k <= 4; ++k)
            coeffs.emplace_back(oracles::rand_poly(rng, {Var::t}, 2, 2));
        const SpaceTimePoly p = from_x_coeffs(coeffs);
        CHECK(from_martingale_basis(to_martingale_basis(p, fam), fam) == p);
    }
    CHECK_THROWS_AS((void)to_martingale_basis(x_pow(5), fam), OrderOutOfRange);
}

TEST_CASE("conditional expectation examples") {
    const auto fam = build_family(MomentModel::wiener(8), 4);
    // x^2 at t -> x^2 + (t - s) at s
    CHECK(conditional_expectation(x_pow(2), fam) ==
          from_x_coeffs({RatFunc(t - s), RatFunc(), RatFunc(1)}));
    // members map to themselves re-read at s
    for (int n = 0; n <= 4; ++n)
        CHECK(conditional_expectation(fam.member(n), fam) ==
              fam.member(n).subst_time(Var::t, s));

    const auto pfam = build_family(MomentModel::poisson(1, 4), 2);
    CHECK(conditional_expectation(x_pow(1), pfam) ==
          from_x_coeffs({RatFunc(t - s), RatFunc(1)}));

    // concrete evaluation and the time-order guard
    const auto at = conditional_expectation(x_pow(2), fam, Rational(1), Rational(3));
    CHECK(at == from_x_coeffs({RatFunc(2), RatFunc(), RatFunc(1)}));
    CHECK_THROWS_AS((void)conditional_expectation(x_pow(2), fam, Rational(3), Rational(1)),
                    TimeOrderViolation);
}

TEST_CASE("the operator is linear") {
    const auto fam = build_family(MomentModel::gamma_process(8), 4);
    std::mt19937 rng(9);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<RatFunc> ca, cb;
        for (int k = 0; k <= 4; ++k) {
            ca.emplace_back(oracles::rand_poly(rng, {Var::t}, 2, 2));
            cb.emplace_back(oracles::rand_poly(rng, {Var::t}, 2, 2));
        }
        const SpaceTimePoly a = from_x_coeffs(ca), b = from_x_coeffs(cb);
        CHECK(conditional_expectation(a + b, fam) ==
              conditional_expectation(a, fam) + conditional_expectation(b, fam));
    }
}

TEST_CASE("certification rejects non-martingale members") {
    const auto wiener = MomentModel::wiener(4);
    // x^2 is not a martingale for the Wiener moments
    std::vector<SpaceTimePoly> bad{SpaceTimePoly::constant(RatFunc(1)), x_pow(1), x_pow(2)};
    try {
        (void)certify_family(wiener, bad, "user");
        FAIL("expected CertificationFailed");
    } catch (const CertificationFailed& e) {
        CHECK(e.order == 2);
        CHECK(e.residual.find("t") != std::string::npos);
    }
}

TEST_CASE("user families are renormalized to monic and certified") {
    const auto wiener = MomentModel::wiener(6);
    auto fam0 = build_family(wiener, 3);
    std::vector<SpaceTimePoly> scaled;
    for (int n = 0; n <= 3; ++n) {
        SpaceTimePoly m = fam0.member(n);
        m.scale(RatFunc(Rational(5)));
        scaled.push_back(std::move(m));
    }
    const auto fam = certify_family(wiener, std::move(scaled), "user");
    CHECK(fam.canonical()); // same members after normalization
    CHECK(fam.label() == "user");
    for (int n = 0; n <= 3; ++n) CHECK(fam.member(n) == fam0.member(n));
}

TEST_CASE("second and cross moments") {
    const auto wiener = build_family(MomentModel::wiener(8), 4);
    CHECK(second_moment(wiener, 0) == RatFunc(1));
    CHECK(second_moment(wiener, 1) == RatFunc(t));
    CHECK(second_moment(wiener, 2) == RatFunc(MPoly(2) * t * t));
    CHECK(cross_moment(wiener, 1, 2).is_zero());

    const auto poisson = build_family(MomentModel::poisson(1, 8), 4);
    CHECK(second_moment(poisson, 2) == RatFunc(t + MPoly(2) * t * t));
    CHECK(cross_moment(poisson, 1, 2) == RatFunc(t));
    CHECK(cross_moment(poisson, 2, 1) == RatFunc(t));

    const auto gamma = build_family(MomentModel::gamma_process(8), 4);
    CHECK(cross_moment(gamma, 1, 2) == RatFunc(MPoly(2) * t));

    // capacity contract
    const auto small = build_family(MomentModel::wiener(4), 4);
    CHECK_THROWS_AS((void)second_moment(small, 3), InsufficientMoments);
    CHECK_THROWS_AS((void)cross_moment(small, 2, 3), InsufficientMoments);

    // cross(n, n) agrees with the norm and E M_n = 0
    for (int n = 0; n <= 4; ++n) {
        CHECK(cross_moment(wiener, n, n) == second_moment(wiener, n));
        CHECK(expectation(wiener.model(), wiener.member(n)) ==
              (n == 0 ? RatFunc(1) : RatFunc()));
    }
}

TEST_CASE("product linearization") {
    const auto fam = build_family(MomentModel::wiener(8), 4);
    const auto l11 = linearize_product(fam, 1, 1);
    REQUIRE(l11.delta.size() == 3);
    CHECK(l11.delta[0] == RatFunc(t));
    CHECK(l11.delta[1] == RatFunc());
    CHECK(l11.delta[2] == RatFunc(1));

    const auto l12 = linearize_product(fam, 1, 2);
    REQUIRE(l12.delta.size() == 4);
    CHECK(l12.delta[0] == RatFunc());
    CHECK(l12.delta[1] == RatFunc(MPoly(2) * t));
    CHECK(l12.delta[2] == RatFunc());
    CHECK(l12.delta[3] == RatFunc(1));

    const auto l04 = linearize_product(fam, 0, 4);
    for (int k = 0; k <= 4; ++k)
        CHECK(l04.delta[static_cast<std::size_t>(k)] == (k == 4 ? RatFunc(1) : RatFunc()));

    CHECK_THROWS_AS((void)linearize_product(fam, 2, 3), OrderOutOfRange);
}

TEST_CASE("iterated conditioning: gaussian covariance example") {
    const auto fam = build_family(MomentModel::wiener(8), 4);
    // E(X_2 X_3 | F_1) = X_1^2 + 1 = M_2(1) + 2 M_0 (since M_2 = x^2 - t at t=1)
    const auto it = iterated_conditional(fam, Rational(1), {Rational(2), Rational(3)}, {1, 1});
    REQUIRE(it.phi.size() == 3);
    CHECK(it.phi[0] == Rational(2));
    CHECK(it.phi[1] == Rational(0));
    CHECK(it.phi[2] == Rational(1));

    // single factor: the members are martingales, so conditioning is a no-op
    const auto single = iterated_conditional(fam, Rational(1, 2), {Rational(2)}, {2});
    CHECK(single.phi == std::vector<Rational>{Rational(0), Rational(0), Rational(1)});
}

TEST_CASE("iterated conditioning: tower property at rational times") {
    for (const auto* spec : {"wiener", "poisson:1", "gamma"}) {
        const auto fam = build_family(MomentModel::from_spec(spec, 8), 4);
        const std::vector<Rational> times{Rational(2), Rational(3)};
        const std::vector<int> orders{1, 2};
        const auto at_s = iterated_conditional(fam, Rational(1), times, orders);
        // conditioning the expansion further down leaves coefficients fixed,
        // so the direct run to an earlier time must produce the same phi
        const auto at_earlier = iterated_conditional(fam, Rational(1, 2), times, orders);
        CHECK(at_s.phi == at_earlier.phi);
        // numeric tower check: evaluate E(sum phi_j M_j(s) | F_s') directly
        SpaceTimePoly expanded;
        for (std::size_t j = 0; j < at_s.phi.size(); ++j) {
            SpaceTimePoly part = fam.member(static_cast<int>(j));
            part.scale(RatFunc(at_s.phi[j]));
            expanded += part;
        }
        const auto dropped =
            conditional_expectation(expanded, fam, Rational(1, 2), Rational(1));
        SpaceTimePoly direct;
        for (std::size_t j = 0; j < at_earlier.phi.size(); ++j) {
            SpaceTimePoly part =
                fam.member(static_cast<int>(j)).subst_time(Var::t, Rational(1, 2));
            part.scale(RatFunc(at_earlier.phi[j]));
            direct += part;
        }
        CHECK(dropped == direct);
    }
}

TEST_CASE("iterated conditioning guards") {
    const auto fam = build_family(MomentModel::wiener(8), 4);
    CHECK_THROWS_AS(
        (void)iterated_conditional(fam, Rational(2), {Rational(1)}, {1}),
        TimeOrderViolation);
    CHECK_THROWS_AS(
        (void)iterated_conditional(fam, Rational(1), {Rational(3), Rational(2)}, {1, 1}),
        TimeOrderViolation);
    CHECK_THROWS_AS(
        (void)iterated_conditional(fam, Rational(1), {Rational(2), Rational(3)}, {2, 3}),
        InsufficientMoments);
}

TEST_CASE("family JSON round trip is bit exact") {
    for (const auto* spec : {"wiener", "poisson:1/2", "gamma", "bernoulli-jumps:1"}) {
        const auto model = MomentModel::from_spec(spec, 8);
        const auto fam = build_family(model, 4);
        const auto text = family_to_json(fam);
        const auto back = family_from_json(model, text);
        for (int n = 0; n <= 4; ++n) CHECK(back.member(n) == fam.member(n));
        CHECK(back.canonical());
        CHECK(family_to_json(back) == text);
    }
    // rational-function coefficients survive the object encoding
    const auto rat_model = MomentModel::from_moments(
        "rat", {RatFunc(), RatFunc(t, t + MPoly(1))});
    const auto rfam = build_family(rat_model, 2);
    const auto text = family_to_json(rfam);
    const auto back = family_from_json(rat_model, text);
    for (int n = 0; n <= 2; ++n) CHECK(back.member(n) == rfam.member(n));

    const auto wiener_model = MomentModel::wiener(4);
    CHECK_THROWS_AS((void)family_from_json(wiener_model, family_to_json(rfam)),
                    InvalidParameter);
}

TEST_CASE("m_n monotonicity is enforced at construction") {
    // g: mean 0, variance t^2/(t+1)... pick variance shrinking in time:
    // g2 = t/(t^2+1) rises then falls; feasible at grid times but m_1 = g2
    // decreases between t=1 and t=2, so the family must be rejected.
    const RatFunc g2(t, t * t + MPoly(1));
    const auto model = MomentModel::from_moments("shrink", {RatFunc(), g2});
    CHECK_THROWS_AS((void)build_family(model, 2), CertificationFailed);
}
