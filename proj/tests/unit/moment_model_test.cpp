#include <doctest.h>

#include "oracles.hpp"
#include "polymart/moment_model.hpp"

using namespace polymart;

namespace {

Rational at_time(const RatFunc& f, const Rational& tau) {
    std::array<Rational, kVarCount> pt{};
    pt[static_cast<std::size_t>(Var::t)] = tau;
    return f.eval(pt);
}

Rational at_times(const RatFunc& f, const Rational& sv, const Rational& tv) {
    std::array<Rational, kVarCount> pt{};
    pt[static_cast<std::size_t>(Var::s)] = sv;
    pt[static_cast<std::size_t>(Var::t)] = tv;
    return f.eval(pt);
}

const MPoly t = MPoly::variable(Var::t);

} // namespace

TEST_CASE("wiener moments match the Gaussian closed form") {
    const auto m = MomentModel::wiener(8);
    CHECK(m.g(0) == RatFunc(1));
    CHECK(m.g(2) == RatFunc(t));
    CHECK(m.g(4) == RatFunc(MPoly(3) * t * t));
    for (const Rational tau : {Rational(1, 2), Rational(2), Rational(7, 3)})
        for (int n = 0; n <= 8; ++n)
            CHECK(m.g_at(n, tau) == oracles::gaussian_moment(n, tau));
}

TEST_CASE("poisson moments match the Touchard oracle") {
    for (const Rational lambda : {Rational(1), Rational(1, 2), Rational(3)}) {
        const auto m = MomentModel::poisson(lambda, 6);
        for (const Rational tau : {Rational(1), Rational(5, 4)})
            for (int n = 0; n <= 6; ++n)
                CHECK(m.g_at(n, tau) == oracles::touchard_moment(n, lambda * tau));
    }
    const auto p1 = MomentModel::poisson(1, 3);
    CHECK(p1.g(1) == RatFunc(t));
    CHECK(p1.g(2) == RatFunc(t + t * t));
    CHECK(p1.g(3) == RatFunc(t + MPoly(3) * t * t + t * t * t));
}

TEST_CASE("gamma moments are rising factorials") {
    const auto m = MomentModel::gamma_process(6);
    CHECK(m.g(1) == RatFunc(t));
    CHECK(m.g(2) == RatFunc(t * t + t));
    for (const Rational tau : {Rational(1, 2), Rational(3)})
        for (int n = 0; n <= 6; ++n)
            CHECK(m.g_at(n, tau) == oracles::rising_factorial(tau, n));
}

TEST_CASE("compound poisson +-1 moments match the mgf-series oracle") {
    const Rational lambda(3, 2);
    const auto m = MomentModel::bernoulli_jumps(lambda, 8);
    for (const Rational tau : {Rational(1), Rational(2, 3)}) {
        // cumulants: kappa_n = lambda tau for even n, 0 for odd
        std::vector<Rational> kappa(8, Rational(0));
        for (int n = 2; n <= 8; n += 2) kappa[static_cast<std::size_t>(n - 1)] = lambda * tau;
        const auto mm = oracles::moments_from_cumulants_mgf(kappa, 8);
        for (int n = 0; n <= 8; ++n) CHECK(m.g_at(n, tau) == mm[static_cast<std::size_t>(n)]);
    }
    // odd moments vanish by symmetry
    for (int n = 1; n <= 8; n += 2) CHECK(m.g(n).is_zero());
}

TEST_CASE("every builtin agrees with the mgf-series route") {
    const auto check_model = [](const MomentModel& m, const std::vector<Rational>& kappa_at_2) {
        const auto mm = oracles::moments_from_cumulants_mgf(kappa_at_2, m.max_order());
        for (int n = 0; n <= m.max_order(); ++n)
            CHECK(m.g_at(n, 2) == mm[static_cast<std::size_t>(n)]);
    };
    {
        std::vector<Rational> k(6, Rational(0));
        k[1] = 2; // variance t at t=2
        check_model(MomentModel::wiener(6), k);
    }
    {
        std::vector<Rational> k(6, Rational(2)); // lambda t = 2
        check_model(MomentModel::poisson(1, 6), k);
    }
    {
        std::vector<Rational> k(6);
        for (int n = 1; n <= 6; ++n)
            k[static_cast<std::size_t>(n - 1)] = Rational(factorial(static_cast<unsigned>(n - 1))) * 2;
        check_model(MomentModel::gamma_process(6), k);
    }
}

TEST_CASE("model spec parsing and parameter validation") {
    CHECK(MomentModel::from_spec("poisson:1/2", 4).name() == "poisson:1/2");
    CHECK(MomentModel::from_spec("poisson", 4) == MomentModel::poisson(1, 4));
    CHECK_THROWS_AS((void)MomentModel::from_spec("poisson:0", 4), InvalidParameter);
    CHECK_THROWS_AS((void)MomentModel::from_spec("brown", 4), UnknownModel);
    CHECK_THROWS_AS((void)MomentModel::from_spec("wiener:2", 4), InvalidParameter);
    CHECK_THROWS_AS((void)MomentModel::wiener(1), InvalidParameter);
}

TEST_CASE("validation rejects infeasible and off-origin models") {
    // negative variance
    CHECK_THROWS_AS((void)MomentModel::from_moments("bad", {RatFunc(), RatFunc(-t)}),
                    MomentInfeasible);
    // moment sequence with det [[1,g1],[g1,g2]] <= 0 at some grid point
    CHECK_THROWS_AS((void)MomentModel::from_moments("bad", {RatFunc(t), RatFunc(t * t)}),
                    MomentInfeasible);
    // does not start at the origin
    CHECK_THROWS_AS((void)MomentModel::from_moments("off", {RatFunc(t + MPoly(1)), RatFunc(MPoly(9) * t)}),
                    NotAtOrigin);
    // feasible example passes
    const auto ok = MomentModel::from_moments("ok", {RatFunc(), RatFunc(t * t)});
    CHECK(ok.max_order() == 2);
    // empty grid skips feasibility (degenerate models for algebra tests)
    const auto zero = MomentModel::from_moments("zero", {RatFunc(), RatFunc()}, {});
    CHECK(zero.g(2).is_zero());
}

TEST_CASE("moment functions must be univariate in t") {
    CHECK_THROWS_AS((void)MomentModel::from_moments("bad", {RatFunc(MPoly::variable(Var::s))}),
                    InvalidParameter);
}

TEST_CASE("increment moments: wiener closed forms") {
    const auto m = MomentModel::wiener(6);
    const auto inc = increment_moments(m, 6);
    const MPoly s = MPoly::variable(Var::s);
    CHECK(inc.gamma(0) == RatFunc(1));
    CHECK(inc.gamma(1).is_zero());
    CHECK(inc.gamma(2) == RatFunc(t - s));
    CHECK(inc.gamma(3).is_zero());
    CHECK(inc.gamma(4) == RatFunc(MPoly(3) * (t - s) * (t - s)));
    // Gaussian increment oracle at rational times
    for (int n = 0; n <= 6; ++n)
        CHECK(inc.gamma_at(n, Rational(1, 2), Rational(3)) ==
              oracles::gaussian_moment(n, Rational(5, 2)));
}

TEST_CASE("increment moments match the mgf-ratio oracle on all builtins") {
    // moments of X_t - X_s have mgf M_t(z)/M_s(z); series division gives an
    // independent route to gamma_n(s, t).
    const Rational sv(3, 4), tv(2);
    const auto run = [&](const MomentModel& m, const std::vector<Rational>& kappa_unit) {
        const int order = m.max_order();
        auto scale_kappa = [&](const Rational& time) {
            std::vector<Rational> k(kappa_unit.size());
            for (std::size_t i = 0; i < k.size(); ++i) k[i] = kappa_unit[i] * time;
            return k;
        };
        const auto mt = oracles::moments_from_cumulants_mgf(scale_kappa(tv), order);
        const auto ms = oracles::moments_from_cumulants_mgf(scale_kappa(sv), order);
        oracles::Series at(mt.size()), as(ms.size());
        for (std::size_t n = 0; n < mt.size(); ++n) {
            const Rational f = Rational(factorial(static_cast<unsigned>(n)));
            at[n] = mt[n] / f;
            as[n] = ms[n] / f;
        }
        const auto ratio = oracles::series_div(at, as, at.size());
        const auto inc = increment_moments(m, order);
        for (int n = 0; n <= order; ++n)
            CHECK(inc.gamma_at(n, sv, tv) ==
                  ratio[static_cast<std::size_t>(n)] * Rational(factorial(static_cast<unsigned>(n))));
    };
    run(MomentModel::wiener(6), {Rational(0), Rational(1), Rational(0), Rational(0), Rational(0), Rational(0)});
    run(MomentModel::poisson(Rational(1, 2), 6),
        {Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1, 2)});
    {
        std::vector<Rational> k(6);
        for (int n = 1; n <= 6; ++n)
            k[static_cast<std::size_t>(n - 1)] = Rational(factorial(static_cast<unsigned>(n - 1)));
        run(MomentModel::gamma_process(6), k);
    }
    {
        std::vector<Rational> k(6, Rational(0));
        for (int n = 2; n <= 6; n += 2) k[static_cast<std::size_t>(n - 1)] = Rational(2);
        run(MomentModel::bernoulli_jumps(2, 6), k);
    }
}

TEST_CASE("increment moments vanish on the diagonal and respect time order") {
    const auto m = MomentModel::poisson(1, 5);
    const auto inc = increment_moments(m, 5);
    const MPoly tv = MPoly::variable(Var::t);
    for (int n = 1; n <= 5; ++n) CHECK(inc.gamma(n).subst(Var::s, tv).is_zero());
    for (int n = 1; n <= 5; ++n) CHECK(inc.gamma_at(n, Rational(2), Rational(2)) == 0);
    CHECK_THROWS_AS((void)inc.gamma_at(2, Rational(3), Rational(2)), TimeOrderViolation);
    CHECK_THROWS_AS((void)increment_moments(m, 6), OrderOutOfRange);
}

TEST_CASE("levy check passes every builtin") {
    for (const auto* spec : {"wiener", "poisson:1", "gamma", "bernoulli-jumps:1"}) {
        const auto m = MomentModel::from_spec(spec, 8);
        const auto rep = levy_check(m, 8);
        CHECK(rep.verdict == Verdict::pass);
        for (const auto& [name, value] : rep.residuals) CHECK(value == "0");
    }
}

TEST_CASE("levy check fails the non-homogeneous synthetic model") {
    const auto m = MomentModel::from_moments("synthetic", {RatFunc(), RatFunc(t * t)});
    const auto rep = levy_check(m, 2);
    CHECK(rep.verdict == Verdict::fail);
    REQUIRE(rep.find_residual("n=2") != nullptr);
    CHECK(*rep.find_residual("n=2") == "2*t*s");
    CHECK(*rep.find_residual("n=1") == "0");
    // the residual magnitude is symmetric under swapping the two times
    const auto inc = increment_moments(m, 2);
    const RatFunc res = inc.gamma(2).subst(Var::t, MPoly::variable(Var::s) + t) - m.g(2);
    CHECK(at_times(res, Rational(2), Rational(5)) == at_times(res, Rational(5), Rational(2)));
    CHECK(at_times(res, Rational(2), Rational(5)) == Rational(20));
}

TEST_CASE("levy check demands polynomial moment functions") {
    const RatFunc g1;
    const RatFunc g2 = RatFunc(t, t + MPoly(1)); // t/(t+1): feasible, not polynomial
    const auto m = MomentModel::from_moments("rat", {g1, g2});
    CHECK_THROWS_AS((void)levy_check(m, 2), NonPolynomialTime);
    CHECK(at_time(m.g(2), 1) == Rational(1, 2));
}
