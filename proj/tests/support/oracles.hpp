#pragma once

// Independent reference implementations used only by tests. Each oracle
// reaches a value by a different route than the library (series arithmetic,
// classical recurrences, closed forms) so agreement is meaningful.

#include <random>
#include <vector>

#include "polymart/martingale.hpp"
#include "polymart/rational.hpp"

namespace oracles {

using polymart::BigInt;
using polymart::MPoly;
using polymart::RatFunc;
using polymart::Rational;
using polymart::SpaceTimePoly;
using polymart::Var;

// --- dense power series with rational coefficients, a_k = coeff of z^k ----

using Series = std::vector<Rational>;

inline Series series_mul(const Series& a, const Series& b, std::size_t len) {
    Series c(len, Rational(0));
    for (std::size_t i = 0; i < a.size() && i < len; ++i)
        for (std::size_t j = 0; j < b.size() && i + j < len; ++j) c[i + j] += a[i] * b[j];
    return c;
}

// exp of a series with zero constant term: b' = a' b.
inline Series series_exp(const Series& a, std::size_t len) {
    Series b(len, Rational(0));
    b[0] = 1;
    for (std::size_t n = 1; n < len; ++n) {
        Rational acc = 0;
        for (std::size_t k = 1; k <= n && k < a.size(); ++k)
            acc += Rational(k) * a[k] * b[n - k];
        b[n] = acc / Rational(n);
    }
    return b;
}

// a / b with b[0] = 1.
inline Series series_div(const Series& a, const Series& b, std::size_t len) {
    Series c(len, Rational(0));
    for (std::size_t n = 0; n < len; ++n) {
        Rational acc = n < a.size() ? a[n] : Rational(0);
        for (std::size_t k = 1; k <= n && k < b.size(); ++k) acc -= b[k] * c[n - k];
        c[n] = acc;
    }
    return c;
}

// Moments from a cumulant sequence via the moment generating function:
// M(z) = exp(sum kappa_n z^n / n!), m_n = n! [z^n] M(z). The library uses
// the binomial recursion instead, so this is an independent route.
inline std::vector<Rational> moments_from_cumulants_mgf(const std::vector<Rational>& kappa,
                                                        int order) {
    Series a(static_cast<std::size_t>(order) + 1, Rational(0));
    for (int n = 1; n <= order; ++n)
        a[static_cast<std::size_t>(n)] =
            kappa[static_cast<std::size_t>(n - 1)] / Rational(polymart::factorial(static_cast<unsigned>(n)));
    const Series m = series_exp(a, a.size());
    std::vector<Rational> out(m.size());
    for (std::size_t n = 0; n < m.size(); ++n)
        out[n] = m[n] * Rational(polymart::factorial(static_cast<unsigned>(n)));
    return out;
}

// --- classical moment formulas ----------------------------------------------

inline Rational gaussian_moment(int n, const Rational& variance) {
    if (n % 2 != 0) return 0;
    return Rational(polymart::double_factorial(n - 1)) * polymart::pow(variance, n / 2);
}

inline BigInt stirling2(int n, int k) {
    if (n == 0 && k == 0) return 1;
    if (n == 0 || k == 0 || k > n) return 0;
    return BigInt(k) * stirling2(n - 1, k) + stirling2(n - 1, k - 1);
}

// Poisson(mu) raw moment: Touchard polynomial sum_k S2(n,k) mu^k.
inline Rational touchard_moment(int n, const Rational& mu) {
    Rational acc = 0;
    for (int k = 0; k <= n; ++k) acc += Rational(stirling2(n, k)) * polymart::pow(mu, k);
    return acc;
}

// Gamma(shape a, rate 1) raw moment: rising factorial a(a+1)...(a+n-1).
inline Rational rising_factorial(const Rational& a, int n) {
    Rational acc = 1;
    for (int i = 0; i < n; ++i) acc *= a + Rational(i);
    return acc;
}

// --- classical orthogonal families ------------------------------------------

// Monic probabilists' Hermite with variance v(t): p_{k+1} = x p_k - k v p_{k-1}.
inline std::vector<SpaceTimePoly> monic_hermite(int count, const RatFunc& v) {
    std::vector<SpaceTimePoly> p;
    p.push_back(SpaceTimePoly::constant(RatFunc(1)));
    if (count > 0) p.push_back(SpaceTimePoly::monomial(1));
    for (int k = 1; k < count; ++k) {
        SpaceTimePoly next = SpaceTimePoly::monomial(1) * p.back();
        SpaceTimePoly prev = p[static_cast<std::size_t>(k - 1)];
        prev.scale(RatFunc(Rational(k)) * v);
        next -= prev;
        p.push_back(std::move(next));
    }
    return p;
}

// Monic Charlier with mean mu(t): p_{k+1} = (x - k - mu) p_k - k mu p_{k-1}.
inline std::vector<SpaceTimePoly> monic_charlier(int count, const RatFunc& mu) {
    std::vector<SpaceTimePoly> p;
    p.push_back(SpaceTimePoly::constant(RatFunc(1)));
    if (count > 0)
        p.push_back(SpaceTimePoly::monomial(1) - SpaceTimePoly::constant(mu));
    for (int k = 1; k < count; ++k) {
        SpaceTimePoly shift = SpaceTimePoly::monomial(1);
        shift -= SpaceTimePoly::constant(RatFunc(Rational(k)) + mu);
        SpaceTimePoly next = shift * p.back();
        SpaceTimePoly prev = p[static_cast<std::size_t>(k - 1)];
        prev.scale(RatFunc(Rational(k)) * mu);
        next -= prev;
        p.push_back(std::move(next));
    }
    return p;
}

// Sequential Gram-Schmidt on 1, x, x^2, ... against a rational moment
// sequence nu_0..nu_2K; returns monic orthogonal polynomials as coefficient
// rows (ascending powers). Direct projections, no determinants.
inline std::vector<std::vector<Rational>> gram_schmidt(const std::vector<Rational>& nu, int count) {
    auto inner = [&](const std::vector<Rational>& a, const std::vector<Rational>& b) {
        Rational acc = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) acc += a[i] * b[j] * nu[i + j];
        return acc;
    };
    std::vector<std::vector<Rational>> p;
    for (int k = 0; k <= count; ++k) {
        std::vector<Rational> cur(static_cast<std::size_t>(k) + 1, Rational(0));
        cur.back() = 1;
        for (int j = 0; j < k; ++j) {
            const Rational coef = inner(cur, p[static_cast<std::size_t>(j)]) /
                                  inner(p[static_cast<std::size_t>(j)], p[static_cast<std::size_t>(j)]);
            for (std::size_t i = 0; i < p[static_cast<std::size_t>(j)].size(); ++i)
                cur[i] -= coef * p[static_cast<std::size_t>(j)][i];
        }
        p.push_back(std::move(cur));
    }
    return p;
}

// --- random generators for property tests ------------------------------------

inline Rational rand_rational(std::mt19937& rng) {
    std::uniform_int_distribution<int> num(-9, 9);
    std::uniform_int_distribution<int> den(1, 9);
    return Rational(num(rng), den(rng));
}

inline MPoly rand_poly(std::mt19937& rng, const std::vector<Var>& vars, int max_terms = 4,
                       int max_exp = 3) {
    std::uniform_int_distribution<int> terms(0, max_terms);
    std::uniform_int_distribution<int> expd(0, max_exp);
    MPoly p;
    const int n = terms(rng);
    for (int i = 0; i < n; ++i) {
        MPoly term(rand_rational(rng));
        for (Var v : vars) term *= MPoly::variable(v, expd(rng));
        p += term;
    }
    return p;
}

} // namespace oracles
