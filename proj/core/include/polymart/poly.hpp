#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "polymart/rational.hpp"

namespace polymart {

// The symbolic layer works over a fixed six-variable ring: three time symbols
// and the values of the first-moment function at those times. Everything the
// library proves symbolically lives in Q[t, s, u, m_s, m_t, m_u].
enum class Var : std::uint8_t { t = 0, s = 1, u = 2, ms = 3, mt = 4, mu = 5 };

inline constexpr std::size_t kVarCount = 6;

std::string_view var_name(Var v);

struct Monomial {
    std::array<std::uint16_t, kVarCount> exp{};

    friend constexpr auto operator<=>(const Monomial&, const Monomial&) = default;

    int degree(Var v) const { return exp[static_cast<std::size_t>(v)]; }
    int total_degree() const;
    bool is_unit() const;
    bool divides(const Monomial& m) const;
    Monomial times(const Monomial& m) const;
    Monomial over(const Monomial& m) const; // requires m.divides(*this)
};

// Sparse multivariate polynomial with exact rational coefficients.
// Invariant: terms_ sorted ascending by lex monomial order, no zero
// coefficients, no duplicate monomials. Equality is therefore structural.
class MPoly {
public:
    using Term = std::pair<Monomial, Rational>;

    MPoly() = default;
    MPoly(const Rational& c);
    MPoly(long long c);

    static MPoly variable(Var v, int exp = 1);
    static MPoly term(const Rational& c, Var v, int exp);

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    Rational constant_value() const; // requires is_constant()
    bool is_one() const;

    int degree(Var v) const;
    int total_degree() const;
    bool uses(Var v) const;
    bool is_univariate_in(Var v) const;

    const std::vector<Term>& terms() const { return terms_; }
    const Term& leading_term() const; // lex-largest; requires !is_zero()
    const Rational& leading_coeff() const;

    MPoly& operator+=(const MPoly& o);
    MPoly& operator-=(const MPoly& o);
    MPoly& operator*=(const MPoly& o);
    MPoly operator-() const;

    MPoly& scale(const Rational& c);
    MPoly pow(unsigned e) const;

    friend bool operator==(const MPoly&, const MPoly&) = default;

    MPoly subst(Var v, const MPoly& replacement) const;
    MPoly subst(Var v, const Rational& value) const;
    Rational eval(const std::array<Rational, kVarCount>& point) const;

    // Views as a univariate polynomial in v with coefficients in the
    // remaining variables; ascending, empty for the zero polynomial.
    std::vector<MPoly> coeffs_wrt(Var v) const;
    static MPoly from_coeffs_wrt(Var v, const std::vector<MPoly>& c);

    // Purely univariate access; requires is_univariate_in(v).
    std::vector<Rational> coeffs(Var v) const;
    static MPoly from_coeffs(Var v, const std::vector<Rational>& c);

    std::string str() const;

private:
    std::vector<Term> terms_;

    void add_term(const Monomial& m, const Rational& c);
    friend MPoly term_product(const MPoly& p, const Monomial& m, const Rational& c);
    friend std::optional<MPoly> try_divide(const MPoly& a, const MPoly& b);
};

MPoly operator+(MPoly a, const MPoly& b);
MPoly operator-(MPoly a, const MPoly& b);
MPoly operator*(const MPoly& a, const MPoly& b);

// Exact division: a / b when b divides a, nullopt otherwise. b must be nonzero.
std::optional<MPoly> try_divide(const MPoly& a, const MPoly& b);

// Exact division that must succeed; throws std::logic_error otherwise.
// All call sites rely on a divisibility theorem (Bareiss minors, gcd cofactors).
MPoly exact_divide(const MPoly& a, const MPoly& b);

// Signed rational c such that p/c has coprime integer coefficients and a
// positive leading (lex) coefficient. rational_content(0) = 1.
Rational rational_content(const MPoly& p);
MPoly make_primitive(const MPoly& p);

// Polynomial gcd over Q, normalized like make_primitive. gcd(0,0) = 0.
MPoly gcd(const MPoly& a, const MPoly& b);

} // namespace polymart
