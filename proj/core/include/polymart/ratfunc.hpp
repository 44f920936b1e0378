#pragma once

#include <string>

#include "polymart/errors.hpp"
#include "polymart/poly.hpp"

namespace polymart {

// Rational function in the six symbolic variables, kept in canonical form:
// gcd(num, den) = 1 and den has leading (lex) coefficient 1. The zero
// function is 0/1. Canonical form makes operator== decide equality of the
// underlying functions, which is what every symbolic check in the library
// ultimately calls.
class RatFunc {
public:
    RatFunc() : den_(1) {}
    RatFunc(const Rational& c) : num_(c), den_(1) {}
    RatFunc(long long c) : num_(c), den_(1) {}
    RatFunc(MPoly p) : num_(std::move(p)), den_(1) {}
    RatFunc(MPoly num, MPoly den);

    static RatFunc variable(Var v) { return RatFunc(MPoly::variable(v)); }

    const MPoly& num() const { return num_; }
    const MPoly& den() const { return den_; }

    bool is_zero() const { return num_.is_zero(); }
    bool is_polynomial() const { return den_.is_one(); }
    bool is_constant() const { return num_.is_constant() && den_.is_one(); }
    Rational constant_value() const;

    // Requires is_polynomial().
    const MPoly& poly() const;

    bool uses(Var v) const { return num_.uses(v) || den_.uses(v); }

    RatFunc operator-() const;
    RatFunc& operator+=(const RatFunc& o);
    RatFunc& operator-=(const RatFunc& o);
    RatFunc& operator*=(const RatFunc& o);
    RatFunc& operator/=(const RatFunc& o);

    friend bool operator==(const RatFunc&, const RatFunc&) = default;

    RatFunc subst(Var v, const RatFunc& r) const;
    RatFunc subst(Var v, const MPoly& p) const { return subst(v, RatFunc(p)); }
    RatFunc subst(Var v, const Rational& c) const { return subst(v, RatFunc(c)); }

    // Throws DegenerateAtPoint when the denominator vanishes at the point.
    Rational eval(const std::array<Rational, kVarCount>& point) const;

    RatFunc pow(int e) const;

    std::string str() const;

private:
    MPoly num_;
    MPoly den_;

    void reduce();
};

RatFunc operator+(RatFunc a, const RatFunc& b);
RatFunc operator-(RatFunc a, const RatFunc& b);
RatFunc operator*(RatFunc a, const RatFunc& b);
RatFunc operator/(RatFunc a, const RatFunc& b);

} // namespace polymart
