#include "polymart/ratfunc.hpp"

namespace polymart {

RatFunc::RatFunc(MPoly num, MPoly den) : num_(std::move(num)), den_(std::move(den)) { reduce(); }

void RatFunc::reduce() {
    if (den_.is_zero()) throw DivisionByZeroFunction();
    if (num_.is_zero()) {
        den_ = MPoly(1);
        return;
    }
    if (!den_.is_one()) {
        const MPoly g = gcd(num_, den_);
        if (!g.is_one()) {
            num_ = exact_divide(num_, g);
            den_ = exact_divide(den_, g);
        }
    }
    const Rational lc = den_.leading_coeff();
    if (lc != 1) {
        const Rational inv = 1 / lc;
        num_.scale(inv);
        den_.scale(inv);
    }
}

Rational RatFunc::constant_value() const {
    if (!is_constant()) throw std::logic_error("constant_value on non-constant rational function");
    return num_.constant_value();
}

const MPoly& RatFunc::poly() const {
    if (!is_polynomial()) throw std::logic_error("poly() on a proper rational function");
    return num_;
}

RatFunc RatFunc::operator-() const {
    RatFunc r(*this);
    r.num_ = -r.num_;
    return r;
}

RatFunc& RatFunc::operator+=(const RatFunc& o) {
    num_ = num_ * o.den_ + o.num_ * den_;
    den_ = den_ * o.den_;
    reduce();
    return *this;
}

RatFunc& RatFunc::operator-=(const RatFunc& o) { return *this += -o; }

RatFunc& RatFunc::operator*=(const RatFunc& o) {
    num_ = num_ * o.num_;
    den_ = den_ * o.den_;
    reduce();
    return *this;
}

RatFunc& RatFunc::operator/=(const RatFunc& o) {
    if (o.is_zero()) throw DivisionByZeroFunction();
    num_ = num_ * o.den_;
    den_ = den_ * o.num_;
    reduce();
    return *this;
}

RatFunc operator+(RatFunc a, const RatFunc& b) { return a += b; }
RatFunc operator-(RatFunc a, const RatFunc& b) { return a -= b; }
RatFunc operator*(RatFunc a, const RatFunc& b) { return a *= b; }
RatFunc operator/(RatFunc a, const RatFunc& b) { return a /= b; }

namespace {

RatFunc compose(const MPoly& p, Var v, const RatFunc& r) {
    if (!p.uses(v)) return RatFunc(p);
    const auto by_power = p.coeffs_wrt(v);
    RatFunc acc;
    for (auto it = by_power.rbegin(); it != by_power.rend(); ++it) acc = acc * r + RatFunc(*it);
    return acc;
}

} // namespace

RatFunc RatFunc::subst(Var v, const RatFunc& r) const {
    if (!uses(v)) return *this;
    return compose(num_, v, r) / compose(den_, v, r);
}

Rational RatFunc::eval(const std::array<Rational, kVarCount>& point) const {
    const Rational d = den_.eval(point);
    if (d == 0) throw DegenerateAtPoint("denominator vanishes at evaluation point: " + den_.str());
    return num_.eval(point) / d;
}

RatFunc RatFunc::pow(int e) const {
    if (e < 0) {
        if (is_zero()) throw DivisionByZeroFunction();
        return RatFunc(1) / pow(-e);
    }
    RatFunc acc(1);
    RatFunc base(*this);
    unsigned k = static_cast<unsigned>(e);
    while (k != 0) {
        if (k & 1u) acc *= base;
        base *= base;
        k >>= 1;
    }
    return acc;
}

std::string RatFunc::str() const {
    if (is_polynomial()) return num_.str();
    return "(" + num_.str() + ")/(" + den_.str() + ")";
}

} // namespace polymart
