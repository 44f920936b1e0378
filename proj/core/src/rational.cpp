#include "polymart/rational.hpp"

#include <cctype>

namespace polymart {

namespace {

bool is_integer_token(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

} // namespace

Rational parse_rational(const std::string& text) {
    const auto slash = text.find('/');
    if (slash == std::string::npos) {
        if (!is_integer_token(text))
            throw InvalidParameter("not a rational literal: '" + text + "'");
        return Rational(BigInt(text));
    }
    const std::string p = text.substr(0, slash);
    const std::string q = text.substr(slash + 1);
    if (!is_integer_token(p) || !is_integer_token(q))
        throw InvalidParameter("not a rational literal: '" + text + "'");
    const BigInt denom(q);
    if (denom == 0)
        throw InvalidParameter("zero denominator in rational literal: '" + text + "'");
    return Rational(BigInt(p), denom);
}

Rational pow(const Rational& base, int exp) {
    if (exp < 0) {
        if (base == 0) throw InvalidParameter("0 cannot be raised to a negative power");
        return 1 / pow(base, -exp);
    }
    Rational acc = 1;
    Rational b = base;
    unsigned e = static_cast<unsigned>(exp);
    while (e != 0) {
        if (e & 1u) acc *= b;
        b *= b;
        e >>= 1;
    }
    return acc;
}

BigInt factorial(unsigned n) {
    BigInt acc = 1;
    for (unsigned k = 2; k <= n; ++k) acc *= k;
    return acc;
}

BigInt double_factorial(int n) {
    if (n <= 0) return 1;
    BigInt acc = 1;
    for (int k = n; k > 1; k -= 2) acc *= k;
    return acc;
}

BigInt binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt acc = 1;
    for (unsigned i = 1; i <= k; ++i) {
        acc *= n - k + i;
        acc /= i; // exact at every step: acc is C(n-k+i, i)
    }
    return acc;
}

} // namespace polymart
