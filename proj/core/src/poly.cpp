#include "polymart/poly.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace polymart {

std::string_view var_name(Var v) {
    static constexpr std::string_view names[kVarCount] = {"t", "s", "u", "m_s", "m_t", "m_u"};
    return names[static_cast<std::size_t>(v)];
}

int Monomial::total_degree() const {
    int d = 0;
    for (auto e : exp) d += e;
    return d;
}

bool Monomial::is_unit() const {
    for (auto e : exp)
        if (e != 0) return false;
    return true;
}

bool Monomial::divides(const Monomial& m) const {
    for (std::size_t i = 0; i < kVarCount; ++i)
        if (exp[i] > m.exp[i]) return false;
    return true;
}

Monomial Monomial::times(const Monomial& m) const {
    Monomial r;
    for (std::size_t i = 0; i < kVarCount; ++i) {
        const unsigned sum = static_cast<unsigned>(exp[i]) + m.exp[i];
        if (sum > UINT16_MAX) throw std::logic_error("monomial exponent overflow");
        r.exp[i] = static_cast<std::uint16_t>(sum);
    }
    return r;
}

Monomial Monomial::over(const Monomial& m) const {
    Monomial r;
    for (std::size_t i = 0; i < kVarCount; ++i) {
        if (m.exp[i] > exp[i]) throw std::logic_error("monomial division underflow");
        r.exp[i] = static_cast<std::uint16_t>(exp[i] - m.exp[i]);
    }
    return r;
}

MPoly::MPoly(const Rational& c) {
    if (c != 0) terms_.push_back({Monomial{}, c});
}

MPoly::MPoly(long long c) : MPoly(Rational(c)) {}

MPoly MPoly::variable(Var v, int exp) { return term(1, v, exp); }

MPoly MPoly::term(const Rational& c, Var v, int exp) {
    if (exp < 0 || exp > UINT16_MAX) throw std::logic_error("bad exponent");
    MPoly p;
    if (c != 0) {
        Monomial m;
        m.exp[static_cast<std::size_t>(v)] = static_cast<std::uint16_t>(exp);
        p.terms_.push_back({m, c});
    }
    return p;
}

bool MPoly::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_[0].first.is_unit());
}

Rational MPoly::constant_value() const {
    if (terms_.empty()) return 0;
    if (!is_constant()) throw std::logic_error("constant_value on non-constant polynomial");
    return terms_[0].second;
}

bool MPoly::is_one() const { return is_constant() && constant_value() == 1; }

int MPoly::degree(Var v) const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree(v));
    return d;
}

int MPoly::total_degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.total_degree());
    return d;
}

bool MPoly::uses(Var v) const {
    for (const auto& [m, c] : terms_)
        if (m.degree(v) > 0) return true;
    return false;
}

bool MPoly::is_univariate_in(Var v) const {
    for (const auto& [m, c] : terms_)
        for (std::size_t i = 0; i < kVarCount; ++i)
            if (i != static_cast<std::size_t>(v) && m.exp[i] != 0) return false;
    return true;
}

const MPoly::Term& MPoly::leading_term() const {
    if (terms_.empty()) throw std::logic_error("leading_term of zero polynomial");
    return terms_.back();
}

const Rational& MPoly::leading_coeff() const { return leading_term().second; }

void MPoly::add_term(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                               [](const Term& t, const Monomial& key) { return t.first < key; });
    if (it != terms_.end() && it->first == m) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    } else {
        terms_.insert(it, {m, c});
    }
}

MPoly& MPoly::operator+=(const MPoly& o) {
    std::vector<Term> out;
    out.reserve(terms_.size() + o.terms_.size());
    auto a = terms_.cbegin(), ae = terms_.cend();
    auto b = o.terms_.cbegin(), be = o.terms_.cend();
    while (a != ae && b != be) {
        if (a->first < b->first) {
            out.push_back(*a++);
        } else if (b->first < a->first) {
            out.push_back(*b++);
        } else {
            Rational c = a->second + b->second;
            if (c != 0) out.push_back({a->first, std::move(c)});
            ++a;
            ++b;
        }
    }
    out.insert(out.end(), a, ae);
    out.insert(out.end(), b, be);
    terms_ = std::move(out);
    return *this;
}

MPoly& MPoly::operator-=(const MPoly& o) { return *this += -o; }

MPoly MPoly::operator-() const {
    MPoly r(*this);
    for (auto& [m, c] : r.terms_) c = -c;
    return r;
}

// p * (c * m) without re-sorting: multiplying every monomial by m preserves
// the lex order.
MPoly term_product(const MPoly& p, const Monomial& m, const Rational& c) {
    MPoly r;
    if (c == 0) return r;
    r.terms_.reserve(p.terms_.size());
    for (const auto& [pm, pc] : p.terms_) r.terms_.push_back({pm.times(m), pc * c});
    return r;
}

MPoly& MPoly::operator*=(const MPoly& o) {
    if (is_zero() || o.is_zero()) {
        terms_.clear();
        return *this;
    }
    std::map<Monomial, Rational> acc;
    for (const auto& [am, ac] : terms_)
        for (const auto& [bm, bc] : o.terms_) acc[am.times(bm)] += ac * bc;
    terms_.clear();
    terms_.reserve(acc.size());
    for (auto& [m, c] : acc)
        if (c != 0) terms_.push_back({m, std::move(c)});
    return *this;
}

MPoly& MPoly::scale(const Rational& c) {
    if (c == 0) {
        terms_.clear();
    } else {
        for (auto& [m, coeff] : terms_) coeff *= c;
    }
    return *this;
}

MPoly MPoly::pow(unsigned e) const {
    MPoly acc(1);
    MPoly base(*this);
    while (e != 0) {
        if (e & 1u) acc *= base;
        base *= base;
        e >>= 1;
    }
    return acc;
}

MPoly operator+(MPoly a, const MPoly& b) { return a += b; }
MPoly operator-(MPoly a, const MPoly& b) { return a -= b; }
MPoly operator*(const MPoly& a, const MPoly& b) {
    MPoly r(a);
    return r *= b;
}

std::vector<MPoly> MPoly::coeffs_wrt(Var v) const {
    if (is_zero()) return {};
    std::vector<MPoly> out(static_cast<std::size_t>(degree(v)) + 1);
    const auto vi = static_cast<std::size_t>(v);
    for (const auto& [m, c] : terms_) {
        Monomial rest = m;
        const auto k = rest.exp[vi];
        rest.exp[vi] = 0;
        out[k].add_term(rest, c);
    }
    return out;
}

MPoly MPoly::from_coeffs_wrt(Var v, const std::vector<MPoly>& c) {
    MPoly r;
    for (std::size_t k = 0; k < c.size(); ++k)
        r += c[k] * variable(v, static_cast<int>(k));
    return r;
}

std::vector<Rational> MPoly::coeffs(Var v) const {
    if (!is_univariate_in(v)) throw std::logic_error("coeffs: polynomial is not univariate");
    if (is_zero()) return {};
    std::vector<Rational> out(static_cast<std::size_t>(degree(v)) + 1, Rational(0));
    for (const auto& [m, c] : terms_) out[m.degree(v)] = c;
    return out;
}

MPoly MPoly::from_coeffs(Var v, const std::vector<Rational>& c) {
    MPoly r;
    for (std::size_t k = 0; k < c.size(); ++k) r += term(c[k], v, static_cast<int>(k));
    return r;
}

MPoly MPoly::subst(Var v, const MPoly& replacement) const {
    if (!uses(v)) return *this;
    const auto by_power = coeffs_wrt(v);
    // Horner from the top power down.
    MPoly acc;
    for (auto it = by_power.rbegin(); it != by_power.rend(); ++it) acc = acc * replacement + *it;
    return acc;
}

MPoly MPoly::subst(Var v, const Rational& value) const { return subst(v, MPoly(value)); }

Rational MPoly::eval(const std::array<Rational, kVarCount>& point) const {
    Rational acc = 0;
    for (const auto& [m, c] : terms_) {
        Rational v = c;
        for (std::size_t i = 0; i < kVarCount; ++i)
            if (m.exp[i] != 0) v *= polymart::pow(point[i], m.exp[i]);
        acc += v;
    }
    return acc;
}

std::optional<MPoly> try_divide(const MPoly& a, const MPoly& b) {
    if (b.is_zero()) throw std::logic_error("polynomial division by zero");
    MPoly q;
    MPoly r(a);
    const auto& [bm, bc] = b.leading_term();
    while (!r.is_zero()) {
        const auto& [rm, rc] = r.leading_term();
        if (!bm.divides(rm)) return std::nullopt;
        const Monomial qm = rm.over(bm);
        const Rational qc = rc / bc;
        q.add_term(qm, qc);
        r -= term_product(b, qm, qc);
    }
    return q;
}

MPoly exact_divide(const MPoly& a, const MPoly& b) {
    auto q = try_divide(a, b);
    if (!q) throw std::logic_error("exact_divide: not divisible");
    return std::move(*q);
}

Rational rational_content(const MPoly& p) {
    if (p.is_zero()) return 1;
    BigInt g = 0, l = 1;
    for (const auto& [m, c] : p.terms()) {
        g = boost::multiprecision::gcd(g, num(c));
        l = boost::multiprecision::lcm(l, den(c));
    }
    Rational content(g, l);
    if (p.leading_coeff() < 0) content = -content;
    return content;
}

MPoly make_primitive(const MPoly& p) {
    if (p.is_zero()) return p;
    MPoly r(p);
    r.scale(1 / rational_content(p));
    return r;
}

namespace {

// One step of pseudo-division of A by B viewed in Q[rest][v]; repeats until
// deg_v(A) < deg_v(B). Result equals prem(A, B) up to a (harmless) power of
// lc_v(B); callers take primitive parts anyway.
MPoly pseudo_rem(const MPoly& a, const MPoly& b, Var v) {
    auto A = a.coeffs_wrt(v);
    const auto B = b.coeffs_wrt(v);
    const std::size_t db = B.size() - 1;
    const MPoly& lb = B[db];
    auto strip = [](std::vector<MPoly>& c) {
        while (!c.empty() && c.back().is_zero()) c.pop_back();
    };
    strip(A);
    while (A.size() >= B.size() && !A.empty()) {
        const std::size_t shift = A.size() - B.size();
        const MPoly la = A.back();
        for (auto& c : A) c *= lb;
        for (std::size_t j = 0; j < B.size(); ++j) A[j + shift] -= la * B[j];
        strip(A);
    }
    return MPoly::from_coeffs_wrt(v, A);
}

MPoly content_wrt(const MPoly& p, Var v) {
    MPoly c;
    for (const auto& part : p.coeffs_wrt(v)) {
        c = gcd(c, part);
        if (c.is_one()) break;
    }
    return c;
}

// Dense Euclidean chain over Q for operands that are univariate in v.
MPoly univariate_gcd(const MPoly& a, const MPoly& b, Var v) {
    std::vector<Rational> A = a.coeffs(v);
    std::vector<Rational> B = b.coeffs(v);
    auto strip = [](std::vector<Rational>& c) {
        while (!c.empty() && c.back().is_zero()) c.pop_back();
    };
    strip(A);
    strip(B);
    if (A.size() < B.size()) A.swap(B);
    while (!B.empty()) {
        const std::size_t db = B.size() - 1;
        while (A.size() >= B.size()) {
            const Rational q = A.back() / B[db];
            const std::size_t shift = A.size() - 1 - db;
            for (std::size_t j = 0; j < db; ++j) A[j + shift] -= q * B[j];
            A.pop_back();
            strip(A);
        }
        A.swap(B);
    }
    return make_primitive(MPoly::from_coeffs(v, A));
}

// Evaluation probe: freeze every variable except v at a point where both
// operands keep their degree in v. The image of any common factor divides the
// image gcd, so a constant image gcd proves the primitive parts coprime. An
// inconclusive probe falls through to the remainder chain.
bool images_coprime(const MPoly& a, const MPoly& b, Var v) {
    const int da = a.degree(v), db = b.degree(v);
    for (int attempt = 0; attempt < 6; ++attempt) {
        MPoly ia = a, ib = b;
        int k = 0;
        for (std::size_t i = 0; i < kVarCount; ++i) {
            const Var w = static_cast<Var>(i);
            if (w == v || (!ia.uses(w) && !ib.uses(w))) continue;
            const Rational point(2 + 7 * attempt + 3 * k, 1 + attempt % 3);
            ia = ia.subst(w, point);
            ib = ib.subst(w, point);
            ++k;
        }
        if (ia.degree(v) != da || ib.degree(v) != db) continue;
        return univariate_gcd(ia, ib, v).is_constant();
    }
    return false;
}

BigInt int_content(const MPoly& p) {
    BigInt g = 0;
    for (const auto& [m, c] : p.terms()) g = boost::multiprecision::gcd(g, num(c));
    return abs(g);
}

BigInt int_norm(const MPoly& p) {
    BigInt n = 0;
    for (const auto& [m, c] : p.terms()) n = std::max(n, BigInt(abs(num(c))));
    return n;
}

// Balanced remainder in (-xi/2, xi/2].
BigInt smod(const BigInt& c, const BigInt& xi) {
    BigInt r = c % xi;
    if (r < 0) r += xi;
    if (2 * r > xi) r -= xi;
    return r;
}

// Base-xi digit expansion of gamma along v. Inverse of evaluating at xi when
// every digit is balanced below xi/2, which the divisibility check upstream
// makes safe to assume.
std::optional<MPoly> xadic_reconstruct(MPoly gamma, const BigInt& xi, Var v) {
    MPoly g;
    for (int k = 0; !gamma.is_zero(); ++k) {
        if (k > 512) return std::nullopt;
        MPoly digit;
        for (const auto& [m, c] : gamma.terms()) {
            const BigInt d = smod(num(c), xi);
            if (d.is_zero()) continue;
            MPoly part{Rational(d)};
            for (std::size_t i = 0; i < kVarCount; ++i)
                if (m.exp[i] > 0) part *= MPoly::variable(static_cast<Var>(i), m.exp[i]);
            digit += part;
        }
        gamma -= digit;
        gamma.scale(Rational(1) / Rational(xi));
        g += digit * MPoly::variable(v, k);
    }
    return g;
}

// xi-adic heuristic Z-gcd (evaluate at a large integer, recurse, lift the
// digits back). Divisibility of both inputs by the candidate is verified at
// every level, so a returned value is always a genuine common divisor; a
// nullopt sends the caller to the remainder chain.
std::optional<MPoly> heu_gcd_z(const MPoly& a0, const MPoly& b0, int depth) {
    if (depth > 8) return std::nullopt;
    if (a0.is_constant() || b0.is_constant())
        return MPoly(Rational(boost::multiprecision::gcd(int_content(a0), int_content(b0))));
    const BigInt cg = boost::multiprecision::gcd(int_content(a0), int_content(b0));
    const MPoly a = make_primitive(a0);
    const MPoly b = make_primitive(b0);

    std::optional<Var> common;
    for (std::size_t i = 0; i < kVarCount; ++i) {
        const Var w = static_cast<Var>(i);
        if (a.uses(w) && b.uses(w)) { common = w; break; }
    }
    // No shared variable: the primitive parts are coprime.
    if (!common) return MPoly(Rational(cg));
    const Var v = *common;

    const BigInt na = int_norm(a), nb = int_norm(b);
    BigInt xi = 2 * (na < nb ? na : nb) + 29;
    for (int attempt = 0; attempt < 6; ++attempt) {
        const auto gamma = heu_gcd_z(a.subst(v, Rational(xi)), b.subst(v, Rational(xi)), depth + 1);
        if (gamma && !gamma->is_zero()) {
            if (auto lifted = xadic_reconstruct(*gamma, xi, v)) {
                const MPoly cand = make_primitive(*lifted);
                if (try_divide(a, cand) && try_divide(b, cand))
                    return MPoly(Rational(cg)) * cand;
            }
        }
        xi = xi * 6 + 17;
    }
    return std::nullopt;
}

std::optional<Var> first_used_var(const MPoly& a, const MPoly& b) {
    for (std::size_t i = 0; i < kVarCount; ++i) {
        const Var v = static_cast<Var>(i);
        if (a.uses(v) || b.uses(v)) return v;
    }
    return std::nullopt;
}

} // namespace

// Primitive PRS gcd, recursing through the variables. Contents are split off
// in the main variable, the primitive parts run a pseudo-remainder chain, and
// every intermediate result is renormalized to keep coefficients small.
// Monomial operands, divisibility, univariate operands, and provably coprime
// operands are dispatched before the chain; elimination workloads are
// dominated by the coprime case, which the evaluation probe settles in one
// univariate pass.
MPoly gcd(const MPoly& a, const MPoly& b) {
    if (a.is_zero()) return make_primitive(b);
    if (b.is_zero()) return make_primitive(a);
    if (a.is_constant() || b.is_constant()) return MPoly(1);

    // A single-term operand pins the gcd to a bare monomial.
    if (a.terms().size() == 1 || b.terms().size() == 1) {
        const MPoly& mono = a.terms().size() == 1 ? a : b;
        const MPoly& rest = a.terms().size() == 1 ? b : a;
        auto exps = mono.terms().front().first.exp;
        for (const auto& [m, coef] : rest.terms())
            for (std::size_t i = 0; i < kVarCount; ++i)
                exps[i] = std::min(exps[i], m.exp[i]);
        MPoly r(1);
        for (std::size_t i = 0; i < kVarCount; ++i)
            if (exps[i] > 0) r *= MPoly::variable(static_cast<Var>(i), exps[i]);
        return r;
    }
    if (try_divide(a, b)) return make_primitive(b);
    if (try_divide(b, a)) return make_primitive(a);

    const Var v = *first_used_var(a, b);
    if (!a.uses(v)) return gcd(a, content_wrt(b, v));
    if (!b.uses(v)) return gcd(content_wrt(a, v), b);
    if (a.is_univariate_in(v) && b.is_univariate_in(v)) return univariate_gcd(a, b, v);

    const MPoly ca = content_wrt(a, v);
    const MPoly cb = content_wrt(b, v);
    const MPoly c = gcd(ca, cb);

    MPoly A = make_primitive(exact_divide(a, ca));
    MPoly B = make_primitive(exact_divide(b, cb));
    if (images_coprime(A, B, v)) return c;

    // xi-adic candidate plus cofactor refinement. The candidate is a verified
    // common divisor; recursing on the cofactors (strictly smaller once the
    // candidate is nonconstant) restores maximality without trusting the
    // heuristic, and the refinement gcd is almost always settled by the
    // coprimality probe.
    if (auto h = heu_gcd_z(A, B, 0)) {
        const MPoly g0 = make_primitive(*h);
        if (!g0.is_constant()) {
            const auto qa = try_divide(A, g0);
            const auto qb = try_divide(B, g0);
            if (qa && qb) return make_primitive(c * g0 * gcd(*qa, *qb));
        }
    }

    if (A.degree(v) < B.degree(v)) std::swap(A, B);
    while (!B.is_zero()) {
        MPoly R = pseudo_rem(A, B, v);
        A = std::move(B);
        if (!R.is_zero()) {
            R = exact_divide(R, content_wrt(R, v));
            R = make_primitive(R);
        }
        B = std::move(R);
    }
    if (!A.is_zero()) {
        A = exact_divide(A, content_wrt(A, v));
    }
    return make_primitive(c * A);
}

std::string MPoly::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    // Leading (lex-largest) term first.
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [m, c] = *it;
        const Rational mag = c < 0 ? Rational(-c) : c;
        if (first) {
            if (c < 0) os << "-";
            first = false;
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        std::string factors;
        for (std::size_t i = 0; i < kVarCount; ++i) {
            if (m.exp[i] == 0) continue;
            if (!factors.empty()) factors += "*";
            factors += var_name(static_cast<Var>(i));
            if (m.exp[i] > 1) factors += "^" + std::to_string(m.exp[i]);
        }
        if (factors.empty()) {
            os << to_string(mag);
        } else if (mag == 1) {
            os << factors;
        } else {
            os << to_string(mag) << "*" << factors;
        }
    }
    return os.str();
}

} // namespace polymart
