#include "polymart/martingale.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace polymart {

using ordered_json = nlohmann::ordered_json;

void SpaceTimePoly::trim() {
    while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
}

SpaceTimePoly::SpaceTimePoly(std::vector<RatFunc> coeffs) : c_(std::move(coeffs)) { trim(); }

SpaceTimePoly SpaceTimePoly::monomial(int k, RatFunc coeff) {
    if (k < 0) throw std::logic_error("negative state power");
    std::vector<RatFunc> c(static_cast<std::size_t>(k) + 1);
    c.back() = std::move(coeff);
    return SpaceTimePoly(std::move(c));
}

SpaceTimePoly SpaceTimePoly::constant(RatFunc c) { return monomial(0, std::move(c)); }

const RatFunc& SpaceTimePoly::coeff(int k) const {
    static const RatFunc zero;
    if (k < 0 || k > degree()) return zero;
    return c_[static_cast<std::size_t>(k)];
}

SpaceTimePoly SpaceTimePoly::operator-() const {
    SpaceTimePoly r(*this);
    for (auto& c : r.c_) c = -c;
    return r;
}

SpaceTimePoly& SpaceTimePoly::operator+=(const SpaceTimePoly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size());
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
    trim();
    return *this;
}

SpaceTimePoly& SpaceTimePoly::operator-=(const SpaceTimePoly& o) { return *this += -o; }

SpaceTimePoly& SpaceTimePoly::operator*=(const SpaceTimePoly& o) {
    if (is_zero() || o.is_zero()) {
        c_.clear();
        return *this;
    }
    std::vector<RatFunc> out(c_.size() + o.c_.size() - 1);
    for (std::size_t a = 0; a < c_.size(); ++a)
        for (std::size_t b = 0; b < o.c_.size(); ++b) out[a + b] += c_[a] * o.c_[b];
    c_ = std::move(out);
    trim();
    return *this;
}

SpaceTimePoly& SpaceTimePoly::scale(const RatFunc& c) {
    for (auto& x : c_) x *= c;
    trim();
    return *this;
}

SpaceTimePoly operator+(SpaceTimePoly a, const SpaceTimePoly& b) { return a += b; }
SpaceTimePoly operator-(SpaceTimePoly a, const SpaceTimePoly& b) { return a -= b; }
SpaceTimePoly operator*(SpaceTimePoly a, const SpaceTimePoly& b) { return a *= b; }

SpaceTimePoly SpaceTimePoly::subst_time(Var v, const MPoly& replacement) const {
    SpaceTimePoly r(*this);
    for (auto& c : r.c_) c = c.subst(v, replacement);
    r.trim();
    return r;
}

SpaceTimePoly SpaceTimePoly::subst_time(Var v, const Rational& value) const {
    return subst_time(v, MPoly(value));
}

RatFunc SpaceTimePoly::eval_state(const RatFunc& x) const {
    RatFunc acc;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Rational SpaceTimePoly::eval(const Rational& x, const std::array<Rational, kVarCount>& times) const {
    Rational acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + it->eval(times);
    return acc;
}

std::string SpaceTimePoly::str(std::string_view state_name) const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int k = degree(); k >= 0; --k) {
        const RatFunc& c = coeff(k);
        if (c.is_zero()) continue;
        std::string xpart;
        if (k == 1)
            xpart = std::string(state_name);
        else if (k > 1)
            xpart = std::string(state_name) + "^" + std::to_string(k);

        std::string body;
        bool negative = false;
        if (c.is_constant()) {
            Rational v = c.constant_value();
            negative = v < 0;
            if (negative) v = -v;
            if (xpart.empty())
                body = to_string(v);
            else if (v == 1)
                body = xpart;
            else
                body = to_string(v) + "*" + xpart;
        } else {
            body = "(" + c.str() + ")";
            if (!xpart.empty()) body += "*" + xpart;
        }
        if (first) {
            os << (negative ? "-" : "") << body;
            first = false;
        } else {
            os << (negative ? " - " : " + ") << body;
        }
    }
    return os.str();
}

RatFunc expectation(const MomentModel& model, const SpaceTimePoly& p) {
    if (p.degree() > model.max_order())
        throw InsufficientMoments("expectation of degree " + std::to_string(p.degree()) +
                                  " needs moments beyond order " +
                                  std::to_string(model.max_order()));
    RatFunc acc;
    for (int k = 0; k <= p.degree(); ++k) acc += p.coeff(k) * model.g(k);
    return acc;
}

namespace {

Rational binom(int n, int k) {
    return Rational(binomial(static_cast<unsigned>(n), static_cast<unsigned>(k)));
}

// M_n = x^n - g_n(t) - sum_{j=1}^{n-1} C(n,j) g_j(t) M_{n-j}
std::vector<SpaceTimePoly> recurrence_members(const MomentModel& model, int order) {
    std::vector<SpaceTimePoly> m;
    m.reserve(static_cast<std::size_t>(order) + 1);
    m.push_back(SpaceTimePoly::constant(RatFunc(1)));
    for (int n = 1; n <= order; ++n) {
        SpaceTimePoly acc = SpaceTimePoly::monomial(n);
        acc -= SpaceTimePoly::constant(model.g(n));
        for (int j = 1; j < n; ++j) {
            SpaceTimePoly part = m[static_cast<std::size_t>(n - j)];
            part.scale(RatFunc(binom(n, j)) * model.g(j));
            acc -= part;
        }
        m.push_back(std::move(acc));
    }
    return m;
}

} // namespace

SpaceTimePoly increment_conditional(const MomentModel& model, const SpaceTimePoly& p) {
    if (p.degree() > model.max_order())
        throw InsufficientMoments("conditional expectation of degree " +
                                  std::to_string(p.degree()) + " exceeds the moment capacity");
    if (p.is_zero()) return p;
    const IncrementMoments inc(model, p.degree());
    std::vector<RatFunc> out(static_cast<std::size_t>(p.degree()) + 1);
    for (int k = 0; k <= p.degree(); ++k) {
        const RatFunc& ck = p.coeff(k);
        if (ck.is_zero()) continue;
        for (int j = 0; j <= k; ++j)
            out[static_cast<std::size_t>(j)] += ck * RatFunc(binom(k, j)) * inc.gamma(k - j);
    }
    return SpaceTimePoly(std::move(out));
}

StructuralMatrix structural_matrix(const MomentModel& model, int order) {
    if (order < 0 || order > model.max_order())
        throw OrderOutOfRange("structural matrix order outside the model's range");
    const std::size_t n = static_cast<std::size_t>(order) + 1;
    RFMatrix v(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j)
            v.at(i, j) = RatFunc(binom(static_cast<int>(i), static_cast<int>(j))) *
                         model.g(static_cast<int>(i - j));

    // V_n . (M_0..M_n)^T = (1, x, .., x^n)^T must hold identically.
    const auto members = recurrence_members(model, order);
    for (std::size_t i = 0; i < n; ++i) {
        SpaceTimePoly acc;
        for (std::size_t j = 0; j <= i; ++j) {
            SpaceTimePoly part = members[j];
            part.scale(v.at(i, j));
            acc += part;
        }
        if (acc != SpaceTimePoly::monomial(static_cast<int>(i)))
            throw std::logic_error("structural identity violated at row " + std::to_string(i));
    }
    return StructuralMatrix{order, std::move(v)};
}

MartingaleFamily::MartingaleFamily(MomentModel model, std::vector<SpaceTimePoly> members,
                                   std::string label, bool canonical)
    : model_(std::move(model)), members_(std::move(members)),
      certified_(members_.size(), false), label_(std::move(label)), canonical_(canonical) {}

const SpaceTimePoly& MartingaleFamily::member(int n) const {
    if (n < 0 || n > order())
        throw OrderOutOfRange("family member " + std::to_string(n) + " outside [0, " +
                              std::to_string(order()) + "]");
    return members_[static_cast<std::size_t>(n)];
}

bool MartingaleFamily::certified(int n) const {
    member(n);
    return certified_[static_cast<std::size_t>(n)];
}

namespace {

void certify_and_cache(const MomentModel& model, const std::vector<SpaceTimePoly>& members,
                       std::vector<bool>& certified, std::vector<RatFunc>& norm2,
                       std::vector<std::vector<RatFunc>>& cross) {
    const int order = static_cast<int>(members.size()) - 1;
    const MPoly s_var = MPoly::variable(Var::s);

    for (int n = 0; n <= order; ++n) {
        const SpaceTimePoly& m = members[static_cast<std::size_t>(n)];
        if (m.degree() != n)
            throw InvalidParameter("family member " + std::to_string(n) + " must have degree " +
                                   std::to_string(n));
        // Martingale identity: the increment route applied at symbolic (s, t)
        // must land exactly on the member re-read at time s.
        const SpaceTimePoly lhs = increment_conditional(model, m);
        const SpaceTimePoly rhs = m.subst_time(Var::t, s_var);
        const SpaceTimePoly diff = lhs - rhs;
        if (!diff.is_zero()) throw CertificationFailed(n, diff.str());
        // Moment functional: E M_0 = 1, E M_n = 0 for n >= 1.
        const RatFunc mean = expectation(model, m);
        if (mean != (n == 0 ? RatFunc(1) : RatFunc()))
            throw CertificationFailed(n, "nonzero mean " + mean.str());
        certified[static_cast<std::size_t>(n)] = true;
    }

    const int capacity = model.max_order();
    cross.assign(members.size(), {});
    for (int n = 0; n <= order; ++n) {
        auto& row = cross[static_cast<std::size_t>(n)];
        for (int m = 0; m <= n && n + m <= capacity; ++m)
            row.push_back(expectation(model, members[static_cast<std::size_t>(n)] *
                                                 members[static_cast<std::size_t>(m)]));
    }
    norm2.clear();
    for (int n = 0; 2 * n <= capacity && n <= order; ++n)
        norm2.push_back(cross[static_cast<std::size_t>(n)][static_cast<std::size_t>(n)]);

    // m_n must vanish at the origin and be nondecreasing in time; violation
    // means no process with independent increments carries these moments.
    std::vector<Rational> grid = default_validation_grid();
    std::sort(grid.begin(), grid.end());
    for (std::size_t n = 1; n < norm2.size(); ++n) {
        std::array<Rational, kVarCount> point{};
        Rational prev = norm2[n].eval(point); // t = 0
        if (prev != 0)
            throw CertificationFailed(static_cast<int>(n),
                                      "second moment does not vanish at the origin");
        for (const auto& tau : grid) {
            point[static_cast<std::size_t>(Var::t)] = tau;
            const Rational cur = norm2[n].eval(point);
            if (cur < prev)
                throw CertificationFailed(static_cast<int>(n),
                                          "second moment decreases at t = " + to_string(tau));
            prev = cur;
        }
    }
}

} // namespace

MartingaleFamily build_family(const MomentModel& model, int order) {
    if (order < 0 || order > model.max_order())
        throw OrderOutOfRange("family order outside the model's moment capacity");
    MartingaleFamily fam(model, recurrence_members(model, order), "canonical", true);
    certify_and_cache(fam.model_, fam.members_, fam.certified_, fam.norm2_, fam.cross_);
    return fam;
}

MartingaleFamily certify_family(const MomentModel& model, std::vector<SpaceTimePoly> members,
                                std::string label) {
    if (members.empty()) throw InvalidParameter("a family needs at least M_0");
    const int order = static_cast<int>(members.size()) - 1;
    if (order > model.max_order())
        throw OrderOutOfRange("family order outside the model's moment capacity");
    // Normalize to monic: certification rejects members whose leading
    // coefficient is genuinely time dependent.
    for (std::size_t n = 0; n < members.size(); ++n) {
        if (members[n].is_zero()) throw InvalidParameter("zero family member");
        const RatFunc lead = members[n].coeff(members[n].degree());
        if (!(lead == RatFunc(1))) members[n].scale(RatFunc(1) / lead);
    }
    const bool canonical = members == recurrence_members(model, order);
    MartingaleFamily fam(model, std::move(members), std::move(label), canonical);
    certify_and_cache(fam.model_, fam.members_, fam.certified_, fam.norm2_, fam.cross_);
    return fam;
}

std::vector<RatFunc> to_martingale_basis(const SpaceTimePoly& p, const MartingaleFamily& fam) {
    if (p.degree() > fam.order())
        throw OrderOutOfRange("polynomial degree exceeds the family order");
    std::vector<RatFunc> rest(p.coeffs());
    std::vector<RatFunc> c(rest.size());
    for (int k = static_cast<int>(rest.size()) - 1; k >= 0; --k) {
        c[static_cast<std::size_t>(k)] = rest[static_cast<std::size_t>(k)];
        if (c[static_cast<std::size_t>(k)].is_zero()) continue;
        const auto& member = fam.member(k);
        for (int j = 0; j <= k; ++j)
            rest[static_cast<std::size_t>(j)] -= c[static_cast<std::size_t>(k)] * member.coeff(j);
    }
    return c;
}

SpaceTimePoly from_martingale_basis(const std::vector<RatFunc>& c, const MartingaleFamily& fam) {
    if (static_cast<int>(c.size()) - 1 > fam.order())
        throw OrderOutOfRange("coefficient sequence exceeds the family order");
    SpaceTimePoly acc;
    for (std::size_t k = 0; k < c.size(); ++k) {
        SpaceTimePoly part = fam.member(static_cast<int>(k));
        part.scale(c[k]);
        acc += part;
    }
    return acc;
}

SpaceTimePoly conditional_expectation(const SpaceTimePoly& p, const MartingaleFamily& fam) {
    const auto c = to_martingale_basis(p, fam);
    const MPoly s_var = MPoly::variable(Var::s);
    SpaceTimePoly acc;
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (c[k].is_zero()) continue;
        SpaceTimePoly part = fam.member(static_cast<int>(k)).subst_time(Var::t, s_var);
        part.scale(c[k]);
        acc += part;
    }
    return acc;
}

SpaceTimePoly conditional_expectation(const SpaceTimePoly& p, const MartingaleFamily& fam,
                                      const Rational& s, const Rational& t) {
    if (s > t)
        throw TimeOrderViolation("conditioning time " + to_string(s) +
                                 " exceeds evaluation time " + to_string(t));
    return conditional_expectation(p, fam).subst_time(Var::t, t).subst_time(Var::s, s);
}

ProductLinearization linearize_product(const MartingaleFamily& fam, int i, int j) {
    if (i < 0 || j < 0 || i + j > fam.order())
        throw OrderOutOfRange("product order " + std::to_string(i) + "+" + std::to_string(j) +
                              " exceeds the family order");
    const SpaceTimePoly prod = fam.member(i) * fam.member(j);
    ProductLinearization lin{i, j, to_martingale_basis(prod, fam)};
    lin.delta.resize(static_cast<std::size_t>(i + j) + 1);
    if (!(lin.delta.back() == RatFunc(1)))
        throw std::logic_error("product linearization lost monicity");
    if (from_martingale_basis(lin.delta, fam) != prod)
        throw std::logic_error("product linearization failed to reconstruct");
    return lin;
}

RatFunc second_moment(const MartingaleFamily& fam, int n) {
    fam.member(n); // range check
    if (2 * n > fam.model().max_order())
        throw InsufficientMoments("second moment of member " + std::to_string(n) +
                                  " needs moments to order " + std::to_string(2 * n));
    return fam.norm2_[static_cast<std::size_t>(n)];
}

RatFunc cross_moment(const MartingaleFamily& fam, int n, int m) {
    fam.member(n);
    fam.member(m);
    if (n + m > fam.model().max_order())
        throw InsufficientMoments("cross moment (" + std::to_string(n) + ", " + std::to_string(m) +
                                  ") needs moments to order " + std::to_string(n + m));
    if (m > n) std::swap(n, m);
    return fam.cross_[static_cast<std::size_t>(n)][static_cast<std::size_t>(m)];
}

IteratedConditional iterated_conditional(const MartingaleFamily& fam, const Rational& s,
                                         const std::vector<Rational>& times,
                                         const std::vector<int>& orders) {
    if (times.empty() || times.size() != orders.size())
        throw InvalidParameter("need one order per time point");
    if (s >= times.front())
        throw TimeOrderViolation("conditioning time must precede the first factor");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        if (!(times[i] < times[i + 1]))
            throw TimeOrderViolation("factor times must be strictly increasing");
    int total = 0;
    for (int k : orders) {
        if (k < 0) throw InvalidParameter("negative order");
        total += k;
    }
    if (total > fam.order())
        throw InsufficientMoments("orders sum to " + std::to_string(total) +
                                  ", beyond the family order " + std::to_string(fam.order()));

    // Work backwards per the induction: condition the latest factor down to
    // the previous time (coefficients are unchanged, basis members map to
    // themselves), multiply, linearize, repeat.
    std::vector<Rational> phi(static_cast<std::size_t>(total) + 1, Rational(0));
    phi[static_cast<std::size_t>(orders.back())] = 1;
    for (std::size_t i = times.size() - 1; i-- > 0;) {
        std::array<Rational, kVarCount> at{};
        at[static_cast<std::size_t>(Var::t)] = times[i];
        std::vector<Rational> next(phi.size(), Rational(0));
        for (std::size_t j = 0; j < phi.size(); ++j) {
            if (phi[j] == 0) continue;
            const auto lin = linearize_product(fam, orders[i], static_cast<int>(j));
            for (std::size_t l = 0; l < lin.delta.size(); ++l) {
                if (lin.delta[l].is_zero()) continue;
                next[l] += phi[j] * lin.delta[l].eval(at);
            }
        }
        phi = std::move(next);
    }
    return IteratedConditional{s, times, orders, std::move(phi)};
}

namespace {

ordered_json coeff_to_json(const RatFunc& c) {
    if (c.is_constant()) return to_string(c.constant_value());
    if (!c.num().is_univariate_in(Var::t) || !c.den().is_univariate_in(Var::t))
        throw InvalidParameter("family coefficients must be functions of t");
    auto strings = [](const MPoly& p) {
        ordered_json arr = ordered_json::array();
        for (const auto& v : p.coeffs(Var::t)) arr.push_back(to_string(v));
        return arr;
    };
    ordered_json obj;
    obj["num"] = strings(c.num());
    obj["den"] = strings(c.den());
    return obj;
}

RatFunc coeff_from_json(const ordered_json& j) {
    if (j.is_string()) return RatFunc(parse_rational(j.get<std::string>()));
    if (!j.is_object() || !j.contains("num") || !j.contains("den"))
        throw InvalidParameter("family coefficient must be \"p/q\" or {num, den}");
    auto poly_of = [](const ordered_json& arr) {
        std::vector<Rational> c;
        for (const auto& v : arr) c.push_back(parse_rational(v.get<std::string>()));
        return MPoly::from_coeffs(Var::t, c);
    };
    return RatFunc(poly_of(j.at("num")), poly_of(j.at("den")));
}

} // namespace

std::string family_to_json(const MartingaleFamily& fam, int indent) {
    ordered_json j;
    j["model"] = fam.model().name();
    j["N"] = fam.order();
    ordered_json members = ordered_json::array();
    for (int n = 0; n <= fam.order(); ++n) {
        ordered_json coeffs = ordered_json::array();
        for (int k = 0; k <= n; ++k) coeffs.push_back(coeff_to_json(fam.member(n).coeff(k)));
        members.push_back(std::move(coeffs));
    }
    j["members"] = std::move(members);
    return j.dump(indent);
}

MartingaleFamily family_from_json(const MomentModel& model, const std::string& text) {
    const auto j = ordered_json::parse(text);
    if (j.at("model").get<std::string>() != model.name())
        throw InvalidParameter("family was serialized for model '" +
                               j.at("model").get<std::string>() + "', not '" + model.name() + "'");
    const int order = j.at("N").get<int>();
    const auto& members_json = j.at("members");
    if (static_cast<int>(members_json.size()) != order + 1)
        throw InvalidParameter("member count does not match N");
    std::vector<SpaceTimePoly> members;
    members.reserve(members_json.size());
    for (const auto& arr : members_json) {
        std::vector<RatFunc> coeffs;
        for (const auto& c : arr) coeffs.push_back(coeff_from_json(c));
        members.emplace_back(std::move(coeffs));
    }
    return certify_family(model, std::move(members), "user");
}

} // namespace polymart
