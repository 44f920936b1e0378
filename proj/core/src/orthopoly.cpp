#include "polymart/orthopoly.hpp"

#include <json.hpp>

#include <cstddef>
#include <utility>

#include "polymart/errors.hpp"
#include "polymart/linalg.hpp"

using ordered_json = nlohmann::ordered_json;

namespace polymart {

namespace {

Rational inner(const std::vector<Rational>& a, const std::vector<Rational>& b,
               const std::vector<Rational>& nu, int shift = 0) {
    Rational acc = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_zero()) continue;
        for (std::size_t j = 0; j < b.size(); ++j)
            acc += a[i] * b[j] * nu[i + j + static_cast<std::size_t>(shift)];
    }
    return acc;
}

// Monic orthogonal system from the moments nu_0..nu_2K. The k-th polynomial
// is the bordered Hankel determinant expanded along its symbolic last row
// and divided by the minor D_{k-1}, so everything reduces to exact rational
// determinants; |p_k|^2 = D_k / D_{k-1}. A nonpositive minor means no
// positive measure has these moments.
OrthogonalSystem hankel_orthogonal(const std::vector<Rational>& nu, int K,
                                   SystemSource source) {
    std::vector<Rational> minors; // D_0..D_K
    for (int k = 0; k <= K; ++k) {
        std::vector<std::vector<Rational>> h(static_cast<std::size_t>(k) + 1,
                                             std::vector<Rational>(static_cast<std::size_t>(k) + 1));
        for (int i = 0; i <= k; ++i)
            for (int j = 0; j <= k; ++j)
                h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    nu[static_cast<std::size_t>(i + j)];
        minors.push_back(rational_det(std::move(h)));
        if (!(minors.back() > 0)) throw MomentInfeasible(to_string(source.t), k);
    }

    OrthogonalSystem sys;
    sys.source = std::move(source);
    sys.coeffs.push_back({Rational(1)});
    sys.norms.push_back(nu[0]);
    for (int k = 1; k <= K; ++k) {
        std::vector<Rational> c(static_cast<std::size_t>(k) + 1);
        for (int i = 0; i <= k; ++i) {
            // Minor of the bordered matrix: moment rows j = 0..k-1, column i
            // removed.
            std::vector<std::vector<Rational>> m(static_cast<std::size_t>(k),
                                                 std::vector<Rational>(static_cast<std::size_t>(k)));
            for (int r = 0; r < k; ++r) {
                int cc = 0;
                for (int col = 0; col <= k; ++col) {
                    if (col == i) continue;
                    m[static_cast<std::size_t>(r)][static_cast<std::size_t>(cc++)] =
                        nu[static_cast<std::size_t>(r + col)];
                }
            }
            const Rational det = rational_det(std::move(m));
            c[static_cast<std::size_t>(i)] =
                ((k + i) % 2 == 0 ? det : -det) / minors[static_cast<std::size_t>(k - 1)];
        }
        sys.coeffs.push_back(std::move(c));
        sys.norms.push_back(minors[static_cast<std::size_t>(k)] /
                            minors[static_cast<std::size_t>(k - 1)]);
    }
    for (int k = 0; k < K; ++k) {
        const auto& pk = sys.coeffs[static_cast<std::size_t>(k)];
        sys.rec_a.push_back(inner(pk, pk, nu, 1) / sys.norms[static_cast<std::size_t>(k)]);
        if (k >= 1)
            sys.rec_b.push_back(sys.norms[static_cast<std::size_t>(k)] /
                                sys.norms[static_cast<std::size_t>(k - 1)]);
    }
    return sys;
}

std::array<Rational, kVarCount> times_at(const Rational& value) {
    std::array<Rational, kVarCount> out{};
    out[static_cast<std::size_t>(Var::t)] = value;
    return out;
}

ordered_json rationals_to_json(const std::vector<Rational>& v) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : v) arr.push_back(to_string(r));
    return arr;
}

std::vector<Rational> rationals_from_json(const ordered_json& arr) {
    std::vector<Rational> out;
    for (const auto& e : arr) out.push_back(parse_rational(e.get<std::string>()));
    return out;
}

} // namespace

OrthogonalSystem marginal_orthogonal(const MomentModel& model, const Rational& t, int K) {
    if (K < 0) throw InvalidParameter("negative system size");
    if (2 * K > model.max_order())
        throw InsufficientMoments("a system of size " + std::to_string(K) +
                                  " needs moments to order " + std::to_string(2 * K));
    std::vector<Rational> nu;
    for (int k = 0; k <= 2 * K; ++k) nu.push_back(model.g_at(k, t));
    return hankel_orthogonal(nu, K, {SystemSource::Kind::marginal, Rational(0), Rational(0), t});
}

TransitionalMomentSequence transitional_moments(const MartingaleFamily& fam, const Rational& s,
                                                const Rational& y, const Rational& t, int K) {
    if (K < 0) throw InvalidParameter("negative moment count");
    if (!(s < t))
        throw TimeOrderViolation("conditioning time " + to_string(s) +
                                 " must precede evaluation time " + to_string(t));
    if (K > fam.order())
        throw InsufficientMoments("moment of order " + std::to_string(K) +
                                  " needs a family of that order");
    TransitionalMomentSequence seq{s, y, t, {}};
    const auto at_s = times_at(s);
    for (int k = 0; k <= K; ++k) {
        const SpaceTimePoly cond =
            conditional_expectation(SpaceTimePoly::monomial(k), fam, s, t);
        seq.nu.push_back(cond.eval(y, at_s));
    }
    // Feasibility of the conditional law, as far as the sequence can tell.
    for (int m = 0; 2 * m <= K; ++m) {
        std::vector<std::vector<Rational>> h(static_cast<std::size_t>(m) + 1,
                                             std::vector<Rational>(static_cast<std::size_t>(m) + 1));
        for (int i = 0; i <= m; ++i)
            for (int j = 0; j <= m; ++j)
                h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    seq.nu[static_cast<std::size_t>(i + j)];
        if (!(rational_det(std::move(h)) > 0)) throw MomentInfeasible(to_string(t), m);
    }
    return seq;
}

OrthogonalSystem transitional_orthogonal(const MartingaleFamily& fam, const Rational& s,
                                         const Rational& y, const Rational& t, int K) {
    if (K < 0) throw InvalidParameter("negative system size");
    if (2 * K > fam.order())
        throw InsufficientMoments("a transitional system of size " + std::to_string(K) +
                                  " needs a family of order " + std::to_string(2 * K));
    const TransitionalMomentSequence seq = transitional_moments(fam, s, y, t, 2 * K);
    // The spanning polynomials M_n(x, t) - M_n(y, s) must be conditionally
    // centered; anything else contradicts the members' certification.
    const auto at_s = times_at(s);
    for (int n = 1; n <= K; ++n) {
        const Rational mean =
            conditional_expectation(fam.member(n), fam, s, t).eval(y, at_s) -
            fam.member(n).eval(y, at_s);
        if (!mean.is_zero())
            throw CertificationFailed(n, "conditional mean " + to_string(mean) +
                                             " of the centered member at (" + to_string(s) +
                                             ", " + to_string(y) + ", " + to_string(t) + ")");
    }
    return hankel_orthogonal(seq.nu, K, {SystemSource::Kind::transitional, s, y, t});
}

FamilyComparison compare_families(const std::vector<SpaceTimePoly>& a,
                                  const std::vector<SpaceTimePoly>& b) {
    if (a.size() != b.size())
        throw InvalidParameter("sequences differ in length: " + std::to_string(a.size()) +
                               " vs " + std::to_string(b.size()));
    for (std::size_t n = 0; n < a.size(); ++n)
        if (a[n].degree() != static_cast<int>(n) || b[n].degree() != static_cast<int>(n) ||
            !(a[n].coeff(static_cast<int>(n)) == RatFunc(1)) ||
            !(b[n].coeff(static_cast<int>(n)) == RatFunc(1)))
            throw InvalidParameter("member " + std::to_string(n) +
                                   " is not monic of degree " + std::to_string(n));

    FamilyComparison out;
    bool identity = true;
    for (std::size_t n = 0; n < a.size(); ++n) {
        std::vector<Rational> row(a.size(), Rational(0));
        row[n] = 1;
        SpaceTimePoly r = a[n] - b[n];
        for (int k = static_cast<int>(n) - 1; k >= 0; --k) {
            const RatFunc c = r.coeff(k);
            if (c.is_zero()) continue;
            if (!c.is_constant()) {
                out.kind = FamilyComparison::Kind::unrelated;
                out.l.clear();
                out.detail = "member " + std::to_string(n) + " needs the time-dependent weight " +
                             c.str() + " on member " + std::to_string(k);
                return out;
            }
            identity = false;
            row[static_cast<std::size_t>(k)] = c.constant_value();
            SpaceTimePoly part = b[static_cast<std::size_t>(k)];
            part.scale(c);
            r -= part;
        }
        out.l.push_back(std::move(row));
    }
    out.kind = identity ? FamilyComparison::Kind::equal
                        : FamilyComparison::Kind::constant_recombination;
    return out;
}

std::string OrthogonalSystem::to_json_string(int indent) const {
    ordered_json j;
    ordered_json src;
    if (source.kind == SystemSource::Kind::marginal) {
        src["kind"] = "marginal";
    } else {
        src["kind"] = "transitional";
        src["s"] = to_string(source.s);
        src["y"] = to_string(source.y);
    }
    src["t"] = to_string(source.t);
    j["source"] = std::move(src);
    ordered_json polys = ordered_json::array();
    for (const auto& c : coeffs) polys.push_back(rationals_to_json(c));
    j["polynomials"] = std::move(polys);
    j["norms"] = rationals_to_json(norms);
    ordered_json rec;
    rec["a"] = rationals_to_json(rec_a);
    rec["b"] = rationals_to_json(rec_b);
    j["recurrence"] = std::move(rec);
    return j.dump(indent);
}

OrthogonalSystem OrthogonalSystem::from_json_string(const std::string& text) {
    const auto j = ordered_json::parse(text);
    OrthogonalSystem sys;
    const auto& src = j.at("source");
    const std::string kind = src.at("kind").get<std::string>();
    if (kind == "marginal") {
        sys.source.kind = SystemSource::Kind::marginal;
    } else if (kind == "transitional") {
        sys.source.kind = SystemSource::Kind::transitional;
        sys.source.s = parse_rational(src.at("s").get<std::string>());
        sys.source.y = parse_rational(src.at("y").get<std::string>());
    } else {
        throw InvalidParameter("unknown source kind '" + kind + "'");
    }
    sys.source.t = parse_rational(src.at("t").get<std::string>());
    for (const auto& arr : j.at("polynomials")) sys.coeffs.push_back(rationals_from_json(arr));
    sys.norms = rationals_from_json(j.at("norms"));
    sys.rec_a = rationals_from_json(j.at("recurrence").at("a"));
    sys.rec_b = rationals_from_json(j.at("recurrence").at("b"));
    return sys;
}

} // namespace polymart
