#include "polymart/checks.hpp"

#include <array>
#include <optional>
#include <vector>

#include "polymart/errors.hpp"
#include "polymart/linalg.hpp"

namespace polymart {

namespace {

Rational eval_t(const RatFunc& f, const Rational& tau) {
    std::array<Rational, kVarCount> pt{};
    pt[static_cast<std::size_t>(Var::t)] = tau;
    return f.eval(pt);
}

RatFunc msym(Var v) { return RatFunc(MPoly::variable(v)); }

std::string chi_name(int m, int n) {
    return "chi_{" + std::to_string(m) + "," + std::to_string(n) + "}";
}

struct AffineSplit {
    bool ok = false;
    Rational alpha;
    Rational beta;
    RatFunc residual;
};

// delta = alpha*m1 + beta with rational constants: solve from two evaluation
// points where m1 differs, then confirm the residual symbolically. Avoids
// dividing by m1, which vanishes at the origin.
AffineSplit split_affine(const RatFunc& delta, const RatFunc& m1) {
    static const std::array<Rational, 6> pts{Rational(1),    Rational(2), Rational(3),
                                             Rational(1, 2), Rational(4), Rational(5)};
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            Rational m1a, m1b, da, db;
            try {
                m1a = eval_t(m1, pts[i]);
                m1b = eval_t(m1, pts[j]);
                if (m1a == m1b) continue;
                da = eval_t(delta, pts[i]);
                db = eval_t(delta, pts[j]);
            } catch (const DegenerateAtPoint&) {
                continue;
            }
            AffineSplit out;
            out.alpha = (db - da) / (m1b - m1a);
            out.beta = da - out.alpha * m1a;
            out.residual = delta - (RatFunc(out.alpha) * m1 + RatFunc(out.beta));
            out.ok = out.residual.is_zero();
            return out;
        }
    }
    throw DegenerateTriple("m_1 takes a single value on the whole evaluation grid");
}

// chi rows for a fixed n; returns false when some ratio is not constant.
// Orders m with n + m beyond the moment capacity are skipped with a note.
bool reversed_rows(const MartingaleFamily& fam, int n, CheckReport& rep) {
    const int cap = fam.model().max_order();
    const RatFunc mn = second_moment(fam, n);
    bool ok = true;
    bool skipped = false;
    for (int m = 0; m <= fam.order(); ++m) {
        if (n + m > cap) {
            skipped = true;
            continue;
        }
        const RatFunc ratio = cross_moment(fam, n, m) / mn;
        if (ratio.is_constant()) {
            rep.constant(chi_name(m, n), to_string(ratio.constant_value()));
        } else {
            ok = false;
            rep.residual(chi_name(m, n), ratio.str());
        }
    }
    if (skipped)
        rep.note("orders beyond the moment capacity were skipped for n = " + std::to_string(n));
    return ok;
}

} // namespace

HarnessPair harness_coefficients(const RatFunc& m1) {
    for (Var v : {Var::s, Var::u, Var::ms, Var::mt, Var::mu})
        if (m1.uses(v)) throw InvalidParameter("m_1 must be a function of t alone");
    const RatFunc at_s = m1.subst(Var::t, MPoly::variable(Var::s));
    const RatFunc at_u = m1.subst(Var::t, MPoly::variable(Var::u));
    const RatFunc den = at_u - at_s;
    if (den.is_zero()) throw DegenerateTriple("m_1(u) - m_1(s) vanishes identically");
    return {(at_u - m1) / den, (m1 - at_s) / den};
}

HarnessPair harness_coefficients(const RatFunc& m1, const Rational& s, const Rational& t,
                                 const Rational& u) {
    const Rational vs = eval_t(m1, s), vt = eval_t(m1, t), vu = eval_t(m1, u);
    if (vu == vs)
        throw DegenerateTriple("m_1(u) = m_1(s) = " + to_string(vs) + " at the given triple");
    return {RatFunc((vu - vt) / (vu - vs)), RatFunc((vt - vs) / (vu - vs))};
}

CheckReport check_independent_increments(const MartingaleFamily& fam) {
    CheckReport rep;
    rep.check = "ii";
    const int order = fam.order();
    const IncrementMoments inc = increment_moments(fam.model(), order);
    std::vector<SpaceTimePoly> cond;
    for (int j = 0; j <= order; ++j)
        cond.push_back(conditional_expectation(SpaceTimePoly::monomial(j), fam));
    bool ok = true;
    for (int n = 1; n <= order; ++n) {
        // E((X_t - X_s)^n | F_s) by the binomial expansion; the X_s powers
        // are F_s-measurable and multiply the conditioned monomials.
        SpaceTimePoly e;
        for (int j = 0; j <= n; ++j) {
            RatFunc c{Rational(binomial(static_cast<unsigned>(n), static_cast<unsigned>(j)))};
            if ((n - j) % 2 == 1) c = -c;
            e += SpaceTimePoly::monomial(n - j, c) * cond[static_cast<std::size_t>(j)];
        }
        const RatFunc constant_part = e.coeff(0);
        const SpaceTimePoly xpart = e - SpaceTimePoly::constant(constant_part);
        rep.residual("n=" + std::to_string(n), xpart.is_zero() ? "0" : xpart.str());
        if (!xpart.is_zero()) ok = false;
        rep.constant("gamma_" + std::to_string(n), inc.gamma(n).str());
        if (constant_part != inc.gamma(n)) {
            ok = false;
            rep.residual("gamma_mismatch_n=" + std::to_string(n),
                         (constant_part - inc.gamma(n)).str());
        }
    }
    rep.verdict = ok ? Verdict::pass : Verdict::fail;
    if (ok)
        rep.note("conditional increment moments are state-free and reproduce the model's "
                 "increment moments");
    return rep;
}

CheckReport check_reversed_martingale(const MartingaleFamily& fam, int n) {
    if (n < 0 || n > fam.order())
        throw OrderOutOfRange("reversed-martingale order " + std::to_string(n) +
                              " outside the family range");
    if (2 * n > fam.model().max_order())
        throw InsufficientMoments("m_" + std::to_string(n) + " needs moments to order " +
                                  std::to_string(2 * n));
    CheckReport rep;
    rep.check = "reversed";
    rep.note("n = " + std::to_string(n));
    const RatFunc mn = second_moment(fam, n);
    if (mn.is_zero()) {
        rep.verdict = Verdict::degenerate;
        rep.note("m_" + std::to_string(n) + " vanishes identically");
        return rep;
    }
    rep.verdict = reversed_rows(fam, n, rep) ? Verdict::pass : Verdict::fail;
    if (rep.verdict == Verdict::pass)
        rep.note("M_" + std::to_string(n) + "(s)/m_" + std::to_string(n) +
                 "(s) is a reversed martingale; the normalizer 1/m_" + std::to_string(n) +
                 "(s) is positive");
    return rep;
}

CheckReport check_reversed_martingale(const MartingaleFamily& fam) {
    CheckReport rep;
    rep.check = "reversed";
    bool ok = true;
    bool degenerate = false;
    for (int n = 1; n <= fam.order(); ++n) {
        if (2 * n > fam.model().max_order()) {
            rep.note("n = " + std::to_string(n) + " skipped: m_" + std::to_string(n) +
                     " needs moments to order " + std::to_string(2 * n));
            continue;
        }
        const RatFunc mn = second_moment(fam, n);
        if (mn.is_zero()) {
            degenerate = true;
            rep.note("m_" + std::to_string(n) + " vanishes identically");
            continue;
        }
        ok = reversed_rows(fam, n, rep) && ok;
    }
    rep.verdict = !ok ? Verdict::fail : (degenerate ? Verdict::degenerate : Verdict::pass);
    return rep;
}

CheckReport check_orthogonality(const MartingaleFamily& fam) {
    const int order = fam.order();
    const int cap = fam.model().max_order();
    if (2 * order > cap)
        throw InsufficientMoments("orthogonality to order " + std::to_string(order) +
                                  " needs moments to order " + std::to_string(2 * order));
    CheckReport rep;
    rep.check = "ortho";
    bool ok = true;
    for (int n = 0; n <= order; ++n)
        for (int m = n + 1; m <= order; ++m) {
            const RatFunc c = cross_moment(fam, n, m);
            if (!c.is_zero()) {
                ok = false;
                rep.residual("E[M_" + std::to_string(n) + " M_" + std::to_string(m) + "]",
                             c.str());
            }
        }
    rep.verdict = ok ? Verdict::pass : Verdict::fail;
    if (ok) rep.note("all distinct members are orthogonal under the marginal measure");

    // Equivalence with the reversed-martingale statement, asserted only when
    // the m_n are pairwise distinct functions of time.
    bool distinct = true;
    for (int n = 1; n <= order && distinct; ++n)
        for (int m = n + 1; m <= order; ++m)
            if (second_moment(fam, n) == second_moment(fam, m)) {
                distinct = false;
                rep.note("hypothesis violated: m_" + std::to_string(n) + " = m_" +
                         std::to_string(m) + "; equivalence with the reversed-martingale "
                         "statement is not asserted");
                break;
            }
    if (distinct) {
        bool all_reversed = true;
        for (int n = 1; n <= order; ++n) {
            CheckReport sub;
            if (second_moment(fam, n).is_zero()) {
                all_reversed = false;
                break;
            }
            all_reversed = reversed_rows(fam, n, sub) && all_reversed;
        }
        if (all_reversed == ok) {
            rep.note("reversed-martingale verdicts agree with the orthogonality verdict");
        } else {
            rep.verdict = Verdict::fail;
            rep.residual("equivalence",
                         std::string("orthogonality ") + (ok ? "holds" : "fails") +
                             " but the reversed-martingale property " +
                             (all_reversed ? "holds" : "fails"));
        }
    }
    return rep;
}

GramSchmidt constant_gram_schmidt(const MartingaleFamily& fam) {
    const int order = fam.order();
    const int cap = fam.model().max_order();
    if (2 * order > cap)
        throw InsufficientMoments("Gram-Schmidt to order " + std::to_string(order) +
                                  " needs moments to order " + std::to_string(2 * order));
    const auto cross = [&](const std::vector<Rational>& u, const std::vector<Rational>& v) {
        RatFunc acc;
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (u[i].is_zero()) continue;
            for (std::size_t j = 0; j < v.size(); ++j) {
                if (v[j].is_zero()) continue;
                acc += RatFunc(u[i] * v[j]) *
                       cross_moment(fam, static_cast<int>(i), static_cast<int>(j));
            }
        }
        return acc;
    };

    std::vector<std::vector<Rational>> l;
    for (int n = 0; n <= order; ++n) {
        std::vector<Rational> row(static_cast<std::size_t>(order) + 1, Rational(0));
        row[static_cast<std::size_t>(n)] = 1;
        for (int k = 0; k < n; ++k) {
            const RatFunc den = cross(l[static_cast<std::size_t>(k)], l[static_cast<std::size_t>(k)]);
            if (den.is_zero())
                throw DegenerateVariance("orthogonalized member " + std::to_string(k) +
                                         " has identically zero second moment");
            std::vector<Rational> mn(static_cast<std::size_t>(order) + 1, Rational(0));
            mn[static_cast<std::size_t>(n)] = 1;
            const RatFunc ratio = cross(mn, l[static_cast<std::size_t>(k)]) / den;
            if (!ratio.is_constant()) throw NotConstant(n, ratio.str());
            const Rational c = ratio.constant_value();
            if (!c.is_zero())
                for (std::size_t q = 0; q <= static_cast<std::size_t>(k); ++q)
                    row[q] -= c * l[static_cast<std::size_t>(k)][q];
        }
        l.push_back(std::move(row));
    }

    std::vector<SpaceTimePoly> members;
    for (int n = 0; n <= order; ++n) {
        SpaceTimePoly p;
        for (int k = 0; k <= n; ++k) {
            const Rational& c = l[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
            if (c.is_zero()) continue;
            SpaceTimePoly part = fam.member(k);
            part.scale(RatFunc(c));
            p += part;
        }
        members.push_back(std::move(p));
    }
    return {std::move(l), certify_family(fam.model(), std::move(members), "cgs")};
}

CheckReport check_gram_schmidt(const MartingaleFamily& fam) {
    CheckReport rep;
    rep.check = "cgs";
    try {
        const GramSchmidt gs = constant_gram_schmidt(fam);
        for (int n = 0; n < static_cast<int>(gs.l.size()); ++n)
            for (int k = 0; k <= n; ++k)
                rep.constant("L[" + std::to_string(n) + "][" + std::to_string(k) + "]",
                             to_string(gs.l[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)]));
        rep.verdict = Verdict::pass;
        rep.note("constant recombination orthogonalizes the family; result certified under "
                 "label \"" + gs.family.label() + "\"");
        if (gs.family.canonical())
            rep.note("the family was already orthogonal: recombination is the identity");
    } catch (const NotConstant& e) {
        rep.verdict = Verdict::fail;
        rep.residual("L[" + std::to_string(e.order) + "]", e.coefficient);
        rep.note("recombination coefficient at order " + std::to_string(e.order) +
                 " depends on time");
    } catch (const DegenerateVariance& e) {
        rep.verdict = Verdict::degenerate;
        rep.note(e.what());
    }
    return rep;
}

CheckReport check_harness(const MartingaleFamily& fam) {
    const int order = fam.order();
    const int cap = fam.model().max_order();
    if (order < 1 || cap < 2)
        throw InsufficientMoments("harness checks need at least order 1 and moments to order 2");
    CheckReport rep;
    rep.check = "harness";
    const RatFunc m1 = second_moment(fam, 1);
    if (m1.is_zero()) {
        rep.verdict = Verdict::degenerate;
        rep.note("m_1 vanishes identically");
        return rep;
    }

    bool ok = true;
    // Part 1: E M_1 M_n = chi_{n,1} m_1 with constant chi.
    std::vector<Rational> chi(static_cast<std::size_t>(order) + 1, Rational(0));
    for (int n = 0; n <= order && n + 1 <= cap; ++n) {
        const RatFunc ratio = cross_moment(fam, 1, n) / m1;
        if (ratio.is_constant()) {
            chi[static_cast<std::size_t>(n)] = ratio.constant_value();
            rep.constant(chi_name(n, 1), to_string(ratio.constant_value()));
        } else {
            ok = false;
            rep.residual(chi_name(n, 1), ratio.str());
        }
    }

    // Part 2: every coefficient of M_1 M_n over the family is affine in m_1,
    // and the constant leg is exactly chi_{n,1} m_1.
    for (int n = 1; n < order; ++n) {
        const ProductLinearization lin = linearize_product(fam, 1, n);
        for (int j = 1; j <= n + 1; ++j) {
            const AffineSplit sp = split_affine(lin.delta[static_cast<std::size_t>(j)], m1);
            const std::string suffix = "{" + std::to_string(j) + "," + std::to_string(n) + "}";
            if (sp.ok) {
                rep.constant("alpha_" + suffix, to_string(sp.alpha));
                rep.constant("beta_" + suffix, to_string(sp.beta));
            } else {
                ok = false;
                rep.residual("delta_" + suffix, sp.residual.str());
            }
        }
        const RatFunc leg = lin.delta[0] - RatFunc(chi[static_cast<std::size_t>(n)]) * m1;
        if (!leg.is_zero()) {
            ok = false;
            rep.residual("delta_{0," + std::to_string(n) + "}", leg.str());
        }
    }

    if (!ok) {
        rep.verdict = Verdict::fail;
        return rep;
    }
    rep.verdict = Verdict::pass;
    // Sufficiency holds only for orthogonal families; otherwise the passing
    // verdict certifies the necessary conditions.
    try {
        const CheckReport ortho = check_orthogonality(fam);
        if (ortho.verdict == Verdict::pass) {
            rep.note("level: SUFFICIENT_PASS (family is orthogonal)");
        } else {
            rep.note("level: NECESSARY_PASS (family is not orthogonal)");
        }
    } catch (const InsufficientMoments&) {
        rep.note("level: NECESSARY_PASS (orthogonality not decidable at this capacity)");
    }
    return rep;
}

QHStructure qh_structure_constants(const MartingaleFamily& fam) {
    if (fam.model().max_order() < 6)
        throw InsufficientMoments("structure constants need moments to order 6");
    if (fam.order() < 3)
        throw InsufficientMoments("structure constants need family order 3");
    QHStructure st;
    st.m1 = second_moment(fam, 1);
    if (st.m1.is_zero()) throw HypothesisViolated("m_1 vanishes identically");
    if (!cross_moment(fam, 1, 2).is_zero())
        throw HypothesisViolated("E M_1 M_2 = " + cross_moment(fam, 1, 2).str() +
                                 " is not identically zero; orthogonalize first "
                                 "(constant Gram-Schmidt)");
    st.m2 = second_moment(fam, 2);

    const auto split = [&](const RatFunc& delta, const char* what) {
        const AffineSplit sp = split_affine(delta, st.m1);
        if (!sp.ok)
            throw HypothesisViolated(std::string(what) + " is not affine in m_1; residual " +
                                     sp.residual.str());
        return std::pair<Rational, Rational>(sp.alpha, sp.beta);
    };

    const ProductLinearization p1 = linearize_product(fam, 1, 1);
    std::tie(st.alpha21, st.beta21) = split(p1.delta[2], "the M_2 coefficient of M_1^2");
    std::tie(st.alpha11, st.beta11) = split(p1.delta[1], "the M_1 coefficient of M_1^2");
    if (p1.delta[0] != st.m1)
        throw HypothesisViolated("the constant leg of M_1^2 is " + p1.delta[0].str() +
                                 ", expected m_1 = " + st.m1.str());

    const ProductLinearization p2 = linearize_product(fam, 1, 2);
    std::tie(st.alpha32, st.beta32) = split(p2.delta[3], "the M_3 coefficient of M_1 M_2");
    std::tie(st.alpha22, st.beta22) = split(p2.delta[2], "the M_2 coefficient of M_1 M_2");
    std::tie(st.alpha12, st.beta12) = split(p2.delta[1], "the M_1 coefficient of M_1 M_2");
    if (!p2.delta[0].is_zero())
        throw HypothesisViolated("the constant leg of M_1 M_2 is " + p2.delta[0].str() +
                                 ", expected 0");

    const RatFunc chi = cross_moment(fam, 3, 1) / st.m1;
    if (!chi.is_constant())
        throw HypothesisViolated("E M_3 M_1 / m_1 = " + chi.str() + " is not constant");
    st.chi31 = chi.constant_value();

    st.a_hat = st.alpha32 * st.chi31 + st.alpha12;
    st.a = st.beta32 * st.chi31 + st.beta12;
    st.kappa = 1 + st.alpha11 * st.beta11 + st.alpha21 * st.a;
    st.lambda = st.beta21 * st.a_hat - st.alpha21 * st.a;

    // Consequences of the definitions, confirmed symbolically in t.
    const RatFunc lin_m2 = RatFunc(st.alpha21) * st.m1 + RatFunc(st.beta21);
    if (st.m2 * lin_m2 != (RatFunc(st.a_hat) * st.m1 + RatFunc(st.a)) * st.m1)
        throw HypothesisViolated("m_2 (alpha21 m_1 + beta21) != (a_hat m_1 + a) m_1");
    const SpaceTimePoly m1m = fam.member(1);
    if (expectation(fam.model(), m1m * m1m * m1m) !=
        (RatFunc(st.alpha11) * st.m1 + RatFunc(st.beta11)) * st.m1)
        throw HypothesisViolated("E M_1^3 != (alpha11 m_1 + beta11) m_1");
    if (expectation(fam.model(), m1m * m1m * fam.member(2)) !=
        st.m1 * (RatFunc(st.a_hat) * st.m1 + RatFunc(st.a)))
        throw HypothesisViolated("E M_1^2 M_2 != m_1 (a_hat m_1 + a)");
    return st;
}

namespace {

// The three moment identities as a linear system in (A, B, C), with the
// second moment written through the structure constants:
// m_2(x) = x (a_hat x + a) / (alpha21 x + beta21) at x = m_1(.).
struct QHSystem {
    RFMatrix mm{3, 3};
    std::vector<RatFunc> rhs;
};

RatFunc m2_of(const QHStructure& st, const RatFunc& m) {
    return m * (RatFunc(st.a_hat) * m + RatFunc(st.a)) /
           (RatFunc(st.alpha21) * m + RatFunc(st.beta21));
}

QHSystem qh_system(const QHStructure& st, const RatFunc& ms, const RatFunc& mt,
                   const RatFunc& mu) {
    const RatFunc a21(st.alpha21), b21(st.beta21), ah(st.a_hat), av(st.a), kp(st.kappa),
        lb(st.lambda);
    QHSystem sys;
    sys.mm.at(0, 0) = RatFunc(1);
    sys.mm.at(0, 1) = a21 * ms + b21;
    sys.mm.at(0, 2) = RatFunc(1);
    sys.mm.at(1, 0) = ms * ah;
    sys.mm.at(1, 1) = mu * kp + ms * (lb - kp + a21 * av) + a21 * ah * ms * mu;
    sys.mm.at(1, 2) = ah * mu;
    sys.mm.at(2, 0) = m2_of(st, ms);
    sys.mm.at(2, 1) = (ms / mu) * m2_of(st, mu) * (a21 * mu + b21);
    sys.mm.at(2, 2) = m2_of(st, mu);
    sys.rhs = {RatFunc(1), ah * mt, m2_of(st, mt)};
    return sys;
}

// Verbatim printed expansion of the system determinant, for comparison.
RatFunc printed_determinant(const QHStructure& st, const RatFunc& ms, const RatFunc& mu) {
    const RatFunc a21(st.alpha21), b21(st.beta21), b12(st.beta12), ah(st.a_hat), av(st.a),
        kp(st.kappa), lb(st.lambda);
    const RatFunc adj = a21 * (av - RatFunc(1));
    return -a21 * ah * kp * ms * mu * mu + a21 * ah * (kp + adj) * ms * ms * mu -
           b21 * ah * (lb - kp - adj) * ms * ms + b21 * ah * kp * mu * mu +
           b12 * ah * (b21 * ah - a21) * ms * mu - b21 * av * kp * mu +
           b21 * av * (kp + adj) * ms;
}

void append_structure(CheckReport& rep, const QHStructure& st) {
    rep.constant("alpha_{2,1}", to_string(st.alpha21));
    rep.constant("beta_{2,1}", to_string(st.beta21));
    rep.constant("alpha_{1,1}", to_string(st.alpha11));
    rep.constant("beta_{1,1}", to_string(st.beta11));
    rep.constant("alpha_{3,2}", to_string(st.alpha32));
    rep.constant("beta_{3,2}", to_string(st.beta32));
    rep.constant("alpha_{2,2}", to_string(st.alpha22));
    rep.constant("beta_{2,2}", to_string(st.beta22));
    rep.constant("alpha_{1,2}", to_string(st.alpha12));
    rep.constant("beta_{1,2}", to_string(st.beta12));
    rep.constant("chi_{3,1}", to_string(st.chi31));
    rep.constant("a_hat", to_string(st.a_hat));
    rep.constant("a", to_string(st.a));
    rep.constant("kappa", to_string(st.kappa));
    rep.constant("lambda", to_string(st.lambda));
    rep.note("printed parameters a21, b21, a12, a11, b11 are read as alpha_{2,1}, "
             "beta_{2,1}, alpha_{1,2}, alpha_{1,1}, beta_{1,1}");
}

void append_coefficients(CheckReport& rep, const QHCoefficients& q) {
    rep.constant("A", q.a.str());
    rep.constant("B", q.b.str());
    rep.constant("C", q.c.str());
    rep.constant("D", q.d.str());
    rep.constant("E", q.e.str());
    rep.constant("F", q.f.str());
}

QHCoefficients closed_form_at(const QHStructure& st, const RatFunc& ms, const RatFunc& mt,
                              const RatFunc& mu, const RatFunc& authoritative_b) {
    const RatFunc a21(st.alpha21), b21(st.beta21), a12(st.alpha12), ah(st.a_hat), av(st.a),
        kp(st.kappa), lb(st.lambda);
    const RatFunc hden = mu - ms;
    if (hden.is_zero()) throw DegenerateTriple("m(u) - m(s) vanishes");
    const RatFunc h = (mu - mt) / hden;
    const auto bracket = [&](const RatFunc& first, const RatFunc& second, const RatFunc& third) {
        // b21*a*kappa - b21*a_hat*(lambda-kappa)*first + b21*a_hat*kappa*second
        // + a12*a_hat*kappa*third, the repeated grouping of the printed forms
        return b21 * av * kp - b21 * ah * (lb - kp) * first + b21 * ah * kp * second +
               a12 * ah * kp * third;
    };
    const RatFunc den = (a21 * mt + b21) * bracket(ms, mu, mu * mt);
    if (den.is_zero()) throw DegenerateTriple("closed-form denominator vanishes");
    QHCoefficients q;
    q.a = h * (a21 * ms + b21) * bracket(mt, mu, mu * mt) / den;
    q.b = (mt - ms) * lb * b21 * ah / den;
    q.c = (RatFunc(1) - h) * (a21 * mu + b21) * bracket(ms, mt, ms * mt) / den;
    q.d = RatFunc(-st.beta11) * authoritative_b;
    q.e = RatFunc(-st.alpha11) * ms * authoritative_b;
    q.f = -authoritative_b * ms;
    return q;
}

void append_closed_form_comparison(CheckReport& rep, const QHStructure& st, const RatFunc& ms,
                                   const RatFunc& mt, const RatFunc& mu,
                                   const QHCoefficients& solved) {
    try {
        const QHCoefficients cf = closed_form_at(st, ms, mt, mu, solved.b);
        rep.constant("A_closed", cf.a.str());
        rep.constant("B_closed", cf.b.str());
        rep.constant("C_closed", cf.c.str());
        bool differs = false;
        const std::pair<const char*, RatFunc> diffs[] = {{"A_closed_minus_A", cf.a - solved.a},
                                                         {"B_closed_minus_B", cf.b - solved.b},
                                                         {"C_closed_minus_C", cf.c - solved.c}};
        for (const auto& [name, d] : diffs) {
            rep.constant(name, d.str());
            if (!d.is_zero()) differs = true;
        }
        if (differs)
            rep.note("printed closed forms disagree with the solved system; the linear "
                     "system is authoritative");
        else
            rep.note("printed closed forms agree with the solved system");
        rep.note("the D, E, F legs reuse the authoritative B and agree by construction");
    } catch (const DegenerateTriple& e) {
        rep.note(std::string("closed forms not evaluable: ") + e.what());
    }
}

} // namespace

QHCoefficients qh_coefficients(const QHStructure& st) {
    const QHSystem sys = qh_system(st, msym(Var::ms), msym(Var::mt), msym(Var::mu));
    const RatFunc det = determinant(sys.mm);
    if (det.is_zero()) throw DegenerateTriple("regression system is singular for all triples");
    const std::vector<RatFunc> abc = solve_linear(sys.mm, sys.rhs);
    QHCoefficients q;
    q.a = abc[0];
    q.b = abc[1];
    q.c = abc[2];
    q.d = RatFunc(-st.beta11) * q.b;
    q.e = RatFunc(-st.alpha11) * msym(Var::ms) * q.b;
    q.f = -q.b * msym(Var::ms);
    return q;
}

QHCoefficients qh_closed_form(const QHStructure& st) {
    const QHCoefficients solved = qh_coefficients(st);
    return closed_form_at(st, msym(Var::ms), msym(Var::mt), msym(Var::mu), solved.b);
}

namespace {

void verify_qh_identities(CheckReport& rep, const QHStructure& st, const QHSystem& sys,
                          const QHCoefficients& q, const RatFunc& ms) {
    const RatFunc rows[3] = {
        sys.mm.at(0, 0) * q.a + sys.mm.at(0, 1) * q.b + sys.mm.at(0, 2) * q.c - sys.rhs[0],
        sys.mm.at(1, 0) * q.a + sys.mm.at(1, 1) * q.b + sys.mm.at(1, 2) * q.c - sys.rhs[1],
        sys.mm.at(2, 0) * q.a + sys.mm.at(2, 1) * q.b + sys.mm.at(2, 2) * q.c - sys.rhs[2]};
    const char* names[3] = {"identity_normalization", "identity_a_hat", "identity_m_2"};
    for (int i = 0; i < 3; ++i)
        if (!rows[i].is_zero()) {
            rep.verdict = Verdict::fail;
            rep.residual(names[i], rows[i].str());
        }
    const RatFunc closure = q.b * ms + q.f;
    if (!closure.is_zero()) {
        rep.verdict = Verdict::fail;
        rep.residual("B m_1(s) + F", closure.str());
    }
    if (rep.verdict == Verdict::pass)
        rep.note("normalization, a_hat and m_2 identities hold; B m_1(s) + F = 0");
}

} // namespace

CheckReport qh_solve(const MartingaleFamily& fam) {
    CheckReport rep;
    rep.check = "qh";
    const QHStructure st = qh_structure_constants(fam);
    append_structure(rep, st);
    const RatFunc ms = msym(Var::ms), mt = msym(Var::mt), mu = msym(Var::mu);
    const QHSystem sys = qh_system(st, ms, mt, mu);
    const RatFunc det = determinant(sys.mm);
    rep.constant("det(Mm)", det.str());
    if (det.is_zero()) {
        rep.verdict = Verdict::degenerate;
        rep.note("regression system is singular for all triples");
        return rep;
    }
    const QHCoefficients q = qh_coefficients(st);
    append_coefficients(rep, q);
    verify_qh_identities(rep, st, sys, q, ms);
    append_closed_form_comparison(rep, st, ms, mt, mu, q);
    rep.note("coefficients are rational functions of the symbols m_s = m_1(s), "
             "m_t = m_1(t), m_u = m_1(u)");
    return rep;
}

CheckReport qh_solve(const MartingaleFamily& fam, const Rational& s, const Rational& t,
                     const Rational& u) {
    CheckReport rep;
    rep.check = "qh";
    rep.note("triple (s, t, u) = (" + to_string(s) + ", " + to_string(t) + ", " + to_string(u) +
             ")");
    const QHStructure st = qh_structure_constants(fam);
    append_structure(rep, st);
    const RatFunc ms(eval_t(st.m1, s)), mt(eval_t(st.m1, t)), mu(eval_t(st.m1, u));
    rep.constant("m_1(s)", to_string(ms.constant_value()));
    rep.constant("m_1(t)", to_string(mt.constant_value()));
    rep.constant("m_1(u)", to_string(mu.constant_value()));
    const QHSystem sys = qh_system(st, ms, mt, mu);
    const RatFunc det = determinant(sys.mm);
    rep.constant("det(Mm)", det.str());
    if (det.is_zero()) {
        rep.verdict = Verdict::degenerate;
        rep.note("regression determinant vanishes at this triple");
        return rep;
    }
    const std::vector<RatFunc> abc = solve_linear(sys.mm, sys.rhs);
    QHCoefficients q{abc[0], abc[1], abc[2], RatFunc(-st.beta11) * abc[1],
                     RatFunc(-st.alpha11) * ms * abc[1], -abc[1] * ms};
    append_coefficients(rep, q);
    verify_qh_identities(rep, st, sys, q, ms);
    append_closed_form_comparison(rep, st, ms, mt, mu, q);
    return rep;
}

CheckReport qh_closed_form_eval(const QHStructure& st) {
    CheckReport rep;
    rep.check = "qh-closed-form";
    append_structure(rep, st);
    const QHCoefficients solved = qh_coefficients(st);
    append_coefficients(rep, solved);
    append_closed_form_comparison(rep, st, msym(Var::ms), msym(Var::mt), msym(Var::mu), solved);
    return rep;
}

CheckReport qh_closed_form_eval(const QHStructure& st, const Rational& s, const Rational& t,
                                const Rational& u) {
    CheckReport rep;
    rep.check = "qh-closed-form";
    rep.note("triple (s, t, u) = (" + to_string(s) + ", " + to_string(t) + ", " + to_string(u) +
             ")");
    const RatFunc ms(eval_t(st.m1, s)), mt(eval_t(st.m1, t)), mu(eval_t(st.m1, u));
    const QHSystem sys = qh_system(st, ms, mt, mu);
    if (determinant(sys.mm).is_zero())
        throw DegenerateTriple("regression determinant vanishes at this triple");
    const std::vector<RatFunc> abc = solve_linear(sys.mm, sys.rhs);
    QHCoefficients solved{abc[0], abc[1], abc[2], RatFunc(-st.beta11) * abc[1],
                          RatFunc(-st.alpha11) * ms * abc[1], -abc[1] * ms};
    append_coefficients(rep, solved);
    append_closed_form_comparison(rep, st, ms, mt, mu, solved);
    return rep;
}

CheckReport check_m2_reversed(const MartingaleFamily& fam) {
    const int cap = fam.model().max_order();
    if (fam.order() < 2 || cap < 4)
        throw InsufficientMoments("m_2 checks need family order 2 and moments to order 4");
    CheckReport rep;
    rep.check = "m2-reversed";
    const RatFunc m2 = second_moment(fam, 2);
    if (m2.is_zero()) {
        rep.verdict = Verdict::degenerate;
        rep.note("m_2 vanishes identically");
        return rep;
    }

    bool ok = true;
    for (int n = 0; n <= fam.order(); ++n) {
        if (2 + n > cap) {
            rep.note("n = " + std::to_string(n) + " skipped: beyond the moment capacity");
            continue;
        }
        const RatFunc ratio = cross_moment(fam, 2, n) / m2;
        if (ratio.is_constant()) {
            rep.constant(chi_name(n, 2), to_string(ratio.constant_value()));
        } else {
            ok = false;
            rep.residual(chi_name(n, 2), ratio.str());
        }
    }
    rep.verdict = ok ? Verdict::pass : Verdict::fail;
    if (ok) rep.note("M_2(s)/m_2(s) is a reversed martingale");

    // Uniqueness backing: the regression system stays nonsingular on a grid
    // of triples, and its symbolic determinant is compared with the printed
    // expansion.
    try {
        const QHStructure st = qh_structure_constants(fam);
        const RatFunc ms = msym(Var::ms), mu = msym(Var::mu);
        const RatFunc det = determinant(qh_system(st, ms, msym(Var::mt), mu).mm);
        const RatFunc printed = printed_determinant(st, ms, mu);
        rep.constant("det(Mm)", det.str());
        rep.constant("det_printed", printed.str());
        if (det == printed) {
            rep.note("symbolic determinant matches the printed expansion");
        } else {
            rep.note("symbolic determinant differs from the printed expansion; reported as "
                     "data, the computed determinant is authoritative");
            rep.constant("det_minus_printed", (det - printed).str());
        }
        std::array<Rational, kVarCount> pt{};
        pt[static_cast<std::size_t>(Var::ms)] = 1;
        pt[static_cast<std::size_t>(Var::mu)] = 4;
        try {
            rep.constant("det(Mm)@(m_s,m_u)=(1,4)", to_string(det.eval(pt)));
        } catch (const DegenerateAtPoint&) {
            rep.note("determinant not evaluable at (m_s, m_u) = (1, 4)");
        }
        const std::array<std::array<Rational, 3>, 3> triples{
            {{Rational(1), Rational(2), Rational(4)},
             {Rational(1, 2), Rational(1), Rational(2)},
             {Rational(2), Rational(3), Rational(5)}}};
        bool grid_ok = true;
        for (const auto& tr : triples) {
            const CheckReport sub = qh_solve(fam, tr[0], tr[1], tr[2]);
            if (sub.verdict != Verdict::pass) grid_ok = false;
        }
        if (grid_ok)
            rep.note("regression solvable and consistent across the triple grid");
        else {
            rep.note("regression degenerate or inconsistent on the triple grid");
            if (rep.verdict == Verdict::pass) rep.verdict = Verdict::degenerate;
        }
    } catch (const HypothesisViolated& e) {
        rep.note(std::string("structure constants unavailable: ") + e.what());
    } catch (const InsufficientMoments& e) {
        rep.note(std::string("structure constants unavailable: ") + e.what());
    }
    return rep;
}

} // namespace polymart
