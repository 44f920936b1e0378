#pragma once

#include "polymart/martingale.hpp"
#include "polymart/report.hpp"

namespace polymart {

// Interpolation weights a = (m1(u)-m1(t))/(m1(u)-m1(s)), b = 1 - a written
// out explicitly; a + b = 1 holds symbolically. m1 must be a function of t
// alone. The symbolic overload returns functions of (s, t, u).
struct HarnessPair {
    RatFunc a;
    RatFunc b;
};
HarnessPair harness_coefficients(const RatFunc& m1);
HarnessPair harness_coefficients(const RatFunc& m1, const Rational& s, const Rational& t,
                                 const Rational& u);

// Conditional moments of the increment X_t - X_s, computed through the
// family's own conditional-expectation operator, must be free of the state
// variable and reproduce the model's increment moments.
CheckReport check_independent_increments(const MartingaleFamily& fam);

// E M_n M_m / m_n constant (= chi_{m,n}) for every m; then M_n/m_n is a
// reversed martingale. The overload without n aggregates n = 1..N.
CheckReport check_reversed_martingale(const MartingaleFamily& fam, int n);
CheckReport check_reversed_martingale(const MartingaleFamily& fam);

// E M_n M_m == 0 for n != m, plus the equivalence with the reversed-
// martingale verdicts whenever the m_n are pairwise distinct functions.
CheckReport check_orthogonality(const MartingaleFamily& fam);

// Gram-Schmidt over the family with coefficients required to be constant in
// time. l is lower triangular: row n expands the new member over M_0..M_n.
struct GramSchmidt {
    std::vector<std::vector<Rational>> l;
    MartingaleFamily family;
};
GramSchmidt constant_gram_schmidt(const MartingaleFamily& fam);
CheckReport check_gram_schmidt(const MartingaleFamily& fam);

CheckReport check_harness(const MartingaleFamily& fam);

// Structure constants of a harness with E M_1 M_2 == 0, extracted from the
// linearizations of M_1^2 and M_1 M_2 and the cross moment E M_3 M_1:
//   M_1^2   = (alpha21 m1 + beta21) M_2 + (alpha11 m1 + beta11) M_1 + m1
//   M_1 M_2 = (alpha32 m1 + beta32) M_3 + (alpha22 m1 + beta22) M_2
//           + (alpha12 m1 + beta12) M_1
//   E M_3 M_1 = chi31 m1
// with a_hat = alpha32 chi31 + alpha12, a = beta32 chi31 + beta12,
// kappa = 1 + alpha11 beta11 + alpha21 a, lambda = beta21 a_hat - alpha21 a.
struct QHStructure {
    Rational alpha21, beta21, alpha11, beta11;
    Rational alpha32, beta32, alpha22, beta22, alpha12, beta12;
    Rational chi31;
    Rational a_hat, a, kappa, lambda;
    RatFunc m1, m2; // functions of t
};
QHStructure qh_structure_constants(const MartingaleFamily& fam);

// Coefficients of the two-sided quadratic regression
//   E(M_2(t) | F_{s,u}) = A M_2(s) + B M_1(s)M_1(u) + C M_2(u)
//                       + D M_1(s) + E M_1(u) + F.
// Symbolic values are rational functions of the symbols m_s, m_t, m_u.
struct QHCoefficients {
    RatFunc a, b, c, d, e, f;
};

// Authoritative solution of the three moment identities (the linear system
// in (A, B, C)); d, e, f follow as -beta11*B, -alpha11*m_s*B, -m_s*B.
// Throws DegenerateTriple when the system determinant vanishes identically.
QHCoefficients qh_coefficients(const QHStructure& st);

// The closed-form expressions printed for (A, B, C), evaluated verbatim;
// d, e, f use the authoritative B. These disagree with qh_coefficients in
// general and are reported for comparison only.
QHCoefficients qh_closed_form(const QHStructure& st);

// Reports on the regression: symbolic over (m_s, m_t, m_u), or at a concrete
// time triple s < t < u. Verdict degenerate when the system determinant
// vanishes there. Both append the closed-form comparison.
CheckReport qh_solve(const MartingaleFamily& fam);
CheckReport qh_solve(const MartingaleFamily& fam, const Rational& s, const Rational& t,
                     const Rational& u);
CheckReport qh_closed_form_eval(const QHStructure& st);
CheckReport qh_closed_form_eval(const QHStructure& st, const Rational& s, const Rational& t,
                                const Rational& u);

// chi_{n,2} = E M_2 M_n / m_2 constant for all n, backed by the regression
// system's nonvanishing determinant; also compares the symbolic determinant
// against its printed expansion and reports any mismatch as data.
CheckReport check_m2_reversed(const MartingaleFamily& fam);

} // namespace polymart
