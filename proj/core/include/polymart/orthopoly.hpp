#pragma once

#include <string>
#include <vector>

#include "polymart/martingale.hpp"
#include "polymart/moment_model.hpp"

namespace polymart {

// Which moment functional a system is orthogonal under: the marginal law at
// time t, or the conditional law at time t given state y at an earlier s.
struct SystemSource {
    enum class Kind { marginal, transitional };
    Kind kind = Kind::marginal;
    Rational s;
    Rational y;
    Rational t;

    friend bool operator==(const SystemSource&, const SystemSource&) = default;
};

// Monic polynomials p_0..p_K, pairwise orthogonal under a rational moment
// functional, with exact positive norms and the three-term recurrence
//   p_{k+1} = (x - a_k) p_k - b_k p_{k-1},    b_k = |p_k|^2 / |p_{k-1}|^2.
struct OrthogonalSystem {
    SystemSource source;
    std::vector<std::vector<Rational>> coeffs; // coeffs[k]: ascending in x, monic
    std::vector<Rational> norms;               // |p_k|^2 > 0
    std::vector<Rational> rec_a;               // a_0..a_{K-1}
    std::vector<Rational> rec_b;               // b_1..b_{K-1}

    std::string to_json_string(int indent = 2) const;
    static OrthogonalSystem from_json_string(const std::string& text);

    friend bool operator==(const OrthogonalSystem&, const OrthogonalSystem&) = default;
};

// Conditional raw moments nu_k = E(X_t^k | X_s = y), k = 0..K, exact.
struct TransitionalMomentSequence {
    Rational s;
    Rational y;
    Rational t;
    std::vector<Rational> nu; // nu[0] = 1
};

// Orthogonal system of the marginal law at t from the moments g_0..g_{2K}
// evaluated there, realized through Hankel determinant ratios: norms are
// consecutive ratios of the leading principal Hankel minors, and any
// nonpositive minor aborts with the index that failed.
OrthogonalSystem marginal_orthogonal(const MomentModel& model, const Rational& t, int K);

TransitionalMomentSequence transitional_moments(const MartingaleFamily& fam, const Rational& s,
                                                const Rational& y, const Rational& t, int K);

// Orthogonal system of the conditional law at t given X_s = y. The spanning
// sequence {M_n(x, t) - M_n(y, s)}_{n >= 1} together with 1 is monic
// triangular in x, so it generates the same monic orthogonal system as the
// power basis; each spanning polynomial is first verified to have exact
// conditional mean zero.
OrthogonalSystem transitional_orthogonal(const MartingaleFamily& fam, const Rational& s,
                                         const Rational& y, const Rational& t, int K);

// Structural comparison of two equal-length monic sequences: exactly equal,
// related by a constant lower-triangular recombination a_n = sum_k l[n][k] b_k,
// or unrelated (some recombination coefficient would have to vary in time).
struct FamilyComparison {
    enum class Kind { equal, constant_recombination, unrelated };
    Kind kind = Kind::unrelated;
    std::vector<std::vector<Rational>> l; // filled unless unrelated
    std::string detail;                   // explanation when unrelated
};

FamilyComparison compare_families(const std::vector<SpaceTimePoly>& a,
                                  const std::vector<SpaceTimePoly>& b);

} // namespace polymart
