#pragma once

#include <string>
#include <vector>

#include "polymart/linalg.hpp"
#include "polymart/moment_model.hpp"

namespace polymart {

// Polynomial in the state variable x with coefficients that are rational
// functions of the time symbols. Canonical form: no trailing zero
// coefficients, so degree and leading coefficient are well defined.
class SpaceTimePoly {
public:
    SpaceTimePoly() = default;
    explicit SpaceTimePoly(std::vector<RatFunc> coeffs);

    static SpaceTimePoly monomial(int k, RatFunc coeff = RatFunc(1));
    static SpaceTimePoly constant(RatFunc c);

    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    const RatFunc& coeff(int k) const; // zero beyond the degree
    const std::vector<RatFunc>& coeffs() const { return c_; }

    SpaceTimePoly operator-() const;
    SpaceTimePoly& operator+=(const SpaceTimePoly& o);
    SpaceTimePoly& operator-=(const SpaceTimePoly& o);
    SpaceTimePoly& operator*=(const SpaceTimePoly& o);
    SpaceTimePoly& scale(const RatFunc& c);

    friend bool operator==(const SpaceTimePoly&, const SpaceTimePoly&) = default;

    // Applies to every coefficient.
    SpaceTimePoly subst_time(Var v, const MPoly& replacement) const;
    SpaceTimePoly subst_time(Var v, const Rational& value) const;

    RatFunc eval_state(const RatFunc& x) const;
    Rational eval(const Rational& x, const std::array<Rational, kVarCount>& times) const;

    std::string str(std::string_view state_name = "x") const;

private:
    std::vector<RatFunc> c_; // ascending powers of x
    void trim();
};

SpaceTimePoly operator+(SpaceTimePoly a, const SpaceTimePoly& b);
SpaceTimePoly operator-(SpaceTimePoly a, const SpaceTimePoly& b);
SpaceTimePoly operator*(SpaceTimePoly a, const SpaceTimePoly& b);

// E p(X_t, t): applies the moment functional coefficient-wise. Requires
// deg p within the model's moment capacity.
RatFunc expectation(const MomentModel& model, const SpaceTimePoly& p);

// Lower-triangular change of basis from martingales to powers of x:
// V[i][j] = C(i,j) g_{i-j}(t), so that V . (M_0..M_n)^T = (1, x, .., x^n)^T.
struct StructuralMatrix {
    int order;
    RFMatrix v;
};

class MartingaleFamily;

MartingaleFamily build_family(const MomentModel& model, int order);
MartingaleFamily certify_family(const MomentModel& model, std::vector<SpaceTimePoly> members,
                                std::string label);

// Monic polynomial martingale family M_0..M_order for a moment model.
// Immutable once built; every member carries a certification obtained by
// comparing the two conditional-expectation routes (increment expansion vs
// basis expansion) as a symbolic identity in x, s, t.
class MartingaleFamily {
public:
    const MomentModel& model() const { return model_; }
    int order() const { return static_cast<int>(members_.size()) - 1; }
    const SpaceTimePoly& member(int n) const;
    bool certified(int n) const;
    bool canonical() const { return canonical_; }
    const std::string& label() const { return label_; }

private:
    MartingaleFamily(MomentModel model, std::vector<SpaceTimePoly> members, std::string label,
                     bool canonical);

    MomentModel model_;
    std::vector<SpaceTimePoly> members_;
    std::vector<bool> certified_;
    std::vector<RatFunc> norm2_;                  // m_n for 2n <= capacity
    std::vector<std::vector<RatFunc>> cross_;     // E M_n M_m for n+m <= capacity
    std::string label_;
    bool canonical_;

    friend MartingaleFamily build_family(const MomentModel&, int);
    friend MartingaleFamily certify_family(const MomentModel&, std::vector<SpaceTimePoly>,
                                           std::string);
    friend RatFunc second_moment(const MartingaleFamily&, int);
    friend RatFunc cross_moment(const MartingaleFamily&, int, int);
};

StructuralMatrix structural_matrix(const MomentModel& model, int order);

// Coefficients c_0..c_deg(p) with p = sum_k c_k(t) M_k. Unique because the
// family is monic triangular.
std::vector<RatFunc> to_martingale_basis(const SpaceTimePoly& p, const MartingaleFamily& fam);
SpaceTimePoly from_martingale_basis(const std::vector<RatFunc>& c, const MartingaleFamily& fam);

// E(p(X_t, t) | F_s) as a polynomial in the state at time s. Symbolic form
// keeps s and t independent symbols; the concrete overload enforces s <= t.
SpaceTimePoly conditional_expectation(const SpaceTimePoly& p, const MartingaleFamily& fam);
SpaceTimePoly conditional_expectation(const SpaceTimePoly& p, const MartingaleFamily& fam,
                                      const Rational& s, const Rational& t);

// The same conditional expectation computed without the family, from the
// model's increment moments: E(p(X_t,t)|F_s) = sum over the binomial
// expansion of (X_s + increment)^k. This is the certification oracle.
SpaceTimePoly increment_conditional(const MomentModel& model, const SpaceTimePoly& p);

struct ProductLinearization {
    int i;
    int j;
    std::vector<RatFunc> delta; // M_i M_j = sum_k delta_k(t) M_k, k = 0..i+j
};

ProductLinearization linearize_product(const MartingaleFamily& fam, int i, int j);

// m_n(t) = E M_n(X_t, t)^2.
RatFunc second_moment(const MartingaleFamily& fam, int n);
// E M_n(X_t, t) M_m(X_t, t) at equal times.
RatFunc cross_moment(const MartingaleFamily& fam, int n, int m);

// E( prod_i M_{orders[i]}(X_{times[i]}, times[i]) | F_s ) expanded in the
// family at time s with exact rational coefficients phi.
struct IteratedConditional {
    Rational s;
    std::vector<Rational> times;  // strictly increasing, s < times.front()
    std::vector<int> orders;
    std::vector<Rational> phi;    // expansion on M_0(s)..M_k(s)
};

IteratedConditional iterated_conditional(const MartingaleFamily& fam, const Rational& s,
                                         const std::vector<Rational>& times,
                                         const std::vector<int>& orders);

// JSON form: {"model": name, "N": order, "members": [[coeff, ...], ...]}
// where a coefficient is "p/q" or {"num": ["p/q",...], "den": ["p/q",...]}
// with ascending powers of t. Bit-exact round trip.
std::string family_to_json(const MartingaleFamily& fam, int indent = 2);
MartingaleFamily family_from_json(const MomentModel& model, const std::string& text);

} // namespace polymart
