#pragma once

#include <string>
#include <vector>

#include "polymart/ratfunc.hpp"
#include "polymart/report.hpp"

namespace polymart {

// Times at which new moment sequences are screened for feasibility
// (positive-definite truncated Hankel matrices): 1/2, 1, 2, 3.
const std::vector<Rational>& default_validation_grid();

// A process model given by its one-dimensional moment functions
// g_n(t) = E X_t^n for n = 1..max_order, each a rational function of t with
// g_0 = 1. Models start at the origin: g_n(0) = 0 for n >= 1.
class MomentModel {
public:
    static MomentModel wiener(int order);
    static MomentModel poisson(const Rational& lambda, int order);
    static MomentModel gamma_process(int order);
    static MomentModel bernoulli_jumps(const Rational& lambda, int order);

    // "wiener", "poisson:3/2", "gamma", "bernoulli-jumps:2". A missing
    // parameter defaults to 1.
    static MomentModel from_spec(const std::string& spec, int order);

    // g[k] is the moment of order k+1, univariate in Var::t. Validates the
    // origin condition and Hankel feasibility on the grid.
    static MomentModel from_moments(std::string name, std::vector<RatFunc> g,
                                    const std::vector<Rational>& grid = default_validation_grid());

    // kappa[k] is the cumulant of order k+1; moments follow from the
    // cumulant-to-moment recursion.
    static MomentModel from_cumulants(std::string name, const std::vector<RatFunc>& kappa);

    const std::string& name() const { return name_; }
    int max_order() const { return static_cast<int>(g_.size()) - 1; }

    const RatFunc& g(int n) const;
    Rational g_at(int n, const Rational& time) const;

    bool polynomial_in_time() const;

    friend bool operator==(const MomentModel&, const MomentModel&) = default;

private:
    MomentModel(std::string name, std::vector<RatFunc> g_from_zero);
    void validate(const std::vector<Rational>& grid) const;

    std::string name_;
    std::vector<RatFunc> g_; // index n = order, g_[0] = 1
};

// Moments of the increment X_t - X_s for models with independent increments:
// gamma_n(s, t) as bivariate rational functions of (s, t), computed by the
// triangular recursion obtained from expanding X_t^n = ((X_t - X_s) + X_s)^n
// and taking expectations.
class IncrementMoments {
public:
    IncrementMoments(const MomentModel& model, int order);

    int order() const { return static_cast<int>(gamma_.size()) - 1; }
    const RatFunc& gamma(int n) const;
    Rational gamma_at(int n, const Rational& s, const Rational& t) const;

private:
    std::vector<RatFunc> gamma_;
};

IncrementMoments increment_moments(const MomentModel& model, int order);

// Stationarity screen: for each n <= order, the residual
// gamma_n(s, s + t) - g_n(t) must vanish identically when increments are
// homogeneous in time. Requires polynomial moment functions.
CheckReport levy_check(const MomentModel& model, int order);

} // namespace polymart
