#include "polymart/moment_model.hpp"

#include <algorithm>

#include "polymart/linalg.hpp"

namespace polymart {

const std::vector<Rational>& default_validation_grid() {
    static const std::vector<Rational> grid = {Rational(1, 2), Rational(1), Rational(2),
                                               Rational(3)};
    return grid;
}

MomentModel::MomentModel(std::string name, std::vector<RatFunc> g_from_zero)
    : name_(std::move(name)), g_(std::move(g_from_zero)) {
    for (const auto& gn : g_)
        if (gn.uses(Var::s) || gn.uses(Var::u) || gn.uses(Var::ms) || gn.uses(Var::mt) ||
            gn.uses(Var::mu))
            throw InvalidParameter("moment functions may depend on t only");
}

const RatFunc& MomentModel::g(int n) const {
    if (n < 0 || n > max_order())
        throw OrderOutOfRange("moment order " + std::to_string(n) + " outside [0, " +
                              std::to_string(max_order()) + "]");
    return g_[static_cast<std::size_t>(n)];
}

Rational MomentModel::g_at(int n, const Rational& time) const {
    std::array<Rational, kVarCount> point{};
    point[static_cast<std::size_t>(Var::t)] = time;
    return g(n).eval(point);
}

bool MomentModel::polynomial_in_time() const {
    return std::all_of(g_.begin(), g_.end(), [](const RatFunc& f) { return f.is_polynomial(); });
}

void MomentModel::validate(const std::vector<Rational>& grid) const {
    for (int n = 1; n <= max_order(); ++n) {
        Rational at_zero;
        try {
            at_zero = g_at(n, 0);
        } catch (const DegenerateAtPoint&) {
            throw NotAtOrigin(n);
        }
        if (at_zero != 0) throw NotAtOrigin(n);
    }
    // Feasibility: the truncated Hankel matrix [nu_{i+j}] of the moment
    // sequence at each grid time must have positive leading principal minors.
    const int half = max_order() / 2;
    for (const auto& tau : grid) {
        std::vector<Rational> nu(static_cast<std::size_t>(max_order()) + 1);
        nu[0] = 1;
        for (int n = 1; n <= max_order(); ++n) nu[static_cast<std::size_t>(n)] = g_at(n, tau);
        for (int k = 0; k <= half; ++k) {
            std::vector<std::vector<Rational>> h(static_cast<std::size_t>(k) + 1,
                                                 std::vector<Rational>(static_cast<std::size_t>(k) + 1));
            for (int i = 0; i <= k; ++i)
                for (int j = 0; j <= k; ++j)
                    h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                        nu[static_cast<std::size_t>(i + j)];
            if (rational_det(h) <= 0) throw MomentInfeasible(to_string(tau), k + 1);
        }
    }
}

MomentModel MomentModel::from_moments(std::string name, std::vector<RatFunc> g,
                                      const std::vector<Rational>& grid) {
    std::vector<RatFunc> full;
    full.reserve(g.size() + 1);
    full.emplace_back(1);
    for (auto& f : g) full.push_back(std::move(f));
    MomentModel m(std::move(name), std::move(full));
    m.validate(grid);
    return m;
}

MomentModel MomentModel::from_cumulants(std::string name, const std::vector<RatFunc>& kappa) {
    const int order = static_cast<int>(kappa.size());
    std::vector<RatFunc> g(static_cast<std::size_t>(order) + 1);
    g[0] = RatFunc(1);
    for (int n = 1; n <= order; ++n) {
        RatFunc acc;
        for (int j = 1; j <= n; ++j)
            acc += RatFunc(Rational(binomial(static_cast<unsigned>(n - 1),
                                             static_cast<unsigned>(j - 1)))) *
                   kappa[static_cast<std::size_t>(j - 1)] * g[static_cast<std::size_t>(n - j)];
        g[static_cast<std::size_t>(n)] = std::move(acc);
    }
    MomentModel m(std::move(name), std::move(g));
    m.validate(default_validation_grid());
    return m;
}

namespace {

void require_builtin_order(int order) {
    if (order < 2) throw InvalidParameter("builtin models need order at least 2");
}

} // namespace

MomentModel MomentModel::wiener(int order) {
    require_builtin_order(order);
    std::vector<RatFunc> kappa(static_cast<std::size_t>(order));
    kappa[1] = RatFunc(MPoly::variable(Var::t));
    return from_cumulants("wiener", kappa);
}

MomentModel MomentModel::poisson(const Rational& lambda, int order) {
    require_builtin_order(order);
    if (lambda <= 0) throw InvalidParameter("poisson intensity must be positive");
    std::vector<RatFunc> kappa(static_cast<std::size_t>(order),
                               RatFunc(MPoly::term(lambda, Var::t, 1)));
    return from_cumulants("poisson:" + to_string(lambda), kappa);
}

MomentModel MomentModel::gamma_process(int order) {
    require_builtin_order(order);
    std::vector<RatFunc> kappa(static_cast<std::size_t>(order));
    for (int n = 1; n <= order; ++n)
        kappa[static_cast<std::size_t>(n - 1)] =
            RatFunc(MPoly::term(Rational(factorial(static_cast<unsigned>(n - 1))), Var::t, 1));
    return from_cumulants("gamma", kappa);
}

MomentModel MomentModel::bernoulli_jumps(const Rational& lambda, int order) {
    require_builtin_order(order);
    if (lambda <= 0) throw InvalidParameter("jump intensity must be positive");
    std::vector<RatFunc> kappa(static_cast<std::size_t>(order));
    for (int n = 2; n <= order; n += 2)
        kappa[static_cast<std::size_t>(n - 1)] = RatFunc(MPoly::term(lambda, Var::t, 1));
    return from_cumulants("bernoulli-jumps:" + to_string(lambda), kappa);
}

MomentModel MomentModel::from_spec(const std::string& spec, int order) {
    std::string name = spec;
    std::string params;
    if (const auto colon = spec.find(':'); colon != std::string::npos) {
        name = spec.substr(0, colon);
        params = spec.substr(colon + 1);
    }
    const Rational lambda = params.empty() ? Rational(1) : parse_rational(params);
    if (name == "wiener") {
        if (!params.empty()) throw InvalidParameter("wiener takes no parameter");
        return wiener(order);
    }
    if (name == "poisson") return poisson(lambda, order);
    if (name == "gamma") {
        if (!params.empty()) throw InvalidParameter("gamma takes no parameter");
        return gamma_process(order);
    }
    if (name == "bernoulli-jumps") return bernoulli_jumps(lambda, order);
    throw UnknownModel(name);
}

IncrementMoments::IncrementMoments(const MomentModel& model, int order) {
    if (order < 0 || order > model.max_order())
        throw OrderOutOfRange("increment moments of order " + std::to_string(order) +
                              " need model moments up to that order");
    gamma_.resize(static_cast<std::size_t>(order) + 1);
    gamma_[0] = RatFunc(1);
    const MPoly s_var = MPoly::variable(Var::s);
    for (int n = 1; n <= order; ++n) {
        // gamma_n(s,t) = g_n(t) - sum_{j=1..n} C(n,j) g_j(s) gamma_{n-j}(s,t)
        RatFunc acc = model.g(n);
        for (int j = 1; j <= n; ++j) {
            const RatFunc gj_s = model.g(j).subst(Var::t, s_var);
            acc -= RatFunc(Rational(binomial(static_cast<unsigned>(n),
                                             static_cast<unsigned>(j)))) *
                   gj_s * gamma_[static_cast<std::size_t>(n - j)];
        }
        gamma_[static_cast<std::size_t>(n)] = std::move(acc);
    }
    // gamma_n(s, s) = 0 for n >= 1 is forced by the recursion; a violation
    // means the algebra below it broke.
    const MPoly t_var = MPoly::variable(Var::t);
    for (int n = 1; n <= order; ++n)
        if (!gamma_[static_cast<std::size_t>(n)].subst(Var::s, t_var).is_zero())
            throw std::logic_error("increment moment does not vanish on the diagonal");
}

const RatFunc& IncrementMoments::gamma(int n) const {
    if (n < 0 || n > order()) throw OrderOutOfRange("increment moment order out of range");
    return gamma_[static_cast<std::size_t>(n)];
}

Rational IncrementMoments::gamma_at(int n, const Rational& s, const Rational& t) const {
    if (s > t) throw TimeOrderViolation("increment over [s, t] needs s <= t");
    std::array<Rational, kVarCount> point{};
    point[static_cast<std::size_t>(Var::s)] = s;
    point[static_cast<std::size_t>(Var::t)] = t;
    return gamma(n).eval(point);
}

IncrementMoments increment_moments(const MomentModel& model, int order) {
    return IncrementMoments(model, order);
}

CheckReport levy_check(const MomentModel& model, int order) {
    if (order < 1 || order > model.max_order())
        throw OrderOutOfRange("levy check order outside the model's range");
    if (!model.polynomial_in_time())
        throw NonPolynomialTime("stationarity screen needs polynomial moment functions");

    const IncrementMoments inc(model, order);
    CheckReport report;
    report.check = "levy";
    const MPoly shifted = MPoly::variable(Var::s) + MPoly::variable(Var::t);
    for (int n = 1; n <= order; ++n) {
        // Increment moment over [s, s+t] minus the one-sided moment at t.
        const RatFunc residual = inc.gamma(n).subst(Var::t, shifted) - model.g(n);
        if (!residual.is_zero()) report.verdict = Verdict::fail;
        report.residual("n=" + std::to_string(n), residual.str());
    }
    if (report.verdict == Verdict::pass)
        report.note("increment moments over [s, s+t] match the one-sided moments at t up to order " +
                    std::to_string(order));
    return report;
}

} // namespace polymart
