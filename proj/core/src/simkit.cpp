#include "polymart/simkit.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <thread>
#include <utility>

#include "polymart/errors.hpp"

using ordered_json = nlohmann::ordered_json;

namespace polymart {

namespace {

// Paths are generated in chunks of this many; each chunk owns an RNG stream
// derived from (master seed, chunk index) alone. Worker threads pick up
// whole chunks, so the batch does not depend on the worker count.
constexpr std::size_t kChunk = 4096;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// splitmix64 stream keyed by (seed, chunk).
class ChunkRng {
public:
    ChunkRng(std::uint64_t seed, std::uint64_t chunk)
        : state_(mix64(seed ^ mix64(chunk + 0x9E3779B97F4A7C15ull))) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        return mix64(z);
    }

    // Strictly inside (0, 1): 53 significant bits shifted off the half-step.
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Box-Muller; the companion variate is kept for the next call.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = next_unit();
        const double v = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Knuth's product method, splitting large means so the running product
    // stays far from underflow. Exact by infinite divisibility.
    std::uint64_t next_poisson(double mean) {
        std::uint64_t total = 0;
        while (mean > 16.0) {
            total += poisson_small(16.0);
            mean -= 16.0;
        }
        return total + poisson_small(mean);
    }

    // Marsaglia-Tsang squeeze for shape >= 1; shapes below 1 are boosted by
    // one and scaled back with U^(1/shape).
    double next_gamma(double shape) {
        if (shape < 1.0) {
            const double g = next_gamma(shape + 1.0);
            return g * std::pow(next_unit(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x;
            double v;
            do {
                x = next_normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = next_unit();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

private:
    std::uint64_t state_;
    double spare_ = 0;
    bool have_spare_ = false;

    std::uint64_t poisson_small(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= next_unit();
        } while (p > limit);
        return k - 1;
    }
};

enum class Law { wiener, poisson, gamma, bernoulli_jumps };

struct ProcessSpec {
    Law law;
    double lambda; // jump intensity for poisson / bernoulli-jumps
};

ProcessSpec parse_process(const std::string& process) {
    std::string name = process;
    std::string params;
    if (const auto colon = process.find(':'); colon != std::string::npos) {
        name = process.substr(0, colon);
        params = process.substr(colon + 1);
    }
    const Rational lambda = params.empty() ? Rational(1) : parse_rational(params);
    if (lambda <= 0) throw InvalidParameter("intensity must be positive: '" + process + "'");
    if (name == "wiener") {
        if (!params.empty()) throw InvalidParameter("wiener takes no parameter");
        return {Law::wiener, 0.0};
    }
    if (name == "poisson") return {Law::poisson, to_double(lambda)};
    if (name == "gamma") {
        if (!params.empty()) throw InvalidParameter("gamma takes no parameter");
        return {Law::gamma, 0.0};
    }
    if (name == "bernoulli-jumps") return {Law::bernoulli_jumps, to_double(lambda)};
    throw UnknownModel(name);
}

double sample_increment(ChunkRng& rng, const ProcessSpec& spec, double dt) {
    switch (spec.law) {
    case Law::wiener:
        return std::sqrt(dt) * rng.next_normal();
    case Law::poisson:
        return static_cast<double>(rng.next_poisson(spec.lambda * dt));
    case Law::gamma:
        return rng.next_gamma(dt);
    case Law::bernoulli_jumps: {
        const std::uint64_t jumps = rng.next_poisson(spec.lambda * dt);
        long long signed_sum = 0;
        for (std::uint64_t i = 0; i < jumps; ++i)
            signed_sum += rng.next_unit() < 0.5 ? 1 : -1;
        return static_cast<double>(signed_sum);
    }
    }
    return 0.0; // unreachable
}

void fill_chunk(PathBatch& batch, const ProcessSpec& spec, const std::vector<double>& dts,
                std::size_t chunk) {
    ChunkRng rng(batch.seed, chunk);
    const std::size_t n_times = batch.grid.size();
    const std::size_t first = chunk * kChunk;
    const std::size_t last = std::min(first + kChunk, batch.n_paths);
    for (std::size_t p = first; p < last; ++p) {
        double state = 0.0;
        double* row = batch.states.data() + p * n_times;
        for (std::size_t i = 0; i < n_times; ++i) {
            if (dts[i] > 0.0) state += sample_increment(rng, spec, dts[i]);
            row[i] = state;
        }
    }
}

// Fixed-order pairwise reduction; the same tree for every caller keeps the
// statistics bit-identical no matter how the paths were generated.
double pairwise_sum(const double* a, std::size_t n) {
    if (n <= 32) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += a[i];
        return acc;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(a, half) + pairwise_sum(a + half, n - half);
}

struct SampleStats {
    double mean;
    double se; // sqrt of the unbiased variance over n
    bool all_equal;
};

SampleStats summarize(const std::vector<double>& x) {
    const std::size_t n = x.size();
    const double mean = pairwise_sum(x.data(), n) / static_cast<double>(n);
    std::vector<double> dev2(n);
    bool all_equal = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mean;
        dev2[i] = d * d;
        all_equal = all_equal && x[i] == x[0];
    }
    const double var = pairwise_sum(dev2.data(), n) / static_cast<double>(n - 1);
    return {mean, std::sqrt(var / static_cast<double>(n)), all_equal};
}

std::size_t grid_index(const PathBatch& batch, const Rational& time, const char* role) {
    for (std::size_t i = 0; i < batch.grid.size(); ++i)
        if (batch.grid[i] == time) return i;
    throw GridMismatch(std::string(role) + " = " + to_string(time) +
                       " is not on the batch grid");
}

// Coefficients of p at the concrete time, as doubles for the fast per-path
// Horner evaluation. This is the single exact-to-double boundary.
std::vector<double> coeffs_at(const SpaceTimePoly& p, const Rational& time) {
    if (p.is_zero()) return {0.0};
    std::array<Rational, kVarCount> point{};
    point[static_cast<std::size_t>(Var::t)] = time;
    std::vector<double> c(static_cast<std::size_t>(p.degree() + 1));
    for (int k = 0; k <= p.degree(); ++k)
        c[static_cast<std::size_t>(k)] = to_double(p.coeff(k).eval(point));
    return c;
}

double horner(const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
}

MCTestResult from_samples(std::string stat, const std::vector<double>& samples, double target,
                          const PathBatch& batch, double z_max) {
    if (samples.size() < 2)
        throw DegenerateVariance("standard error needs at least 2 paths");
    const SampleStats st = summarize(samples);
    if (st.all_equal)
        throw DegenerateVariance("all samples of " + stat + " are equal; no z-score");
    MCTestResult r;
    r.stat = std::move(stat);
    r.estimate = st.mean;
    r.se = st.se;
    r.z = (st.mean - target) / st.se;
    r.n_paths = batch.n_paths;
    r.seed = batch.seed;
    r.z_max = z_max;
    r.pass = std::fabs(r.z) < z_max;
    return r;
}

std::string defect_stat(int n, int k, const Rational& s, const Rational& t) {
    return "E[(M_" + std::to_string(n) + "(t)-M_" + std::to_string(n) + "(s))M_" +
           std::to_string(k) + "(s)], s=" + to_string(s) + ", t=" + to_string(t);
}

} // namespace

PathBatch sample_paths(const std::string& process, const std::vector<Rational>& grid,
                       std::size_t n_paths, std::uint64_t seed, int workers) {
    const ProcessSpec spec = parse_process(process);
    if (grid.empty()) throw InvalidGrid("empty time grid");
    if (grid.front() < 0) throw InvalidGrid("grid starts before 0");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i - 1] < grid[i]))
            throw InvalidGrid("grid times must be strictly ascending at index " +
                              std::to_string(i));
    if (n_paths == 0) throw InvalidParameter("n_paths must be at least 1");

    PathBatch batch;
    batch.process = process;
    batch.grid = grid;
    batch.grid_d.reserve(grid.size());
    for (const auto& time : grid) batch.grid_d.push_back(to_double(time));
    batch.n_paths = n_paths;
    batch.seed = seed;
    batch.states.resize(n_paths * grid.size());

    // Segment lengths from exact differences, converted once. dts[0] spans
    // [0, grid[0]] and is 0 exactly when the grid starts at the origin.
    std::vector<double> dts(grid.size());
    dts[0] = to_double(grid[0]);
    for (std::size_t i = 1; i < grid.size(); ++i) dts[i] = to_double(grid[i] - grid[i - 1]);

    const std::size_t chunks = (n_paths + kChunk - 1) / kChunk;
    const std::size_t pool = std::min<std::size_t>(chunks, workers < 1 ? 1 : workers);
    if (pool <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) fill_chunk(batch, spec, dts, c);
        return batch;
    }
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (std::size_t w = 0; w < pool; ++w)
        threads.emplace_back([&, w] {
            for (std::size_t c = w; c < chunks; c += pool) fill_chunk(batch, spec, dts, c);
        });
    for (auto& th : threads) th.join();
    return batch;
}

std::string MCTestResult::to_json_string(int indent) const {
    ordered_json j;
    j["stat"] = stat;
    j["estimate"] = estimate;
    j["se"] = se;
    j["z"] = z;
    j["n_paths"] = n_paths;
    j["seed"] = seed;
    j["verdict"] = pass ? "pass" : "fail";
    return j.dump(indent);
}

std::vector<MCTestResult> mc_martingale_test(const std::vector<SpaceTimePoly>& members,
                                             const MomentModel& model, const PathBatch& batch,
                                             int n, const Rational& s, const Rational& t, int K,
                                             double z_max) {
    const int order = static_cast<int>(members.size()) - 1;
    if (n < 0 || n > order)
        throw OrderOutOfRange("member index " + std::to_string(n) + " outside 0.." +
                              std::to_string(order));
    if (K < 0 || K > order)
        throw OrderOutOfRange("test basis size " + std::to_string(K) + " outside 0.." +
                              std::to_string(order));
    if (!(s < t)) throw TimeOrderViolation("need s < t, got s = " + to_string(s) +
                                           ", t = " + to_string(t));
    const std::size_t is = grid_index(batch, s, "s");
    const std::size_t it = grid_index(batch, t, "t");
    if (2 * (n + K) > model.max_order())
        throw InsufficientMoments("defect of order " + std::to_string(n) + " against basis " +
                                  std::to_string(K) + " needs moments up to " +
                                  std::to_string(2 * (n + K)) + ", model has " +
                                  std::to_string(model.max_order()));

    std::vector<MCTestResult> out;
    out.reserve(static_cast<std::size_t>(K) + 1);
    if (n == 0) {
        // M_0 is identically 1, so the defect is exactly zero before any
        // sampling happens; there is no variance to normalize by.
        for (int k = 0; k <= K; ++k) {
            MCTestResult r;
            r.stat = defect_stat(0, k, s, t);
            r.n_paths = batch.n_paths;
            r.seed = batch.seed;
            r.z_max = z_max;
            r.pass = true;
            out.push_back(std::move(r));
        }
        return out;
    }

    const std::vector<double> cn_t = coeffs_at(members[static_cast<std::size_t>(n)], t);
    const std::vector<double> cn_s = coeffs_at(members[static_cast<std::size_t>(n)], s);
    const std::size_t n_times = batch.grid.size();
    std::vector<double> defect(batch.n_paths);
    for (std::size_t p = 0; p < batch.n_paths; ++p) {
        const double* row = batch.states.data() + p * n_times;
        defect[p] = horner(cn_t, row[it]) - horner(cn_s, row[is]);
    }

    std::vector<double> samples(batch.n_paths);
    for (int k = 0; k <= K; ++k) {
        const std::vector<double> ck_s = coeffs_at(members[static_cast<std::size_t>(k)], s);
        for (std::size_t p = 0; p < batch.n_paths; ++p)
            samples[p] = defect[p] * horner(ck_s, batch.states[p * n_times + is]);
        out.push_back(from_samples(defect_stat(n, k, s, t), samples, 0.0, batch, z_max));
    }
    return out;
}

std::vector<MCTestResult> mc_martingale_test(const MartingaleFamily& fam, const PathBatch& batch,
                                             int n, const Rational& s, const Rational& t, int K,
                                             double z_max) {
    std::vector<SpaceTimePoly> members;
    members.reserve(static_cast<std::size_t>(fam.order()) + 1);
    for (int k = 0; k <= fam.order(); ++k) members.push_back(fam.member(k));
    return mc_martingale_test(members, fam.model(), batch, n, s, t, K, z_max);
}

MCTestResult mc_moment_check(const MomentModel& model, const PathBatch& batch, int n,
                             const Rational& t, double z_max) {
    if (n < 0) throw InvalidParameter("moment order must be nonnegative");
    if (2 * n > model.max_order())
        throw InsufficientMoments("moment check of order " + std::to_string(n) +
                                  " needs moments up to " + std::to_string(2 * n) +
                                  ", model has " + std::to_string(model.max_order()));
    const std::size_t it = grid_index(batch, t, "t");
    const double target = to_double(model.g_at(n, t));
    const std::size_t n_times = batch.grid.size();
    std::vector<double> samples(batch.n_paths);
    for (std::size_t p = 0; p < batch.n_paths; ++p)
        samples[p] = std::pow(batch.states[p * n_times + it], n);
    const std::string stat =
        "E[X_t^" + std::to_string(n) + "], t=" + to_string(t) + " vs " + to_string(model.g_at(n, t));
    MCTestResult r = from_samples(stat, samples, target, batch, z_max);
    return r;
}

} // namespace polymart
