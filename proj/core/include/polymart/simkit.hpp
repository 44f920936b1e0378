#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polymart/martingale.hpp"
#include "polymart/moment_model.hpp"

namespace polymart {

// A batch of sampled paths of one of the builtin processes, states in double
// precision. Generation is chunked: paths are partitioned into fixed-size
// chunks, each driven by its own counter-derived stream, so the batch is
// bit-identical for any worker count and any chunk scheduling.
struct PathBatch {
    std::string process;        // canonical spec, e.g. "wiener", "poisson:1"
    std::vector<Rational> grid; // ascending observation times, grid[0] >= 0
    std::vector<double> grid_d; // the same grid converted once
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::vector<double> states; // row-major n_paths x grid.size()

    double at(std::size_t path, std::size_t time_index) const {
        return states[path * grid.size() + time_index];
    }
};

// Samples n_paths independent paths observed on the grid. The process starts
// at 0, so the first column holds the increment over [0, grid[0]] (exactly 0
// when grid[0] = 0). Accepted specs are those of MomentModel::from_spec.
PathBatch sample_paths(const std::string& process, const std::vector<Rational>& grid,
                       std::size_t n_paths, std::uint64_t seed, int workers = 1);

// One Monte Carlo statistic with its CLT standard error. The verdict is
// |z| < z_max; se > 0 whenever the samples are not all equal.
struct MCTestResult {
    std::string stat;
    double estimate = 0;
    double se = 0;
    double z = 0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    double z_max = 4.0;
    bool pass = false;

    std::string to_json_string(int indent = 2) const;
};

// Estimates E[(M_n(X_t, t) - M_n(X_s, s)) M_k(X_s, s)] for k = 0..K, all of
// which vanish exactly when the members are martingales. Members may be
// passed raw (uncertified) to measure the defect of a corrupted family.
// n = 0 short-circuits to exact zeros: the defect of the constant member is
// identically 0 and has no meaningful z-score.
std::vector<MCTestResult> mc_martingale_test(const std::vector<SpaceTimePoly>& members,
                                             const MomentModel& model, const PathBatch& batch,
                                             int n, const Rational& s, const Rational& t, int K,
                                             double z_max = 4.0);
std::vector<MCTestResult> mc_martingale_test(const MartingaleFamily& fam, const PathBatch& batch,
                                             int n, const Rational& s, const Rational& t, int K,
                                             double z_max = 4.0);

// Sample mean of X_t^n against the exact moment g_n(t).
MCTestResult mc_moment_check(const MomentModel& model, const PathBatch& batch, int n,
                             const Rational& t, double z_max = 4.0);

} // namespace polymart
