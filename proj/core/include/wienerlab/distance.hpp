#pragma once

// Monte Carlo estimators of distances between laws, each with a percentile
// bootstrap confidence interval.
//
// Bias directions, for reading the numbers:
//  - tv_two_samples (histogram Scheffe) is biased upward at finite N, the
//    bias shrinking roughly like sqrt(bins / N).
//  - tv_vs_density (binned Gaussian KDE against a known density) is biased
//    upward by sampling noise and by the KDE smoothing.
//  - fm_two_samples returns the exact maximum over a lattice of genuinely
//    1-Lipschitz, [-1,1]-valued piecewise-linear test functions, so it is a
//    lower bound of the empirical Fortet-Mourier distance.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "wienerlab/sampling.hpp"

namespace wienerlab {

enum class DistanceMethod { tv_kde, tv_hist, tv_grid2d, fm_dp, w1_sorted, smallball };

std::string to_string(DistanceMethod m);
DistanceMethod distance_method_from_string(const std::string& s);

struct DistanceEstimate {
    DistanceMethod method = DistanceMethod::tv_hist;
    double value = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::vector<std::size_t> n_samples;

    double ci_width() const noexcept { return ci_high - ci_low; }
};

struct BootstrapOptions {
    int replicates = 200;
    std::uint64_t seed = 0;
    double level = 0.95;
    /// Resample rows of two equal-size batches jointly (common random numbers).
    bool paired = false;
};

/// Univariate normal target N(mean, variance).
struct NormalTarget {
    double mean = 0.0;
    double variance = 1.0;

    double pdf(double x) const;
    double cdf(double x) const;
};

double standard_normal_cdf(double x);

struct KdeOptions {
    std::size_t grid_points = 2048;
    BootstrapOptions bootstrap{};
};

/// TV between the sample law and a normal density: Gaussian KDE with
/// Silverman bandwidth 1.06 sd N^(-1/5), evaluated on a grid spanning the
/// data range +- 4h by linear binning, then 1/2 int |p - q| by trapezoid plus
/// half the target mass outside the grid. Requires N >= 1000; throws
/// DegenerateSample when the sample sd is 0.
DistanceEstimate tv_vs_density(const SampleBatch& samples, const NormalTarget& target, const KdeOptions& opts = {});

struct HistogramOptions {
    /// 0 selects max(20, floor(min(N1, N2)^(1/3))).
    std::size_t bins = 0;
    BootstrapOptions bootstrap{};
};

/// Histogram Scheffe estimate 1/2 sum |p_j - q_j| on a common grid over the
/// pooled range. Requires both N >= 1000.
DistanceEstimate tv_two_samples(const SampleBatch& s1, const SampleBatch& s2, const HistogramOptions& opts = {});

using Covariance2 = std::array<std::array<double, 2>, 2>;

struct Grid2dOptions {
    std::size_t cells_per_axis = 40;
    BootstrapOptions bootstrap{};
};

/// TV between a 2-vector sample and N(0, C): empirical cell masses against
/// density-at-centre masses on a grid over +-4 sqrt(max C_ii), plus the mass
/// outside the grid from each side. Requires width 2, N >= 1e4 and C
/// positive definite.
DistanceEstimate tv_multivariate(const SampleBatch& samples, const Covariance2& cov, const Grid2dOptions& opts = {});

struct FmOptions {
    std::size_t cells = 512;
    std::size_t levels = 201;
    BootstrapOptions bootstrap{};
};

/// Fortet-Mourier distance over test functions piecewise linear on `cells`
/// equal cells of the pooled range, with node values on a lattice at least
/// as fine as 2/(levels-1) whose spacing divides the cell width (so the
/// slope bound 1 is met exactly). Maximized by dynamic programming.
/// Refining by doubling `levels - 1`, or doubling `cells` and `levels - 1`
/// together, nests the function classes, so the value never decreases.
DistanceEstimate fm_two_samples(const SampleBatch& s1, const SampleBatch& s2, const FmOptions& opts = {});

/// Exact empirical W1 = mean |sort(s1)_i - sort(s2)_i| for equal sizes.
DistanceEstimate wasserstein1(const SampleBatch& s1, const SampleBatch& s2, const BootstrapOptions& opts = {});

/// Fraction of |value| <= alpha with an exact Clopper-Pearson interval.
/// Requires N >= 1e4 and alpha > 0.
DistanceEstimate small_ball(const SampleBatch& samples, double alpha, double level = 0.95);

/// Inner FM optimizer on precomputed node weights (sum of weights must be
/// ~0). Exposed for tests and benchmarks.
double fm_lattice_max(const std::vector<double>& node_weights, double cell_width, std::size_t levels);

}  // namespace wienerlab
