#include "wienerlab/distance.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "wienerlab/errors.hpp"
#include "wienerlab/random.hpp"

namespace wienerlab {

namespace {

constexpr std::size_t kMinTwoSample = 1000;
constexpr std::size_t kMinGrid2d = 10000;
constexpr std::size_t kMinSmallBall = 10000;

void require_scalar(const SampleBatch& s, const char* op) {
    if (s.width != 1) throw InvalidArgument(std::string(op) + ": expected a scalar sample batch");
}

void require_size(const SampleBatch& s, std::size_t min, const char* op) {
    if (s.size() < min) {
        throw InvalidArgument(std::string(op) + ": need at least " + std::to_string(min) + " samples, got " +
                              std::to_string(s.size()));
    }
}

// Type-7 quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Index resampler for one or two batches. With `paired`, both batches share
// the same resampled rows.
struct Resample {
    std::vector<std::uint32_t> first;
    std::vector<std::uint32_t> second;
};

Resample draw_resample(SplitMix64& rng, std::size_t n1, std::size_t n2, bool paired) {
    Resample r;
    r.first.resize(n1);
    for (auto& i : r.first) i = static_cast<std::uint32_t>(rng.below(n1));
    if (n2 > 0) {
        if (paired) {
            r.second = r.first;
        } else {
            r.second.resize(n2);
            for (auto& i : r.second) i = static_cast<std::uint32_t>(rng.below(n2));
        }
    }
    return r;
}

// Percentile bootstrap around `value`. The interval is widened to contain
// the point estimate (biased estimators can put it outside the bootstrap
// percentiles).
template <class Replicate>
void bootstrap_ci(DistanceEstimate& est, const BootstrapOptions& opts, Replicate&& replicate) {
    if (opts.replicates <= 0) {
        est.ci_low = est.ci_high = est.value;
        return;
    }
    std::vector<double> reps(static_cast<std::size_t>(opts.replicates));
    parallel_for(reps.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t b = begin; b < end; ++b) {
            SplitMix64 rng(derive_seed(opts.seed, b));
            reps[b] = replicate(rng);
        }
    });
    std::sort(reps.begin(), reps.end());
    const double tail = (1.0 - opts.level) / 2.0;
    est.ci_low = std::min(quantile_sorted(reps, tail), est.value);
    est.ci_high = std::max(quantile_sorted(reps, 1.0 - tail), est.value);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// ---------------------------------------------------------------------------
// KDE machinery

struct LinearBins {
    double lo = 0.0;
    double step = 1.0;
    std::size_t nodes = 0;
    std::vector<std::uint32_t> left;
    std::vector<double> frac;

    LinearBins(const std::vector<double>& xs, double lo_, double step_, std::size_t nodes_)
        : lo(lo_), step(step_), nodes(nodes_), left(xs.size()), frac(xs.size()) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double pos = step > 0.0 ? (xs[i] - lo) / step : 0.0;
            auto j = static_cast<std::int64_t>(std::floor(pos));
            double f = pos - static_cast<double>(j);
            if (j < 0) {
                j = 0;
                f = 0.0;
            } else if (j >= static_cast<std::int64_t>(nodes) - 1) {
                j = static_cast<std::int64_t>(nodes) - 2;
                f = 1.0;
            }
            left[i] = static_cast<std::uint32_t>(j);
            frac[i] = f;
        }
    }

    void accumulate(std::uint32_t i, double w, std::vector<double>& out) const {
        out[left[i]] += w * (1.0 - frac[i]);
        out[left[i] + 1] += w * frac[i];
    }
};

double tv_from_binned_kde(const std::vector<double>& counts, double n, double h, double lo, double step,
                          const NormalTarget& target) {
    const std::size_t g = counts.size();
    const auto reach = static_cast<std::size_t>(std::ceil(6.0 * h / step));
    const std::size_t k_len = std::min(reach, g - 1) + 1;
    std::vector<double> kern(k_len);
    const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t o = 0; o < k_len; ++o) {
        const double u = static_cast<double>(o) * step / h;
        kern[o] = norm * std::exp(-0.5 * u * u);
    }
    std::vector<double> dens(g, 0.0);
    for (std::size_t j = 0; j < g; ++j) {
        const double c = counts[j];
        if (c == 0.0) continue;
        const std::size_t from = j >= k_len - 1 ? j - (k_len - 1) : 0;
        const std::size_t to = std::min(g - 1, j + k_len - 1);
        for (std::size_t i = from; i <= to; ++i) dens[i] += c * kern[i > j ? i - j : j - i];
    }
    double integral = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
        const double d = std::abs(dens[i] - target.pdf(lo + static_cast<double>(i) * step));
        integral += (i == 0 || i == g - 1) ? 0.5 * d : d;
    }
    integral *= step;
    const double hi = lo + static_cast<double>(g - 1) * step;
    const double target_outside = target.cdf(lo) + (1.0 - target.cdf(hi));
    return clamp01(0.5 * (integral + target_outside));
}

double silverman_bandwidth(double sd, double n) { return 1.06 * sd * std::pow(n, -0.2); }

// ---------------------------------------------------------------------------
// Fortet-Mourier lattice

struct FmLattice {
    double level_step;
    std::size_t max_jump;  // lattice steps per cell (slope exactly 1)
    std::size_t top;       // levels are 0..top, values j * level_step
};

FmLattice make_lattice(double cell_width, std::size_t cells, std::size_t levels) {
    const double coarse = 2.0 / static_cast<double>(levels - 1);
    const double ratio = cell_width / coarse;
    std::size_t m = 1;
    if (ratio > 1.0) m = std::size_t{1} << static_cast<unsigned>(std::ceil(std::log2(ratio) - 1e-12));
    const double step = cell_width / static_cast<double>(m);
    // The objective is invariant under adding a constant to the test function
    // (node weights sum to zero), so |phi| <= 1 is the same as range <= 2.
    const auto by_bound = static_cast<std::size_t>(std::floor(2.0 / step + 1e-9));
    return {step, m, std::min(by_bound, cells * m)};
}

double fm_dp(const std::vector<double>& w, const FmLattice& lat) {
    const std::size_t levels = lat.top + 1;
    std::vector<double> prev(levels);
    std::vector<double> cur(levels);
    for (std::size_t j = 0; j < levels; ++j) prev[j] = w[0] * static_cast<double>(j) * lat.level_step;
    std::deque<std::size_t> window;
    for (std::size_t node = 1; node < w.size(); ++node) {
        // cur[j] = w * phi_j + max_{|j' - j| <= m} prev[j'], sliding-window max.
        window.clear();
        std::size_t next_in = 0;
        for (std::size_t j = 0; j < levels; ++j) {
            const std::size_t hi = std::min(levels - 1, j + lat.max_jump);
            while (next_in <= hi) {
                while (!window.empty() && prev[window.back()] <= prev[next_in]) window.pop_back();
                window.push_back(next_in++);
            }
            const std::size_t lo = j >= lat.max_jump ? j - lat.max_jump : 0;
            while (window.front() < lo) window.pop_front();
            cur[j] = w[node] * static_cast<double>(j) * lat.level_step + prev[window.front()];
        }
        std::swap(prev, cur);
    }
    return std::max(0.0, *std::max_element(prev.begin(), prev.end()));
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API

std::string to_string(DistanceMethod m) {
    switch (m) {
        case DistanceMethod::tv_kde: return "tv-kde";
        case DistanceMethod::tv_hist: return "tv-hist";
        case DistanceMethod::tv_grid2d: return "tv-grid2d";
        case DistanceMethod::fm_dp: return "fm-dp";
        case DistanceMethod::w1_sorted: return "w1-sorted";
        case DistanceMethod::smallball: return "smallball";
    }
    return "unknown";
}

DistanceMethod distance_method_from_string(const std::string& s) {
    for (auto m : {DistanceMethod::tv_kde, DistanceMethod::tv_hist, DistanceMethod::tv_grid2d, DistanceMethod::fm_dp,
                   DistanceMethod::w1_sorted, DistanceMethod::smallball}) {
        if (to_string(m) == s) return m;
    }
    throw InvalidArgument("unknown distance method '" + s + "'");
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double NormalTarget::pdf(double x) const {
    const double z = (x - mean) / std::sqrt(variance);
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi * variance);
}

double NormalTarget::cdf(double x) const { return standard_normal_cdf((x - mean) / std::sqrt(variance)); }

DistanceEstimate tv_vs_density(const SampleBatch& samples, const NormalTarget& target, const KdeOptions& opts) {
    require_scalar(samples, "tv_vs_density");
    require_size(samples, kMinTwoSample, "tv_vs_density");
    if (!(target.variance > 0.0)) throw InvalidArgument("tv_vs_density: target variance must be positive");
    if (opts.grid_points < 3) throw InvalidArgument("tv_vs_density: grid needs at least 3 points");
    const auto& xs = samples.values;
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0) || !std::isfinite(sd)) {
        throw DegenerateSample("tv_vs_density: sample standard deviation is 0; the law is atomic");
    }
    const double h = silverman_bandwidth(sd, n);
    const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
    const double lo = *mn - 4.0 * h;
    const double hi = *mx + 4.0 * h;
    const double step = (hi - lo) / static_cast<double>(opts.grid_points - 1);
    const LinearBins bins(xs, lo, step, opts.grid_points);

    std::vector<double> counts(opts.grid_points, 0.0);
    for (std::uint32_t i = 0; i < xs.size(); ++i) bins.accumulate(i, 1.0, counts);

    DistanceEstimate est;
    est.method = DistanceMethod::tv_kde;
    est.n_samples = {xs.size()};
    est.value = tv_from_binned_kde(counts, n, h, lo, step, target);
    bootstrap_ci(est, opts.bootstrap, [&](SplitMix64& rng) {
        const auto r = draw_resample(rng, xs.size(), 0, false);
        std::vector<double> c(opts.grid_points, 0.0);
        double s1 = 0.0;
        double s2 = 0.0;
        for (auto i : r.first) {
            bins.accumulate(i, 1.0, c);
            s1 += xs[i];
        }
        const double m = s1 / n;
        for (auto i : r.first) s2 += (xs[i] - m) * (xs[i] - m);
        const double sd_b = std::sqrt(s2 / (n - 1.0));
        if (!(sd_b > 0.0)) return est.value;
        return tv_from_binned_kde(c, n, silverman_bandwidth(sd_b, n), lo, step, target);
    });
    return est;
}

DistanceEstimate tv_two_samples(const SampleBatch& s1, const SampleBatch& s2, const HistogramOptions& opts) {
    require_scalar(s1, "tv_two_samples");
    require_scalar(s2, "tv_two_samples");
    require_size(s1, kMinTwoSample, "tv_two_samples");
    require_size(s2, kMinTwoSample, "tv_two_samples");
    const auto& a = s1.values;
    const auto& b = s2.values;
    const std::size_t bins =
        opts.bins > 0 ? opts.bins
                      : std::max<std::size_t>(20, static_cast<std::size_t>(std::floor(
                                                      std::cbrt(static_cast<double>(std::min(a.size(), b.size()))))));
    const double lo = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
    const double hi = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
    const double width = hi - lo;
    auto bin_of = [&](double x) -> std::uint32_t {
        if (!(width > 0.0)) return 0;
        const auto j = static_cast<std::int64_t>(std::floor((x - lo) / width * static_cast<double>(bins)));
        return static_cast<std::uint32_t>(std::clamp<std::int64_t>(j, 0, static_cast<std::int64_t>(bins) - 1));
    };
    std::vector<std::uint32_t> ia(a.size());
    std::vector<std::uint32_t> ib(b.size());
    std::transform(a.begin(), a.end(), ia.begin(), bin_of);
    std::transform(b.begin(), b.end(), ib.begin(), bin_of);

    auto tv_of = [&](auto&& rows_a, auto&& rows_b, std::size_t na, std::size_t nb) {
        std::vector<double> ca(bins, 0.0);
        std::vector<double> cb(bins, 0.0);
        rows_a([&](std::uint32_t i) { ca[ia[i]] += 1.0; });
        rows_b([&](std::uint32_t i) { cb[ib[i]] += 1.0; });
        double s = 0.0;
        for (std::size_t j = 0; j < bins; ++j) {
            s += std::abs(ca[j] / static_cast<double>(na) - cb[j] / static_cast<double>(nb));
        }
        return clamp01(0.5 * s);
    };

    DistanceEstimate est;
    est.method = DistanceMethod::tv_hist;
    est.n_samples = {a.size(), b.size()};
    est.value = tv_of([&](auto&& f) { for (std::uint32_t i = 0; i < a.size(); ++i) f(i); },
                      [&](auto&& f) { for (std::uint32_t i = 0; i < b.size(); ++i) f(i); }, a.size(), b.size());
    const bool paired = opts.bootstrap.paired && a.size() == b.size();
    bootstrap_ci(est, opts.bootstrap, [&](SplitMix64& rng) {
        const auto r = draw_resample(rng, a.size(), b.size(), paired);
        return tv_of([&](auto&& f) { for (auto i : r.first) f(i); },
                     [&](auto&& f) { for (auto i : r.second) f(i); }, a.size(), b.size());
    });
    return est;
}

DistanceEstimate tv_multivariate(const SampleBatch& samples, const Covariance2& cov, const Grid2dOptions& opts) {
    if (samples.width != 2) {
        throw InvalidArgument("tv_multivariate: only d = 2 is supported, got d = " + std::to_string(samples.width));
    }
    require_size(samples, kMinGrid2d, "tv_multivariate");
    const double det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    if (!(cov[0][0] > 0.0) || !(det > 0.0) || cov[0][1] != cov[1][0]) {
        throw InvalidArgument("tv_multivariate: covariance must be symmetric positive definite");
    }
    const std::size_t cells = opts.cells_per_axis;
    const double half = 4.0 * std::sqrt(std::max(cov[0][0], cov[1][1]));
    const double w = 2.0 * half / static_cast<double>(cells);
    const std::size_t n = samples.size();

    std::vector<std::int32_t> cell_of(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = samples.at(i, 0);
        const double y = samples.at(i, 1);
        const double cx = std::floor((x + half) / w);
        const double cy = std::floor((y + half) / w);
        const bool inside = cx >= 0 && cy >= 0 && cx < static_cast<double>(cells) && cy < static_cast<double>(cells);
        cell_of[i] = inside ? static_cast<std::int32_t>(cy * static_cast<double>(cells) + cx) : -1;
    }
    // Target cell masses by the density at each cell centre.
    const double inv00 = cov[1][1] / det;
    const double inv11 = cov[0][0] / det;
    const double inv01 = -cov[0][1] / det;
    const double norm = 1.0 / (2.0 * std::numbers::pi * std::sqrt(det));
    std::vector<double> target(cells * cells);
    double target_inside = 0.0;
    for (std::size_t cy = 0; cy < cells; ++cy) {
        for (std::size_t cx = 0; cx < cells; ++cx) {
            const double x = -half + (static_cast<double>(cx) + 0.5) * w;
            const double y = -half + (static_cast<double>(cy) + 0.5) * w;
            const double q = inv00 * x * x + 2.0 * inv01 * x * y + inv11 * y * y;
            const double mass = norm * std::exp(-0.5 * q) * w * w;
            target[cy * cells + cx] = mass;
            target_inside += mass;
        }
    }
    const double target_outside = std::max(0.0, 1.0 - target_inside);

    auto tv_of = [&](auto&& rows) {
        std::vector<double> counts(cells * cells, 0.0);
        double outside = 0.0;
        rows([&](std::uint32_t i) {
            if (cell_of[i] < 0) {
                outside += 1.0;
            } else {
                counts[static_cast<std::size_t>(cell_of[i])] += 1.0;
            }
        });
        const double nn = static_cast<double>(n);
        double s = 0.0;
        for (std::size_t c = 0; c < counts.size(); ++c) s += std::abs(counts[c] / nn - target[c]);
        return clamp01(0.5 * (s + outside / nn + target_outside));
    };

    DistanceEstimate est;
    est.method = DistanceMethod::tv_grid2d;
    est.n_samples = {n};
    est.value = tv_of([&](auto&& f) { for (std::uint32_t i = 0; i < n; ++i) f(i); });
    bootstrap_ci(est, opts.bootstrap, [&](SplitMix64& rng) {
        const auto r = draw_resample(rng, n, 0, false);
        return tv_of([&](auto&& f) { for (auto i : r.first) f(i); });
    });
    return est;
}

double fm_lattice_max(const std::vector<double>& node_weights, double cell_width, std::size_t levels) {
    if (node_weights.size() < 2) return 0.0;
    if (levels < 2) throw InvalidArgument("fm: need at least 2 levels");
    if (!(cell_width > 0.0)) return 0.0;
    const auto lat = make_lattice(cell_width, node_weights.size() - 1, levels);
    return fm_dp(node_weights, lat);
}

DistanceEstimate fm_two_samples(const SampleBatch& s1, const SampleBatch& s2, const FmOptions& opts) {
    require_scalar(s1, "fm_two_samples");
    require_scalar(s2, "fm_two_samples");
    require_size(s1, kMinTwoSample, "fm_two_samples");
    require_size(s2, kMinTwoSample, "fm_two_samples");
    if (opts.cells < 1 || opts.levels < 2) throw InvalidArgument("fm_two_samples: need cells >= 1 and levels >= 2");
    const auto& a = s1.values;
    const auto& b = s2.values;
    const double lo = std::min(*std::min_element(a.begin(), a.end()), *std::min_element(b.begin(), b.end()));
    const double hi = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
    const double cell = (hi - lo) / static_cast<double>(opts.cells);
    const std::size_t nodes = opts.cells + 1;
    const LinearBins ba(a, lo, cell, nodes);
    const LinearBins bb(b, lo, cell, nodes);

    auto fm_of = [&](auto&& rows_a, auto&& rows_b) {
        if (!(cell > 0.0)) return 0.0;
        std::vector<double> w(nodes, 0.0);
        std::vector<double> wb(nodes, 0.0);
        rows_a([&](std::uint32_t i) { ba.accumulate(i, 1.0, w); });
        rows_b([&](std::uint32_t i) { bb.accumulate(i, 1.0, wb); });
        const double sa = 1.0 / static_cast<double>(a.size());
        const double sb = 1.0 / static_cast<double>(b.size());
        for (std::size_t j = 0; j < nodes; ++j) w[j] = w[j] * sa - wb[j] * sb;
        return fm_lattice_max(w, cell, opts.levels);
    };

    DistanceEstimate est;
    est.method = DistanceMethod::fm_dp;
    est.n_samples = {a.size(), b.size()};
    est.value = fm_of([&](auto&& f) { for (std::uint32_t i = 0; i < a.size(); ++i) f(i); },
                      [&](auto&& f) { for (std::uint32_t i = 0; i < b.size(); ++i) f(i); });
    const bool paired = opts.bootstrap.paired && a.size() == b.size();
    bootstrap_ci(est, opts.bootstrap, [&](SplitMix64& rng) {
        const auto r = draw_resample(rng, a.size(), b.size(), paired);
        return fm_of([&](auto&& f) { for (auto i : r.first) f(i); }, [&](auto&& f) { for (auto i : r.second) f(i); });
    });
    return est;
}

DistanceEstimate wasserstein1(const SampleBatch& s1, const SampleBatch& s2, const BootstrapOptions& opts) {
    require_scalar(s1, "wasserstein1");
    require_scalar(s2, "wasserstein1");
    if (s1.size() != s2.size()) {
        throw InvalidArgument("wasserstein1: sizes differ (" + std::to_string(s1.size()) + " vs " +
                              std::to_string(s2.size()) + ")");
    }
    if (s1.size() == 0) throw InvalidArgument("wasserstein1: empty samples");
    auto w1_sorted = [](std::vector<double> x, std::vector<double> y) {
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - y[i]);
        return s / static_cast<double>(x.size());
    };
    DistanceEstimate est;
    est.method = DistanceMethod::w1_sorted;
    est.n_samples = {s1.size(), s2.size()};
    est.value = w1_sorted(s1.values, s2.values);
    bootstrap_ci(est, opts, [&](SplitMix64& rng) {
        const auto r = draw_resample(rng, s1.size(), s2.size(), opts.paired);
        std::vector<double> x(r.first.size());
        std::vector<double> y(r.second.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = s1.values[r.first[i]];
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = s2.values[r.second[i]];
        return w1_sorted(std::move(x), std::move(y));
    });
    return est;
}

DistanceEstimate small_ball(const SampleBatch& samples, double alpha, double level) {
    require_scalar(samples, "small_ball");
    require_size(samples, kMinSmallBall, "small_ball");
    if (!(alpha > 0.0)) throw InvalidArgument("small_ball: alpha must be positive");
    const std::size_t n = samples.size();
    const auto k = static_cast<std::size_t>(
        std::count_if(samples.values.begin(), samples.values.end(), [&](double v) { return std::abs(v) <= alpha; }));
    DistanceEstimate est;
    est.method = DistanceMethod::smallball;
    est.n_samples = {n};
    est.value = static_cast<double>(k) / static_cast<double>(n);
    const double tail = (1.0 - level) / 2.0;
    const auto kd = static_cast<double>(k);
    const auto nd = static_cast<double>(n);
    est.ci_low = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, tail);
    est.ci_high = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - tail);
    return est;
}

}  // namespace wienerlab
