#include <gtest/gtest.h>

#include <cmath>

#include "wienerlab/distance.hpp"
#include "wienerlab/errors.hpp"
#include "wienerlab/random.hpp"

using namespace wienerlab;

namespace {

double phi_cdf(double x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); }

SampleBatch normals(std::size_t n, std::uint64_t seed, double mean = 0.0, double sd = 1.0) {
    GaussianStream g(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = mean + sd * g.next();
    return SampleBatch::from_values(std::move(v));
}

SampleBatch constant_batch(std::size_t n, double value) { return SampleBatch::from_values(std::vector<double>(n, value)); }

}  // namespace

TEST(Distance, MethodNamesRoundTrip) {
    for (auto m : {DistanceMethod::tv_kde, DistanceMethod::tv_hist, DistanceMethod::tv_grid2d, DistanceMethod::fm_dp,
                   DistanceMethod::w1_sorted, DistanceMethod::smallball}) {
        EXPECT_EQ(distance_method_from_string(to_string(m)), m);
    }
    EXPECT_THROW(distance_method_from_string("nope"), InvalidArgument);
}

TEST(Distance, HistogramTvOfShiftedNormals) {
    const auto est = tv_two_samples(normals(100000, 1), normals(100000, 2, 3.0));
    EXPECT_NEAR(est.value, 2.0 * phi_cdf(1.5) - 1.0, 0.04);
    EXPECT_LE(est.ci_low, est.value);
    EXPECT_GE(est.ci_high, est.value);
    EXPECT_EQ(est.n_samples.size(), 2u);
}

TEST(Distance, KdeTvAgainstShiftedDensity) {
    const auto s = normals(100000, 3);
    EXPECT_NEAR(tv_vs_density(s, NormalTarget{0.5, 1.0}).value, 2.0 * phi_cdf(0.25) - 1.0, 0.03);
    EXPECT_LE(tv_vs_density(s, NormalTarget{}).value, 0.03);
}

TEST(Distance, WassersteinOfScaledNormals) {
    const auto est = wasserstein1(normals(100000, 4), normals(100000, 5, 0.0, 2.0));
    EXPECT_NEAR(est.value, std::sqrt(2.0 / std::acos(-1.0)), 0.02);
    EXPECT_THROW(wasserstein1(normals(10, 1), normals(11, 1)), InvalidArgument);
}

TEST(Distance, SelfDistancesAreSmall) {
    const auto a = normals(100000, 6);
    const auto b = normals(100000, 7);
    EXPECT_LE(tv_two_samples(a, b).value, 0.03);
    EXPECT_LE(fm_two_samples(a, b).value, 0.03);
    EXPECT_LE(wasserstein1(a, b).value, 0.03);
    EXPECT_EQ(tv_two_samples(a, a).value, 0.0);
    EXPECT_EQ(fm_two_samples(a, a).value, 0.0);
}

TEST(Distance, FortetMourierOfPointMasses) {
    EXPECT_NEAR(fm_two_samples(constant_batch(2000, 0.0), constant_batch(2000, 0.5)).value, 0.5, 1e-12);
    const auto far = fm_two_samples(constant_batch(2000, 0.0), constant_batch(2000, 5.0));
    EXPECT_LE(far.value, 2.0 + 1e-12);
    EXPECT_GE(far.value, 2.0 - 5.0 / 512.0);
}

TEST(Distance, FortetMourierBelowWassersteinAndMonotoneUnderRefinement) {
    for (std::uint64_t seed = 10; seed < 14; ++seed) {
        const auto a = normals(5000, seed);
        const auto b = normals(5000, seed + 100, 0.1 * static_cast<double>(seed - 10), 1.2);
        BootstrapOptions none;
        none.replicates = 0;
        FmOptions base{512, 201, none};
        FmOptions finer_levels{512, 401, none};
        FmOptions finer_both{1024, 401, none};
        const double v0 = fm_two_samples(a, b, base).value;
        EXPECT_LE(v0, wasserstein1(a, b, none).value + 1e-12);
        EXPECT_GE(fm_two_samples(a, b, finer_levels).value, v0 - 1e-12);
        EXPECT_GE(fm_two_samples(a, b, finer_both).value, v0 - 1e-12);
    }
}

TEST(Distance, LatticeOptimizerOnTwoNodes) {
    EXPECT_NEAR(fm_lattice_max({1.0, -1.0}, 0.5, 201), 0.5, 1e-12);
    EXPECT_NEAR(fm_lattice_max({-1.0, 1.0}, 0.25, 201), 0.25, 1e-12);
    EXPECT_NEAR(fm_lattice_max({0.5, -1.0, 0.5}, 0.3, 201), 0.3, 1e-12);
}

TEST(Distance, BivariateGridTv) {
    GaussianStream g(8);
    std::vector<double> v(2 * 200000);
    for (auto& x : v) x = g.next();
    const auto s = SampleBatch::from_values(std::move(v), 2);
    EXPECT_LE(tv_multivariate(s, {{{1.0, 0.0}, {0.0, 1.0}}}).value, 0.05);
    EXPECT_GE(tv_multivariate(s, {{{1.0, 0.8}, {0.8, 1.0}}}).value, 0.2);
    EXPECT_THROW(tv_multivariate(s, {{{1.0, 1.0}, {1.0, 1.0}}}), InvalidArgument);
    EXPECT_THROW(tv_multivariate(normals(20000, 1), {{{1.0, 0.0}, {0.0, 1.0}}}), InvalidArgument);
}

TEST(Distance, SmallBallClopperPearson) {
    std::vector<double> v(10000, 5.0);
    const auto none = small_ball(SampleBatch::from_values(v), 1.0);
    EXPECT_EQ(none.value, 0.0);
    EXPECT_EQ(none.ci_low, 0.0);
    EXPECT_NEAR(none.ci_high, 1.0 - std::pow(0.025, 1.0 / 10000.0), 1e-12);
    for (std::size_t i = 0; i < 2500; ++i) v[i] = 0.5;
    const auto some = small_ball(SampleBatch::from_values(v), 1.0);
    EXPECT_DOUBLE_EQ(some.value, 0.25);
    EXPECT_LT(some.ci_low, 0.25);
    EXPECT_GT(some.ci_high, 0.25);
    EXPECT_NEAR(some.ci_high - some.ci_low, 2 * 1.96 * std::sqrt(0.25 * 0.75 / 10000.0), 2e-3);
    EXPECT_THROW(small_ball(SampleBatch::from_values(std::vector<double>(100, 0.0)), 1.0), InvalidArgument);
}

TEST(Distance, PreconditionsAreChecked) {
    EXPECT_THROW(tv_two_samples(normals(999, 1), normals(5000, 2)), InvalidArgument);
    EXPECT_THROW(tv_vs_density(constant_batch(2000, 1.0), NormalTarget{}), DegenerateSample);
    EXPECT_THROW(fm_two_samples(normals(500, 1), normals(5000, 2)), InvalidArgument);
}

TEST(Distance, BootstrapIsSeededAndThreadInvariant) {
    const auto a = normals(20000, 1);
    const auto b = normals(20000, 2, 0.2);
    HistogramOptions opts;
    opts.bootstrap.seed = 77;
    set_worker_threads(1);
    const auto e1 = tv_two_samples(a, b, opts);
    set_worker_threads(3);
    const auto e2 = tv_two_samples(a, b, opts);
    set_worker_threads(1);
    EXPECT_EQ(e1.ci_low, e2.ci_low);
    EXPECT_EQ(e1.ci_high, e2.ci_high);
    EXPECT_LT(e1.ci_low, e1.ci_high);
}
