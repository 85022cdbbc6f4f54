#include <gtest/gtest.h>

#include <cmath>

#include "oracle/dense.hpp"
#include "wienerlab/errors.hpp"
#include "wienerlab/kernel.hpp"
#include "wienerlab/random.hpp"

using namespace wienerlab;

namespace {

SymmetricKernel random_kernel(SplitMix64& rng, int k, std::size_t n, int entries) {
    std::vector<RawEntry> raw;
    for (int e = 0; e < entries; ++e) {
        RawEntry r;
        for (int j = 0; j < k; ++j) r.idx.push_back(static_cast<Label>(1 + rng.below(n)));
        r.coef = 2.0 * rng.uniform() - 1.0;
        raw.push_back(r);
    }
    return make_kernel(k, n, raw);
}

}  // namespace

TEST(MultiIndex, SortsAndCountsPermutations) {
    const MultiIndex a{3, 1, 3};
    EXPECT_EQ(a[0], 1u);
    EXPECT_EQ(a[2], 3u);
    EXPECT_EQ(a.perm_count(), 3u);
    EXPECT_EQ(a.multiplicity(3), 2);
    EXPECT_EQ(MultiIndex({1, 2, 3, 4}).perm_count(), 24u);
    EXPECT_EQ(a.merged(MultiIndex{2}), (MultiIndex{1, 2, 3, 3}));
    EXPECT_EQ(a.without_one(3), (MultiIndex{1, 3}));
}

TEST(MultiIndex, RejectsZeroLabelAndOverlongIndex) {
    EXPECT_THROW((MultiIndex{0, 1}), InvalidArgument);
    EXPECT_THROW((MultiIndex{1, 1, 1, 1, 1, 1, 1, 1, 1}), InvalidArgument);
}

TEST(Kernel, MakeKernelMergesSortsAndValidates) {
    const auto f = make_kernel(2, 3, {{{2, 1}, 0.5}, {{1, 2}, 0.25}, {{3, 3}, 1.0}, {{3, 3}, -1.0}});
    EXPECT_EQ(f.size(), 1u);
    EXPECT_DOUBLE_EQ(f.coefficient(MultiIndex{1, 2}), 0.75);
    EXPECT_THROW(make_kernel(2, 3, {{{1, 4}, 1.0}}), InvalidArgument);
    EXPECT_THROW(make_kernel(2, 3, {{{1}, 1.0}}), InvalidArgument);
}

TEST(Kernel, NormCountsEveryPermutation) {
    const auto f = make_kernel(2, 2, {{{1, 2}, 3.0}});
    EXPECT_DOUBLE_EQ(f.norm_squared(), 18.0);
    const auto g = make_kernel(3, 2, {{{1, 1, 2}, 1.0}, {{2, 2, 2}, 2.0}});
    EXPECT_DOUBLE_EQ(g.norm_squared(), 3.0 + 4.0);
    EXPECT_DOUBLE_EQ(inner(f, f), f.norm_squared());
}

TEST(Kernel, NormMatchesDenseSumOfSquares) {
    SplitMix64 rng(7);
    for (int k = 1; k <= 4; ++k) {
        const auto f = random_kernel(rng, k, 3, 5);
        const auto d = oracle::from_kernel(f);
        double s = 0.0;
        for (double v : d.data) s += v * v;
        EXPECT_NEAR(f.norm_squared(), s, 1e-12);
    }
}

TEST(Kernel, EmbedAndPrune) {
    const auto f = make_kernel(2, 2, {{{1, 2}, 1e-14}, {{1, 1}, 1.0}});
    const auto g = f.embedded(5);
    EXPECT_EQ(g.dim(), 5u);
    EXPECT_EQ(g.size(), 2u);
    EXPECT_EQ(f.pruned(1e-12).size(), 1u);
}

TEST(Contraction, MatchesDenseBruteForce) {
    SplitMix64 rng(11);
    for (std::size_t n = 1; n <= 4; ++n) {
        for (int k = 1; k <= 3; ++k) {
            for (int l = 1; l <= 3; ++l) {
                for (int trial = 0; trial < 3; ++trial) {
                    const auto f = random_kernel(rng, k, n, 4);
                    const auto g = random_kernel(rng, l, n, 4);
                    const auto df = oracle::from_kernel(f);
                    const auto dg = oracle::from_kernel(g);
                    for (int r = 0; r <= std::min(k, l); ++r) {
                        const auto dense = oracle::contract(df, dg, r);
                        if (r == k && r == l) {
                            EXPECT_NEAR(inner(f, g), dense.data[0], 1e-12);
                            EXPECT_NEAR(contract(f, g, r).scalar(), dense.data[0], 1e-12);
                            continue;
                        }
                        const auto sym = sym_contract(f, g, r);
                        EXPECT_LE(oracle::max_gap(oracle::symmetrize(dense), sym), 1e-12)
                            << "n=" << n << " k=" << k << " l=" << l << " r=" << r;
                    }
                }
            }
        }
    }
}

TEST(Contraction, BipartiteValuesMatchDense) {
    SplitMix64 rng(3);
    const auto f = random_kernel(rng, 3, 3, 6);
    const auto g = random_kernel(rng, 2, 3, 6);
    const auto t = contract(f, g, 1);
    const auto dense = oracle::contract(oracle::from_kernel(f), oracle::from_kernel(g), 1);
    for (std::size_t o = 0; o < dense.data.size(); ++o) {
        const auto tup = dense.tuple(o);
        const MultiIndex left{static_cast<Label>(tup[0] + 1), static_cast<Label>(tup[1] + 1)};
        const MultiIndex right{static_cast<Label>(tup[2] + 1)};
        EXPECT_NEAR(t.value(left, right), dense.data[o], 1e-12);
    }
}

TEST(Contraction, FullContractionIsInnerProduct) {
    const auto f = make_kernel(2, 2, {{{1, 2}, 1.0}, {{1, 1}, 2.0}});
    EXPECT_DOUBLE_EQ(contract(f, f, 2).scalar(), 2.0 * 1.0 + 4.0);
    EXPECT_THROW(sym_contract(f, f, 2), InvalidArgument);
}

TEST(Contraction, OrderCapIsEnforced) {
    const auto f = make_kernel(5, 1, {{{1, 1, 1, 1, 1}, 1.0}});
    EXPECT_THROW(contract(f, f, 0), OrderCapExceeded);
    EXPECT_NO_THROW(contract(f, f, 1));
}

TEST(Contraction, SymmetrizeIsIdempotentOnSymmetricInput) {
    SplitMix64 rng(5);
    const auto f = random_kernel(rng, 3, 3, 5);
    BipartiteKernel t(3, 0, 3);
    for (const auto& [alpha, c] : f.entries()) t.add(alpha, MultiIndex{}, c);
    EXPECT_EQ(symmetrize(t), f);
}

TEST(Hermite, Values) {
    EXPECT_DOUBLE_EQ(hermite(0, 1.7), 1.0);
    EXPECT_DOUBLE_EQ(hermite(1, 1.7), 1.7);
    EXPECT_NEAR(hermite(3, 2.0), 8.0 - 6.0, 1e-15);
    EXPECT_NEAR(hermite(4, 0.5), 0.0625 - 6.0 * 0.25 + 3.0, 1e-15);
}
