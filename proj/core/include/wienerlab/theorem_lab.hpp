#pragma once

// Experiments: each builds a sequence of chaos elements, computes the exact
// quantities with the chaos engine, estimates distances by Monte Carlo and
// returns a self-contained report whose verdict is a pure function of the
// stored rows and summary (recompute_verdict).

#include <cstddef>
#include <cstdint>
#include <vector>

#include "wienerlab/chaos.hpp"
#include "wienerlab/distance.hpp"
#include "wienerlab/multilinear.hpp"
#include "wienerlab/report.hpp"

namespace wienerlab {

/// Element of a sequence with the label used for its report row.
struct SequenceMember {
    Json label;
    ChaosElement element;
};

struct SequenceSpec {
    enum class Family { pair_sum, perturbation, custom };

    Family family = Family::pair_sum;
    /// pair-sum: indices n_1 < ... < n_m.
    std::vector<std::size_t> indices;
    /// perturbation: base + t_j * direction.
    SymmetricKernel base;
    SymmetricKernel direction;
    std::vector<double> t;
    /// custom: members loaded from files.
    std::vector<SequenceMember> members;
    /// Largest basis dimension allowed for a member (0: unlimited).
    std::size_t dim_budget = 0;
};

/// (1/(2 sqrt n)) sum_{i<=n} e_{first+2i-2} (.) e_{first+2i-1} on a basis of
/// size dim (0 selects first + 2n - 1). Unit variance under I_2.
SymmetricKernel pair_sum_kernel(std::size_t n, Label first = 1, std::size_t dim = 0);

/// (I_1(e_1), I_2(pair-sum on labels 2..2n+1)).
ChaosVector pair_sum_vector(std::size_t n);

/// Throws InvalidArgument on unsorted indices or a member over the budget.
std::vector<SequenceMember> build_sequence(const SequenceSpec& spec);

/// E[F^4] as E[F^2 F^2]; needs only 2 * max_order <= kMaxOrder.
double fourth_moment(const ChaosElement& f);

ExperimentReport fourth_moment_certificate(int k, const SequenceSpec& spec, std::size_t n_samples, std::uint64_t seed);

ExperimentReport shigekawa_rate(int p, const std::vector<SequenceMember>& sequence, const ChaosElement& f_inf,
                                std::size_t n_samples, std::uint64_t seed);

struct Perturbation {
    double t = 0.0;
    SymmetricKernel g;
};

ExperimentReport dm_rate(int k, const SymmetricKernel& f_inf, const std::vector<Perturbation>& perturbations,
                         std::size_t n_samples, std::uint64_t seed);

ExperimentReport carbery_wright_probe(const ChaosElement& q, const std::vector<double>& alphas, std::size_t n_samples,
                                      std::uint64_t seed);

ExperimentReport df_small_ball_probe(const ChaosElement& f, const std::vector<double>& lambdas, std::size_t n_samples,
                                     std::uint64_t seed);

struct VectorMember {
    Json label;
    ChaosVector vector;
};

ExperimentReport peccati_tudor_run(const std::vector<int>& k_list, const std::vector<VectorMember>& sequence,
                                   const Covariance2& c, std::size_t n_samples, std::uint64_t seed);

struct MultilinearMember {
    Json label;
    MultilinearSpec spec;
};

/// Family of multilinear polynomials, ordered by decreasing max influence.
ExperimentReport moo_invariance(const std::vector<MultilinearMember>& family, std::size_t n_samples,
                                std::uint64_t seed);

ExperimentReport d12_rate_probe(const std::vector<SequenceMember>& sequence, const ChaosElement& f_inf, double alpha,
                                std::size_t n_samples, std::uint64_t seed);

ExperimentReport identity_suite(int trials, std::uint64_t seed);

/// Verdict from rows and summary only, dispatched on the experiment tag.
Verdict recompute_verdict(const ExperimentReport& report);

struct RandomChaosOptions {
    std::size_t max_dim = 6;
    int max_order = 3;
    int max_entries = 4;
    /// Only one chaos (of random order 1..max_order), zero constant.
    bool single_chaos = false;
};

/// Random sparse element with coefficients uniform in [-1, 1]. `dim` fixes
/// the basis size (0 draws it in 1..max_dim).
ChaosElement random_chaos(SplitMix64& rng, const RandomChaosOptions& opts = {}, std::size_t dim = 0);

}  // namespace wienerlab
