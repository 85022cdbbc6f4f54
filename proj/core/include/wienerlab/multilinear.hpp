#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "wienerlab/chaos.hpp"
#include "wienerlab/random.hpp"

namespace wienerlab {

/// Multilinear polynomial Q(x) = sum_S c_S prod_{i in S} x_i over subsets
/// S of {1..n}, together with the law of the inputs.
struct MultilinearSpec {
    std::size_t n = 1;
    int degree = 1;
    /// Keys are strictly increasing label lists; the empty key is the constant.
    std::map<std::vector<Label>, double> coefs;
    InputLaw law = InputLaw::rademacher();

    /// Throws InvalidArgument unless sum_{|S|>0} c_S^2 = 1 (to 1e-12), the
    /// largest |S| with c_S != 0 equals `degree`, degree <= kMaxOrder and
    /// every key is a valid strictly increasing subset of {1..n}.
    void validate() const;

    /// Inf_k = sum_{S containing k} c_S^2, for k = 1..n.
    std::vector<double> influences() const;

    /// Same polynomial as a chaos element: c_S / |S|! on every permutation of
    /// S. On distinct labels Hermite products reduce to plain monomials, so
    /// evaluation agrees under any input law.
    ChaosElement to_chaos() const;
};

/// (1/sqrt(n)) sum_{i<=n} x_i.
MultilinearSpec rademacher_average(std::size_t n, InputLaw law = InputLaw::rademacher());

}  // namespace wienerlab
