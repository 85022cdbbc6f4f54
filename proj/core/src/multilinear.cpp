#include "wienerlab/multilinear.hpp"

#include <cmath>
#include <string>

#include "combinatorics.hpp"
#include "wienerlab/errors.hpp"

namespace wienerlab {

void MultilinearSpec::validate() const {
    if (n == 0) throw InvalidArgument("multilinear spec: n must be positive");
    if (degree < 1 || degree > kMaxOrder) throw InvalidArgument("multilinear spec: degree out of range");
    double sum_sq = 0.0;
    int top = 0;
    for (const auto& [s, c] : coefs) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] == 0 || s[i] > n) throw InvalidArgument("multilinear spec: label out of range");
            if (i > 0 && s[i] <= s[i - 1]) throw InvalidArgument("multilinear spec: subset labels must be strictly increasing");
        }
        if (c == 0.0 || s.empty()) continue;
        sum_sq += c * c;
        top = std::max(top, static_cast<int>(s.size()));
    }
    if (std::abs(sum_sq - 1.0) > 1e-12) {
        throw InvalidArgument("multilinear spec: sum of squared coefficients is " + std::to_string(sum_sq) + ", expected 1");
    }
    if (top != degree) throw InvalidArgument("multilinear spec: declared degree does not match coefficients");
}

std::vector<double> MultilinearSpec::influences() const {
    std::vector<double> inf(n, 0.0);
    for (const auto& [s, c] : coefs) {
        for (Label v : s) inf[v - 1] += c * c;
    }
    return inf;
}

ChaosElement MultilinearSpec::to_chaos() const {
    validate();
    std::vector<KernelAccumulator> acc;
    for (int k = 1; k <= degree; ++k) acc.emplace_back(k, n);
    double constant = 0.0;
    for (const auto& [s, c] : coefs) {
        if (s.empty()) {
            constant += c;
            continue;
        }
        const int k = static_cast<int>(s.size());
        acc[static_cast<std::size_t>(k - 1)].add(MultiIndex(std::span<const Label>(s)),
                                                 c / static_cast<double>(detail::factorial(k)));
    }
    std::vector<SymmetricKernel> kernels;
    for (auto& a : acc) kernels.push_back(std::move(a).finish());
    return ChaosElement(n, constant, std::move(kernels));
}

MultilinearSpec rademacher_average(std::size_t n, InputLaw law) {
    if (n == 0) throw InvalidArgument("rademacher_average: n must be positive");
    MultilinearSpec spec;
    spec.n = n;
    spec.degree = 1;
    spec.law = std::move(law);
    const double c = 1.0 / std::sqrt(static_cast<double>(n));
    for (Label i = 1; i <= n; ++i) spec.coefs[{i}] = c;
    return spec;
}

}  // namespace wienerlab
