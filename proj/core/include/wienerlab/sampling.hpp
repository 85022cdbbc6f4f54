#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wienerlab/chaos.hpp"
#include "wienerlab/random.hpp"

namespace wienerlab {

/// N draws of a scalar (width 1) or d-vector (width d) random variable,
/// stored row-major.
struct SampleBatch {
    std::vector<double> values;
    std::size_t width = 1;
    std::uint64_t seed = 0;
    std::string generator;

    std::size_t size() const noexcept { return width == 0 ? 0 : values.size() / width; }
    double at(std::size_t i, std::size_t j = 0) const { return values[i * width + j]; }
    std::vector<double> column(std::size_t j) const;

    /// Wraps plain values (no generator) for the distance estimators.
    static SampleBatch from_values(std::vector<double> values, std::size_t width = 1);
};

/// Flattened evaluation plan for repeated evaluation of one element:
/// every kernel entry becomes (perm_count * c, [(variable, Hermite degree)]).
class CompiledChaos {
public:
    explicit CompiledChaos(const ChaosElement& f);

    std::size_t dim() const noexcept { return dim_; }
    double operator()(std::span<const double> x) const;

private:
    struct Factor {
        std::uint32_t var;
        std::uint32_t degree;
    };
    std::size_t dim_;
    double constant_;
    std::vector<double> coefs_;
    std::vector<std::uint32_t> offsets_;  // terms i spans factors_[offsets_[i], offsets_[i+1])
    std::vector<Factor> factors_;
};

inline constexpr const char* kGeneratorTag = "splitmix64-boxmuller";

/// N iid evaluations of F at input vectors drawn from `law`. Sample i uses
/// substream derive_seed(seed, i), so results do not depend on threading and
/// two elements sampled with the same seed see the same inputs (common
/// random numbers), also across dimensions.
SampleBatch sample(const ChaosElement& f, std::size_t n, std::uint64_t seed,
                   const InputLaw& law = InputLaw::gaussian());
SampleBatch sample(const ChaosVector& v, std::size_t n, std::uint64_t seed,
                   const InputLaw& law = InputLaw::gaussian());

}  // namespace wienerlab
