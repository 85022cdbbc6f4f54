#pragma once

// Seeded randomness and the determinism contract.
//
// Every sample index (and every bootstrap replicate) owns its own substream,
// seeded by derive_seed(seed, index). Work can therefore be split across any
// number of threads without changing a single output bit.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace wienerlab {

/// SplitMix64 (Steele, Lea, Flood). Used both as the stream generator and as
/// the seed mixer.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform on the open interval (0, 1) from the top 53 bits.
    double uniform() noexcept { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) noexcept {
        __extension__ using u128 = unsigned __int128;
        return static_cast<std::uint64_t>((static_cast<u128>(next()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

/// Seed of substream `stream` under master seed `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Standard normals by Box-Muller on 64-bit uniforms.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) noexcept : rng_(seed) {}

    double next() noexcept;

private:
    SplitMix64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Law of the iid input coordinates. Gaussian is the Wiener-chaos setting;
/// the others exist for invariance-principle experiments on multilinear
/// polynomials.
class InputLaw {
public:
    enum class Kind { gaussian, rademacher, discrete };

    static InputLaw gaussian() { return InputLaw(Kind::gaussian, {}, {}); }
    static InputLaw rademacher() { return InputLaw(Kind::rademacher, {}, {}); }

    /// Finite law; probabilities must be positive, sum to 1, and give mean 0
    /// and variance 1 (to 1e-12). Throws InvalidArgument otherwise.
    static InputLaw discrete(std::vector<double> values, std::vector<double> probs);

    Kind kind() const noexcept { return kind_; }
    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<double>& probs() const noexcept { return probs_; }
    std::string tag() const;

    /// Fills `out` with the coordinates of sample `index`.
    void draw(std::uint64_t seed, std::uint64_t index, std::span<double> out) const;

private:
    InputLaw(Kind kind, std::vector<double> values, std::vector<double> probs);

    Kind kind_;
    std::vector<double> values_;
    std::vector<double> probs_;
    std::vector<double> cdf_;
};

/// Process-wide worker count for sampling and bootstrap loops (default 1).
/// Never affects results.
void set_worker_threads(unsigned n) noexcept;
unsigned worker_threads() noexcept;

/// Runs fn(begin, end) over contiguous chunks of [0, n) on worker_threads().
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(worker_threads(), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        fn(std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace wienerlab
