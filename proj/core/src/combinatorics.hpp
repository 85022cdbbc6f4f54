#pragma once

#include <array>
#include <cstdint>

namespace wienerlab::detail {

// Orders never exceed kMaxOrder = 8 (products and contraction sides are
// capped), so everything fits comfortably in 64 bits. The tables go to 16 to
// cover k + l before the cap check.
inline constexpr int kTableSize = 17;

constexpr std::array<std::uint64_t, kTableSize> make_factorials() {
    std::array<std::uint64_t, kTableSize> f{};
    f[0] = 1;
    for (int i = 1; i < kTableSize; ++i) f[i] = f[i - 1] * static_cast<std::uint64_t>(i);
    return f;
}

inline constexpr auto kFactorials = make_factorials();

constexpr std::uint64_t factorial(int n) { return kFactorials[static_cast<std::size_t>(n)]; }

constexpr std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    return kFactorials[static_cast<std::size_t>(n)] /
           (kFactorials[static_cast<std::size_t>(k)] * kFactorials[static_cast<std::size_t>(n - k)]);
}

}  // namespace wienerlab::detail
