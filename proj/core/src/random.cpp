#include "wienerlab/random.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>

#include "wienerlab/errors.hpp"

namespace wienerlab {

namespace {
std::atomic<unsigned> g_worker_threads{1};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    SplitMix64 outer(seed);
    const std::uint64_t base = outer.next();
    SplitMix64 inner(base ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
    return inner.next();
}

double GaussianStream::next() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = rng_.uniform();
    const double u2 = rng_.uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

InputLaw::InputLaw(Kind kind, std::vector<double> values, std::vector<double> probs)
    : kind_(kind), values_(std::move(values)), probs_(std::move(probs)) {
    if (kind_ != Kind::discrete) return;
    if (values_.empty() || values_.size() != probs_.size()) {
        throw InvalidArgument("discrete law: values and probs must be nonempty and of equal length");
    }
    double total = 0.0;
    double mean = 0.0;
    double second = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!(probs_[i] > 0.0)) throw InvalidArgument("discrete law: probabilities must be positive");
        total += probs_[i];
        mean += probs_[i] * values_[i];
        second += probs_[i] * values_[i] * values_[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("discrete law: probabilities must sum to 1");
    if (std::abs(mean) > 1e-12) throw InvalidArgument("discrete law: E[X] must be 0");
    if (std::abs(second - 1.0) > 1e-12) throw InvalidArgument("discrete law: E[X^2] must be 1");
    cdf_.resize(probs_.size());
    std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
    cdf_.back() = 1.0;
}

InputLaw InputLaw::discrete(std::vector<double> values, std::vector<double> probs) {
    return InputLaw(Kind::discrete, std::move(values), std::move(probs));
}

std::string InputLaw::tag() const {
    switch (kind_) {
        case Kind::gaussian: return "gaussian";
        case Kind::rademacher: return "rademacher";
        case Kind::discrete: return "discrete";
    }
    return "unknown";
}

void InputLaw::draw(std::uint64_t seed, std::uint64_t index, std::span<double> out) const {
    const std::uint64_t sub = derive_seed(seed, index);
    switch (kind_) {
        case Kind::gaussian: {
            GaussianStream g(sub);
            for (double& x : out) x = g.next();
            return;
        }
        case Kind::rademacher: {
            SplitMix64 rng(sub);
            std::uint64_t bits = 0;
            int left = 0;
            for (double& x : out) {
                if (left == 0) {
                    bits = rng.next();
                    left = 64;
                }
                x = (bits & 1U) ? 1.0 : -1.0;
                bits >>= 1;
                --left;
            }
            return;
        }
        case Kind::discrete: {
            SplitMix64 rng(sub);
            for (double& x : out) {
                const double u = rng.uniform();
                const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
                const auto pos = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), values_.size() - 1);
                x = values_[pos];
            }
            return;
        }
    }
}

void set_worker_threads(unsigned n) noexcept { g_worker_threads.store(n == 0 ? 1 : n); }
unsigned worker_threads() noexcept { return g_worker_threads.load(); }

}  // namespace wienerlab
