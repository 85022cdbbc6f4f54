#include "wienerlab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "combinatorics.hpp"
#include "wienerlab/errors.hpp"

namespace wienerlab {

namespace {

void check_order(int order) {
    if (order < 1 || order > kMaxOrder) {
        throw InvalidArgument("kernel order " + std::to_string(order) + " outside [1, " +
                              std::to_string(kMaxOrder) + "]");
    }
}

// Calls fn(A, rest, r!/prod_v mult_A(v)!) for every distinct sub-multiset A
// of alpha with |A| = r; rest = alpha minus A.
template <class Fn>
void for_each_submultiset(const MultiIndex& alpha, int r, Fn&& fn) {
    const auto runs = alpha.runs();
    std::vector<int> take(runs.size(), 0);
    std::vector<int> suffix(runs.size() + 1, 0);
    for (std::size_t i = runs.size(); i-- > 0;) suffix[i] = suffix[i + 1] + runs[i].second;

    auto emit = [&] {
        std::array<Label, kMaxOrder> a{};
        std::array<Label, kMaxOrder> b{};
        int na = 0;
        int nb = 0;
        std::uint64_t denom = 1;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            for (int j = 0; j < take[i]; ++j) a[static_cast<std::size_t>(na++)] = runs[i].first;
            for (int j = take[i]; j < runs[i].second; ++j) b[static_cast<std::size_t>(nb++)] = runs[i].first;
            denom *= detail::factorial(take[i]);
        }
        const double weight = static_cast<double>(detail::factorial(r)) / static_cast<double>(denom);
        fn(MultiIndex(std::span<const Label>(a.data(), static_cast<std::size_t>(na))),
           MultiIndex(std::span<const Label>(b.data(), static_cast<std::size_t>(nb))), weight);
    };

    auto recurse = [&](auto&& self, std::size_t i, int remaining) -> void {
        if (i == runs.size()) {
            if (remaining == 0) emit();
            return;
        }
        if (remaining > suffix[i]) return;
        const int hi = std::min(remaining, runs[i].second);
        for (int c = 0; c <= hi; ++c) {
            take[i] = c;
            self(self, i + 1, remaining - c);
        }
        take[i] = 0;
    };
    recurse(recurse, 0, r);
}

}  // namespace

// ---------------------------------------------------------------------------
// MultiIndex

MultiIndex::MultiIndex(std::initializer_list<Label> labels)
    : MultiIndex(std::span<const Label>(labels.begin(), labels.size())) {}

MultiIndex::MultiIndex(std::span<const Label> labels) {
    if (labels.size() > static_cast<std::size_t>(kMaxOrder)) {
        throw InvalidArgument("multi-index longer than " + std::to_string(kMaxOrder));
    }
    std::copy(labels.begin(), labels.end(), labels_.begin());
    len_ = static_cast<std::uint8_t>(labels.size());
    std::sort(labels_.begin(), labels_.begin() + len_);
    if (len_ > 0 && labels_[0] == 0) throw InvalidArgument("basis labels are 1-based; got 0");
}

std::uint64_t MultiIndex::perm_count() const noexcept {
    std::uint64_t denom = 1;
    int i = 0;
    while (i < len_) {
        int j = i;
        while (j < len_ && labels_[static_cast<std::size_t>(j)] == labels_[static_cast<std::size_t>(i)]) ++j;
        denom *= detail::factorial(j - i);
        i = j;
    }
    return detail::factorial(len_) / denom;
}

int MultiIndex::multiplicity(Label v) const noexcept {
    return static_cast<int>(std::count(begin(), end(), v));
}

std::vector<std::pair<Label, int>> MultiIndex::runs() const {
    std::vector<std::pair<Label, int>> out;
    for (Label v : *this) {
        if (!out.empty() && out.back().first == v) {
            ++out.back().second;
        } else {
            out.emplace_back(v, 1);
        }
    }
    return out;
}

MultiIndex MultiIndex::merged(const MultiIndex& other) const {
    if (len_ + other.len_ > kMaxOrder) {
        throw OrderCapExceeded("merged multi-index exceeds order cap " + std::to_string(kMaxOrder));
    }
    MultiIndex out;
    std::merge(begin(), end(), other.begin(), other.end(), out.labels_.begin());
    out.len_ = static_cast<std::uint8_t>(len_ + other.len_);
    return out;
}

MultiIndex MultiIndex::without_one(Label v) const {
    MultiIndex out;
    bool removed = false;
    for (Label w : *this) {
        if (!removed && w == v) {
            removed = true;
            continue;
        }
        out.labels_[out.len_++] = w;
    }
    if (!removed) throw InvalidArgument("label " + std::to_string(v) + " not present in multi-index");
    return out;
}

// ---------------------------------------------------------------------------
// SymmetricKernel

SymmetricKernel::SymmetricKernel(int order, std::size_t dim) : order_(order), dim_(dim) {
    check_order(order);
    if (dim == 0) throw InvalidArgument("kernel dimension must be >= 1");
}

double SymmetricKernel::coefficient(const MultiIndex& alpha) const {
    const auto it = entries_.find(alpha);
    return it == entries_.end() ? 0.0 : it->second;
}

double SymmetricKernel::norm_squared() const {
    double s = 0.0;
    for (const auto& [alpha, c] : entries_) s += static_cast<double>(alpha.perm_count()) * c * c;
    return s;
}

double SymmetricKernel::norm() const { return std::sqrt(norm_squared()); }

SymmetricKernel SymmetricKernel::scaled(double factor) const {
    KernelAccumulator acc(order_, dim_);
    acc.add_scaled(*this, factor);
    return std::move(acc).finish();
}

SymmetricKernel SymmetricKernel::embedded(std::size_t new_dim) const {
    if (new_dim < dim_) throw InvalidArgument("cannot embed kernel into a smaller dimension");
    SymmetricKernel out = *this;
    out.dim_ = new_dim;
    return out;
}

SymmetricKernel SymmetricKernel::pruned(double tol) const {
    SymmetricKernel out(order_, dim_);
    for (const auto& [alpha, c] : entries_) {
        if (std::abs(c) > tol) out.entries_.emplace_hint(out.entries_.end(), alpha, c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// KernelAccumulator

KernelAccumulator::KernelAccumulator(int order, std::size_t dim) : order_(order), dim_(dim) {
    check_order(order);
    if (dim == 0) throw InvalidArgument("kernel dimension must be >= 1");
}

void KernelAccumulator::add(const MultiIndex& alpha, double value) {
    if (value == 0.0) return;
    entries_[alpha] += value;
}

void KernelAccumulator::add_scaled(const SymmetricKernel& f, double factor) {
    if (f.order() != order_ || f.dim() > dim_) {
        throw InvalidArgument("kernel order/dim mismatch in accumulation");
    }
    if (factor == 0.0) return;
    for (const auto& [alpha, c] : f.entries()) entries_[alpha] += factor * c;
}

SymmetricKernel KernelAccumulator::finish() && {
    SymmetricKernel out(order_, dim_);
    for (auto& [alpha, c] : entries_) {
        if (c != 0.0) out.entries_.emplace_hint(out.entries_.end(), alpha, c);
    }
    entries_.clear();
    return out;
}

// ---------------------------------------------------------------------------
// Construction and inner products

SymmetricKernel make_kernel(int order, std::size_t dim, std::span<const RawEntry> raw) {
    KernelAccumulator acc(order, dim);
    for (std::size_t e = 0; e < raw.size(); ++e) {
        const auto& entry = raw[e];
        if (entry.idx.size() != static_cast<std::size_t>(order)) {
            throw InvalidArgument("entry " + std::to_string(e) + ": tuple length " +
                                  std::to_string(entry.idx.size()) + " != order " + std::to_string(order));
        }
        for (Label v : entry.idx) {
            if (v < 1 || v > dim) {
                throw InvalidArgument("entry " + std::to_string(e) + ": label " + std::to_string(v) +
                                      " outside [1, " + std::to_string(dim) + "]");
            }
        }
        acc.add(MultiIndex(std::span<const Label>(entry.idx)), entry.coef);
    }
    return std::move(acc).finish();
}

SymmetricKernel make_kernel(int order, std::size_t dim, std::initializer_list<RawEntry> raw) {
    return make_kernel(order, dim, std::span<const RawEntry>(raw.begin(), raw.size()));
}

double inner(const SymmetricKernel& f, const SymmetricKernel& g) {
    if (f.order() != g.order()) throw InvalidArgument("inner: order mismatch");
    if (f.dim() != g.dim()) throw InvalidArgument("inner: dim mismatch");
    const auto& small = f.size() <= g.size() ? f : g;
    const auto& large = f.size() <= g.size() ? g : f;
    double s = 0.0;
    for (const auto& [alpha, c] : small.entries()) {
        const auto it = large.entries().find(alpha);
        if (it != large.entries().end()) s += static_cast<double>(alpha.perm_count()) * c * it->second;
    }
    return s;
}

double norm(const SymmetricKernel& f) { return f.norm(); }

// ---------------------------------------------------------------------------
// BipartiteKernel

BipartiteKernel::BipartiteKernel(int left_size, int right_size, std::size_t dim)
    : left_(left_size), right_(right_size), dim_(dim) {
    if (left_size < 0 || right_size < 0 || left_size + right_size > kMaxOrder) {
        throw OrderCapExceeded("bipartite kernel sides (" + std::to_string(left_size) + ", " +
                               std::to_string(right_size) + ") exceed order cap");
    }
}

void BipartiteKernel::add(const MultiIndex& left, const MultiIndex& right, double value) {
    if (value == 0.0) return;
    entries_[Key{left, right}] += value;
}

void BipartiteKernel::compact() { std::erase_if(entries_, [](const auto& kv) { return kv.second == 0.0; }); }

double BipartiteKernel::value(const MultiIndex& left, const MultiIndex& right) const {
    const auto it = entries_.find(Key{left, right});
    return it == entries_.end() ? 0.0 : it->second;
}

double BipartiteKernel::norm_squared() const {
    double s = 0.0;
    for (const auto& [key, v] : entries_) {
        s += static_cast<double>(key.first.perm_count() * key.second.perm_count()) * v * v;
    }
    return s;
}

double BipartiteKernel::scalar() const {
    if (left_ != 0 || right_ != 0) throw InvalidArgument("scalar() on a non-scalar contraction");
    return value(MultiIndex{}, MultiIndex{});
}

// ---------------------------------------------------------------------------
// Contraction and symmetrization

BipartiteKernel contract(const SymmetricKernel& f, const SymmetricKernel& g, int r) {
    if (f.dim() != g.dim()) throw InvalidArgument("contract: dim mismatch");
    if (r < 0 || r > std::min(f.order(), g.order())) {
        throw InvalidArgument("contract: r = " + std::to_string(r) + " outside [0, min(k, l)]");
    }
    const int s = f.order() - r;
    const int t = g.order() - r;
    BipartiteKernel out(s, t, f.dim());

    // Group g by the contracted sub-multiset A: A -> [(eta, d)].
    std::map<MultiIndex, std::vector<std::pair<MultiIndex, double>>> g_by_a;
    for (const auto& [beta, d] : g.entries()) {
        for_each_submultiset(beta, r, [&](const MultiIndex& a, const MultiIndex& eta, double) {
            g_by_a[a].emplace_back(eta, d);
        });
    }
    // T(xi, eta) = sum_A (r!/prod mult_A!) f(xi + A) g(eta + A).
    for (const auto& [alpha, c] : f.entries()) {
        for_each_submultiset(alpha, r, [&](const MultiIndex& a, const MultiIndex& xi, double weight) {
            const auto it = g_by_a.find(a);
            if (it == g_by_a.end()) return;
            for (const auto& [eta, d] : it->second) out.add(xi, eta, weight * c * d);
        });
    }
    out.compact();
    return out;
}

SymmetricKernel symmetrize(const BipartiteKernel& t) {
    const int s = t.left_size();
    const int m = s + t.right_size();
    if (m == 0) throw InvalidArgument("symmetrize: order-0 contraction has no kernel; use scalar()");
    const double total = static_cast<double>(detail::binomial(m, s));
    KernelAccumulator acc(m, t.dim());
    for (const auto& [key, v] : t.entries()) {
        const MultiIndex gamma = key.first.merged(key.second);
        std::uint64_t ways = 1;
        for (const auto& [label, mult] : gamma.runs()) {
            ways *= detail::binomial(mult, key.first.multiplicity(label));
        }
        acc.add(gamma, static_cast<double>(ways) / total * v);
    }
    return std::move(acc).finish();
}

SymmetricKernel sym_contract(const SymmetricKernel& f, const SymmetricKernel& g, int r) {
    if (f.order() + g.order() - 2 * r == 0) {
        throw InvalidArgument("sym_contract: full contraction is the scalar inner(f, g)");
    }
    return symmetrize(contract(f, g, r));
}

double hermite(int k, double x) {
    if (k < 0) throw InvalidArgument("hermite: negative order");
    if (k == 0) return 1.0;
    double prev = 1.0;
    double cur = x;
    for (int j = 1; j < k; ++j) {
        const double next = x * cur - static_cast<double>(j) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

}  // namespace wienerlab
