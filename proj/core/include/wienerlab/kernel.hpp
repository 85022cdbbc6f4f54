#pragma once

// Sparse symmetric tensors over a finite orthonormal basis e_1..e_n.
//
// Coefficient convention: a SymmetricKernel stores, for every sorted
// multi-index alpha, the common value of the symmetric function on all
// permutations of alpha. So the order-2 kernel {(1,2): c} is the function
// f(1,2) = f(2,1) = c, with squared norm 2c^2, and I_2 of it equals
// 2c * x_1 * x_2.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace wienerlab {

/// Highest chaos order any kernel, product or contraction may reach.
inline constexpr int kMaxOrder = 8;

/// 1-based basis label.
using Label = std::uint32_t;

/// Sorted (nondecreasing) tuple of basis labels with at most kMaxOrder
/// entries. The empty index is used for the zero-size side of a contraction.
class MultiIndex {
public:
    MultiIndex() = default;

    /// Sorts `labels`. Throws InvalidArgument on more than kMaxOrder labels
    /// or a zero label.
    MultiIndex(std::initializer_list<Label> labels);
    explicit MultiIndex(std::span<const Label> labels);

    int size() const noexcept { return len_; }
    bool empty() const noexcept { return len_ == 0; }
    Label operator[](int i) const noexcept { return labels_[static_cast<std::size_t>(i)]; }
    const Label* begin() const noexcept { return labels_.data(); }
    const Label* end() const noexcept { return labels_.data() + len_; }
    Label back() const noexcept { return labels_[static_cast<std::size_t>(len_ - 1)]; }

    /// Number of distinct orderings: k! / prod_v mult(v)!.
    std::uint64_t perm_count() const noexcept;

    /// Multiplicity of label v.
    int multiplicity(Label v) const noexcept;

    /// (label, multiplicity) runs in increasing label order.
    std::vector<std::pair<Label, int>> runs() const;

    /// Multiset union.
    MultiIndex merged(const MultiIndex& other) const;

    /// Removes one copy of v; v must be present.
    MultiIndex without_one(Label v) const;

    friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

private:
    std::array<Label, kMaxOrder> labels_{};
    std::uint8_t len_ = 0;
};

/// Unsorted (index tuple, coefficient) pair as accepted by make_kernel.
struct RawEntry {
    std::vector<Label> idx;
    double coef = 0.0;
};

/// Element of the k-th symmetric tensor power of R^n, stored sparsely.
/// Immutable once built; no stored coefficient is exactly zero.
class SymmetricKernel {
public:
    using Entries = std::map<MultiIndex, double>;

    SymmetricKernel() = default;

    /// Empty (zero) kernel of the given order and dimension.
    SymmetricKernel(int order, std::size_t dim);

    int order() const noexcept { return order_; }
    std::size_t dim() const noexcept { return dim_; }
    const Entries& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }

    /// Coefficient at a sorted index (0 when absent).
    double coefficient(const MultiIndex& alpha) const;

    /// Sum over entries of perm_count * c^2, the squared H^{(x)k} norm.
    double norm_squared() const;
    double norm() const;

    SymmetricKernel scaled(double factor) const;

    /// Same kernel viewed in a larger ambient dimension.
    SymmetricKernel embedded(std::size_t new_dim) const;

    /// Drops entries with |c| <= tol. The only lossy kernel operation.
    SymmetricKernel pruned(double tol) const;

    friend bool operator==(const SymmetricKernel&, const SymmetricKernel&) = default;

private:
    friend class KernelAccumulator;

    int order_ = 1;
    std::size_t dim_ = 1;
    Entries entries_;
};

/// Mutable builder for SymmetricKernel. Additions accumulate per index and
/// exact zeros are dropped when the kernel is finished, so cancellations
/// produced by sums of contributions are exact.
class KernelAccumulator {
public:
    KernelAccumulator(int order, std::size_t dim);

    void add(const MultiIndex& alpha, double value);
    void add_scaled(const SymmetricKernel& f, double factor);

    int order() const noexcept { return order_; }
    std::size_t dim() const noexcept { return dim_; }

    SymmetricKernel finish() &&;

private:
    int order_;
    std::size_t dim_;
    SymmetricKernel::Entries entries_;
};

/// Sorts tuples, merges duplicates by addition, drops exact zeros and checks
/// labels lie in [1, dim]. Throws InvalidArgument on out-of-range labels or
/// tuple length != order.
SymmetricKernel make_kernel(int order, std::size_t dim, std::span<const RawEntry> raw);
SymmetricKernel make_kernel(int order, std::size_t dim, std::initializer_list<RawEntry> raw);

/// <f, g> in H^{(x)k}. Throws InvalidArgument on order or dim mismatch.
double inner(const SymmetricKernel& f, const SymmetricKernel& g);
double norm(const SymmetricKernel& f);

/// Contraction output before symmetrization: a function of two groups of
/// arguments, symmetric within each group. Keys are (sorted left, sorted
/// right) and values are function values.
class BipartiteKernel {
public:
    using Key = std::pair<MultiIndex, MultiIndex>;
    using Entries = std::map<Key, double>;

    BipartiteKernel(int left_size, int right_size, std::size_t dim);

    int left_size() const noexcept { return left_; }
    int right_size() const noexcept { return right_; }
    std::size_t dim() const noexcept { return dim_; }
    const Entries& entries() const noexcept { return entries_; }

    /// Accumulates into (left, right); exact zeros are dropped by compact().
    void add(const MultiIndex& left, const MultiIndex& right, double value);
    void compact();

    double value(const MultiIndex& left, const MultiIndex& right) const;

    /// Squared H^{(x)(s+t)} norm, counting orderings within each group.
    double norm_squared() const;

    /// For left_size == right_size == 0: the scalar value.
    double scalar() const;

private:
    int left_;
    int right_;
    std::size_t dim_;
    Entries entries_;
};

/// f (x)_r g. For r = k = l the result has two empty sides and scalar()
/// equals inner(f, g); for r = 0 it is the plain tensor product.
/// Throws InvalidArgument for r out of range or mismatched dims, and
/// OrderCapExceeded when k + l - 2r > kMaxOrder.
BipartiteKernel contract(const SymmetricKernel& f, const SymmetricKernel& g, int r);

/// Full symmetrization (1/m!) sum_sigma T(x_sigma). Requires s + t >= 1.
SymmetricKernel symmetrize(const BipartiteKernel& t);

/// symmetrize(contract(f, g, r)). The scalar case r = k = l has no kernel;
/// use inner(f, g) for it (InvalidArgument is thrown here).
SymmetricKernel sym_contract(const SymmetricKernel& f, const SymmetricKernel& g, int r);

/// Probabilists' Hermite polynomial H_k(x) by the three-term recurrence.
double hermite(int k, double x);

}  // namespace wienerlab
