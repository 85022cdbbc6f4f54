#pragma once

// Finite Wiener chaos expansions F = E[F] + sum_{k=1}^p I_k(f_k) over the
// Gaussian space generated by n iid standard normals X_1..X_n, together with
// the exact algebra on them: products, moments, Malliavin derivative,
// carre du champ and the Ornstein-Uhlenbeck generator.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "wienerlab/kernel.hpp"

namespace wienerlab {

class ChaosElement {
public:
    /// Zero element of dimension 1.
    ChaosElement() = default;

    /// Constant element.
    explicit ChaosElement(std::size_t dim, double constant = 0.0);

    /// Constant plus kernels of distinct orders (any order, empty kernels are
    /// ignored). Throws InvalidArgument on a dim mismatch or repeated order.
    ChaosElement(std::size_t dim, double constant, std::vector<SymmetricKernel> kernels);

    /// I_k(f).
    static ChaosElement integral(SymmetricKernel f);

    std::size_t dim() const noexcept { return dim_; }
    double constant() const noexcept { return constant_; }

    /// Highest populated order (0 for constants).
    int max_order() const noexcept { return static_cast<int>(slots_.size()); }

    /// Kernel of order k, or nullptr when that chaos component is zero.
    const SymmetricKernel* kernel(int k) const noexcept;

    bool is_constant() const noexcept { return slots_.empty(); }

    /// Same element viewed over a larger basis (labels unchanged).
    ChaosElement embedded(std::size_t new_dim) const;

    friend bool operator==(const ChaosElement&, const ChaosElement&) = default;

private:
    std::size_t dim_ = 1;
    double constant_ = 0.0;
    // slots_[k-1] holds f_k (possibly empty); the last slot is never empty.
    std::vector<SymmetricKernel> slots_;
};

/// d-tuple of chaos elements over a common basis.
class ChaosVector {
public:
    explicit ChaosVector(std::vector<ChaosElement> components);

    std::size_t size() const noexcept { return components_.size(); }
    std::size_t dim() const noexcept { return components_.front().dim(); }
    const ChaosElement& operator[](std::size_t i) const { return components_[i]; }
    const std::vector<ChaosElement>& components() const noexcept { return components_; }

private:
    std::vector<ChaosElement> components_;
};

/// Square matrix of chaos elements (the Malliavin matrix and friends).
class ChaosMatrix {
public:
    explicit ChaosMatrix(std::size_t size, std::size_t dim);

    std::size_t size() const noexcept { return size_; }
    ChaosElement& at(std::size_t i, std::size_t j) { return cells_[i * size_ + j]; }
    const ChaosElement& at(std::size_t i, std::size_t j) const { return cells_[i * size_ + j]; }

private:
    std::size_t size_;
    std::vector<ChaosElement> cells_;
};

using Term = std::pair<double, const ChaosElement*>;

/// sum_i a_i F_i, coefficientwise; exact zeros dropped.
ChaosElement linear_combine(std::span<const Term> terms);
ChaosElement linear_combine(std::initializer_list<Term> terms);

ChaosElement operator+(const ChaosElement& f, const ChaosElement& g);
ChaosElement operator-(const ChaosElement& f, const ChaosElement& g);
ChaosElement operator*(double a, const ChaosElement& f);

/// J_k F.
ChaosElement project(const ChaosElement& f, int k);

/// Exact chaos expansion of the pointwise product (product formula).
/// Throws OrderCapExceeded when f.max_order() + g.max_order() > kMaxOrder.
ChaosElement multiply(const ChaosElement& f, const ChaosElement& g);

double expectation(const ChaosElement& f);

/// sum_k k! <f_k, g_k>.
double covariance(const ChaosElement& f, const ChaosElement& g);
double variance(const ChaosElement& f);

/// E[F G] through the isometry, without forming the product.
double expectation_of_product(const ChaosElement& f, const ChaosElement& g);

/// Exact E[F^m]. Throws OrderCapExceeded when m * max_order > kMaxOrder.
double moment(const ChaosElement& f, int m);

/// Polynomial value at x (length dim) via Ito's Hermite-product identity.
double evaluate(const ChaosElement& f, std::span<const double> x);

/// D_i F = sum_k k I_{k-1}(f_k(., i)).
ChaosElement mderiv(const ChaosElement& f, Label i);

/// <DF, DG>_H as a chaos expansion (closed contraction formula).
ChaosElement carre_du_champ(const ChaosElement& f, const ChaosElement& g);

/// L F = sum_k -k J_k F.
ChaosElement ou_generator(const ChaosElement& f);

struct IbpSides {
    double lhs;  ///< -E[H G L F]
    double rhs;  ///< E[H <DG, DF>] + E[G <DH, DF>]
};

/// Both sides of the integration-by-parts identity, computed exactly.
IbpSides check_ibp(const ChaosElement& f, const ChaosElement& g, const ChaosElement& h);

/// Gamma_ij = <DV_i, DV_j>.
ChaosMatrix malliavin_matrix(const ChaosVector& v);

/// Leibniz determinant of a d x d chaos matrix, d <= 3.
ChaosElement det_chaos(const ChaosMatrix& m);

/// Largest coefficientwise difference, constants included. Used by tests
/// and the identity suite to compare two routes to the same element.
double max_coefficient_difference(const ChaosElement& f, const ChaosElement& g);

}  // namespace wienerlab
