#include "wienerlab/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "combinatorics.hpp"
#include "wienerlab/errors.hpp"

namespace wienerlab {

namespace {

// Per-order accumulators for building a ChaosElement out of many pieces.
class ChaosAccumulator {
public:
    explicit ChaosAccumulator(std::size_t dim) : dim_(dim) {}

    void add_constant(double c) { constant_ += c; }

    KernelAccumulator& slot(int k) {
        auto it = slots_.find(k);
        if (it == slots_.end()) it = slots_.emplace(k, KernelAccumulator(k, dim_)).first;
        return it->second;
    }

    void add(const SymmetricKernel& f, double factor) { slot(f.order()).add_scaled(f, factor); }

    ChaosElement finish() && {
        std::vector<SymmetricKernel> kernels;
        for (auto& [k, acc] : slots_) kernels.push_back(std::move(acc).finish());
        return ChaosElement(dim_, constant_, std::move(kernels));
    }

private:
    std::size_t dim_;
    double constant_ = 0.0;
    std::map<int, KernelAccumulator> slots_;
};

void require_same_dim(const ChaosElement& f, const ChaosElement& g, const char* op) {
    if (f.dim() != g.dim()) {
        throw InvalidArgument(std::string(op) + ": dim mismatch (" + std::to_string(f.dim()) + " vs " +
                              std::to_string(g.dim()) + ")");
    }
}

double fact(int n) { return static_cast<double>(detail::factorial(n)); }
double binom(int n, int k) { return static_cast<double>(detail::binomial(n, k)); }

ChaosElement power(const ChaosElement& f, int m) {
    ChaosElement out(f.dim(), 1.0);
    for (int i = 0; i < m; ++i) out = multiply(out, f);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Types

ChaosElement::ChaosElement(std::size_t dim, double constant) : dim_(dim), constant_(constant) {
    if (dim == 0) throw InvalidArgument("chaos dimension must be >= 1");
}

ChaosElement::ChaosElement(std::size_t dim, double constant, std::vector<SymmetricKernel> kernels)
    : ChaosElement(dim, constant) {
    for (auto& f : kernels) {
        if (f.dim() != dim) {
            throw InvalidArgument("kernel of order " + std::to_string(f.order()) + " has dim " +
                                  std::to_string(f.dim()) + ", element has dim " + std::to_string(dim));
        }
        const auto k = static_cast<std::size_t>(f.order());
        if (slots_.size() < k) {
            for (std::size_t j = slots_.size(); j < k; ++j) slots_.emplace_back(static_cast<int>(j + 1), dim);
        } else if (!slots_[k - 1].empty()) {
            throw InvalidArgument("repeated kernel of order " + std::to_string(k));
        }
        slots_[k - 1] = std::move(f);
    }
    while (!slots_.empty() && slots_.back().empty()) slots_.pop_back();
}

ChaosElement ChaosElement::integral(SymmetricKernel f) {
    const std::size_t dim = f.dim();
    std::vector<SymmetricKernel> ks;
    ks.push_back(std::move(f));
    return ChaosElement(dim, 0.0, std::move(ks));
}

const SymmetricKernel* ChaosElement::kernel(int k) const noexcept {
    if (k < 1 || k > max_order()) return nullptr;
    const auto& f = slots_[static_cast<std::size_t>(k - 1)];
    return f.empty() ? nullptr : &f;
}

ChaosElement ChaosElement::embedded(std::size_t new_dim) const {
    std::vector<SymmetricKernel> ks;
    for (const auto& f : slots_) {
        if (!f.empty()) ks.push_back(f.embedded(new_dim));
    }
    if (new_dim < dim_) throw InvalidArgument("cannot embed chaos element into a smaller dimension");
    return ChaosElement(new_dim, constant_, std::move(ks));
}

ChaosVector::ChaosVector(std::vector<ChaosElement> components) : components_(std::move(components)) {
    if (components_.empty()) throw InvalidArgument("chaos vector needs at least one component");
    for (const auto& c : components_) {
        if (c.dim() != components_.front().dim()) throw InvalidArgument("chaos vector components differ in dim");
    }
}

ChaosMatrix::ChaosMatrix(std::size_t size, std::size_t dim) : size_(size), cells_(size * size, ChaosElement(dim)) {}

// ---------------------------------------------------------------------------
// Linear structure

ChaosElement linear_combine(std::span<const Term> terms) {
    if (terms.empty()) return ChaosElement();
    const std::size_t dim = terms.front().second->dim();
    ChaosAccumulator acc(dim);
    for (const auto& [a, f] : terms) {
        if (f->dim() != dim) throw InvalidArgument("linear_combine: dim mismatch");
        acc.add_constant(a * f->constant());
        for (int k = 1; k <= f->max_order(); ++k) {
            if (const auto* fk = f->kernel(k)) acc.add(*fk, a);
        }
    }
    return std::move(acc).finish();
}

ChaosElement linear_combine(std::initializer_list<Term> terms) {
    return linear_combine(std::span<const Term>(terms.begin(), terms.size()));
}

ChaosElement operator+(const ChaosElement& f, const ChaosElement& g) { return linear_combine({{1.0, &f}, {1.0, &g}}); }
ChaosElement operator-(const ChaosElement& f, const ChaosElement& g) { return linear_combine({{1.0, &f}, {-1.0, &g}}); }
ChaosElement operator*(double a, const ChaosElement& f) { return linear_combine({{a, &f}}); }

ChaosElement project(const ChaosElement& f, int k) {
    if (k < 0) throw InvalidArgument("project: negative order");
    if (k == 0) return ChaosElement(f.dim(), f.constant());
    if (const auto* fk = f.kernel(k)) return ChaosElement::integral(*fk);
    return ChaosElement(f.dim());
}

// ---------------------------------------------------------------------------
// Product formula

ChaosElement multiply(const ChaosElement& f, const ChaosElement& g) {
    require_same_dim(f, g, "multiply");
    if (f.max_order() + g.max_order() > kMaxOrder) {
        throw OrderCapExceeded("multiply: orders " + std::to_string(f.max_order()) + " + " +
                               std::to_string(g.max_order()) + " exceed cap " + std::to_string(kMaxOrder));
    }
    ChaosAccumulator acc(f.dim());
    acc.add_constant(f.constant() * g.constant());
    for (int k = 1; k <= f.max_order(); ++k) {
        if (const auto* fk = f.kernel(k)) acc.add(*fk, g.constant());
    }
    for (int l = 1; l <= g.max_order(); ++l) {
        if (const auto* gl = g.kernel(l)) acc.add(*gl, f.constant());
    }
    for (int k = 1; k <= f.max_order(); ++k) {
        const auto* fk = f.kernel(k);
        if (!fk) continue;
        for (int l = 1; l <= g.max_order(); ++l) {
            const auto* gl = g.kernel(l);
            if (!gl) continue;
            for (int r = 0; r <= std::min(k, l); ++r) {
                const double c = fact(r) * binom(k, r) * binom(l, r);
                if (k + l - 2 * r == 0) {
                    acc.add_constant(c * inner(*fk, *gl));
                } else {
                    acc.add(sym_contract(*fk, *gl, r), c);
                }
            }
        }
    }
    return std::move(acc).finish();
}

// ---------------------------------------------------------------------------
// Moments

double expectation(const ChaosElement& f) { return f.constant(); }

double covariance(const ChaosElement& f, const ChaosElement& g) {
    require_same_dim(f, g, "covariance");
    double s = 0.0;
    const int p = std::min(f.max_order(), g.max_order());
    for (int k = 1; k <= p; ++k) {
        const auto* fk = f.kernel(k);
        const auto* gk = g.kernel(k);
        if (fk && gk) s += fact(k) * inner(*fk, *gk);
    }
    return s;
}

double variance(const ChaosElement& f) {
    double s = 0.0;
    for (int k = 1; k <= f.max_order(); ++k) {
        if (const auto* fk = f.kernel(k)) s += fact(k) * fk->norm_squared();
    }
    return s;
}

double expectation_of_product(const ChaosElement& f, const ChaosElement& g) {
    return f.constant() * g.constant() + covariance(f, g);
}

double moment(const ChaosElement& f, int m) {
    if (m < 1) throw InvalidArgument("moment: order must be >= 1");
    if (m * f.max_order() > kMaxOrder) {
        throw OrderCapExceeded("moment: " + std::to_string(m) + " * order " + std::to_string(f.max_order()) +
                               " exceeds cap " + std::to_string(kMaxOrder));
    }
    if (m == 1) return expectation(f);
    // E[F^m] = E[F^a F^b] with a + b = m, the last product taken through the
    // isometry so the top chaos F^m is never materialized.
    const ChaosElement a = power(f, (m + 1) / 2);
    const ChaosElement b = m % 2 == 0 ? a : power(f, m / 2);
    return expectation_of_product(a, b);
}

// ---------------------------------------------------------------------------
// Evaluation

double evaluate(const ChaosElement& f, std::span<const double> x) {
    if (x.size() != f.dim()) {
        throw InvalidArgument("evaluate: point has length " + std::to_string(x.size()) + ", expected " +
                              std::to_string(f.dim()));
    }
    double s = f.constant();
    for (int k = 1; k <= f.max_order(); ++k) {
        const auto* fk = f.kernel(k);
        if (!fk) continue;
        for (const auto& [alpha, c] : fk->entries()) {
            double prod = static_cast<double>(alpha.perm_count()) * c;
            for (const auto& [v, mult] : alpha.runs()) prod *= hermite(mult, x[v - 1]);
            s += prod;
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Malliavin calculus

ChaosElement mderiv(const ChaosElement& f, Label i) {
    if (i < 1 || i > f.dim()) {
        throw InvalidArgument("mderiv: label " + std::to_string(i) + " outside [1, " + std::to_string(f.dim()) + "]");
    }
    ChaosAccumulator acc(f.dim());
    for (int k = 1; k <= f.max_order(); ++k) {
        const auto* fk = f.kernel(k);
        if (!fk) continue;
        for (const auto& [alpha, c] : fk->entries()) {
            if (alpha.multiplicity(i) == 0) continue;
            if (k == 1) {
                acc.add_constant(c);
            } else {
                acc.slot(k - 1).add(alpha.without_one(i), static_cast<double>(k) * c);
            }
        }
    }
    return std::move(acc).finish();
}

ChaosElement carre_du_champ(const ChaosElement& f, const ChaosElement& g) {
    require_same_dim(f, g, "carre_du_champ");
    if (f.max_order() + g.max_order() - 2 > kMaxOrder) {
        throw OrderCapExceeded("carre_du_champ: result order exceeds cap");
    }
    ChaosAccumulator acc(f.dim());
    for (int k = 1; k <= f.max_order(); ++k) {
        const auto* fk = f.kernel(k);
        if (!fk) continue;
        for (int l = 1; l <= g.max_order(); ++l) {
            const auto* gl = g.kernel(l);
            if (!gl) continue;
            for (int r = 1; r <= std::min(k, l); ++r) {
                const double c = static_cast<double>(k * l) * fact(r - 1) * binom(k - 1, r - 1) * binom(l - 1, r - 1);
                if (k + l - 2 * r == 0) {
                    acc.add_constant(c * inner(*fk, *gl));
                } else {
                    acc.add(sym_contract(*fk, *gl, r), c);
                }
            }
        }
    }
    return std::move(acc).finish();
}

ChaosElement ou_generator(const ChaosElement& f) {
    std::vector<SymmetricKernel> ks;
    for (int k = 1; k <= f.max_order(); ++k) {
        if (const auto* fk = f.kernel(k)) ks.push_back(fk->scaled(-static_cast<double>(k)));
    }
    return ChaosElement(f.dim(), 0.0, std::move(ks));
}

IbpSides check_ibp(const ChaosElement& f, const ChaosElement& g, const ChaosElement& h) {
    require_same_dim(f, g, "check_ibp");
    require_same_dim(f, h, "check_ibp");
    const ChaosElement hg = multiply(h, g);
    const double lhs = -expectation_of_product(hg, ou_generator(f));
    const double rhs = expectation_of_product(h, carre_du_champ(g, f)) + expectation_of_product(g, carre_du_champ(h, f));
    return {lhs, rhs};
}

ChaosMatrix malliavin_matrix(const ChaosVector& v) {
    ChaosMatrix m(v.size(), v.dim());
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = i; j < v.size(); ++j) {
            m.at(i, j) = carre_du_champ(v[i], v[j]);
            if (j != i) m.at(j, i) = m.at(i, j);
        }
    }
    return m;
}

ChaosElement det_chaos(const ChaosMatrix& m) {
    const std::size_t d = m.size();
    if (d == 0 || d > 3) throw InvalidArgument("det_chaos: size " + std::to_string(d) + " outside [1, 3]");
    if (d == 1) return m.at(0, 0);
    if (d == 2) {
        const ChaosElement a = multiply(m.at(0, 0), m.at(1, 1));
        const ChaosElement b = multiply(m.at(0, 1), m.at(1, 0));
        return a - b;
    }
    // Leibniz over the six permutations of {0, 1, 2}.
    static constexpr int kPerms[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
    static constexpr double kSigns[6] = {1, 1, 1, -1, -1, -1};
    std::vector<ChaosElement> products;
    products.reserve(6);
    for (const auto& p : kPerms) {
        products.push_back(multiply(multiply(m.at(0, static_cast<std::size_t>(p[0])), m.at(1, static_cast<std::size_t>(p[1]))),
                                    m.at(2, static_cast<std::size_t>(p[2]))));
    }
    std::vector<Term> terms;
    for (std::size_t i = 0; i < 6; ++i) terms.emplace_back(kSigns[i], &products[i]);
    return linear_combine(terms);
}

double max_coefficient_difference(const ChaosElement& f, const ChaosElement& g) {
    require_same_dim(f, g, "max_coefficient_difference");
    double worst = std::abs(f.constant() - g.constant());
    const int p = std::max(f.max_order(), g.max_order());
    for (int k = 1; k <= p; ++k) {
        const auto* fk = f.kernel(k);
        const auto* gk = g.kernel(k);
        if (fk) {
            for (const auto& [alpha, c] : fk->entries()) {
                worst = std::max(worst, std::abs(c - (gk ? gk->coefficient(alpha) : 0.0)));
            }
        }
        if (gk) {
            for (const auto& [alpha, c] : gk->entries()) {
                if (!fk || fk->entries().find(alpha) == fk->entries().end()) worst = std::max(worst, std::abs(c));
            }
        }
    }
    return worst;
}

}  // namespace wienerlab
