#pragma once

// Plain multivariate polynomials in monomial form. Chaos elements are
// expanded through explicit Hermite coefficients; Gaussian expectations use
// E[X^(2j)] = (2j-1)!!; the Malliavin derivative in finite dimension is the
// partial derivative, and L = Laplacian - x . grad.

#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "wienerlab/chaos.hpp"

namespace oracle {

class Poly {
public:
    using Exps = std::vector<int>;

    explicit Poly(std::size_t n) : n_(n) {}

    static Poly constant(std::size_t n, double c) {
        Poly p(n);
        p.add(Exps(n, 0), c);
        return p;
    }

    static Poly variable(std::size_t n, std::size_t i, int power = 1) {
        Poly p(n);
        Exps e(n, 0);
        e[i] = power;
        p.add(e, 1.0);
        return p;
    }

    std::size_t vars() const { return n_; }
    const std::map<Exps, double>& terms() const { return terms_; }

    void add(const Exps& e, double c) {
        if (c == 0.0) return;
        terms_[e] += c;
    }

    Poly operator+(const Poly& o) const {
        Poly r = *this;
        for (const auto& [e, c] : o.terms_) r.add(e, c);
        return r;
    }

    Poly operator*(double a) const {
        Poly r(n_);
        for (const auto& [e, c] : terms_) r.add(e, a * c);
        return r;
    }

    Poly operator*(const Poly& o) const {
        Poly r(n_);
        for (const auto& [e1, c1] : terms_) {
            for (const auto& [e2, c2] : o.terms_) {
                Exps e(n_);
                for (std::size_t i = 0; i < n_; ++i) e[i] = e1[i] + e2[i];
                r.add(e, c1 * c2);
            }
        }
        return r;
    }

    Poly derivative(std::size_t i) const {
        Poly r(n_);
        for (const auto& [e, c] : terms_) {
            if (e[i] == 0) continue;
            Exps d = e;
            --d[i];
            r.add(d, c * e[i]);
        }
        return r;
    }

    // Ornstein-Uhlenbeck generator: sum_i d_ii - x_i d_i.
    Poly ou() const {
        Poly r(n_);
        for (const auto& [e, c] : terms_) {
            int degree = 0;
            for (std::size_t i = 0; i < n_; ++i) {
                degree += e[i];
                if (e[i] >= 2) {
                    Exps d = e;
                    d[i] -= 2;
                    r.add(d, c * e[i] * (e[i] - 1));
                }
            }
            r.add(e, -c * degree);
        }
        return r;
    }

    double evaluate(const std::vector<double>& x) const {
        double s = 0.0;
        for (const auto& [e, c] : terms_) {
            double m = c;
            for (std::size_t i = 0; i < n_; ++i) m *= std::pow(x[i], e[i]);
            s += m;
        }
        return s;
    }

    double gaussian_mean() const {
        double s = 0.0;
        for (const auto& [e, c] : terms_) {
            double m = c;
            for (int p : e) m *= gaussian_moment(p);
            s += m;
        }
        return s;
    }

    double max_abs_diff(const Poly& o) const {
        double gap = 0.0;
        std::map<Exps, double> all = terms_;
        for (const auto& [e, c] : o.terms_) all[e] -= c;
        for (const auto& [e, c] : all) gap = std::max(gap, std::abs(c));
        return gap;
    }

    static double gaussian_moment(int p) {
        if (p % 2 == 1) return 0.0;
        double r = 1.0;
        for (int j = p - 1; j > 1; j -= 2) r *= j;
        return r;
    }

private:
    std::size_t n_;
    std::map<Exps, double> terms_;
};

inline double factorial(int n) {
    double r = 1.0;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
}

// H_m(x_i) = sum_j (-1)^j m! / (j! (m-2j)! 2^j) x_i^(m-2j).
inline Poly hermite(std::size_t n, std::size_t i, int m) {
    Poly p(n);
    for (int j = 0; 2 * j <= m; ++j) {
        Poly::Exps e(n, 0);
        e[i] = m - 2 * j;
        const double c = (j % 2 == 0 ? 1.0 : -1.0) * factorial(m) / (factorial(j) * factorial(m - 2 * j) * std::pow(2.0, j));
        p.add(e, c);
    }
    return p;
}

// I_k(f) = sum over ordered tuples of f(tuple) * prod_v H_{mult v}(x_v)
// grouped by sorted index: (k! / prod mult!) * c * prod H.
inline Poly from_chaos(const wienerlab::ChaosElement& f) {
    const std::size_t n = f.dim();
    Poly out = Poly::constant(n, f.constant());
    for (int k = 1; k <= f.max_order(); ++k) {
        const auto* fk = f.kernel(k);
        if (fk == nullptr) continue;
        for (const auto& [alpha, c] : fk->entries()) {
            std::map<wienerlab::Label, int> mult;
            for (auto v : alpha) ++mult[v];
            double perms = factorial(k);
            Poly term = Poly::constant(n, 1.0);
            for (const auto& [v, m] : mult) {
                perms /= factorial(m);
                term = term * hermite(n, v - 1, m);
            }
            out = out + term * (perms * c);
        }
    }
    return out;
}

}  // namespace oracle
