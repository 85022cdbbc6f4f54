#include "wienerlab/theorem_lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "wienerlab/errors.hpp"
#include "wienerlab/sampling.hpp"

namespace wienerlab {

namespace {

constexpr int kBootstrapReplicates = 200;
constexpr double kFourthMomentSlack = 0.02;
constexpr double kShigekawaSlack = 0.5;
constexpr double kShigekawaThreshold = 0.05;
constexpr double kSlopeSlack = 0.1;
constexpr double kRatioGate = 3.0;
constexpr double kSmallBallGate = 10.0;
constexpr double kJointTvGate = 0.1;
constexpr double kMonotoneTol = 1e-12;
constexpr double kNegMomentFloor = 1e-8;
constexpr double kTruncationAlarm = 1e-4;

// Substream families under the experiment seed.
constexpr std::uint64_t kSampleStream = 0x5000;
constexpr std::uint64_t kBootstrapStream = 0xB000;

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

BootstrapOptions bootstrap_for(std::uint64_t seed, std::uint64_t row, bool paired) {
    BootstrapOptions b;
    b.replicates = kBootstrapReplicates;
    b.seed = derive_seed(seed, kBootstrapStream + row);
    b.paired = paired;
    return b;
}

std::uint64_t sample_seed(std::uint64_t seed, std::uint64_t stream) { return derive_seed(seed, kSampleStream + stream); }

double est_value(const Json& row, const char* key) { return row.at(key).at("value").get<double>(); }

double est_width(const Json& row, const char* key) {
    const auto& ci = row.at(key).at("ci");
    return ci.at(1).get<double>() - ci.at(0).get<double>();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::size_t common_dim(const std::vector<SequenceMember>& seq, const ChaosElement& extra) {
    std::size_t d = extra.dim();
    for (const auto& m : seq) d = std::max(d, m.element.dim());
    return d;
}

// Element must live in exactly the k-th chaos.
void require_single_chaos(const ChaosElement& f, int k, const std::string& what) {
    bool ok = f.constant() == 0.0 && f.max_order() == k;
    for (int j = 1; ok && j < k; ++j) ok = f.kernel(j) == nullptr;
    if (!ok) throw InvalidArgument(what + " is not in chaos of order " + std::to_string(k));
}

SymmetricKernel kernel_sum(const SymmetricKernel& f, const SymmetricKernel& g, double t, std::size_t dim) {
    KernelAccumulator acc(f.order(), dim);
    acc.add_scaled(f.embedded(dim), 1.0);
    acc.add_scaled(g.embedded(dim), t);
    return std::move(acc).finish();
}

Verdict combine_status(const std::vector<Verdict>& statuses) {
    bool any_pass = false;
    for (auto s : statuses) {
        if (s == Verdict::fail) return Verdict::fail;
        any_pass = any_pass || s == Verdict::pass;
    }
    return any_pass ? Verdict::pass : Verdict::vacuous;
}

// ---------------------------------------------------------------------------
// Verdict rules. Each reads only rows and summary.

Verdict fourth_moment_row_status(const Json& row, double slack) {
    const double bound = row.at("bound").get<double>();
    if (bound >= 1.0) return Verdict::vacuous;
    return est_value(row, "tv") <= bound + est_width(row, "tv") + slack ? Verdict::pass : Verdict::fail;
}

Verdict verdict_fourth_moment(const ExperimentReport& r) {
    const double slack = r.summary.at("slack").get<double>();
    std::vector<Verdict> st;
    for (const auto& row : r.rows) st.push_back(fourth_moment_row_status(row, slack));
    return combine_status(st);
}

Verdict verdict_shigekawa(const ExperimentReport& r) {
    if (r.rows.empty()) return Verdict::vacuous;
    bool all_zero = true;
    std::vector<double> ratios;
    for (const auto& row : r.rows) {
        all_zero = all_zero && est_value(row, "tv") == 0.0 && est_value(row, "fm") == 0.0;
        const auto& rho = row.at("ratio");
        ratios.push_back(rho.is_null() ? std::numeric_limits<double>::infinity() : rho.get<double>());
    }
    if (all_zero) return Verdict::vacuous;
    const double slack = r.summary.at("slack").get<double>();
    const double threshold = r.summary.at("tv_threshold").get<double>();
    const double med = median(ratios);
    const double mx = *std::max_element(ratios.begin(), ratios.end());
    if (!(mx <= 2.0 * med + slack)) return Verdict::fail;
    const auto& last = r.rows.back();
    if (est_value(last, "fm") <= threshold && est_value(last, "tv") > threshold) return Verdict::fail;
    return Verdict::pass;
}

struct RateFit {
    double slope = 0.0;
    double ratio = 1.0;
    bool enough = false;
};

// Least-squares slope of log tv against log distance over rows with both
// positive, and the ratio of fitted constants at the two smallest distances.
RateFit fit_rate(const std::vector<Json>& rows, const char* dist_key, const char* c_key) {
    std::vector<std::pair<double, double>> pts;
    std::vector<std::pair<double, double>> consts;
    for (const auto& row : rows) {
        const double d = row.at(dist_key).get<double>();
        const double tv = est_value(row, "tv");
        if (d > 0.0) consts.emplace_back(d, row.at(c_key).get<double>());
        if (d > 0.0 && tv > 0.0) pts.emplace_back(std::log(d), std::log(tv));
    }
    RateFit fit;
    if (consts.size() >= 2) {
        std::sort(consts.begin(), consts.end());
        const double a = consts[0].second;
        const double b = consts[1].second;
        const double lo = std::min(a, b);
        const double hi = std::max(a, b);
        fit.ratio = hi == 0.0 ? 1.0 : (lo == 0.0 ? std::numeric_limits<double>::infinity() : hi / lo);
    }
    if (pts.size() >= 2) {
        double mx = 0.0;
        double my = 0.0;
        for (auto [x, y] : pts) {
            mx += x;
            my += y;
        }
        mx /= static_cast<double>(pts.size());
        my /= static_cast<double>(pts.size());
        double sxy = 0.0;
        double sxx = 0.0;
        for (auto [x, y] : pts) {
            sxy += (x - mx) * (y - my);
            sxx += (x - mx) * (x - mx);
        }
        fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
        fit.enough = sxx > 0.0;
    }
    return fit;
}

bool zero_rows_consistent(const std::vector<Json>& rows, const char* dist_key) {
    for (const auto& row : rows) {
        if (row.at(dist_key).get<double>() == 0.0 && est_value(row, "tv") != 0.0) return false;
    }
    return true;
}

Verdict verdict_dm(const ExperimentReport& r) {
    if (!zero_rows_consistent(r.rows, "kernel_distance")) return Verdict::fail;
    const auto fit = fit_rate(r.rows, "kernel_distance", "c");
    if (!fit.enough) return Verdict::vacuous;
    const double exponent = r.summary.at("exponent").get<double>();
    const double slack = r.summary.at("slope_slack").get<double>();
    const double gate = r.summary.at("c_ratio_gate").get<double>();
    return fit.slope >= exponent - slack && fit.ratio <= gate ? Verdict::pass : Verdict::fail;
}

Verdict verdict_gate_on_ratio(const ExperimentReport& r) {
    const auto& gate = r.summary.at("gate");
    double mx = 0.0;
    bool any = false;
    for (const auto& row : r.rows) {
        const auto& c = row.at("ratio");
        if (c.is_null()) continue;
        mx = std::max(mx, c.get<double>());
        any = true;
    }
    if (!any) return Verdict::vacuous;
    return mx <= gate.get<double>() ? Verdict::pass : Verdict::fail;
}

bool nonincreasing(const std::vector<Json>& rows, const char* key) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].at(key).get<double>() > rows[i - 1].at(key).get<double>() + kMonotoneTol) return false;
    }
    return true;
}

Verdict verdict_pt(const ExperimentReport& r) {
    if (r.rows.empty()) return Verdict::vacuous;
    if (!nonincreasing(r.rows, "cov_dev") || !nonincreasing(r.rows, "gamma_l2_dev_max") ||
        !nonincreasing(r.rows, "det_l2_dev")) {
        return Verdict::fail;
    }
    const double gate = r.summary.at("tv_gate").get<double>();
    return est_value(r.rows.back(), "tv_joint") <= gate ? Verdict::pass : Verdict::fail;
}

Verdict verdict_moo(const ExperimentReport& r) {
    if (r.rows.size() < 2) return Verdict::vacuous;
    std::vector<std::pair<double, double>> pts;  // (-max influence, fm)
    for (const auto& row : r.rows) pts.emplace_back(-row.at("max_influence").get<double>(), est_value(row, "fm"));
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (pts[i].first > pts[i - 1].first && pts[i].second > pts[i - 1].second) return Verdict::fail;
    }
    return Verdict::pass;
}

Verdict verdict_d12(const ExperimentReport& r) {
    if (!zero_rows_consistent(r.rows, "d12_norm")) return Verdict::fail;
    const auto fit = fit_rate(r.rows, "d12_norm", "c");
    const double gate = r.summary.at("c_ratio_gate").get<double>();
    return fit.ratio <= gate ? Verdict::pass : Verdict::fail;
}

Verdict verdict_identities(const ExperimentReport& r) {
    for (const auto& row : r.rows) {
        if (row.at("violations").get<std::uint64_t>() != 0) return Verdict::fail;
        if (!(row.at("max_deviation").get<double>() <= row.at("tolerance").get<double>())) return Verdict::fail;
    }
    return Verdict::pass;
}

ExperimentReport finish(ExperimentReport r, const Stopwatch& watch) {
    r.verdict = recompute_verdict(r);
    r.wall_seconds = watch.seconds();
    return r;
}

Json ratio_or_null(double num, double den) {
    if (den > 0.0) return num / den;
    return num == 0.0 ? Json(0.0) : Json(nullptr);
}

}  // namespace

SymmetricKernel pair_sum_kernel(std::size_t n, Label first, std::size_t dim) {
    if (n == 0) throw InvalidArgument("pair-sum: n must be positive");
    if (first == 0) throw InvalidArgument("pair-sum: labels start at 1");
    const std::size_t top = first + 2 * n - 1;
    if (dim == 0) dim = top;
    if (dim < top) throw InvalidArgument("pair-sum: dim too small for n");
    KernelAccumulator acc(2, dim);
    const double c = 1.0 / (2.0 * std::sqrt(static_cast<double>(n)));
    for (std::size_t i = 0; i < n; ++i) {
        const auto a = static_cast<Label>(first + 2 * i);
        acc.add(MultiIndex{a, a + 1}, c);
    }
    return std::move(acc).finish();
}

ChaosVector pair_sum_vector(std::size_t n) {
    const std::size_t dim = 2 * n + 1;
    auto e1 = make_kernel(1, dim, {{{1}, 1.0}});
    return ChaosVector({ChaosElement::integral(std::move(e1)), ChaosElement::integral(pair_sum_kernel(n, 2, dim))});
}

std::vector<SequenceMember> build_sequence(const SequenceSpec& spec) {
    std::vector<SequenceMember> out;
    switch (spec.family) {
        case SequenceSpec::Family::pair_sum:
            for (std::size_t i = 0; i < spec.indices.size(); ++i) {
                if (i > 0 && spec.indices[i] <= spec.indices[i - 1]) {
                    throw InvalidArgument("pair-sum: indices must be strictly increasing");
                }
                out.push_back({Json(spec.indices[i]), ChaosElement::integral(pair_sum_kernel(spec.indices[i]))});
            }
            break;
        case SequenceSpec::Family::perturbation: {
            if (spec.base.order() != spec.direction.order()) {
                throw InvalidArgument("perturbation: base and direction orders differ");
            }
            const std::size_t dim = std::max(spec.base.dim(), spec.direction.dim());
            for (double t : spec.t) {
                auto f = kernel_sum(spec.base, spec.direction, t, dim);
                out.push_back({Json(t), ChaosElement(dim, 0.0, {std::move(f)})});
            }
            break;
        }
        case SequenceSpec::Family::custom:
            out = spec.members;
            break;
    }
    if (spec.dim_budget > 0) {
        for (const auto& m : out) {
            if (m.element.dim() > spec.dim_budget) {
                throw InvalidArgument("sequence member " + m.label.dump() + " has dim " +
                                      std::to_string(m.element.dim()) + " over the budget " +
                                      std::to_string(spec.dim_budget));
            }
        }
    }
    return out;
}

double fourth_moment(const ChaosElement& f) {
    const auto sq = multiply(f, f);
    return expectation_of_product(sq, sq);
}

ExperimentReport fourth_moment_certificate(int k, const SequenceSpec& spec, std::size_t n_samples,
                                           std::uint64_t seed) {
    const Stopwatch watch;
    if (k < 2) throw InvalidArgument("fourth-moment: k must be >= 2");
    const auto members = build_sequence(spec);
    ExperimentReport r;
    r.experiment = "fourth-moment";
    r.seed = seed;
    double sup_m4 = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        const auto& f = members[i].element;
        require_single_chaos(f, k, "member " + members[i].label.dump());
        const double var = variance(f);
        if (!(var > 0.0)) throw InvalidArgument("fourth-moment: member " + members[i].label.dump() + " has zero variance");
        const auto fhat = (1.0 / std::sqrt(var)) * f;
        const double m2 = expectation_of_product(fhat, fhat);
        const double m4 = fourth_moment(fhat);
        sup_m4 = std::max(sup_m4, m4);
        const double bound = std::sqrt((4.0 * k - 4.0) / (3.0 * k)) * std::sqrt(std::abs(m4 - 3.0));
        const auto xs = sample(fhat, n_samples, sample_seed(seed, i));
        KdeOptions kde;
        kde.bootstrap = bootstrap_for(seed, i, false);
        const auto tv = tv_vs_density(xs, NormalTarget{}, kde);

        Json row;
        row["index"] = members[i].label;
        row["variance"] = var;
        row["m2"] = m2;
        row["m4"] = m4;
        row["bound"] = bound;
        row["tv"] = to_json(tv);
        row["status"] = to_string(fourth_moment_row_status(row, kFourthMomentSlack));
        r.rows.push_back(std::move(row));
    }
    r.summary["k"] = k;
    r.summary["n_samples"] = n_samples;
    r.summary["slack"] = kFourthMomentSlack;
    r.summary["sup_m4"] = sup_m4;
    return finish(std::move(r), watch);
}

ExperimentReport shigekawa_rate(int p, const std::vector<SequenceMember>& sequence, const ChaosElement& f_inf,
                                std::size_t n_samples, std::uint64_t seed) {
    const Stopwatch watch;
    if (p < 1) throw InvalidArgument("shigekawa: p must be >= 1");
    if (!(variance(f_inf) > 0.0)) throw InvalidArgument("shigekawa: Var(F_inf) must be positive");
    if (f_inf.max_order() > p) throw InvalidArgument("shigekawa: F_inf exceeds order p");
    for (const auto& m : sequence) {
        if (m.element.max_order() > p) throw InvalidArgument("shigekawa: member " + m.label.dump() + " exceeds order p");
    }
    const std::size_t dim = common_dim(sequence, f_inf);
    const std::uint64_t s = sample_seed(seed, 0);
    const auto x_inf = sample(f_inf.embedded(dim), n_samples, s);
    const double exponent = 1.0 / (2.0 * p + 1.0);

    ExperimentReport r;
    r.experiment = "shigekawa";
    r.seed = seed;
    double sup_m4 = 0.0;
    bool m4_complete = true;
    std::vector<double> ratios;
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        const auto f = sequence[i].element.embedded(dim);
        const auto xs = sample(f, n_samples, s);
        HistogramOptions hist;
        hist.bootstrap = bootstrap_for(seed, 2 * i, true);
        FmOptions fmo;
        fmo.bootstrap = bootstrap_for(seed, 2 * i + 1, true);
        const auto tv = tv_two_samples(xs, x_inf, hist);
        const auto fm = fm_two_samples(xs, x_inf, fmo);

        Json row;
        row["index"] = sequence[i].label;
        row["m2"] = expectation_of_product(f, f);
        if (2 * f.max_order() <= kMaxOrder) {
            const double m4 = fourth_moment(f);
            row["m4"] = m4;
            sup_m4 = std::max(sup_m4, m4);
        } else {
            row["m4"] = nullptr;
            m4_complete = false;
        }
        row["fm"] = to_json(fm);
        row["tv"] = to_json(tv);
        row["ratio"] = ratio_or_null(tv.value, std::pow(fm.value, exponent));
        r.rows.push_back(std::move(row));
    }
    r.summary["p"] = p;
    r.summary["n_samples"] = n_samples;
    r.summary["exponent"] = exponent;
    r.summary["slack"] = kShigekawaSlack;
    r.summary["tv_threshold"] = kShigekawaThreshold;
    r.summary["sup_m4"] = sup_m4;
    if (!m4_complete) r.notes.emplace_back("exact fourth moments above the order cap are omitted");
    r.notes.emplace_back("members and F_inf are sampled with common random numbers");
    return finish(std::move(r), watch);
}

ExperimentReport dm_rate(int k, const SymmetricKernel& f_inf, const std::vector<Perturbation>& perturbations,
                         std::size_t n_samples, std::uint64_t seed) {
    const Stopwatch watch;
    if (f_inf.empty()) throw InvalidArgument("dm: zero kernel f_inf");
    if (f_inf.order() != k) throw InvalidArgument("dm: f_inf has order " + std::to_string(f_inf.order()));
    std::size_t dim = f_inf.dim();
    for (const auto& pt : perturbations) {
        if (pt.g.order() != k) throw InvalidArgument("dm: perturbation direction has the wrong order");
        dim = std::max(dim, pt.g.dim());
    }
    const auto inf_el = ChaosElement(dim, 0.0, {f_inf.embedded(dim)});
    const std::uint64_t s = sample_seed(seed, 0);
    const auto x_inf = sample(inf_el, n_samples, s);
    const double exponent = 1.0 / (2.0 * k);

    ExperimentReport r;
    r.experiment = "dm";
    r.seed = seed;
    double fitted = 0.0;
    for (std::size_t j = 0; j < perturbations.size(); ++j) {
        const auto& pt = perturbations[j];
        auto f = kernel_sum(f_inf, pt.g, pt.t, dim);
        if (f.empty()) throw InvalidArgument("dm: perturbed kernel " + std::to_string(j) + " is zero");
        const double dist = norm(kernel_sum(f, f_inf, -1.0, dim));
        const auto xs = sample(ChaosElement(dim, 0.0, {std::move(f)}), n_samples, s);
        HistogramOptions hist;
        hist.bootstrap = bootstrap_for(seed, j, true);
        const auto tv = tv_two_samples(xs, x_inf, hist);

        Json row;
        row["t"] = pt.t;
        row["kernel_distance"] = dist;
        row["tv"] = to_json(tv);
        if (dist > 0.0) {
            const double c = tv.value / std::pow(dist, exponent);
            row["c"] = c;
            fitted = std::max(fitted, c);
        } else {
            row["c"] = nullptr;
        }
        r.rows.push_back(std::move(row));
    }
    const auto fit = fit_rate(r.rows, "kernel_distance", "c");
    r.summary["k"] = k;
    r.summary["n_samples"] = n_samples;
    r.summary["exponent"] = exponent;
    r.summary["slope_slack"] = kSlopeSlack;
    r.summary["c_ratio_gate"] = kRatioGate;
    r.summary["fitted_c"] = fitted;
    r.summary["slope"] = fit.slope;
    r.summary["c_ratio_smallest"] = fit.ratio;
    r.notes.emplace_back("perturbed and limit elements are sampled with common random numbers");
    return finish(std::move(r), watch);
}

ExperimentReport carbery_wright_probe(const ChaosElement& q, const std::vector<double>& alphas, std::size_t n_samples,
                                      std::uint64_t seed) {
    const Stopwatch watch;
    if (q.is_constant()) throw InvalidArgument("cw: Q is constant");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0.0)) throw InvalidArgument("cw: alphas must be positive");
        if (i > 0 && !(alphas[i] < alphas[i - 1])) throw InvalidArgument("cw: alphas must be decreasing");
    }
    const int d = q.max_order();
    const double m2 = expectation_of_product(q, q);
    const auto xs = sample(q, n_samples, sample_seed(seed, 0));

    ExperimentReport r;
    r.experiment = "cw";
    r.seed = seed;
    double max_ratio = 0.0;
    for (double alpha : alphas) {
        const auto p = small_ball(xs, alpha);
        const double root = std::pow(alpha, 1.0 / d);
        const double ratio = std::pow(m2, 1.0 / (2.0 * d)) * p.value / (d * root);
        max_ratio = std::max(max_ratio, ratio);
        Json row;
        row["alpha"] = alpha;
        row["p_hat"] = to_json(p);
        row["p_over_alpha_root"] = p.value / root;
        row["ratio"] = ratio;
        r.rows.push_back(std::move(row));
    }
    r.summary["d"] = d;
    r.summary["n_samples"] = n_samples;
    r.summary["m2"] = m2;
    r.summary["gate"] = kSmallBallGate;
    r.summary["max_ratio"] = max_ratio;
    return finish(std::move(r), watch);
}

ExperimentReport df_small_ball_probe(const ChaosElement& f, const std::vector<double>& lambdas, std::size_t n_samples,
                                     std::uint64_t seed) {
    const Stopwatch watch;
    const double var = variance(f);
    if (!(var > 0.0)) throw InvalidArgument("dball: F has zero variance");
    for (double l : lambdas) {
        if (!(l > 0.0)) throw InvalidArgument("dball: lambdas must be positive");
    }
    const int p = f.max_order();
    const auto gamma = carre_du_champ(f, f);
    const auto gs = sample(gamma, n_samples, sample_seed(seed, 0));

    ExperimentReport r;
    r.experiment = "dball";
    r.seed = seed;
    double max_ratio = 0.0;
    for (double lambda : lambdas) {
        const auto ph = small_ball(gs, lambda * lambda);
        Json row;
        row["lambda"] = lambda;
        row["p_hat"] = to_json(ph);
        if (p >= 2) {
            const double scale = std::pow(lambda, 1.0 / (p - 1)) / std::pow(var, 1.0 / (2.0 * p - 2.0));
            row["ratio"] = ph.value / scale;
            max_ratio = std::max(max_ratio, ph.value / scale);
        } else {
            row["ratio"] = nullptr;
        }
        r.rows.push_back(std::move(row));
    }
    r.summary["p"] = p;
    r.summary["n_samples"] = n_samples;
    r.summary["variance"] = var;
    r.summary["exponent"] = p >= 2 ? Json(1.0 / (p - 1)) : Json(nullptr);
    r.summary["expected_gamma"] = expectation(gamma);
    r.summary["gate"] = kSmallBallGate;
    r.summary["max_ratio"] = max_ratio;
    if (p < 2) r.notes.emplace_back("first-chaos input: the gradient norm is constant, no rate to test");
    return finish(std::move(r), watch);
}

ExperimentReport peccati_tudor_run(const std::vector<int>& k_list, const std::vector<VectorMember>& sequence,
                                   const Covariance2& c, std::size_t n_samples, std::uint64_t seed) {
    const Stopwatch watch;
    if (k_list.size() != 2) throw InvalidArgument("pt: only d = 2 is supported");
    const double det_c = c[0][0] * c[1][1] - c[0][1] * c[1][0];
    if (!(det_c > 0.0)) throw InvalidArgument("pt: det(C) must be positive");
    if (c[0][1] != c[1][0]) throw InvalidArgument("pt: C must be symmetric");
    const double gamma_target = det_c * k_list[0] * k_list[1];

    ExperimentReport r;
    r.experiment = "pt";
    r.seed = seed;
    for (std::size_t n = 0; n < sequence.size(); ++n) {
        const auto& v = sequence[n].vector;
        if (v.size() != 2) throw InvalidArgument("pt: member " + sequence[n].label.dump() + " is not a 2-vector");
        for (std::size_t i = 0; i < 2; ++i) {
            require_single_chaos(v[i], k_list[i], "pt: component " + std::to_string(i + 1));
        }
        Json cov = Json::array();
        Json gdev = Json::array();
        double cov_dev = 0.0;
        double gdev_max = 0.0;
        const auto gamma = malliavin_matrix(v);
        for (std::size_t i = 0; i < 2; ++i) {
            Json crow = Json::array();
            Json grow = Json::array();
            for (std::size_t j = 0; j < 2; ++j) {
                const double e = expectation_of_product(v[i], v[j]);
                crow.push_back(e);
                cov_dev = std::max(cov_dev, std::abs(e - c[i][j]));
                const double target = std::sqrt(static_cast<double>(k_list[i] * k_list[j])) * c[i][j];
                const auto& g = gamma.at(i, j);
                const double bias = expectation(g) - target;
                const double l2 = variance(g) + bias * bias;
                grow.push_back(l2);
                gdev_max = std::max(gdev_max, l2);
            }
            cov.push_back(std::move(crow));
            gdev.push_back(std::move(grow));
        }
        const auto det = det_chaos(gamma);
        const double det_mean = expectation(det);
        const double det_var = variance(det);

        const auto xs = sample(v, n_samples, sample_seed(seed, n));
        Json marginals = Json::array();
        for (std::size_t i = 0; i < 2; ++i) {
            KdeOptions kde;
            kde.bootstrap = bootstrap_for(seed, 3 * n + i, false);
            const auto col = SampleBatch::from_values(xs.column(i));
            marginals.push_back(to_json(tv_vs_density(col, NormalTarget{0.0, c[i][i]}, kde)));
        }
        Grid2dOptions grid;
        grid.bootstrap = bootstrap_for(seed, 3 * n + 2, false);
        const auto joint = tv_multivariate(xs, c, grid);

        Json row;
        row["index"] = sequence[n].label;
        row["cov"] = std::move(cov);
        row["cov_dev"] = cov_dev;
        row["gamma_l2_dev"] = std::move(gdev);
        row["gamma_l2_dev_max"] = gdev_max;
        row["det_mean"] = det_mean;
        row["det_var"] = det_var;
        row["det_l2_dev"] = det_var + (det_mean - gamma_target) * (det_mean - gamma_target);
        row["tv_marginal"] = std::move(marginals);
        row["tv_joint"] = to_json(joint);
        r.rows.push_back(std::move(row));
    }
    r.summary["k"] = k_list;
    r.summary["c"] = Json::array({Json::array({c[0][0], c[0][1]}), Json::array({c[1][0], c[1][1]})});
    r.summary["n_samples"] = n_samples;
    r.summary["det_target"] = gamma_target;
    r.summary["tv_gate"] = kJointTvGate;
    return finish(std::move(r), watch);
}

ExperimentReport moo_invariance(const std::vector<MultilinearMember>& family, std::size_t n_samples,
                                std::uint64_t seed) {
    const Stopwatch watch;
    ExperimentReport r;
    r.experiment = "moo";
    r.seed = seed;
    for (std::size_t i = 0; i < family.size(); ++i) {
        const auto& spec = family[i].spec;
        spec.validate();
        const auto q = spec.to_chaos();
        const auto inf = spec.influences();
        const auto [mn, mx] = std::minmax_element(inf.begin(), inf.end());
        const auto xg = sample(q, n_samples, sample_seed(seed, 2 * i), InputLaw::gaussian());
        const auto xl = sample(q, n_samples, sample_seed(seed, 2 * i + 1), spec.law);
        FmOptions fmo;
        fmo.bootstrap = bootstrap_for(seed, i, false);
        const auto fm = fm_two_samples(xl, xg, fmo);

        Json row;
        row["label"] = family[i].label;
        row["n"] = spec.n;
        row["degree"] = spec.degree;
        row["law"] = spec.law.tag();
        row["max_influence"] = *mx;
        row["min_influence"] = *mn;
        row["fm"] = to_json(fm);
        r.rows.push_back(std::move(row));
    }
    r.summary["n_samples"] = n_samples;
    return finish(std::move(r), watch);
}

ExperimentReport d12_rate_probe(const std::vector<SequenceMember>& sequence, const ChaosElement& f_inf, double alpha,
                                std::size_t n_samples, std::uint64_t seed) {
    const Stopwatch watch;
    if (!(alpha > 0.0 && alpha <= 2.0)) throw InvalidArgument("d12: alpha must lie in (0, 2]");
    const std::size_t dim = common_dim(sequence, f_inf);
    const auto inf_el = f_inf.embedded(dim);
    const double exponent = alpha / (alpha + 2.0);

    const auto gs = sample(carre_du_champ(inf_el, inf_el), n_samples, sample_seed(seed, 1));
    double neg_sum = 0.0;
    std::size_t truncated = 0;
    for (double g : gs.values) {
        if (g < kNegMomentFloor) ++truncated;
        neg_sum += std::pow(std::max(g, kNegMomentFloor), -alpha / 2.0);
    }
    const double neg_moment = neg_sum / static_cast<double>(gs.size());
    const double truncated_mass = static_cast<double>(truncated) / static_cast<double>(gs.size());

    const std::uint64_t s = sample_seed(seed, 0);
    const auto x_inf = sample(inf_el, n_samples, s);
    ExperimentReport r;
    r.experiment = "d12";
    r.seed = seed;
    double fitted = 0.0;
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        const auto f = sequence[i].element.embedded(dim);
        const auto delta = f - inf_el;
        const double sq = expectation_of_product(delta, delta) + expectation(carre_du_champ(delta, delta));
        const double d12 = std::sqrt(std::max(sq, 0.0));
        const auto xs = sample(f, n_samples, s);
        HistogramOptions hist;
        hist.bootstrap = bootstrap_for(seed, i, true);
        const auto tv = tv_two_samples(xs, x_inf, hist);

        Json row;
        row["index"] = sequence[i].label;
        row["d12_norm"] = d12;
        row["tv"] = to_json(tv);
        if (d12 > 0.0) {
            const double c = tv.value / std::pow(d12, exponent);
            row["c"] = c;
            fitted = std::max(fitted, c);
        } else {
            row["c"] = nullptr;
        }
        r.rows.push_back(std::move(row));
    }
    const auto fit = fit_rate(r.rows, "d12_norm", "c");
    r.summary["alpha"] = alpha;
    r.summary["exponent"] = exponent;
    r.summary["n_samples"] = n_samples;
    r.summary["neg_moment"] = neg_moment;
    r.summary["truncated_mass"] = truncated_mass;
    r.summary["unreliable"] = truncated_mass > kTruncationAlarm;
    r.summary["c_ratio_gate"] = kRatioGate;
    r.summary["fitted_c"] = fitted;
    r.summary["c_ratio_smallest"] = fit.ratio;
    if (truncated_mass > kTruncationAlarm) {
        r.notes.emplace_back("negative-moment estimate unreliable: truncated mass above 1e-4");
    }
    r.notes.emplace_back("members and F_inf are sampled with common random numbers");
    return finish(std::move(r), watch);
}

ChaosElement random_chaos(SplitMix64& rng, const RandomChaosOptions& opts, std::size_t dim) {
    if (dim == 0) dim = 1 + static_cast<std::size_t>(rng.below(opts.max_dim));
    auto coef = [&] { return 2.0 * rng.uniform() - 1.0; };
    auto random_kernel = [&](int k) {
        std::vector<RawEntry> raw;
        const auto count = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(opts.max_entries)));
        for (int e = 0; e < count; ++e) {
            RawEntry entry;
            for (int j = 0; j < k; ++j) entry.idx.push_back(static_cast<Label>(1 + rng.below(dim)));
            entry.coef = coef();
            raw.push_back(std::move(entry));
        }
        return make_kernel(k, dim, raw);
    };
    for (;;) {
        std::vector<SymmetricKernel> ks;
        double constant = 0.0;
        if (opts.single_chaos) {
            ks.push_back(random_kernel(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(opts.max_order)))));
        } else {
            constant = coef();
            for (int k = 1; k <= opts.max_order; ++k) {
                if (rng.below(4) != 0) ks.push_back(random_kernel(k));
            }
        }
        ChaosElement f(dim, constant, std::move(ks));
        if (!f.is_constant()) return f;
    }
}

namespace {

struct Tally {
    std::string name;
    double tolerance;
    std::uint64_t checks = 0;
    std::uint64_t violations = 0;
    double max_deviation = 0.0;

    void record(double dev) {
        ++checks;
        max_deviation = std::max(max_deviation, dev);
        if (!(dev <= tolerance)) ++violations;
    }
};

double relative_gap(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(a) + std::abs(b)); }

}  // namespace

ExperimentReport identity_suite(int trials, std::uint64_t seed) {
    const Stopwatch watch;
    if (trials < 1) throw InvalidArgument("identities: trials must be >= 1");
    constexpr int kPoints = 100;
    Tally product{"product-law", 1e-8};
    Tally cdc{"carre-du-champ-routes", 1e-10};
    Tally ibp{"integration-by-parts", 1e-9};
    Tally delta_d{"delta-d-equals-minus-l", 1e-9};
    Tally poincare{"poincare", 1e-9};
    Tally hyper{"hypercontractivity-r4", 1e-9};
    Tally ortho{"chaos-orthogonality", 1e-9};

    for (int t = 0; t < trials; ++t) {
        SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        const std::size_t dim = 1 + static_cast<std::size_t>(rng.below(6));
        const auto f = random_chaos(rng, {}, dim);
        const auto g = random_chaos(rng, {}, dim);
        const auto h = random_chaos(rng, {}, dim);

        const auto fg = multiply(f, g);
        GaussianStream normals(rng.next());
        std::vector<double> x(dim);
        for (int pt = 0; pt < kPoints; ++pt) {
            for (auto& v : x) v = normals.next();
            const double direct = evaluate(f, x) * evaluate(g, x);
            product.record(std::abs(evaluate(fg, x) - direct) / (1.0 + std::abs(direct)));
        }

        std::vector<ChaosElement> parts;
        for (Label i = 1; i <= dim; ++i) parts.push_back(multiply(mderiv(f, i), mderiv(g, i)));
        std::vector<Term> terms;
        for (const auto& p : parts) terms.emplace_back(1.0, &p);
        cdc.record(max_coefficient_difference(carre_du_champ(f, g), linear_combine(terms)));

        const auto sides = check_ibp(f, g, h);
        ibp.record(relative_gap(sides.lhs, sides.rhs));
        const auto dd = check_ibp(f, g, ChaosElement(dim, 1.0));
        delta_d.record(relative_gap(dd.lhs, dd.rhs));

        const double energy = expectation(carre_du_champ(f, f));
        poincare.record(std::max(0.0, variance(f) - energy) / (1.0 + energy));

        RandomChaosOptions single;
        single.single_chaos = true;
        const auto s = random_chaos(rng, single, dim);
        const double m2 = expectation_of_product(s, s);
        const double bound = std::pow(3.0, 2 * s.max_order()) * m2 * m2;
        hyper.record(std::max(0.0, fourth_moment(s) - bound) / (1.0 + bound));

        for (int k = 1; k <= f.max_order(); ++k) {
            for (int l = 1; l <= g.max_order(); ++l) {
                if (k == l) continue;
                const auto a = project(f, k);
                const auto b = project(g, l);
                const double scale = 1.0 + std::sqrt(variance(a) * variance(b));
                ortho.record(std::abs(expectation(multiply(a, b))) / scale);
            }
        }
    }

    ExperimentReport r;
    r.experiment = "identities";
    r.seed = seed;
    for (const auto* tally : {&product, &cdc, &ibp, &delta_d, &poincare, &hyper, &ortho}) {
        Json row;
        row["identity"] = tally->name;
        row["checks"] = tally->checks;
        row["max_deviation"] = tally->max_deviation;
        row["tolerance"] = tally->tolerance;
        row["violations"] = tally->violations;
        r.rows.push_back(std::move(row));
    }
    r.summary["trials"] = trials;
    r.summary["points_per_trial"] = kPoints;
    return finish(std::move(r), watch);
}

Verdict recompute_verdict(const ExperimentReport& report) {
    const auto& e = report.experiment;
    if (e == "fourth-moment") return verdict_fourth_moment(report);
    if (e == "shigekawa") return verdict_shigekawa(report);
    if (e == "dm") return verdict_dm(report);
    if (e == "cw" || e == "dball") return verdict_gate_on_ratio(report);
    if (e == "pt") return verdict_pt(report);
    if (e == "moo") return verdict_moo(report);
    if (e == "d12") return verdict_d12(report);
    if (e == "identities") return verdict_identities(report);
    throw InvalidArgument("unknown experiment '" + e + "'");
}

}  // namespace wienerlab
