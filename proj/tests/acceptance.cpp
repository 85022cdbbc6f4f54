// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Reference values come from closed forms or from the oracles in
// tests/oracle, never from the engine under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "oracle/dense.hpp"
#include "oracle/polynomial.hpp"
#include "wienerlab/chaos.hpp"
#include "wienerlab/distance.hpp"
#include "wienerlab/random.hpp"
#include "wienerlab/sampling.hpp"
#include "wienerlab/theorem_lab.hpp"

using namespace wienerlab;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double time_limit, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (time_limit > 0.0 && secs > time_limit) {
        o.pass = false;
        o.detail += " [over time limit " + std::to_string(time_limit) + " s]";
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %-34s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

SymmetricKernel random_kernel(SplitMix64& rng, int k, std::size_t n, int entries) {
    std::vector<RawEntry> raw;
    for (int e = 0; e < entries; ++e) {
        RawEntry r;
        for (int j = 0; j < k; ++j) r.idx.push_back(static_cast<Label>(1 + rng.below(n)));
        r.coef = 2.0 * rng.uniform() - 1.0;
        raw.push_back(r);
    }
    return make_kernel(k, n, raw);
}

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

SampleBatch normals(std::size_t n, std::uint64_t seed, double mean, double sd) {
    GaussianStream g(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = mean + sd * g.next();
    return SampleBatch::from_values(std::move(v));
}

Outcome product_formula() {
    SplitMix64 rng(101);
    GaussianStream gauss(102);
    double worst = 0.0;
    for (int pair = 0; pair < 100; ++pair) {
        const std::size_t n = 1 + rng.below(6);
        const auto f = random_chaos(rng, {6, 3, 4, false}, n);
        const auto g = random_chaos(rng, {6, 3, 4, false}, n);
        const auto fg = multiply(f, g);
        std::vector<double> x(n);
        for (int p = 0; p < 100; ++p) {
            for (auto& v : x) v = gauss.next();
            const double want = evaluate(f, x) * evaluate(g, x);
            worst = std::max(worst, std::abs(evaluate(fg, x) - want) / (1.0 + std::abs(want)));
        }
    }
    return {worst <= 1e-8, "max scaled deviation " + num(worst) + " (tol 1e-8)"};
}

Outcome contraction_oracle() {
    SplitMix64 rng(201);
    double worst = 0.0;
    int cases = 0;
    for (std::size_t n = 1; n <= 4; ++n) {
        for (int k = 1; k <= 3; ++k) {
            for (int l = 1; l <= 3; ++l) {
                for (int trial = 0; trial < 5; ++trial) {
                    const auto f = random_kernel(rng, k, n, 1 + static_cast<int>(rng.below(6)));
                    const auto g = random_kernel(rng, l, n, 1 + static_cast<int>(rng.below(6)));
                    const auto df = oracle::from_kernel(f);
                    const auto dg = oracle::from_kernel(g);
                    for (int r = 0; r <= std::min(k, l); ++r) {
                        const auto dense = oracle::contract(df, dg, r);
                        ++cases;
                        if (r == k && r == l) {
                            worst = std::max(worst, std::abs(contract(f, g, r).scalar() - dense.data[0]));
                        } else {
                            worst = std::max(worst, oracle::max_gap(oracle::symmetrize(dense), sym_contract(f, g, r)));
                        }
                    }
                }
            }
        }
    }
    return {worst <= 1e-10, std::to_string(cases) + " contractions, max gap " + num(worst) + " (tol 1e-10)"};
}

Outcome carre_du_champ_routes() {
    SplitMix64 rng(301);
    double worst = 0.0;
    for (int pair = 0; pair < 100; ++pair) {
        const std::size_t n = 1 + rng.below(6);
        const auto f = random_chaos(rng, {6, 3, 4, false}, n);
        const auto g = random_chaos(rng, {6, 3, 4, false}, n);
        ChaosElement coord(n);
        for (Label i = 1; i <= n; ++i) coord = coord + multiply(mderiv(f, i), mderiv(g, i));
        worst = std::max(worst, max_coefficient_difference(carre_du_champ(f, g), coord));
    }
    return {worst <= 1e-10, "max coefficient gap " + num(worst) + " (tol 1e-10)"};
}

Outcome exact_moments() {
    const auto f = ChaosElement::integral(make_kernel(2, 1, {{{1, 1}, 1.0}}));
    const auto p = oracle::from_chaos(f);
    auto power = oracle::Poly::constant(1, 1.0);
    double worst = 0.0;
    std::string got;
    for (int m = 1; m <= 4; ++m) {
        power = power * p;
        const double v = moment(f, m);
        worst = std::max(worst, std::abs(v - power.gaussian_mean()));
        got += (m > 1 ? "," : "") + num(v);
    }
    SplitMix64 rng(401);
    int nonzero = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto a = random_chaos(rng, {6, 3, 4, false}, 4);
        const auto b = random_chaos(rng, {6, 3, 4, false}, 4);
        for (int k = 1; k <= 3; ++k) {
            for (int l = 1; l <= 3; ++l) {
                if (k != l && covariance(project(a, k), project(b, l)) != 0.0) ++nonzero;
            }
        }
    }
    return {worst <= 1e-12 && nonzero == 0,
            "moments (" + got + "), oracle gap " + num(worst) + ", cross-order covariances nonzero: " + std::to_string(nonzero)};
}

Outcome calculus_identities() {
    const auto r = identity_suite(200, 501);
    const std::vector<std::string> wanted = {"integration-by-parts", "poincare", "hypercontractivity-r4",
                                             "delta-d-equals-minus-l"};
    bool ok = true;
    std::string detail;
    std::size_t seen = 0;
    for (const auto& row : r.rows) {
        const auto name = row.at("identity").get<std::string>();
        if (std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
        ++seen;
        const auto violations = row.at("violations").get<long long>();
        const double dev = row.at("max_deviation").get<double>();
        ok = ok && violations == 0 && dev <= 1e-9;
        detail += name + " " + std::to_string(violations) + "/" + num(dev) + "; ";
    }
    return {ok && seen == wanted.size(), detail + "(violations/max deviation, tol 1e-9)"};
}

Outcome fourth_moment_gate() {
    double worst = 0.0;
    for (std::size_t n : {2u, 5u, 10u, 50u}) {
        const auto f = ChaosElement::integral(pair_sum_kernel(n));
        worst = std::max(worst, std::abs(wienerlab::fourth_moment(f) - (3.0 + 6.0 / static_cast<double>(n))));
        worst = std::max(worst, std::abs(moment(f, 4) - (3.0 + 6.0 / static_cast<double>(n))));
    }
    SequenceSpec spec;
    spec.indices = {10, 50, 100};
    const auto r = fourth_moment_certificate(2, spec, 200000, 601);
    bool ok = worst <= 1e-10;
    std::string detail = "m4 gap " + num(worst) + "; ";
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const double n = static_cast<double>(spec.indices[i]);
        const auto tv = distance_from_json(r.rows[i].at("tv"));
        const double bound = std::sqrt(2.0 / 3.0) * std::sqrt(6.0 / n);
        ok = ok && tv.value <= bound + tv.ci_width() + 0.02;
        detail += "n=" + num(n) + " tv " + num(tv.value) + " <= " + num(bound + tv.ci_width() + 0.02) + "; ";
    }
    return {ok && r.rows.size() == 3, detail};
}

Outcome peccati_tudor() {
    const std::vector<std::size_t> ns = {10, 50, 100};
    double cross = 0.0;
    double gamma_gap = 0.0;
    std::vector<VectorMember> seq;
    for (auto n : ns) {
        const auto v = pair_sum_vector(n);
        cross = std::max(cross, std::abs(covariance(v[0], v[1])));
        const auto g22 = malliavin_matrix(v).at(1, 1);
        const double mean = expectation(g22);
        const double dev = variance(g22) + (mean - 2.0) * (mean - 2.0);
        gamma_gap = std::max(gamma_gap, std::abs(dev - 4.0 / static_cast<double>(n)));
        seq.push_back({Json(n), v});
    }
    const auto r = peccati_tudor_run({1, 2}, seq, {{{1.0, 0.0}, {0.0, 1.0}}}, 200000, 701);
    bool det_ok = true;
    std::string det_detail;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const double mean = r.rows[i].at("det_mean").get<double>();
        const double var = r.rows[i].at("det_var").get<double>();
        det_ok = det_ok && std::abs(mean - 2.0) <= 1e-10;
        if (i > 0) det_ok = det_ok && var < r.rows[i - 1].at("det_var").get<double>();
        det_detail += num(var) + (i + 1 < r.rows.size() ? "," : "");
    }
    const auto joint = distance_from_json(r.rows.back().at("tv_joint"));
    const bool ok = cross == 0.0 && gamma_gap <= 1e-10 && det_ok && joint.value <= 0.1 && r.rows.size() == ns.size();
    return {ok, "cross cov " + num(cross) + ", E[(G22-2)^2] gap " + num(gamma_gap) + ", Var det (" + det_detail +
                    "), joint tv at n=100 " + num(joint.value) + " (gate 0.1)"};
}

Outcome carbery_wright() {
    // x^3 = H_3(x) + 3 H_1(x)
    const auto q = ChaosElement(1, 0.0, {make_kernel(1, 1, {{{1}, 3.0}}), make_kernel(3, 1, {{{1, 1, 1}, 1.0}})});
    const auto r = carbery_wright_probe(q, {1e-3}, 1000000, 801);
    const double got = r.rows.at(0).at("p_over_alpha_root").get<double>();
    const double want = std::sqrt(2.0 / std::numbers::pi);
    const double rel = std::abs(got / want - 1.0);
    return {rel <= 0.10, "P/alpha^(1/3) " + num(got) + " vs " + num(want) + ", rel err " + num(rel) + " (tol 0.10)"};
}

Outcome davydov_martynova() {
    const auto f_inf = make_kernel(2, 2, {{{1, 1}, 1.0 / std::sqrt(2.0)}});
    const auto g = make_kernel(2, 2, {{{1, 2}, 0.5}});
    std::vector<Perturbation> family;
    for (int j = 1; j <= 8; ++j) family.push_back({std::ldexp(1.0, -j), g});
    const auto r = dm_rate(2, f_inf, family, 200000, 901);
    std::vector<double> lx;
    std::vector<double> ly;
    for (const auto& row : r.rows) {
        const double d = row.at("kernel_distance").get<double>();
        const double tv = row.at("tv").at("value").get<double>();
        if (d > 0.0 && tv > 0.0) {
            lx.push_back(std::log(d));
            ly.push_back(std::log(tv));
        }
    }
    if (lx.size() < 2) return {false, "fewer than two positive distances"};
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx;
    // Constants c = tv / d^(1/4) at the two smallest t (the last two rows).
    const std::size_t m = lx.size();
    const double c1 = std::exp(ly[m - 1] - 0.25 * lx[m - 1]);
    const double c2 = std::exp(ly[m - 2] - 0.25 * lx[m - 2]);
    const double ratio = std::max(c1, c2) / std::min(c1, c2);
    return {slope >= 0.25 - 0.1 && ratio <= 3.0,
            "slope " + num(slope) + " (>= 0.15), c ratio " + num(ratio) + " (<= 3), " + std::to_string(m) + " points"};
}

Outcome shigekawa() {
    std::vector<SequenceMember> seq;
    for (std::size_t n : {10u, 20u, 50u, 100u}) seq.push_back({Json(n), ChaosElement::integral(pair_sum_kernel(n))});
    const auto limit = ChaosElement::integral(make_kernel(1, 1, {{{1}, 1.0}}));
    const auto r = shigekawa_rate(2, seq, limit, 200000, 1001);
    std::vector<double> ratios;
    double sup_m4 = 0.0;
    for (const auto& row : r.rows) {
        const double tv = row.at("tv").at("value").get<double>();
        const double fm = row.at("fm").at("value").get<double>();
        ratios.push_back(tv / std::pow(fm, 0.2));
        if (row.at("m4").is_number()) sup_m4 = std::max(sup_m4, row.at("m4").get<double>());
        else sup_m4 = std::numeric_limits<double>::infinity();
    }
    auto sorted = ratios;
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[1] + sorted[2]);
    const double max_ratio = sorted.back();
    const double tv_last = r.rows.back().at("tv").at("value").get<double>();
    const double fm_last = r.rows.back().at("fm").at("value").get<double>();
    const bool ok = r.rows.size() == 4 && tv_last < 0.05 && fm_last < 0.05 && max_ratio <= 2.0 * median + 0.5 &&
                    std::isfinite(sup_m4);
    return {ok, "n=100 tv " + num(tv_last) + " fm " + num(fm_last) + " (< 0.05), max ratio " + num(max_ratio) +
                    " <= " + num(2.0 * median + 0.5) + ", sup m4 " + num(sup_m4)};
}

Outcome invariance() {
    std::vector<MultilinearMember> family;
    double influence_gap = 0.0;
    for (std::size_t n : {25u, 100u, 400u}) {
        auto spec = rademacher_average(n);
        for (double inf : spec.influences()) influence_gap = std::max(influence_gap, std::abs(inf - 1.0 / static_cast<double>(n)));
        family.push_back({Json(n), std::move(spec)});
    }
    const auto r = moo_invariance(family, 200000, 1101);
    std::vector<double> fm;
    for (const auto& row : r.rows) fm.push_back(row.at("fm").at("value").get<double>());
    bool decreasing = fm.size() == 3;
    for (std::size_t i = 1; i < fm.size(); ++i) decreasing = decreasing && fm[i] < fm[i - 1];
    const bool ok = influence_gap <= 1e-15 && decreasing && fm.back() <= 0.05;
    return {ok, "influence gap " + num(influence_gap) + ", fm " + num(fm[0]) + " > " + num(fm[1]) + " > " + num(fm[2]) +
                    " (last <= 0.05)"};
}

Outcome calibration() {
    const std::size_t n = 100000;
    const auto a = normals(n, 1201, 0.0, 1.0);
    const auto b = normals(n, 1202, 3.0, 1.0);
    const auto c = normals(n, 1203, 0.0, 2.0);
    const auto a2 = normals(n, 1204, 0.0, 1.0);
    const double tv = tv_two_samples(a, b).value;
    const double tv_want = 2.0 * phi(1.5) - 1.0;
    const double w1 = wasserstein1(a, c).value;
    const double w1_want = std::sqrt(2.0 / std::numbers::pi);
    const double self = std::max({tv_two_samples(a, a2).value, fm_two_samples(a, a2).value, wasserstein1(a, a2).value});
    const bool ok = std::abs(tv - tv_want) <= 0.04 && std::abs(w1 - w1_want) <= 0.02 && self <= 0.03;
    return {ok, "tv " + num(tv) + " vs " + num(tv_want) + ", w1 " + num(w1) + " vs " + num(w1_want) + ", self max " +
                    num(self)};
}

}  // namespace

int main() {
    set_worker_threads(1);
    const auto t0 = std::chrono::steady_clock::now();
    criterion(1, "product formula", 10.0, product_formula);
    criterion(2, "contraction oracle", 30.0, contraction_oracle);
    criterion(3, "carre du champ routes", 0.0, carre_du_champ_routes);
    criterion(4, "exact moments", 0.0, exact_moments);
    criterion(5, "calculus identities", 0.0, calculus_identities);
    criterion(6, "fourth-moment certificate", 120.0, fourth_moment_gate);
    criterion(7, "vector (I_1, I_2) convergence", 0.0, peccati_tudor);
    criterion(8, "small-ball sharpness x^3", 30.0, carbery_wright);
    criterion(9, "perturbation rate", 0.0, davydov_martynova);
    criterion(10, "tv vs fm rate", 0.0, shigekawa);
    criterion(11, "rademacher invariance", 0.0, invariance);
    criterion(12, "distance calibration", 0.0, calibration);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("total %.1fs, %d failed\n", secs, failures);
    return failures == 0 ? 0 : 1;
}
