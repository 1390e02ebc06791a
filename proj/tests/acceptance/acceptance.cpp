// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion ...]   (no arguments runs all ten)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dyncal/config.hpp"
#include "dyncal/saei.hpp"
#include "dyncal/study.hpp"
#include "../test_support.hpp"

using namespace dyncal;
using dyncal::testing::synthetic_case;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i] / n;
        mb += b[i] / n;
    }
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

// Random admissible s: a fraction of s_max in [-2, 0.9], kept away from 0
// where a relative comparison of kappa is meaningless.
double admissible_s(const CgfContext& ctx, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 0.9);
    double f = u(rng);
    if (std::abs(f) < 0.05) f = f < 0 ? -0.05 : 0.05;
    return f * ctx.s_max;
}

Outcome cgf_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> Ld(5, 12), pd(1, 4);
    double worst = 0;
    for (int inst = 0; inst < 100; ++inst) {
        auto c = synthetic_case(Ld(rng), pd(rng), rng);
        const CgfContext ctx = build_cgf_context(c.model, c.pred, c.xi);
        for (int k = 0; k < 20; ++k) {
            const double s = admissible_s(ctx, rng);
            const double dense = static_cast<double>(dyncal::testing::dense_cgf(c, s));
            worst = std::max(worst, rel_err(cgf(ctx, s), dense));
        }
    }
    const double t = seconds_since(t0);
    return {worst <= 1e-10 && t < 5.0, "max rel err " + fmt("%.2e", worst) + ", " + fmt("%.2f", t) + " s"};
}

Outcome cumulant_identities() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<int> Ld(5, 12), pd(1, 4);
    bool zero_ok = true;
    double e1 = 0, e2 = 0, efd = 0;
    for (int inst = 0; inst < 100; ++inst) {
        auto c = synthetic_case(Ld(rng), pd(rng), rng);
        const CgfContext ctx = build_cgf_context(c.model, c.pred, c.xi);
        zero_ok = zero_ok && cgf(ctx, 0.0) == 0.0;
        const CgfDerivatives k0 = cgf_derivatives(ctx, 0.0);
        e1 = std::max(e1, rel_err(k0.k1, expected_discrepancy(c.model, c.pred, c.xi)));
        const auto S = dyncal::testing::dense_sigma(c);
        const dyncal::testing::LVector mu = (c.xi - c.pred.mean).cast<long double>();
        e2 = std::max(e2, rel_err(k0.k2, static_cast<double>(2 * (S * S).trace() + 4 * mu.dot(S * mu))));

        const double s = admissible_s(ctx, rng);
        const double h = 1e-5 * ctx.s_max;
        const CgfDerivatives k = cgf_derivatives(ctx, s);
        const CgfDerivatives kp = cgf_derivatives(ctx, s + h), km = cgf_derivatives(ctx, s - h);
        efd = std::max(efd, rel_err(k.k1, (cgf(ctx, s + h) - cgf(ctx, s - h)) / (2 * h)));
        efd = std::max(efd, rel_err(k.k2, (kp.k1 - km.k1) / (2 * h)));
        efd = std::max(efd, rel_err(k.k3, (kp.k2 - km.k2) / (2 * h)));
    }
    const double t = seconds_since(t0);
    const bool pass = zero_ok && e1 <= 1e-8 && e2 <= 1e-8 && efd <= 1e-4 && t < 10.0;
    return {pass, std::string("kappa(0)=0 ") + (zero_ok ? "exact" : "violated") + ", k1 " + fmt("%.1e", e1) +
                      ", k2 " + fmt("%.1e", e2) + ", finite-diff " + fmt("%.1e", efd) + ", " + fmt("%.2f", t) + " s"};
}

Outcome saddlepoint_solver() {
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<int> Ld(5, 12), pd(1, 4);
    std::uniform_real_distribution<double> frac(0.02, 3.0);
    int bad_residual = 0, bad_sign = 0;
    double worst = 0;
    for (int inst = 0; inst < 100; ++inst) {
        auto c = synthetic_case(Ld(rng), pd(rng), rng);
        const CgfContext ctx = build_cgf_context(c.model, c.pred, c.xi);
        const double mu_delta = expected_discrepancy(c.model, c.pred, c.xi);
        const double dm = frac(rng) * mu_delta;
        const SaddleSolution sol = solve_saddlepoint(ctx, dm);
        const double r = std::abs(cgf_derivatives(ctx, sol.s0).k1 - dm) / std::max(1.0, dm);
        worst = std::max(worst, r);
        bad_residual += r > 1e-8;
        const int want = (dm > mu_delta) - (dm < mu_delta);
        const int got = (sol.s0 > 0) - (sol.s0 < 0);
        bad_sign += want != got;
    }
    return {bad_residual == 0 && bad_sign == 0, "max scaled residual " + fmt("%.1e", worst) + ", sign mismatches " +
                                                    std::to_string(bad_sign)};
}

Outcome rank_one_exact() {
    const auto t0 = std::chrono::steady_clock::now();
    StudyConfig cfg = parse_config(
        "seed = 7\ntarget_mode = redraw_x_star\nn0 = 5\ninitial_design = random\ngrid_size = 200\n"
        "mc_samples = 2\n[simulator]\nname = gfun_separable\n",
        "rank-one");
    const EiMapResult res = ei_map_study(cfg, "");
    std::vector<double> a, b;
    for (const auto& row : res.rows) {
        a.push_back(row.saei);
        b.push_back(row.exact);
    }
    const double r = pearson(a, b);
    const auto ia = std::max_element(a.begin(), a.end()) - a.begin();
    const auto ib = std::max_element(b.begin(), b.end()) - b.begin();
    const double t = seconds_since(t0);
    return {res.p == 1 && r > 0.999 && ia == ib && t < 10.0,
            "p=" + std::to_string(res.p) + ", pearson r " + fmt("%.6f", r) + ", argmax " + std::to_string(ia) + " vs " +
                std::to_string(ib) + ", " + fmt("%.2f", t) + " s"};
}

Outcome saei_vs_monte_carlo() {
    StudyConfig cfg = parse_config(
        "seed = 1\ntarget_mode = fixed_x_star\nx_star = 0.7861\nn0 = 6\ngrid_size = 200\nmc_samples = 50000\n"
        "[simulator]\nname = example1\n",
        "example1");
    const EiMapResult res = ei_map_study(cfg, "");
    int within = 0, zero_hits = 0;
    double worst_rel = 0;
    for (const auto& row : res.rows) {
        const double tol = std::max(3.0 * row.mc_se, 0.02 * std::abs(row.mc));
        within += std::abs(row.saei - row.mc) <= tol;
        if (row.mc == 0.0) ++zero_hits;
        else worst_rel = std::max(worst_rel, rel_err(row.saei, row.mc));
    }
    const double frac = within / static_cast<double>(res.rows.size());
    const double ratio = res.saei_seconds / res.mc_seconds;
    return {frac >= 0.95 && ratio <= 0.01 && res.mc_seconds < 600,
            "within tolerance " + std::to_string(within) + "/" + std::to_string(res.rows.size()) + " (" +
                std::to_string(zero_hits) + " points with zero MC hits), worst rel err on nonzero MC " +
                fmt("%.3f", worst_rel) + "; saEI " + fmt("%.3g", res.saei_seconds) + " s vs MC " +
                fmt("%.1f", res.mc_seconds) + " s (ratio " + fmt("%.1e", ratio) + ")"};
}

Outcome interpolation_contracts() {
    struct Case {
        const char* sim;
        int n;
    };
    double worst_mean = 0, worst_var = 0, min_eig = INFINITY;
    int checked = 0, skipped = 0;
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> u;
    for (const Case& c : {Case{"example1", 6}, Case{"example1", 18}, Case{"gfun_separable", 5}, Case{"harari", 18},
                          Case{"harari", 30}, Case{"environmental", 30}}) {
        const auto sim = resolve_simulator(parse_config(std::string("[simulator]\nname = ") + c.sim + "\n").simulator);
        const DesignSet d = evaluate_design(sim.fn, maximin_lhd(c.n, sim.dim(), 17));
        SvdFitOptions o;
        o.seed = 5;
        const SvdGpModel m = fit_svd_gp(d, o);
        for (int i = 0; i < m.p(); ++i) {
            if (m.gps[i].chol.jitter != o.gp.jitter.base) {
                ++skipped;
                continue;
            }
            ++checked;
            for (int j = 0; j < d.n(); ++j) {
                const Prediction pr = predict(m, d.X.row(j).transpose());
                worst_mean = std::max(worst_mean, std::abs(pr.c_hat[i] - m.V_star(i, j)));
                worst_var = std::max(worst_var, std::abs(pr.s2[i]));
            }
        }
        for (int k = 0; k < 10; ++k) {
            Eigen::VectorXd x(sim.dim());
            for (int j = 0; j < sim.dim(); ++j) x[j] = u(rng);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(predictive_covariance(m, predict(m, x)),
                                                              Eigen::EigenvaluesOnly);
            min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
        }
    }
    return {checked > 0 && worst_mean <= 1e-6 && worst_var <= 1e-6 && min_eig >= -1e-8,
            std::to_string(checked) + " coefficient fits at base jitter (" + std::to_string(skipped) +
                " escalated), mean err " + fmt("%.1e", worst_mean) + ", var " + fmt("%.1e", worst_var) +
                ", min eigenvalue " + fmt("%.1e", min_eig)};
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

Outcome esl2d_vs_naive() {
    const auto t0 = std::chrono::steady_clock::now();
    StudyConfig cfg = parse_config(
        "seed = 1\nreplications = 20\ntarget_mode = redraw_x_star\ndesign_size = 30\n[simulator]\nname = harari\n",
        "example2");
    const auto pairs = extract_compare_study(cfg, "");
    std::vector<double> e, n;
    for (const auto& p : pairs) {
        e.push_back(p.log_d_esl2d);
        n.push_back(p.log_d_naive);
    }
    const double me = median(e), mn = median(n);
    const double t = seconds_since(t0);
    return {me <= mn && t < 600, "median log D: esl2d " + fmt("%.4f", me) + ", naive " + fmt("%.4f", mn) + ", " +
                                     fmt("%.1f", t) + " s"};
}

Outcome end_to_end() {
    const auto t0 = std::chrono::steady_clock::now();
    StudyConfig cfg = parse_config(
        "seed = 1\nreplications = 10\ntarget_mode = fixed_x_star\nx_star = 0.7861\nn0 = 6\nn_new = 12\n"
        "[simulator]\nname = example1\n",
        "example1");
    const auto results = calibrate_study(cfg, "");
    std::vector<double> final_d, initial_d;
    int non_monotone = 0;
    for (const auto& r : results) {
        final_d.push_back(r.trace.final_d_xi);
        initial_d.push_back(r.trace.initial_d_xi);
        double prev = r.trace.initial_delta_min;
        for (const auto& row : r.trace.rows) {
            if (row.delta_min > prev) ++non_monotone;
            prev = row.delta_min;
        }
    }
    const double mf = median(final_d), mi = median(initial_d);
    const double t = seconds_since(t0);
    return {mf < mi && non_monotone == 0 && t < 900,
            "median D: initial " + fmt("%.4g", mi) + " -> final " + fmt("%.4g", mf) + ", non-monotone steps " +
                std::to_string(non_monotone) + ", " + fmt("%.1f", t) + " s"};
}

Outcome theorem_shadow() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> medians;
    std::string detail = "median D by N:";
    for (int n : {12, 30, 60}) {
        StudyConfig cfg = parse_config("seed = 1\nreplications = 20\ntarget_mode = fixed_x_star\nx_star = 0.7861\n"
                                       "design_size = " + std::to_string(n) + "\n[simulator]\nname = example1\n",
                                       "example1");
        std::vector<double> d;
        for (const auto& p : extract_compare_study(cfg, "")) d.push_back(std::exp(p.log_d_esl2d));
        medians.push_back(median(d));
        detail += " " + std::to_string(n) + ":" + fmt("%.4g", medians.back());
    }
    const double t = seconds_since(t0);
    const bool monotone = medians[1] <= medians[0] && medians[2] <= medians[1];
    return {monotone && t < 900, detail + ", " + fmt("%.1f", t) + " s"};
}

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const fs::path work = fs::path(DYNCAL_ACCEPT_WORKDIR) / "determinism";
    fs::remove_all(work);
    fs::create_directories(work);
    const fs::path cfg = work / "study.cfg";
    std::ofstream(cfg) << "seed = 31\nreplications = 3\nworkers = 2\nn_new = 3\nm1 = 300\nm2 = 300\n"
                          "target_mode = redraw_x_star\ndesign_size = 10\ngrid_size = 20\nmc_samples = 2000\n"
                          "[simulator]\nname = example1\n";
    std::ofstream(work / "points.csv") << "x_1\n0.05\n0.5\n0.95\n";

    const std::vector<std::string> commands{"calibrate", "ei-map", "extract-compare", "fit", "predict"};
    int files = 0, differing = 0, failures = 0;
    for (const auto& cmd : commands) {
        for (const char* run : {"a", "b"}) {
            const fs::path out = work / (cmd + "_" + run);
            std::string line = std::string(DYNCAL_CLI_PATH) + " " + cmd + " --config " + cfg.string() + " --out " +
                               out.string();
            if (cmd == "predict")
                line += " --model " + (work / "fit_a" / "model.txt").string() + " --points " +
                        (work / "points.csv").string();
            line += " >/dev/null 2>&1";
            if (std::system(line.c_str()) != 0) ++failures;
        }
        for (const auto& e : fs::directory_iterator(work / (cmd + "_a"))) {
            ++files;
            if (slurp(e.path()) != slurp(work / (cmd + "_b") / e.path().filename())) ++differing;
        }
    }
    return {failures == 0 && differing == 0 && files > 0,
            std::to_string(files) + " output files over " + std::to_string(commands.size()) + " subcommands, " +
                std::to_string(differing) + " differ, " + std::to_string(failures) + " failed runs"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
        {1, {"CGF closed form vs dense matrix form", cgf_equivalence}},
        {2, {"cumulant identities and derivatives", cumulant_identities}},
        {3, {"saddlepoint solver residual and sign", saddlepoint_solver}},
        {4, {"saEI vs exact EI on a rank-1 model", rank_one_exact}},
        {5, {"saEI vs Monte-Carlo EI on Example 1", saei_vs_monte_carlo}},
        {6, {"interpolation and variance contracts", interpolation_contracts}},
        {7, {"ESL2D vs naive extraction on Example 2", esl2d_vs_naive}},
        {8, {"end-to-end calibration on Example 1", end_to_end}},
        {9, {"median D non-increasing in design size", theorem_shadow}},
        {10, {"byte-identical CLI reruns", determinism}},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    if (selected.empty())
        for (const auto& [k, _] : criteria) selected.push_back(k);

    int failed = 0;
    for (int k : selected) {
        const auto it = criteria.find(k);
        if (it == criteria.end()) {
            std::fprintf(stderr, "unknown criterion %d\n", k);
            return 2;
        }
        Outcome o;
        try {
            o = it->second.second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %2d %s: %s (%s)\n", k, o.pass ? "PASS" : "FAIL", it->second.first, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
