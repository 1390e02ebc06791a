#include "dyncal/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "dyncal/errors.hpp"
#include "dyncal/io.hpp"
#include "dyncal/saei.hpp"

namespace dyncal {

ResolvedSimulator resolve_simulator(const SimulatorConfig& cfg) {
    ResolvedSimulator r;
    if (cfg.name == "external") {
        const auto q = static_cast<Eigen::Index>(cfg.lower.size());
        r.box = UnitBox(Eigen::Map<const Eigen::VectorXd>(cfg.lower.data(), q),
                        Eigen::Map<const Eigen::VectorXd>(cfg.upper.data(), q));
        r.L = cfg.L;
        r.times = Eigen::VectorXd::LinSpaced(cfg.L, cfg.t_start, cfg.t_end);
        r.fn = external_simulator(cfg.command, r.box, cfg.L);
        return r;
    }
    SimulatorSpec spec = SimulatorSpec::make(parse_simulator_kind(cfg.name), cfg.L);
    r.box = spec.box;
    r.L = spec.L;
    r.times = spec.times();
    r.fn = spec.handle();
    r.builtin = spec;
    return r;
}

std::uint64_t replication_seed(std::uint64_t master, int r) {
    return derive_seed(master, "replication", static_cast<std::uint64_t>(r));
}

TargetSpec replication_target(const StudyConfig& cfg, const ResolvedSimulator& sim, int r) {
    const int q = sim.dim();
    Eigen::VectorXd x_star;
    if (cfg.target_mode == TargetMode::fixed_x_star && cfg.x_star) {
        x_star = *cfg.x_star;
        if (x_star.size() != q)
            throw ConfigError("x_star: expected " + std::to_string(q) + " values, got " +
                              std::to_string(x_star.size()));
        for (int j = 0; j < q; ++j)
            if (x_star[j] < sim.box.lower[j] || x_star[j] > sim.box.upper[j])
                throw ConfigError("x_star: coordinate " + std::to_string(j + 1) + " outside the simulator box");
    } else {
        const int index = cfg.target_mode == TargetMode::fixed_x_star ? 0 : r;
        Rng rng = make_stream(cfg.seed, "x-star", static_cast<std::uint64_t>(index));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Eigen::VectorXd unit(q);
        for (int j = 0; j < q; ++j) unit[j] = u(rng);
        x_star = sim.box.to_native(unit);
    }
    const Eigen::VectorXd signal = sim.fn(sim.box.to_unit(x_star));
    return make_target(signal, x_star, cfg.rho, replication_seed(cfg.seed, r));
}

SvdFitOptions make_fit_options(const StudyConfig& cfg, std::uint64_t seed) {
    SvdFitOptions o;
    o.gamma = cfg.gamma;
    o.priors = cfg.priors;
    o.gp.starts = cfg.gp_starts;
    o.seed = seed;
    return o;
}

CalibrationProblem make_problem(const StudyConfig& cfg, const ResolvedSimulator& sim, const Eigen::VectorXd& xi,
                                std::uint64_t seed) {
    const int q = sim.dim();
    CalibrationProblem p;
    p.simulator = sim.fn;
    p.box = sim.box;
    p.xi = xi;
    p.n0 = cfg.n0_for(q);
    p.n_new = cfg.n_new_for(q);
    p.m1 = cfg.m1_for(q);
    p.m2 = cfg.m2_for(q);
    p.gamma = cfg.gamma;
    p.priors = cfg.priors;
    p.gp.starts = cfg.gp_starts;
    p.lhd = cfg.lhd;
    p.seed = seed;
    p.record_wall_time = cfg.record_wall_time;
    return p;
}

void for_each_replication(int n, int workers, const std::function<void(int)>& body) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next++; r < n; r = next++) {
            try {
                body(r);
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    const int threads = std::max(1, std::min(workers, n));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double quantile(std::vector<double> v, double prob) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const double h = prob * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

namespace {

std::string rep_file(const std::string& dir, const char* stem, int r) {
    std::ostringstream ss;
    ss << stem << "_r" << std::setw(3) << std::setfill('0') << r << ".csv";
    return (std::filesystem::path(dir) / ss.str()).string();
}

std::string in_dir(const std::string& dir, const char* name) {
    return (std::filesystem::path(dir) / name).string();
}

void prepare_dir(const std::string& dir) {
    if (!dir.empty()) std::filesystem::create_directories(dir);
}

std::vector<std::string> methods_of(Extraction e) {
    switch (e) {
        case Extraction::esl2d: return {"esl2d"};
        case Extraction::naive: return {"naive"};
        case Extraction::both: return {"esl2d", "naive"};
    }
    return {};
}

}  // namespace

std::vector<CalibrationResult> calibrate_study(const StudyConfig& cfg, const std::string& out_dir) {
    const ResolvedSimulator sim = resolve_simulator(cfg.simulator);
    prepare_dir(out_dir);
    std::vector<CalibrationResult> results(static_cast<std::size_t>(cfg.replications));
    const auto methods = methods_of(cfg.extraction);

    for_each_replication(cfg.replications, cfg.workers, [&](int r) {
        const TargetSpec target = replication_target(cfg, sim, r);
        CalibrationProblem problem = make_problem(cfg, sim, target.xi, replication_seed(cfg.seed, r));
        CalibrationResult res = run_calibration(problem);
        if (!out_dir.empty()) {
            auto f = open_output(rep_file(out_dir, "trace", r));
            write_trace(f, res.trace, sim.box);
            for (const auto& m : methods) {
                const bool esl = m == "esl2d";
                auto s = open_output(rep_file(out_dir, esl ? "solution" : "solution_naive", r));
                write_solution(s, sim.box.to_native(esl ? res.trace.x_hat : res.trace.x_hat_naive),
                               esl ? res.trace.final_d_xi : res.trace.final_d_xi_naive);
            }
        }
        results[r] = std::move(res);
    });

    if (!out_dir.empty()) {
        std::vector<std::string> header{"replication"};
        for (const auto& m : methods) header.push_back("log_d_xi_" + m);
        auto f = open_output(in_dir(out_dir, "summary.csv"));
        CsvWriter w(f, "summary-v1", header);
        for (int r = 0; r < cfg.replications; ++r) {
            w << r;
            for (const auto& m : methods)
                w << std::log(m == "esl2d" ? results[r].trace.final_d_xi : results[r].trace.final_d_xi_naive);
            w.end_row();
        }

        std::vector<std::string> qheader{"iter"};
        for (const auto& m : methods)
            for (const char* stat : {"q1_", "median_", "q3_"}) qheader.push_back(std::string(stat) + m);
        auto g = open_output(in_dir(out_dir, "quartiles.csv"));
        CsvWriter qw(g, "quartiles-v1", qheader);
        const int n_new = results.empty() ? 0 : static_cast<int>(results.front().trace.rows.size());
        for (int i = 0; i < n_new; ++i) {
            qw << i + 1;
            for (const auto& m : methods) {
                std::vector<double> logs;
                for (const auto& res : results) {
                    const auto& row = res.trace.rows[i];
                    logs.push_back(std::log(m == "esl2d" ? row.d_xi : row.d_xi_naive));
                }
                qw << quantile(logs, 0.25) << quantile(logs, 0.5) << quantile(logs, 0.75);
            }
            qw.end_row();
        }
    }
    return results;
}

DesignSet initial_design_set(const StudyConfig& cfg, const ResolvedSimulator& sim) {
    const std::uint64_t seed = replication_seed(cfg.seed, 0);
    const int q = sim.dim();
    const int n0 = cfg.n0_for(q);
    Design X;
    if (cfg.initial_design == InitialDesign::maximin) {
        X = maximin_lhd(n0, q, derive_seed(seed, "initial-design"), cfg.lhd);
    } else {
        Rng rng = make_stream(seed, "initial-design");
        X = random_lhd(n0, q, rng);
    }
    DesignSet d = evaluate_design(sim.fn, X);
    d.times = sim.times;
    return d;
}

EiMapResult ei_map_study(const StudyConfig& cfg, const std::string& out_dir) {
    using clock = std::chrono::steady_clock;
    const ResolvedSimulator sim = resolve_simulator(cfg.simulator);
    prepare_dir(out_dir);
    const std::uint64_t seed = replication_seed(cfg.seed, 0);
    const int q = sim.dim();
    const TargetSpec target = replication_target(cfg, sim, 0);
    const DesignSet data = initial_design_set(cfg, sim);
    const SvdGpModel model = fit_svd_gp(data, make_fit_options(cfg, derive_seed(seed, "fit", 0)));

    EiMapResult out;
    out.p = model.p();
    out.delta_min = std::numeric_limits<double>::infinity();
    for (int j = 0; j < data.n(); ++j) out.delta_min = std::min(out.delta_min, discrepancy(target.xi, data.Y.col(j)));

    const int G = cfg.grid_size;
    Design grid(G, q);
    if (q == 1) {
        for (int k = 0; k < G; ++k) grid(k, 0) = (k + 0.5) / G;
    } else {
        Rng rng = make_stream(seed, "ei-grid");
        grid = random_lhd(G, q, rng);
    }

    out.rows.resize(static_cast<std::size_t>(G));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto t0 = clock::now();
    for (int k = 0; k < G; ++k) {
        auto& row = out.rows[k];
        try {
            row.saei = saei(model, grid.row(k).transpose(), target.xi, out.delta_min);
        } catch (const NoBracket&) {
            row.saei = 0.0;
        }
    }
    out.saei_seconds = std::chrono::duration<double>(clock::now() - t0).count();

    for (int k = 0; k < G; ++k)
        out.rows[k].exact = model.p() == 1 ? exact_ei_rank1(model, grid.row(k).transpose(), target.xi, out.delta_min)
                                           : nan;

    t0 = clock::now();
    for (int k = 0; k < G; ++k) {
        auto& row = out.rows[k];
        if (cfg.mc_samples > 0) {
            const McEstimate mc = mc_ei(model, grid.row(k).transpose(), target.xi, out.delta_min, cfg.mc_samples,
                                        derive_seed(seed, "mc-grid", static_cast<std::uint64_t>(k)));
            row.mc = mc.estimate;
            row.mc_se = mc.std_error;
        } else {
            row.mc = row.mc_se = nan;
        }
        row.x = sim.box.to_native(grid.row(k).transpose());
    }
    out.mc_seconds = std::chrono::duration<double>(clock::now() - t0).count();

    if (!out_dir.empty()) {
        auto header = indexed_names("x_", q);
        for (const char* c : {"saei", "exact_ei", "mc_ei", "mc_se"}) header.emplace_back(c);
        auto f = open_output(in_dir(out_dir, "ei_map.csv"));
        CsvWriter w(f, "ei-map-v1", header);
        for (const auto& row : out.rows) {
            w << row.x << row.saei << row.exact << row.mc << row.mc_se;
            w.end_row();
        }
    }
    return out;
}

std::vector<ExtractPair> extract_compare_study(const StudyConfig& cfg, const std::string& out_dir) {
    const ResolvedSimulator sim = resolve_simulator(cfg.simulator);
    prepare_dir(out_dir);
    const int q = sim.dim();
    std::vector<ExtractPair> out(static_cast<std::size_t>(cfg.replications));

    for_each_replication(cfg.replications, cfg.workers, [&](int r) {
        const std::uint64_t seed = replication_seed(cfg.seed, r);
        const TargetSpec target = replication_target(cfg, sim, r);
        const Design X = maximin_lhd(cfg.design_size_for(q), q, derive_seed(seed, "initial-design"), cfg.lhd);
        const DesignSet data = evaluate_design(sim.fn, X);
        const SvdGpModel model = fit_svd_gp(data, make_fit_options(cfg, derive_seed(seed, "fit", 0)));
        const Design cand = random_candidates(cfg.m2_for(q), q, derive_seed(seed, "extract"));
        const Eigen::VectorXd xe = extract_esl2d(model, target.xi, cand);
        const Eigen::VectorXd xn = extract_naive(model, target.xi, cand);
        out[r].log_d_esl2d = std::log(normalized_discrepancy(target.xi, sim.fn(xe)));
        out[r].log_d_naive = std::log(normalized_discrepancy(target.xi, sim.fn(xn)));
    });

    if (!out_dir.empty()) {
        auto f = open_output(in_dir(out_dir, "extract_compare.csv"));
        CsvWriter w(f, "extract-compare-v1", {"replication", "log_d_xi_esl2d", "log_d_xi_naive"});
        for (int r = 0; r < cfg.replications; ++r) {
            w << r << out[r].log_d_esl2d << out[r].log_d_naive;
            w.end_row();
        }
    }
    return out;
}

}  // namespace dyncal
