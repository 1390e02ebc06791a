#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dyncal/config.hpp"
#include "dyncal/inverse_solver.hpp"
#include "dyncal/simulators.hpp"

namespace dyncal {

/// A simulator ready to run, built-in or external.
struct ResolvedSimulator {
    SimulatorFn fn;  // on the unit cube
    UnitBox box;
    int L = 0;
    Eigen::VectorXd times;
    std::optional<SimulatorSpec> builtin;

    [[nodiscard]] int dim() const { return box.dim(); }
};

ResolvedSimulator resolve_simulator(const SimulatorConfig& cfg);

// Stream layout: replication r works from replication_seed(master, r); the
// target input draw uses ("x-star", 0) in fixed mode and ("x-star", r) when
// redrawn; everything inside a replication uses labels of its own seed.
std::uint64_t replication_seed(std::uint64_t master, int r);

/// Target of replication r. Noise is always redrawn; x* only in redraw mode.
TargetSpec replication_target(const StudyConfig& cfg, const ResolvedSimulator& sim, int r);

CalibrationProblem make_problem(const StudyConfig& cfg, const ResolvedSimulator& sim, const Eigen::VectorXd& xi,
                                std::uint64_t seed);
SvdFitOptions make_fit_options(const StudyConfig& cfg, std::uint64_t seed);

/// Runs body(r) for r = 0..n-1 on up to `workers` threads. The exception of
/// the lowest failing replication is rethrown after all threads finish.
void for_each_replication(int n, int workers, const std::function<void(int)>& body);

/// Empirical quantile, linear interpolation between order statistics.
double quantile(std::vector<double> v, double prob);

/// Writes results only when out_dir is non-empty.
std::vector<CalibrationResult> calibrate_study(const StudyConfig& cfg, const std::string& out_dir);

struct EiMapRow {
    Eigen::VectorXd x;  // native scale
    double saei = 0.0;
    double exact = 0.0;  // NaN unless p == 1
    double mc = 0.0;
    double mc_se = 0.0;
};

struct EiMapResult {
    std::vector<EiMapRow> rows;
    int p = 0;
    double delta_min = 0.0;
    double saei_seconds = 0.0;
    double mc_seconds = 0.0;
};

/// Fits on the initial design of replication 0 and scores a grid: midpoints
/// for q = 1, a random LHD otherwise. mc_samples = 0 skips the MC column.
EiMapResult ei_map_study(const StudyConfig& cfg, const std::string& out_dir);

struct ExtractPair {
    double log_d_esl2d = 0.0;
    double log_d_naive = 0.0;
};

/// Per replication: maximin design of design_size points, one fit, and both
/// extraction criteria on the same candidate set.
std::vector<ExtractPair> extract_compare_study(const StudyConfig& cfg, const std::string& out_dir);

/// Initial design of replication 0, as used by fit and ei-map.
DesignSet initial_design_set(const StudyConfig& cfg, const ResolvedSimulator& sim);

}  // namespace dyncal
