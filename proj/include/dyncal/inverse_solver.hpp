#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dyncal/design.hpp"
#include "dyncal/simulators.hpp"
#include "dyncal/svd_emulator.hpp"

namespace dyncal {

/// (delta_min - delta_x)_+
double improvement(double delta_min, double delta_x);

/// ||xi - y||^2 / ||xi - mean(xi)||^2. Throws DomainError for a constant target.
double normalized_discrepancy(const Eigen::VectorXd& xi, const Eigen::VectorXd& y);

/// Squared discrepancy ||xi - y||^2.
inline double discrepancy(const Eigen::VectorXd& xi, const Eigen::VectorXd& y) {
    return (xi - y).squaredNorm();
}

/// Coordinates of the target in the basis: D*^-2 B^T xi.
Eigen::VectorXd target_coefficients(const SvdGpModel& model, const Eigen::VectorXd& xi);

/// sum d_i^2 (c_i(x) - c_xi,i)^2
double naive_objective(const SvdGpModel& model, const Prediction& pred, const Eigen::VectorXd& c_xi);
/// naive objective + sum d_i^2 sigma_i^2(x)
double esl2d_objective(const SvdGpModel& model, const Prediction& pred, const Eigen::VectorXd& c_xi);

/// Candidate row minimizing the naive (mean-only) criterion; ties go to the lowest index.
Eigen::VectorXd extract_naive(const SvdGpModel& model, const Eigen::VectorXd& xi, const Design& candidates);
/// Candidate row minimizing the expected squared L2 discrepancy; ties go to the lowest index.
Eigen::VectorXd extract_esl2d(const SvdGpModel& model, const Eigen::VectorXd& xi, const Design& candidates);

struct CalibrationProblem {
    SimulatorFn simulator;  // on [0,1]^q
    UnitBox box;
    Eigen::VectorXd xi;
    int n0 = 6;
    int n_new = 12;
    int m1 = 2000;
    int m2 = 2000;
    double gamma = 0.95;
    PriorConfig priors;
    GpFitOptions gp;
    MaximinOptions lhd;
    std::uint64_t seed = 0;
    bool track_solution = true;  // extract and score x-hat after every refit
    bool record_wall_time = false;

    /// n0 = 6q, n_new = 12q, M1 = M2 = 2000q.
    static CalibrationProblem with_defaults(SimulatorFn sim, UnitBox box, Eigen::VectorXd xi, std::uint64_t seed);
    void validate() const;
};

struct IterationRecord {
    int iter = 0;
    Eigen::VectorXd x;  // unit cube
    double delta = 0.0;
    double delta_min = 0.0;
    double saei = 0.0;
    double wall_ms = 0.0;
    double d_xi = 0.0;        // ESL2D solution after this refit
    double d_xi_naive = 0.0;  // naive solution after this refit
};

struct RunTrace {
    double initial_delta_min = 0.0;
    double initial_d_xi = 0.0;
    double initial_d_xi_naive = 0.0;
    std::vector<IterationRecord> rows;
    Eigen::VectorXd x_hat;        // final ESL2D solution, unit cube
    Eigen::VectorXd x_hat_naive;  // final naive solution, unit cube
    double final_d_xi = 0.0;
    double final_d_xi_naive = 0.0;
    int refits = 0;
};

struct CalibrationResult {
    SvdGpModel model;
    DesignSet data;
    RunTrace trace;
};

/// Sequential design: maximin LHD of size n0, then n_new saEI acquisitions
/// from fresh random candidate sets, refitting after each simulator run.
CalibrationResult run_calibration(const CalibrationProblem& problem);

/// Evaluates the simulator on every row of X; failures carry the offending point.
DesignSet evaluate_design(const SimulatorFn& simulator, const Design& X);

}  // namespace dyncal
