#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "dyncal/svd_emulator.hpp"

namespace dyncal {

/// Everything needed to evaluate the cumulant generating function of the
/// squared discrepancy delta(x) = ||xi - y(x)||^2 under the predictive law.
struct CgfContext {
    Eigen::VectorXd mu;          // xi - B c_hat
    Eigen::VectorXd mu_b;        // B^T mu
    double mu_sq = 0.0;          // mu^T mu
    double sigma2_hat = 0.0;     // residual variance
    Eigen::VectorXd coef_var;    // sigma_i^2(x)
    Eigen::VectorXd d2s2;        // d_i^2 sigma_i^2(x)
    Eigen::VectorXd sig_tilde2;  // d_i^2 sigma_i^2(x) + sigma2_hat
    int L = 0;
    int p = 0;
    double s_max = 0.0;          // CGF exists for s < s_max

    /// True when the predictive law is a point mass.
    [[nodiscard]] bool degenerate() const;
};

/// Mean of delta(x): xi^T (I - U* U*^T) xi + sum d_i^2 [(c_i - c_xi,i)^2 + sigma_i^2] + L sigma2_hat.
double expected_discrepancy(const SvdGpModel& model, const Prediction& pred, const Eigen::VectorXd& xi);

CgfContext build_cgf_context(const SvdGpModel& model, const Prediction& pred, const Eigen::VectorXd& xi);

/// kappa(s) in the diagonalized form; throws DomainError for s >= s_max.
double cgf(const CgfContext& ctx, double s);

struct CgfDerivatives {
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
};

CgfDerivatives cgf_derivatives(const CgfContext& ctx, double s);

struct SaddleSolution {
    double s0 = 0.0;
    double kappa0 = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
    double W = 0.0;
    double Q = 0.0;
    double lambda3 = 0.0;
};

/// Root of kappa'(s) = delta_min by bracketed Newton with bisection fallback.
/// Converged when |kappa'(s0) - delta_min| <= tol * max(1, delta_min).
SaddleSolution solve_saddlepoint(const CgfContext& ctx, double delta_min, double tol = 1e-11);

/// Saddlepoint approximation of E[(delta_min - delta)_+] given a solved context.
/// `mu_delta` is the predictive mean of delta. Result is clamped to [0, delta_min].
double saei_from_context(const CgfContext& ctx, double mu_delta, double delta_min);

/// saEI criterion at x.
double saei(const SvdGpModel& model, const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::VectorXd& xi,
            double delta_min);

/// Closed-form EI for a single-basis model with zero residual variance.
double exact_ei_rank1(const SvdGpModel& model, const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::VectorXd& xi,
                      double delta_min);

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Monte-Carlo EI from the predictive Gaussian; reference oracle for saEI.
McEstimate mc_ei(const SvdGpModel& model, const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::VectorXd& xi,
                 double delta_min, int n_samples, std::uint64_t seed);

}  // namespace dyncal
