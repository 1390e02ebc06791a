#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "dyncal/design.hpp"
#include "dyncal/errors.hpp"

namespace dyncal {

/// Inverse-squared lengthscales of the anisotropic Gaussian correlation.
struct KernelParams {
    Eigen::VectorXd theta;
};

/// Inverse-Gamma(alpha/2, beta/2) priors on the coefficient and noise
/// variances; Gamma(shape, rate) prior on each 1/theta_j.
struct PriorConfig {
    double alpha_i = 0.1;
    double beta_i = 0.1;
    double alpha = 0.1;
    double beta = 0.1;
    double gamma_shape = 1.5;
    double gamma_rate = 0.1;

    void validate() const;
};

/// exp(-sum_j theta_j (x1_j - x2_j)^2)
double gaussian_correlation(const Eigen::Ref<const Eigen::VectorXd>& x1,
                            const Eigen::Ref<const Eigen::VectorXd>& x2, const KernelParams& params);

/// Correlation matrix of the rows of X with `jitter` added to the diagonal.
Eigen::MatrixXd correlation_matrix(const Design& X, const KernelParams& params, double jitter);

/// Correlations between x0 and each row of X.
Eigen::VectorXd cross_correlation(const Design& X, const Eigen::Ref<const Eigen::VectorXd>& x0,
                                  const KernelParams& params);

struct JitterPolicy {
    double base = 1e-8;  // relative to mean(diag K)
    double factor = 10.0;
    double cap = 1e-4;
};

struct CholeskyFactor {
    Eigen::MatrixXd lower;  // L with L L^T = K + jitter I
    double jitter = 0.0;

    [[nodiscard]] Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& b) const;
    [[nodiscard]] double log_det() const;
};

/// Cholesky of the correlation matrix, escalating jitter base -> cap by `factor`.
/// Throws FactorizationFailure when even the cap fails.
CholeskyFactor factor_correlation(const Design& X, const KernelParams& params, const JitterPolicy& policy = {});

/// log of the Gamma(shape, rate) density of 1/theta_j, summed over j.
double log_theta_prior(const KernelParams& params, const PriorConfig& priors);

/// Log marginal posterior of theta (up to a constant):
/// -1/2 log|K| - (alpha_i+N)/2 log((beta_i+psi)/2) + log pi(theta), psi = v^T K^-1 v.
double map_objective(const KernelParams& params, const Design& X, const Eigen::VectorXd& v,
                     const PriorConfig& priors, const JitterPolicy& policy = {});

struct FittedCoefficientGp {
    KernelParams theta_hat;
    double sigma2_scale = 0.0;  // (beta_i + psi) / (alpha_i + N)
    double psi = 0.0;
    double objective = 0.0;
    CholeskyFactor chol;
    Eigen::VectorXd kinv_v;
};

struct GpFitOptions {
    int starts = 5;
    double log_theta_min = -6.907755278982137;  // log 1e-3
    double log_theta_max = 6.907755278982137;   // log 1e3
    int max_evals_per_dim = 150;
    JitterPolicy jitter;
};

/// Multi-start derivative-free maximization of map_objective over log theta.
/// `warm_start`, when given, replaces the first start point.
FittedCoefficientGp fit_coefficient_gp(const Design& X, const Eigen::VectorXd& v, const PriorConfig& priors,
                                       std::uint64_t seed, const GpFitOptions& opts = {},
                                       const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

/// Rebuilds the cached factors for a given theta (no optimization).
FittedCoefficientGp condition_coefficient_gp(const Design& X, const Eigen::VectorXd& v, const KernelParams& params,
                                             const PriorConfig& priors, const JitterPolicy& policy = {});

}  // namespace dyncal
