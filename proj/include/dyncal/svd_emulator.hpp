#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dyncal/design.hpp"
#include "dyncal/gp_core.hpp"

namespace dyncal {

/// Training data: N input rows in [0,1]^q and the L x N matrix of response series.
struct DesignSet {
    Design X;
    Eigen::MatrixXd Y;      // L x N, column j is y(x_j)
    Eigen::VectorXd times;  // metadata only

    void validate() const;
    [[nodiscard]] int n() const { return static_cast<int>(X.rows()); }
    [[nodiscard]] int q() const { return static_cast<int>(X.cols()); }
    [[nodiscard]] int length() const { return static_cast<int>(Y.rows()); }
};

/// Truncated SVD basis with independent GP coefficient processes.
struct SvdGpModel {
    Eigen::MatrixXd B;       // L x p, b_i = d_i u_i
    Eigen::MatrixXd U_star;  // L x p
    Eigen::VectorXd d;       // p leading singular values
    Eigen::MatrixXd V_star;  // p x N, row i is v_i^T
    std::vector<FittedCoefficientGp> gps;
    double sigma2_hat = 0.0;
    PriorConfig priors;
    Design X;
    double gamma = 0.95;

    [[nodiscard]] int p() const { return static_cast<int>(d.size()); }
    [[nodiscard]] int length() const { return static_cast<int>(B.rows()); }
    [[nodiscard]] int n() const { return static_cast<int>(X.rows()); }
    [[nodiscard]] int q() const { return static_cast<int>(X.cols()); }
};

struct Prediction {
    Eigen::VectorXd c_hat;  // coefficient means
    Eigen::VectorXd s2;     // coefficient variances
    Eigen::VectorXd mean;   // B c_hat
    double noise = 0.0;     // sigma2_hat
};

/// Smallest m with sum(d[0..m)) / sum(d) > gamma.
int choose_p(const Eigen::VectorXd& d_full, double gamma);

struct SvdFitOptions {
    double gamma = 0.95;
    PriorConfig priors;
    GpFitOptions gp;
    std::uint64_t seed = 0;
};

/// Fits the surrogate. When `previous` is given, each coefficient search is
/// warm-started from the previous theta of the same index.
SvdGpModel fit_svd_gp(const DesignSet& data, const SvdFitOptions& opts, const SvdGpModel* previous = nullptr);

Prediction predict(const SvdGpModel& model, const Eigen::Ref<const Eigen::VectorXd>& x0);

/// B diag(s2) B^T + sigma2_hat I_L
Eigen::MatrixXd predictive_covariance(const SvdGpModel& model, const Prediction& pred);

/// vec(Y) - (I_N kron B) vec(V*^T), as an L x N matrix.
Eigen::MatrixXd reconstruction_residual(const SvdGpModel& model, const Eigen::MatrixXd& Y);

}  // namespace dyncal
