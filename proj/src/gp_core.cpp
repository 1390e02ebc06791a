#include "dyncal/gp_core.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nelder_mead.hpp"

namespace dyncal {

void PriorConfig::validate() const {
    for (double v : {alpha_i, beta_i, alpha, beta, gamma_shape, gamma_rate})
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("PriorConfig: all hyperparameters must be positive");
}

double gaussian_correlation(const Eigen::Ref<const Eigen::VectorXd>& x1, const Eigen::Ref<const Eigen::VectorXd>& x2,
                            const KernelParams& params) {
    return std::exp(-(params.theta.array() * (x1 - x2).array().square()).sum());
}

Eigen::MatrixXd correlation_matrix(const Design& X, const KernelParams& params, double jitter) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        K(a, a) = 1.0 + jitter;
        for (Eigen::Index b = a + 1; b < n; ++b) {
            double r = gaussian_correlation(X.row(a).transpose(), X.row(b).transpose(), params);
            K(a, b) = r;
            K(b, a) = r;
        }
    }
    return K;
}

Eigen::VectorXd cross_correlation(const Design& X, const Eigen::Ref<const Eigen::VectorXd>& x0,
                                  const KernelParams& params) {
    Eigen::VectorXd k(X.rows());
    for (Eigen::Index a = 0; a < X.rows(); ++a) k[a] = gaussian_correlation(X.row(a).transpose(), x0, params);
    return k;
}

Eigen::VectorXd CholeskyFactor::solve(const Eigen::Ref<const Eigen::VectorXd>& b) const {
    Eigen::VectorXd y = lower.triangularView<Eigen::Lower>().solve(b);
    return lower.transpose().triangularView<Eigen::Upper>().solve(y);
}

double CholeskyFactor::log_det() const {
    return 2.0 * lower.diagonal().array().log().sum();
}

CholeskyFactor factor_correlation(const Design& X, const KernelParams& params, const JitterPolicy& policy) {
    if (!(policy.base > 0.0 && policy.factor > 1.0 && policy.cap >= policy.base))
        throw std::invalid_argument("JitterPolicy: need base > 0, factor > 1 and cap >= base");
    Eigen::MatrixXd K = correlation_matrix(X, params, 0.0);
    const double mean_diag = K.diagonal().mean();
    for (double rel = policy.base; rel <= policy.cap * (1.0 + 1e-12); rel *= policy.factor) {
        const double jitter = rel * mean_diag;
        Eigen::MatrixXd Kj = K;
        Kj.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(Kj);
        if (llt.info() == Eigen::Success && (llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all())
            return {llt.matrixL(), jitter};
    }
    throw FactorizationFailure("correlation matrix not positive definite at jitter cap");
}

double log_theta_prior(const KernelParams& params, const PriorConfig& priors) {
    const double a = priors.gamma_shape, b = priors.gamma_rate;
    double lp = 0.0;
    for (Eigen::Index j = 0; j < params.theta.size(); ++j) {
        const double u = 1.0 / params.theta[j];
        lp += a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(u) - b * u;
    }
    return lp;
}

namespace {

double objective_from_factor(const CholeskyFactor& chol, const Eigen::VectorXd& v, const KernelParams& params,
                             const PriorConfig& priors, double* psi_out = nullptr,
                             Eigen::VectorXd* kinv_v_out = nullptr) {
    const auto n = static_cast<double>(v.size());
    Eigen::VectorXd kinv_v = chol.solve(v);
    const double psi = std::max(0.0, v.dot(kinv_v));
    if (psi_out) *psi_out = psi;
    if (kinv_v_out) *kinv_v_out = std::move(kinv_v);
    return -0.5 * chol.log_det() - 0.5 * (priors.alpha_i + n) * std::log(0.5 * (priors.beta_i + psi)) +
           log_theta_prior(params, priors);
}

}  // namespace

double map_objective(const KernelParams& params, const Design& X, const Eigen::VectorXd& v, const PriorConfig& priors,
                     const JitterPolicy& policy) {
    return objective_from_factor(factor_correlation(X, params, policy), v, params, priors);
}

FittedCoefficientGp condition_coefficient_gp(const Design& X, const Eigen::VectorXd& v, const KernelParams& params,
                                             const PriorConfig& priors, const JitterPolicy& policy) {
    FittedCoefficientGp fit;
    fit.theta_hat = params;
    fit.chol = factor_correlation(X, params, policy);
    fit.objective = objective_from_factor(fit.chol, v, params, priors, &fit.psi, &fit.kinv_v);
    fit.sigma2_scale = (priors.beta_i + fit.psi) / (priors.alpha_i + static_cast<double>(v.size()));
    return fit;
}

FittedCoefficientGp fit_coefficient_gp(const Design& X, const Eigen::VectorXd& v, const PriorConfig& priors,
                                       std::uint64_t seed, const GpFitOptions& opts,
                                       const std::optional<Eigen::VectorXd>& warm_start) {
    if (X.rows() < 2) throw std::invalid_argument("fit_coefficient_gp: need at least two design points");
    if (v.size() != X.rows()) throw std::invalid_argument("fit_coefficient_gp: v length must equal N");
    if (opts.starts < 1) throw std::invalid_argument("fit_coefficient_gp: starts must be positive");
    priors.validate();

    const int q = static_cast<int>(X.cols());
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(q, opts.log_theta_min);
    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(q, opts.log_theta_max);
    const double span = opts.log_theta_max - opts.log_theta_min;

    auto neg_objective = [&](const Eigen::VectorXd& log_theta) {
        KernelParams p{log_theta.array().exp().matrix()};
        try {
            double val = map_objective(p, X, v, priors, opts.jitter);
            return std::isfinite(val) ? -val : std::numeric_limits<double>::infinity();
        } catch (const FactorizationFailure&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    Rng rng = make_stream(seed, "gp-starts");
    Design starts = random_lhd(opts.starts, q, rng);
    Eigen::VectorXd best_x;
    double best_val = std::numeric_limits<double>::infinity();
    for (int s = 0; s < opts.starts; ++s) {
        Eigen::VectorXd x0 = lo.array() + starts.row(s).transpose().array() * span;
        if (s == 0 && warm_start) x0 = warm_start->array().log().matrix().cwiseMax(lo).cwiseMin(hi);
        auto res = detail::nelder_mead_box(neg_objective, x0, 0.1 * span, lo, hi, opts.max_evals_per_dim * (q + 1));
        if (res.value < best_val) {
            best_val = res.value;
            best_x = res.x;
        }
    }
    if (!std::isfinite(best_val)) throw FactorizationFailure("fit_coefficient_gp: every start failed to factorize");
    return condition_coefficient_gp(X, v, KernelParams{best_x.array().exp().matrix()}, priors, opts.jitter);
}

}  // namespace dyncal
