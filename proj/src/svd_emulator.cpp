#include "dyncal/svd_emulator.hpp"

#include <stdexcept>

namespace dyncal {

void DesignSet::validate() const {
    if (Y.cols() != X.rows()) throw std::invalid_argument("DesignSet: Y must have one column per design row");
    if (Y.rows() < 1) throw std::invalid_argument("DesignSet: series length must be >= 1");
    if (times.size() != 0 && times.size() != Y.rows())
        throw std::invalid_argument("DesignSet: time grid length must equal L");
}

int choose_p(const Eigen::VectorXd& d_full, double gamma) {
    const double total = d_full.sum();
    if (!(total > 0.0)) throw std::invalid_argument("choose_p: need at least one positive singular value");
    double cum = 0.0;
    for (Eigen::Index m = 0; m < d_full.size(); ++m) {
        cum += d_full[m];
        if (cum / total > gamma) return static_cast<int>(m + 1);
    }
    return static_cast<int>(d_full.size());
}

SvdGpModel fit_svd_gp(const DesignSet& data, const SvdFitOptions& opts, const SvdGpModel* previous) {
    data.validate();
    if (data.n() < 2) throw std::invalid_argument("fit_svd_gp: need N >= 2");
    opts.priors.validate();

    Eigen::BDCSVD<Eigen::MatrixXd> svd(data.Y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const int p = choose_p(sv, opts.gamma);

    SvdGpModel m;
    m.gamma = opts.gamma;
    m.priors = opts.priors;
    m.X = data.X;
    m.d = sv.head(p);
    m.U_star = svd.matrixU().leftCols(p);
    m.B = m.U_star * m.d.asDiagonal();
    m.V_star = svd.matrixV().leftCols(p).transpose();

    const double L = static_cast<double>(data.length()), N = static_cast<double>(data.n());
    const double rr = reconstruction_residual(m, data.Y).squaredNorm();
    m.sigma2_hat = (rr + opts.priors.beta) / (N * L + opts.priors.alpha + 2.0);

    m.gps.reserve(p);
    for (int i = 0; i < p; ++i) {
        std::optional<Eigen::VectorXd> warm;
        if (previous && i < previous->p() && previous->q() == data.q()) warm = previous->gps[i].theta_hat.theta;
        m.gps.push_back(fit_coefficient_gp(data.X, m.V_star.row(i).transpose(), opts.priors,
                                           derive_seed(opts.seed, "coef", static_cast<std::uint64_t>(i)), opts.gp,
                                           warm));
    }
    return m;
}

Eigen::MatrixXd reconstruction_residual(const SvdGpModel& model, const Eigen::MatrixXd& Y) {
    return Y - model.B * model.V_star;
}

Prediction predict(const SvdGpModel& model, const Eigen::Ref<const Eigen::VectorXd>& x0) {
    const int p = model.p();
    Prediction pred;
    pred.c_hat.resize(p);
    pred.s2.resize(p);
    for (int i = 0; i < p; ++i) {
        const auto& gp = model.gps[i];
        Eigen::VectorXd k = cross_correlation(model.X, x0, gp.theta_hat);
        // The jitter belongs to the fitted kernel (a nugget at zero distance),
        // so it also applies between x0 and a training input equal to it.
        double prior_var = 1.0;
        for (Eigen::Index j = 0; j < model.X.rows(); ++j)
            if (model.X.row(j) == x0.transpose()) {
                k[j] += gp.chol.jitter;
                prior_var = 1.0 + gp.chol.jitter;
            }
        pred.c_hat[i] = k.dot(gp.kinv_v);
        Eigen::VectorXd w = gp.chol.lower.triangularView<Eigen::Lower>().solve(k);
        const double reduction = prior_var - w.squaredNorm();
        pred.s2[i] = gp.sigma2_scale * std::max(0.0, reduction);
    }
    pred.mean = model.B * pred.c_hat;
    pred.noise = model.sigma2_hat;
    return pred;
}

Eigen::MatrixXd predictive_covariance(const SvdGpModel& model, const Prediction& pred) {
    const Eigen::MatrixXd M = model.B * pred.s2.cwiseSqrt().asDiagonal();
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(model.length(), model.length());
    S.selfadjointView<Eigen::Lower>().rankUpdate(M);
    S.triangularView<Eigen::StrictlyUpper>() = S.transpose();
    S.diagonal().array() += pred.noise;
    return S;
}

}  // namespace dyncal
