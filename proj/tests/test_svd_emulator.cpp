#include <cmath>

#include <gtest/gtest.h>

#include "dyncal/simulators.hpp"
#include "dyncal/svd_emulator.hpp"
#include "dyncal/inverse_solver.hpp"

using namespace dyncal;

namespace {

DesignSet example1_data(int n, std::uint64_t seed) {
    const auto spec = SimulatorSpec::make(SimulatorKind::example1);
    DesignSet d = evaluate_design(spec.handle(), maximin_lhd(n, 1, seed));
    d.times = spec.times();
    return d;
}

SvdGpModel fit_default(const DesignSet& d, std::uint64_t seed = 1) {
    SvdFitOptions o;
    o.seed = seed;
    return fit_svd_gp(d, o);
}

}  // namespace

TEST(ChooseP, StrictThreshold) {
    EXPECT_EQ(choose_p(Eigen::Vector3d(1, 0, 0), 0.95), 1);
    EXPECT_EQ(choose_p(Eigen::Vector3d(9, 0.5, 0.5), 0.95), 3);
    EXPECT_EQ(choose_p(Eigen::Vector3d(9, 0.6, 0.4), 0.95), 2);
    EXPECT_THROW(choose_p(Eigen::Vector3d(0, 0, 0), 0.95), std::invalid_argument);
}

TEST(SvdFit, BasisIsOrthonormalAndExplainsGamma) {
    const DesignSet d = example1_data(10, 3);
    const SvdGpModel m = fit_default(d);
    const int p = m.p();
    EXPECT_LT((m.U_star.transpose() * m.U_star - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff(), 1e-10);
    const Eigen::VectorXd all = Eigen::JacobiSVD<Eigen::MatrixXd>(d.Y).singularValues();
    EXPECT_GT(m.d.sum() / all.sum(), m.gamma);
    EXPECT_LT((m.B - m.U_star * m.d.asDiagonal()).cwiseAbs().maxCoeff(), 1e-12);
    for (int i = 0; i < p; ++i) EXPECT_NEAR(m.V_star.row(i).norm(), 1.0, 1e-10);
}

TEST(SvdFit, ResidualVarianceFormula) {
    const DesignSet d = example1_data(8, 5);
    const SvdGpModel m = fit_default(d);
    const double rss = (d.Y - m.B * m.V_star).squaredNorm();
    const double expected = (rss + m.priors.beta) / (d.n() * d.length() + m.priors.alpha + 2.0);
    EXPECT_NEAR(m.sigma2_hat, expected, 1e-12 * std::max(1.0, expected));
    const Eigen::MatrixXd r = reconstruction_residual(m, d.Y);
    EXPECT_NEAR(r.squaredNorm(), rss, 1e-8 * rss);
}

TEST(SvdFit, RankOneResponseHasPriorOnlyNoise) {
    const auto spec = SimulatorSpec::make(SimulatorKind::gfun_separable);
    Rng rng = make_stream(2, "t");
    const DesignSet d = evaluate_design(spec.handle(), random_lhd(5, 1, rng));
    const SvdGpModel m = fit_default(d);
    EXPECT_EQ(m.p(), 1);
    const double expected = m.priors.beta / (d.n() * d.length() + m.priors.alpha + 2.0);
    EXPECT_NEAR(m.sigma2_hat, expected, 1e-6 * expected);
}

TEST(Predict, InterpolatesTrainingPoints) {
    const DesignSet d = example1_data(9, 2);
    const SvdGpModel m = fit_default(d);
    const double scale = d.Y.cwiseAbs().maxCoeff();
    for (int j = 0; j < d.n(); ++j) {
        const Prediction pr = predict(m, d.X.row(j).transpose());
        for (int i = 0; i < m.p(); ++i) {
            EXPECT_NEAR(pr.c_hat[i], m.V_star(i, j), 1e-6);
            EXPECT_NEAR(pr.s2[i], 0.0, 1e-6);
        }
        EXPECT_LE((pr.mean - m.B * m.V_star.col(j)).cwiseAbs().maxCoeff(), 1e-6 * scale);
        EXPECT_LT((pr.mean - m.B * pr.c_hat).cwiseAbs().maxCoeff(), 1e-14 * scale);
    }
}

TEST(Predict, InterpolatesSeriesWhenResidualIsSmall) {
    const DesignSet d = example1_data(6, 2);
    SvdFitOptions o;
    o.gamma = 1.0 - 1e-12;
    const SvdGpModel m = fit_svd_gp(d, o);
    ASSERT_EQ(m.p(), d.n());
    const double scale = d.Y.cwiseAbs().maxCoeff();
    for (int j = 0; j < d.n(); ++j)
        EXPECT_LE((predict(m, d.X.row(j).transpose()).mean - d.Y.col(j)).cwiseAbs().maxCoeff(), 1e-4 * scale);
}

TEST(Predict, FarFieldRevertsToPrior) {
    const DesignSet d = example1_data(6, 4);
    const SvdGpModel m = fit_default(d);
    Eigen::VectorXd far(1);
    far << 1e4;
    const Prediction pr = predict(m, far);
    for (int i = 0; i < m.p(); ++i) {
        EXPECT_NEAR(pr.c_hat[i], 0.0, 1e-12);
        EXPECT_NEAR(pr.s2[i], m.gps[i].sigma2_scale, 1e-12 * m.gps[i].sigma2_scale);
        EXPECT_NEAR(m.gps[i].sigma2_scale, (m.priors.beta_i + m.gps[i].psi) / (m.priors.alpha_i + m.n()), 1e-14);
    }
}

TEST(Predict, VarianceFloorAndCeiling) {
    const DesignSet d = example1_data(7, 8);
    const SvdGpModel m = fit_default(d);
    for (int k = 0; k <= 100; ++k) {
        Eigen::VectorXd x(1);
        x << k / 100.0;
        const Prediction pr = predict(m, x);
        for (int i = 0; i < m.p(); ++i) {
            EXPECT_GE(pr.s2[i], 0.0);
            EXPECT_LE(pr.s2[i], m.gps[i].sigma2_scale * (1 + 1e-12));
        }
    }
}

TEST(Covariance, TraceIdentityRankAndPsd) {
    const DesignSet d = example1_data(8, 6);
    const SvdGpModel m = fit_default(d);
    Eigen::VectorXd x(1);
    x << 0.137;
    const Prediction pr = predict(m, x);
    const Eigen::MatrixXd C = predictive_covariance(m, pr);
    EXPECT_EQ(C, C.transpose());
    const double tr = (m.d.array().square() * pr.s2.array()).sum() + m.length() * m.sigma2_hat;
    EXPECT_NEAR(C.trace(), tr, 1e-10 * tr);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
    const Eigen::MatrixXd R = C - m.sigma2_hat * Eigen::MatrixXd::Identity(m.length(), m.length());
    Eigen::FullPivLU<Eigen::MatrixXd> lu(R);
    lu.setThreshold(1e-9);
    EXPECT_LE(lu.rank(), m.p());
}

TEST(Covariance, ZeroVariancesGiveZeroMatrix) {
    const DesignSet d = example1_data(6, 1);
    SvdGpModel m = fit_default(d);
    m.sigma2_hat = 0.0;
    Prediction pr = predict(m, d.X.row(0).transpose());
    pr.s2.setZero();
    pr.noise = 0.0;
    EXPECT_EQ(predictive_covariance(m, pr), Eigen::MatrixXd::Zero(m.length(), m.length()));
}

TEST(SvdFit, WarmStartKeepsShapeAndIsDeterministic) {
    const DesignSet d = example1_data(8, 9);
    const SvdGpModel a = fit_default(d, 4);
    const SvdGpModel b = fit_default(d, 4);
    EXPECT_EQ(a.B, b.B);
    EXPECT_EQ(a.sigma2_hat, b.sigma2_hat);
    SvdFitOptions o;
    o.seed = 5;
    const SvdGpModel w = fit_svd_gp(d, o, &a);
    EXPECT_EQ(w.p(), a.p());
    for (int i = 0; i < w.p(); ++i) EXPECT_GE(w.gps[i].objective, a.gps[i].objective - 1e-9);
}

TEST(DesignSet, Validation) {
    DesignSet d;
    d.X = Eigen::MatrixXd::Zero(3, 1);
    d.Y = Eigen::MatrixXd::Zero(5, 2);
    EXPECT_THROW(d.validate(), std::invalid_argument);
}
