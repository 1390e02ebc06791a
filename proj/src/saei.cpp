#include "dyncal/saei.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dyncal/errors.hpp"
#include "dyncal/normal.hpp"
#include "dyncal/rng.hpp"

namespace dyncal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_length(const SvdGpModel& model, const Eigen::VectorXd& xi) {
    if (xi.size() != model.length()) throw std::invalid_argument("target length does not match model series length");
}

}  // namespace

bool CgfContext::degenerate() const {
    return s_max == kInf;
}

double expected_discrepancy(const SvdGpModel& model, const Prediction& pred, const Eigen::VectorXd& xi) {
    require_length(model, xi);
    const Eigen::VectorXd proj = model.U_star.transpose() * xi;
    const double orth = std::max(0.0, xi.squaredNorm() - proj.squaredNorm());
    // c_xi = D*^-2 B^T xi = D*^-1 U*^T xi
    const Eigen::VectorXd c_xi = proj.cwiseQuotient(model.d);
    const Eigen::VectorXd d2 = model.d.array().square();
    const double fit = (d2.array() * ((pred.c_hat - c_xi).array().square() + pred.s2.array())).sum();
    return orth + fit + pred.noise * model.length();
}

CgfContext build_cgf_context(const SvdGpModel& model, const Prediction& pred, const Eigen::VectorXd& xi) {
    require_length(model, xi);
    CgfContext ctx;
    ctx.L = model.length();
    ctx.p = model.p();
    ctx.mu = xi - pred.mean;
    ctx.mu_b = model.B.transpose() * ctx.mu;
    ctx.mu_sq = ctx.mu.squaredNorm();
    ctx.sigma2_hat = pred.noise;
    ctx.coef_var = pred.s2;
    ctx.d2s2 = model.d.array().square() * pred.s2.array();
    ctx.sig_tilde2 = ctx.d2s2.array() + pred.noise;
    double vmax = ctx.sigma2_hat;
    if (ctx.p > 0) vmax = std::max(vmax, ctx.sig_tilde2.maxCoeff());
    ctx.s_max = vmax > 0.0 ? 1.0 / (2.0 * vmax) : kInf;
    return ctx;
}

double cgf(const CgfContext& ctx, double s) {
    if (!(s < ctx.s_max)) throw DomainError("cgf: s outside the admissible domain");
    const double a = ctx.sigma2_hat;
    const double ea = 1.0 - 2.0 * s * a;
    double k = -0.5 * (ctx.L - ctx.p) * std::log(ea) + s * ctx.mu_sq / ea;
    for (int i = 0; i < ctx.p; ++i) {
        const double et = 1.0 - 2.0 * s * ctx.sig_tilde2[i];
        k += -0.5 * std::log(et) + 2.0 * s * s * ctx.coef_var[i] * ctx.mu_b[i] * ctx.mu_b[i] / (et * ea);
    }
    return k;
}

CgfDerivatives cgf_derivatives(const CgfContext& ctx, double s) {
    if (!(s < ctx.s_max)) throw DomainError("cgf_derivatives: s outside the admissible domain");
    const double a = ctx.sigma2_hat;
    const double ea = 1.0 - 2.0 * s * a;
    const double ea2 = ea * ea, ea3 = ea2 * ea, ea4 = ea3 * ea;
    const double rest = static_cast<double>(ctx.L - ctx.p);
    CgfDerivatives r;
    r.k1 = ctx.mu_sq / ea2 + rest * a / ea;
    r.k2 = 4.0 * a * ctx.mu_sq / ea3 + rest * 2.0 * a * a / ea2;
    r.k3 = 24.0 * a * a * ctx.mu_sq / ea4 + rest * 8.0 * a * a * a / ea3;
    for (int i = 0; i < ctx.p; ++i) {
        const double t = ctx.sig_tilde2[i];
        const double et = 1.0 - 2.0 * s * t;
        const double et2 = et * et, et3 = et2 * et, et4 = et3 * et;
        const double w = ctx.coef_var[i] * ctx.mu_b[i] * ctx.mu_b[i];
        const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
        r.k1 += t / et + 4.0 * w * s * (1.0 - s * t - s * a) / (et2 * ea2);
        r.k2 += 2.0 * t * t / et2 +
                4.0 * w * (1.0 - 12.0 * s2 * t * a + 8.0 * s3 * t * t * a + 8.0 * s3 * t * a * a) / (et3 * ea3);
        r.k3 += 8.0 * t * t * t / et3 +
                24.0 * w *
                    (t + a - 8.0 * s * t * a + 32.0 * s3 * t * t * a * a - 16.0 * s4 * t * t * t * a * a -
                     16.0 * s4 * t * t * a * a * a) /
                    (et4 * ea4);
    }
    return r;
}

SaddleSolution solve_saddlepoint(const CgfContext& ctx, double delta_min, double tol) {
    if (!(delta_min > 0.0)) throw std::invalid_argument("solve_saddlepoint: delta_min must be positive");
    if (ctx.degenerate()) throw NoBracket("solve_saddlepoint: predictive law is a point mass");

    auto f = [&](double s) { return cgf_derivatives(ctx, s).k1 - delta_min; };
    const double ftol = tol * std::max(1.0, delta_min);

    double mean_var = ctx.p > 0 ? ctx.sig_tilde2.mean() : ctx.sigma2_hat;
    double lo = -1.0 / (2.0 * mean_var);
    double hi = 0.999 * ctx.s_max;
    double flo = f(lo), fhi = f(hi);
    for (int k = 0; flo > 0.0 && k < 400; ++k) {
        lo *= 2.0;
        flo = f(lo);
    }
    for (int k = 0; fhi < 0.0 && k < 60; ++k) {
        hi = ctx.s_max - 0.1 * (ctx.s_max - hi);
        fhi = f(hi);
    }
    if (flo > 0.0 || fhi < 0.0 || !std::isfinite(flo) || !std::isfinite(fhi))
        throw NoBracket("solve_saddlepoint: kappa'(s) - delta_min does not change sign");

    double s = (lo < 0.0 && 0.0 < hi) ? 0.0 : 0.5 * (lo + hi);
    double best_s = s, best_abs = kInf;
    for (int it = 0; it < 300; ++it) {
        const CgfDerivatives d = cgf_derivatives(ctx, s);
        const double fs = d.k1 - delta_min;
        if (std::abs(fs) < best_abs) {
            best_abs = std::abs(fs);
            best_s = s;
        }
        if (std::abs(fs) <= ftol) break;
        if (fs < 0.0)
            lo = s;
        else
            hi = s;
        double next = s - fs / d.k2;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
        if (next == s || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)))
            break;
        s = next;
    }

    SaddleSolution sol;
    sol.s0 = best_s;
    const CgfDerivatives d = cgf_derivatives(ctx, sol.s0);
    sol.k1 = d.k1;
    sol.k2 = d.k2;
    sol.k3 = d.k3;
    sol.kappa0 = cgf(ctx, sol.s0);
    const double w2 = std::max(0.0, 2.0 * (delta_min * sol.s0 - sol.kappa0));
    sol.W = (sol.s0 > 0.0 ? 1.0 : (sol.s0 < 0.0 ? -1.0 : 0.0)) * std::sqrt(w2);
    sol.Q = sol.s0 * std::sqrt(sol.k2);
    sol.lambda3 = sol.k3 / std::pow(sol.k2, 1.5);
    return sol;
}

double saei_from_context(const CgfContext& ctx, double mu_delta, double delta_min) {
    if (ctx.degenerate()) return std::clamp(delta_min - ctx.mu_sq, 0.0, delta_min);

    const SaddleSolution sol = solve_saddlepoint(ctx, delta_min);
    double eps_s = 1.0 / std::max({ctx.sigma2_hat, 1.0, ctx.p > 0 ? ctx.sig_tilde2.maxCoeff() : 0.0});
    eps_s *= 1e-8;

    double value;
    if (std::abs(sol.s0) < eps_s) {
        value = std::sqrt(cgf_derivatives(ctx, 0.0).k2 / (2.0 * std::numbers::pi));
    } else {
        const double k2 = sol.k2, Q = sol.Q;
        const double sqrt_k2 = std::sqrt(k2);
        const double damp = std::exp(-0.5 * sol.W * sol.W);
        const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
        const double Q2 = Q * Q;
        if (sol.s0 > 0.0) {
            // e^{Q^2/2}(1 - Phi(Q)) and e^{Q^2/2} phi(Q) in overflow-safe form
            const double tail = scaled_norm_sf(Q);
            value = delta_min - mu_delta + damp * (sqrt_k2 * inv_sqrt_2pi - sol.s0 * k2 * tail) +
                    damp * sqrt_k2 * sol.lambda3 / 6.0 *
                        (tail * (Q2 * Q2 + 3.0 * Q2) - inv_sqrt_2pi * (Q2 * Q + 2.0 * Q));
        } else {
            // e^{Q^2/2} Phi(Q) = e^{Q^2/2}(1 - Phi(-Q))
            const double head = scaled_norm_sf(-Q);
            value = damp * (sqrt_k2 * inv_sqrt_2pi + sol.s0 * k2 * head) -
                    damp * sqrt_k2 * sol.lambda3 / 6.0 *
                        (head * (Q2 * Q2 + 3.0 * Q2) + inv_sqrt_2pi * (Q2 * Q + 2.0 * Q));
        }
    }
    if (!std::isfinite(value)) value = 0.0;
    return std::clamp(value, 0.0, delta_min);
}

double saei(const SvdGpModel& model, const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::VectorXd& xi,
            double delta_min) {
    const Prediction pred = predict(model, x);
    const CgfContext ctx = build_cgf_context(model, pred, xi);
    return saei_from_context(ctx, expected_discrepancy(model, pred, xi), delta_min);
}

double exact_ei_rank1(const SvdGpModel& model, const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::VectorXd& xi,
                      double delta_min) {
    if (model.p() != 1) throw std::invalid_argument("exact_ei_rank1: model must have exactly one basis vector");
    require_length(model, xi);
    const Prediction pred = predict(model, x);
    const Eigen::VectorXd b = model.B.col(0);
    const double d2 = model.d[0] * model.d[0];
    const double xtx = xi.squaredNorm();
    const double xtb = xi.dot(b);
    const double c = pred.c_hat[0];

    const double disc = xtb * xtb + d2 * (delta_min - xtx);
    if (!(disc > 0.0)) return 0.0;
    const double root = std::sqrt(disc);
    const double w1 = (xtb - root) / d2;
    const double w2 = (xtb + root) / d2;

    const double sd = std::sqrt(pred.s2[0]);
    const double gain_at_mean = delta_min - xtx + 2.0 * xtb * c - d2 * c * c;
    if (sd == 0.0) return std::max(0.0, gain_at_mean);

    const double l1 = (w1 - c) / sd;
    const double l2 = (w2 - c) / sd;
    // Phi(l2) - Phi(l1) via whichever tail keeps precision
    const double mass = (l1 > 0.0) ? norm_sf(l1) - norm_sf(l2) : norm_cdf(l2) - norm_cdf(l1);
    const double p1 = norm_pdf(l1), p2 = norm_pdf(l2);
    const double value = (gain_at_mean - d2 * pred.s2[0]) * mass + 2.0 * (d2 * c * sd - xtb * sd) * (p2 - p1) +
                         d2 * pred.s2[0] * (l2 * p2 - l1 * p1);
    return std::max(0.0, value);
}

McEstimate mc_ei(const SvdGpModel& model, const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::VectorXd& xi,
                 double delta_min, int n_samples, std::uint64_t seed) {
    if (n_samples < 2) throw std::invalid_argument("mc_ei: need at least two samples");
    require_length(model, xi);
    const Prediction pred = predict(model, x);
    const Eigen::VectorXd coef_sd = pred.s2.cwiseSqrt();
    const double noise_sd = std::sqrt(pred.noise);
    const Eigen::VectorXd base = xi - pred.mean;  // xi - B c_hat
    const int L = model.length(), p = model.p();

    Rng rng = make_stream(seed, "mc-ei");
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(p), r(L);
    double mean = 0.0, m2 = 0.0;
    for (int k = 1; k <= n_samples; ++k) {
        for (int i = 0; i < p; ++i) z[i] = coef_sd[i] * normal(rng);
        r = base;
        r.noalias() -= model.B * z;
        double delta = 0.0;
        for (int t = 0; t < L; ++t) {
            const double e = r[t] - noise_sd * normal(rng);
            delta += e * e;
        }
        const double gain = std::max(0.0, delta_min - delta);
        const double dlt = gain - mean;
        mean += dlt / k;
        m2 += dlt * (gain - mean);
    }
    return {mean, std::sqrt(m2 / (n_samples - 1) / n_samples)};
}

}  // namespace dyncal
