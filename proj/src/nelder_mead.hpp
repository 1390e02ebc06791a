#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace dyncal::detail {

struct SimplexResult {
    Eigen::VectorXd x;
    double value;
};

/// Nelder-Mead minimization inside a box; trial points are clamped to [lo, hi].
inline SimplexResult nelder_mead_box(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const Eigen::VectorXd& x0, double step, const Eigen::VectorXd& lo,
                                     const Eigen::VectorXd& hi, int max_evals, double ftol = 1e-9) {
    const Eigen::Index n = x0.size();
    auto clamp = [&](Eigen::VectorXd x) {
        return Eigen::VectorXd(x.cwiseMax(lo).cwiseMin(hi));
    };
    std::vector<Eigen::VectorXd> pts;
    std::vector<double> vals;
    pts.push_back(clamp(x0));
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd p = pts[0];
        // step inward if the start sits on the upper face
        p[i] += (p[i] + step <= hi[i]) ? step : -step;
        pts.push_back(clamp(p));
    }
    int evals = 0;
    for (auto& p : pts) {
        vals.push_back(f(p));
        ++evals;
    }
    std::vector<int> order(n + 1);
    while (evals < max_evals) {
        for (int i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
        const int best = order[0], worst = order[n], second = order[n - 1];
        if (std::abs(vals[worst] - vals[best]) <= ftol * (1.0 + std::abs(vals[best]))) break;

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) centroid += pts[order[i]];
        centroid /= static_cast<double>(n);

        Eigen::VectorXd xr = clamp(centroid + (centroid - pts[worst]));
        double fr = f(xr);
        ++evals;
        if (fr < vals[best]) {
            Eigen::VectorXd xe = clamp(centroid + 2.0 * (centroid - pts[worst]));
            double fe = f(xe);
            ++evals;
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
        } else if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
        } else {
            const bool outside = fr < vals[worst];
            Eigen::VectorXd xc = outside ? Eigen::VectorXd(clamp(centroid + 0.5 * (xr - centroid)))
                                         : Eigen::VectorXd(clamp(centroid + 0.5 * (pts[worst] - centroid)));
            double fc = f(xc);
            ++evals;
            if (fc < (outside ? fr : vals[worst])) {
                pts[worst] = xc;
                vals[worst] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    int k = order[i];
                    pts[k] = clamp(pts[best] + 0.5 * (pts[k] - pts[best]));
                    vals[k] = f(pts[k]);
                    ++evals;
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i <= n; ++i)
        if (vals[i] < vals[best]) best = i;
    return {pts[best], vals[best]};
}

}  // namespace dyncal::detail
