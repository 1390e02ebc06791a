#include "dyncal/design.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dyncal {

UnitBox::UnitBox(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size() || lower.size() == 0)
        throw std::invalid_argument("UnitBox: bounds must be non-empty and of equal length");
    for (Eigen::Index j = 0; j < lower.size(); ++j)
        if (!(lower[j] < upper[j])) throw std::invalid_argument("UnitBox: lower must be < upper");
}

UnitBox UnitBox::unit(int q) {
    return UnitBox(Eigen::VectorXd::Zero(q), Eigen::VectorXd::Ones(q));
}

Eigen::VectorXd UnitBox::to_native(const Eigen::Ref<const Eigen::VectorXd>& u) const {
    return lower.array() + u.array() * (upper - lower).array();
}

Eigen::VectorXd UnitBox::to_unit(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return (x - lower).array() / (upper - lower).array();
}

Design random_lhd(int n, int q, Rng& rng) {
    if (n < 1 || q < 1) throw std::invalid_argument("random_lhd: n and q must be positive");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Design X(n, q);
    std::vector<int> perm(n);
    for (int j = 0; j < q; ++j) {
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (int i = 0; i < n; ++i) {
            double v = (perm[i] + unif(rng)) / n;
            // keep the point inside its half-open stratum
            X(i, j) = std::min(v, std::nextafter((perm[i] + 1.0) / n, 0.0));
        }
    }
    return X;
}

namespace {

struct Spread {
    double min_d2;
    double inv_sum;  // sum of 1/d^2 over pairs

    bool better_or_equal_than(const Spread& o) const {
        if (min_d2 != o.min_d2) return min_d2 > o.min_d2;
        return inv_sum <= o.inv_sum;
    }
};

Spread spread(const Design& X) {
    Spread s{std::numeric_limits<double>::infinity(), 0.0};
    for (Eigen::Index a = 0; a < X.rows(); ++a)
        for (Eigen::Index b = a + 1; b < X.rows(); ++b) {
            double d2 = (X.row(a) - X.row(b)).squaredNorm();
            s.min_d2 = std::min(s.min_d2, d2);
            s.inv_sum += d2 > 0 ? 1.0 / d2 : std::numeric_limits<double>::infinity();
        }
    return s;
}

}  // namespace

double min_pairwise_distance(const Design& X) {
    return std::sqrt(spread(X).min_d2);
}

Design maximin_lhd(int n, int q, std::uint64_t seed, const MaximinOptions& opts) {
    if (opts.restarts < 1) throw std::invalid_argument("maximin_lhd: restarts must be positive");
    Design best;
    Spread best_spread{-1.0, 0.0};
    for (int r = 0; r < opts.restarts; ++r) {
        Rng rng = make_stream(seed, "lhd", static_cast<std::uint64_t>(r));
        Design X = random_lhd(n, q, rng);
        Spread cur = spread(X);
        if (n >= 3) {
            std::uniform_int_distribution<int> row(0, n - 1), col(0, q - 1);
            for (int k = 0; k < opts.swaps; ++k) {
                int a = row(rng), b = row(rng), j = col(rng);
                if (a == b) continue;
                std::swap(X(a, j), X(b, j));
                Spread cand = spread(X);
                if (cand.better_or_equal_than(cur) && (cand.min_d2 > cur.min_d2 || cand.inv_sum < cur.inv_sum))
                    cur = cand;
                else
                    std::swap(X(a, j), X(b, j));
            }
        }
        if (r == 0 || cur.min_d2 > best_spread.min_d2 ||
            (cur.min_d2 == best_spread.min_d2 && cur.inv_sum < best_spread.inv_sum)) {
            best = X;
            best_spread = cur;
        }
    }
    return best;
}

Design random_candidates(int m, int q, std::uint64_t seed) {
    if (m < 1 || q < 1) throw std::invalid_argument("random_candidates: m and q must be positive");
    Rng rng(mix64(seed));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Design X(m, q);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < q; ++j) X(i, j) = unif(rng);
    return X;
}

}  // namespace dyncal
