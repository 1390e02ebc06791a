#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "dyncal/rng.hpp"

namespace dyncal {

/// N x q matrix of points in the unit cube, one point per row.
using Design = Eigen::MatrixXd;

/// Native-domain box. Everything downstream of the simulator handle works on [0,1]^q.
struct UnitBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    UnitBox() = default;
    UnitBox(Eigen::VectorXd lo, Eigen::VectorXd hi);

    static UnitBox unit(int q);

    [[nodiscard]] int dim() const { return static_cast<int>(lower.size()); }
    [[nodiscard]] Eigen::VectorXd to_native(const Eigen::Ref<const Eigen::VectorXd>& u) const;
    [[nodiscard]] Eigen::VectorXd to_unit(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Plain random Latin hypercube: one point per stratum [k/n,(k+1)/n) in every
/// column, uniformly jittered inside the stratum.
Design random_lhd(int n, int q, Rng& rng);

/// Smallest pairwise Euclidean distance between rows (+inf for n < 2).
double min_pairwise_distance(const Design& X);

struct MaximinOptions {
    int restarts = 10;
    int swaps = 1000;  // swap attempts per restart
};

/// Best-of-`restarts` maximin LHD. Restart r starts from
/// random_lhd(n, q, make_stream(seed, "lhd", r)) and is refined by pairwise
/// coordinate swaps that are accepted only if they do not lower the minimum
/// distance (ties broken by the inverse-square distance sum).
Design maximin_lhd(int n, int q, std::uint64_t seed, const MaximinOptions& opts = {});

/// m x q i.i.d. uniform [0,1) draws.
Design random_candidates(int m, int q, std::uint64_t seed);

}  // namespace dyncal
