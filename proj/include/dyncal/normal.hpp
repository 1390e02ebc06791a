#pragma once

#include <cmath>
#include <numbers>

namespace dyncal {

inline double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// 1 - Phi(x) without cancellation.
inline double norm_sf(double x) {
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

/// exp(x^2) erfc(x), finite for large positive x.
double erfcx(double x);

/// exp(q^2/2) (1 - Phi(q)).
inline double scaled_norm_sf(double q) {
    return 0.5 * erfcx(q / std::numbers::sqrt2);
}

}  // namespace dyncal
