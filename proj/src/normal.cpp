#include "dyncal/normal.hpp"

#include <limits>

namespace dyncal {

double erfcx(double x) {
    if (x < 0.0) {
        // erfcx(-x) = 2 exp(x^2) - erfcx(x)
        const double e = std::exp(x * x);
        if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
        return 2.0 * e - erfcx(-x);
    }
    if (x < 25.0) return std::exp(x * x) * std::erfc(x);
    // asymptotic series 1/(x sqrt(pi)) * sum (-1)^k (2k-1)!! / (2x^2)^k
    const double inv2x2 = 1.0 / (2.0 * x * x);
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 8; ++k) {
        term *= -(2.0 * k - 1.0) * inv2x2;
        sum += term;
    }
    return sum / (x * std::sqrt(std::numbers::pi));
}

}  // namespace dyncal
