#pragma once

#include <cmath>

namespace cludl {

// Standard normal CDF.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

// Two-sided Gaussian p-value 2(1 - Phi(t)) for a nonnegative statistic t,
// computed via erfc to keep precision in the far tail.
inline double two_sided_normal_pvalue(double t) {
    return std::erfc(t * M_SQRT1_2);
}

} // namespace cludl
