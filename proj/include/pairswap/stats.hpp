#pragma once

namespace pairswap {

/// Standard Gaussian CDF.
double normal_cdf(double x);

/// Standard Gaussian survival function 1 - Phi(x).
double normal_sf(double x);

/// Inverse survival function: the t with 1 - Phi(t) = alpha, alpha in (0,1).
double normal_isf(double alpha);

}  // namespace pairswap
