#pragma once

namespace gai {

/// Standard Gaussian density.
double normal_pdf(double x) noexcept;

/// Standard Gaussian distribution function, via std::erfc (relative error near 1 ulp,
/// absolute error far below 1e-15 on the whole line).
double normal_cdf(double x) noexcept;

/// Upper tail 1 - Phi(x), accurate for large x.
double normal_sf(double x) noexcept;

/// Inverse of normal_cdf. Acklam's rational approximation followed by one Halley
/// refinement step against normal_cdf. Returns -inf at 0 and +inf at 1.
double normal_quantile(double p) noexcept;

/// Inverse of normal_sf, accurate for tiny q: returns z with 1 - Phi(z) = q.
double normal_upper_quantile(double q) noexcept;

}  // namespace gai
