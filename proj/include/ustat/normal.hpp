#pragma once

namespace ustat {

/// Standard normal density, CDF and survival function. The survival function
/// goes through erfc so it keeps full relative accuracy far into the tail.
double norm_pdf(double z);
double norm_cdf(double z);
double norm_sf(double z);

long double norm_cdf_ld(long double z);
long double norm_sf_ld(long double z);

/// Scaled complementary error function exp(x^2) * erfc(x), evaluated in long
/// double so that products of the form exp(w^2/2) * Phi(w) stay representable
/// for |w| up to ~100. Relative error is a few ulp of long double.
long double erfcx_ld(long double x);

/// Quantile function, accurate to ~1e-15 (rational estimate + Halley step).
double inverse_normal_cdf(double p);

}  // namespace ustat
