#pragma once

#include <cstdint>

// Gamma-family special functions on the positive real axis.
//
// All four functions share one evaluation scheme: the argument is shifted
// upward by the usual recurrences until it reaches the asymptotic region,
// where a truncated Bernoulli-coefficient expansion is accurate to machine
// precision.  Arguments <= 0 (and NaN) throw std::domain_error.
//
// trigamma() feeds an optional global evaluation counter so that callers
// can audit exactly how many trigamma evaluations an algorithm performed.
// The counter is atomic; enabling it costs one relaxed load per call.

namespace trifree::specfun {

double log_gamma(double x);
double log_beta(double a, double b);
double digamma(double x);
double trigamma(double x);

// Inverse standard normal cdf on (0,1); rational approximation refined by
// one Halley step against erfc, good to ~1e-15 everywhere.
double normal_quantile(double p);

void trigamma_counter_enable(bool on);
void trigamma_counter_reset();
std::uint64_t trigamma_evals();

}  // namespace trifree::specfun
