#include "trifree/specfun.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include "trifree/kahan.hpp"

namespace trifree::specfun {

namespace {

std::atomic<bool> g_count_trigamma{false};
std::atomic<std::uint64_t> g_trigamma_evals{0};

// Cutoff for the asymptotic expansions.  At x >= 10 the seventh-order tail
// term is already below one ulp of the function value.
constexpr double kAsymptoticCut = 10.0;

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // ln(2*pi)/2

// Bernoulli numbers B2..B14: 1/6, -1/30, 1/42, -1/30, 5/66, -691/2730, 7/6.

// ln Gamma tail: sum_k B_{2k} / (2k(2k-1) x^{2k-1}).
constexpr double kLgamTail[7] = {
    1.0 / 12.0,   -1.0 / 360.0,      1.0 / 1260.0, -1.0 / 1680.0,
    1.0 / 1188.0, -691.0 / 360360.0, 1.0 / 156.0,
};

// digamma tail: sum_k B_{2k} / (2k x^{2k}).
constexpr double kDigamTail[7] = {
    1.0 / 12.0,  -1.0 / 120.0,     1.0 / 252.0, -1.0 / 240.0,
    1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0,
};

// trigamma tail: sum_k B_{2k} / x^{2k+1}.
constexpr double kTrigamTail[7] = {
    1.0 / 6.0,  -1.0 / 30.0,      1.0 / 42.0, -1.0 / 30.0,
    5.0 / 66.0, -691.0 / 2730.0,  7.0 / 6.0,
};

double tail_poly(const double (&c)[7], double r2) {
  double acc = c[6];
  for (int k = 5; k >= 0; --k) acc = c[k] + r2 * acc;
  return acc;
}

void require_positive(double x, const char* name) {
  if (!(x > 0.0)) throw std::domain_error(std::string(name) + ": requires x > 0");
}

}  // namespace

double log_gamma(double x) {
  require_positive(x, "log_gamma");
  // ln Gamma is exactly zero at its two integer roots.
  if (x == 1.0 || x == 2.0) return 0.0;
  Kahan acc;
  // ln Gamma(x) = ln Gamma(x+1) - ln x
  while (x < kAsymptoticCut) {
    acc.add(-std::log(x));
    x += 1.0;
  }
  double r = 1.0 / x;
  double lx = std::log(x);
  acc.add((x - 0.5) * lx);
  acc.add(-x);
  acc.add(kHalfLog2Pi);
  acc.add(r * tail_poly(kLgamTail, r * r));
  return acc.value();
}

double log_beta(double a, double b) {
  require_positive(a, "log_beta");
  require_positive(b, "log_beta");
  return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double digamma(double x) {
  require_positive(x, "digamma");
  Kahan acc;
  // psi(x) = psi(x+1) - 1/x
  while (x < kAsymptoticCut) {
    acc.add(-1.0 / x);
    x += 1.0;
  }
  double r = 1.0 / x;
  double r2 = r * r;
  acc.add(std::log(x));
  acc.add(-0.5 * r);
  acc.add(-r2 * tail_poly(kDigamTail, r2));
  return acc.value();
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  if (g_count_trigamma.load(std::memory_order_relaxed)) {
    g_trigamma_evals.fetch_add(1, std::memory_order_relaxed);
  }
  Kahan acc;
  // psi_1(x) = psi_1(x+1) + 1/x^2
  while (x < kAsymptoticCut) {
    acc.add(1.0 / (x * x));
    x += 1.0;
  }
  double r = 1.0 / x;
  double r2 = r * r;
  // 1/x + 1/(2x^2) + B2/x^3 + B4/x^5 + ...
  acc.add(r * (1.0 + r * (0.5 + r * tail_poly(kTrigamTail, r2))));
  return acc.value();
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile: p must lie in (0,1)");
  }
  // Acklam's rational minimax starter.
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double lo = 0.02425;
  double x;
  if (p < lo) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - lo) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step against the exact cdf via erfc.
  constexpr double kSqrt2Pi = 2.5066282746310005024;
  double err = 0.5 * std::erfc(-x / 1.4142135623730950488) - p;
  double u = err * kSqrt2Pi * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

void trigamma_counter_enable(bool on) {
  g_count_trigamma.store(on, std::memory_order_relaxed);
}

void trigamma_counter_reset() {
  g_trigamma_evals.store(0, std::memory_order_relaxed);
}

std::uint64_t trigamma_evals() {
  return g_trigamma_evals.load(std::memory_order_relaxed);
}

}  // namespace trifree::specfun
