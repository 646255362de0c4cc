#include "trifree/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace trifree::rng {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

constexpr double kTwoPi = 6.283185307179586476925;

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    std::uint64_t p0 = std::uint64_t(kMul0) * c[0];
    std::uint64_t p1 = std::uint64_t(kMul1) * c[2];
    std::array<std::uint32_t, 4> n;
    n[0] = std::uint32_t(p1 >> 32) ^ c[1] ^ k[0];
    n[1] = std::uint32_t(p1);
    n[2] = std::uint32_t(p0 >> 32) ^ c[3] ^ k[1];
    n[3] = std::uint32_t(p0);
    c = n;
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

Stream::Stream(std::uint64_t seed, std::uint64_t stream_index)
    : seed_(seed),
      stream_(stream_index),
      key_{std::uint32_t(seed), std::uint32_t(seed >> 32)} {}

void Stream::refill() {
  std::array<std::uint32_t, 4> ctr = {
      std::uint32_t(block_), std::uint32_t(block_ >> 32),
      std::uint32_t(stream_), std::uint32_t(stream_ >> 32)};
  auto out = philox4x32(ctr, key_);
  buf_[0] = std::uint64_t(out[0]) | (std::uint64_t(out[1]) << 32);
  buf_[1] = std::uint64_t(out[2]) | (std::uint64_t(out[3]) << 32);
  avail_ = 2;
  ++block_;
}

std::uint64_t Stream::next_u64() {
  if (avail_ == 0) refill();
  return buf_[--avail_];
}

double Stream::next_double() {
  // 53-bit mantissa, offset by half a step: lands strictly inside (0,1).
  return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::next_normal() {
  double u1 = next_double();
  double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double Stream::next_gamma(double shape, double scale) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw std::domain_error("next_gamma: shape and scale must be positive");
  }
  // Marsaglia-Tsang squeeze method; shape < 1 boosted via Gamma(shape+1).
  double boost = 1.0;
  if (shape < 1.0) {
    boost = std::pow(next_double(), 1.0 / shape);
    shape += 1.0;
  }
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = next_double();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale * boost;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return d * v * scale * boost;
    }
  }
}

double Stream::next_beta(double a, double b) {
  double x = next_gamma(a, 1.0);
  double y = next_gamma(b, 1.0);
  return x / (x + y);
}

long Stream::next_poisson(double mean) {
  if (!(mean >= 0.0)) throw std::domain_error("next_poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    // Product-of-uniforms inversion.
    double limit = std::exp(-mean);
    double prod = next_double();
    long k = 0;
    while (prod > limit) {
      prod *= next_double();
      ++k;
    }
    return k;
  }
  // Hormann's PTRS transformed rejection, valid for mean >= 10.
  double b = 0.931 + 2.53 * std::sqrt(mean);
  double a = -0.059 + 0.02483 * b;
  double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  double v_r = 0.9277 - 3.6224 / (b - 2.0);
  double log_mean = std::log(mean);
  for (;;) {
    double u = next_double() - 0.5;
    double v = next_double();
    double us = 0.5 - std::fabs(u);
    double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return long(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    double rhs = kf * log_mean - mean - std::lgamma(kf + 1.0);
    if (lhs <= rhs) return long(kf);
  }
}

}  // namespace trifree::rng
