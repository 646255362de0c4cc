#include "trifree/expect.hpp"

#include <cmath>
#include <stdexcept>

#include "trifree/errors.hpp"
#include "trifree/kahan.hpp"
#include "trifree/specfun.hpp"

namespace trifree::expect {

namespace {

using counts::CountModel;
using counts::TailTable;
using specfun::digamma;
using specfun::trigamma;

void check_nu(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw std::invalid_argument("expect: nu must be positive and finite");
  }
}

void check_m(long m) {
  if (m < 0) throw std::invalid_argument("expect: M must be non-negative");
}

// sum_{y=0}^{M} P(Y>y)/(nu+y)^2, ascending with compensation.  Zero terms
// past a finite support leave the accumulator state untouched, so the
// result is identical for any M at or beyond the support end.
double gap_sq(const TailTable& t, double nu) {
  Kahan acc;
  for (long y = 0; y <= t.truncation(); ++y) {
    double d = nu + double(y);
    acc.add(t.survival(y) / (d * d));
  }
  return acc.value();
}

double raw_bound(const TailTable& t, double nu) {
  long m = t.truncation();
  return t.survival(m + 1) / (nu + double(m));
}

}  // namespace

const char* method_name(Method method) {
  switch (method) {
    case Method::trigamma_free: return "trigamma-free";
    case Method::calibrated: return "calibrated";
    case Method::gfwl: return "gfwl";
    case Method::monte_carlo: return "monte-carlo";
    case Method::exact_finite: return "exact-finite";
  }
  throw std::logic_error("method_name: unknown tag");
}

double series_gap_sq(double nu, const TailTable& table) {
  check_nu(nu);
  return gap_sq(table, nu);
}

double series_gap(double nu, const TailTable& table) {
  check_nu(nu);
  Kahan acc;
  for (long y = 0; y <= table.truncation(); ++y) {
    acc.add(table.survival(y) / (nu + double(y)));
  }
  return acc.value();
}

ExpectationResult psi1_trigamma_free(double nu, const CountModel& model,
                                     long m) {
  check_nu(nu);
  check_m(m);
  TailTable t(model, m);
  return {trigamma(nu) - gap_sq(t, nu), Method::trigamma_free, m,
          raw_bound(t, nu), 1};
}

ExpectationResult psi1_calibrated(double nu, const CountModel& model, long m) {
  check_nu(nu);
  check_m(m);
  TailTable t(model, m);
  double rho = calibration_rho(nu, m);
  double raw = raw_bound(t, nu);
  double value = trigamma(nu) - gap_sq(t, nu) - rho * raw;
  return {value, Method::calibrated, m,
          calibration_worst_factor(rho, nu, m) * raw, 1};
}

ExpectationResult psi1_gfwl(double nu, const CountModel& model, long m) {
  check_nu(nu);
  check_m(m);
  TailTable t(model, m);
  Kahan acc;
  for (long k = 0; k <= m; ++k) {
    acc.add(trigamma(nu + double(k)) * t.pmf(k));
  }
  double half_tail = 0.5 * trigamma(nu + double(m) + 1.0) * t.survival(m);
  return {acc.value() + half_tail, Method::gfwl, m, half_tail, m + 2};
}

ExpectationResult psi1_monte_carlo(double nu, const CountModel& model, long m,
                                   rng::Stream& stream) {
  check_nu(nu);
  if (m < 1) {
    throw std::invalid_argument("psi1_monte_carlo: M must be positive");
  }
  counts::validate(model);
  Kahan sum;
  for (long i = 0; i < m; ++i) {
    sum.add(trigamma(nu + double(counts::sample_one(model, stream))));
  }
  return {sum.value() / double(m), Method::monte_carlo, m, std::nullopt, m};
}

ExpectationResult psi1_exact_finite(double nu, const CountModel& model) {
  check_nu(nu);
  auto n = counts::support_upper_bound(model);
  if (!n) {
    throw std::invalid_argument(
        "psi1_exact_finite: model must have finite support");
  }
  long m = *n > 0 ? *n - 1 : 0;
  TailTable t(model, m);
  return {trigamma(nu) - gap_sq(t, nu), Method::exact_finite, m, 0.0, 1};
}

ExpectationResult psi_digamma_expect(double nu, const CountModel& model, long m,
                                     long m_ref) {
  check_nu(nu);
  check_m(m);
  if (m_ref <= m) {
    throw std::invalid_argument("psi_digamma_expect: need m_ref > M");
  }
  TailTable t(model, m);
  Kahan acc;
  for (long y = 0; y <= m; ++y) {
    acc.add(t.survival(y) / (nu + double(y)));
  }
  double bound = t.survival(m + 1) *
                 std::log((nu + double(m_ref)) / (nu + double(m)));
  return {digamma(nu) + acc.value(), Method::trigamma_free, m, bound, 0};
}

double theorem2_bound(double nu, const CountModel& model, long m) {
  check_nu(nu);
  check_m(m);
  return counts::survival(model, m + 1) / (nu + double(m));
}

double calibration_rho(double nu, long m) {
  check_nu(nu);
  check_m(m);
  double d = nu + double(m);
  return 0.5 + d / (2.0 * (d + 1.0) * (d + 2.0));
}

double calibration_worst_factor(double rho, double nu, long m) {
  check_nu(nu);
  check_m(m);
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("calibration_worst_factor: rho outside [0,1]");
  }
  double d = nu + double(m);
  double c = d / ((d + 1.0) * (d + 2.0));
  return std::max(std::abs(1.0 - rho), std::abs(rho - c));
}

double tail_error(double nu, const CountModel& model, long m, long m_ref) {
  check_nu(nu);
  check_m(m);
  if (m_ref <= m) throw std::invalid_argument("tail_error: need m_ref > M");
  return counts::survival_weighted_tail(model, m + 1, m_ref, [nu](long y) {
    double d = nu + double(y);
    return 1.0 / (d * d);
  });
}

double gfwl_tail_error(double nu, const CountModel& model, long m, long m_ref) {
  check_nu(nu);
  check_m(m);
  if (m_ref <= m) {
    throw std::invalid_argument("gfwl_tail_error: need m_ref > M");
  }
  double half_tail =
      0.5 * trigamma(nu + double(m) + 1.0) * counts::survival(model, m);
  double dropped = counts::pmf_weighted_tail(
      model, m + 1, m_ref, [nu](long k) { return trigamma(nu + double(k)); });
  return half_tail - dropped;
}

long choose_m(double nu, const CountModel& model,
              const TruncationPolicy& policy) {
  check_nu(nu);
  counts::validate(model);
  const long cap = counts::kMaxTableEntries - 2;
  if (policy.is_default()) {
    if (auto mu = counts::mean(model)) {
      double m = std::ceil(2.0 * *mu) + 1.0;
      if (m > double(cap)) {
        throw ResourceError("choose_m: model mean too large for the table cap");
      }
      return long(m);
    }
    return choose_m(nu, model, TruncationPolicy::tolerance(1e-12));
  }
  double tol = policy.tol();
  if (!(tol >= 0.0)) {
    throw std::invalid_argument("choose_m: tolerance must be non-negative");
  }
  if (theorem2_bound(nu, model, 0) <= tol) return 0;
  long lo = 0;
  long hi = 1;
  while (theorem2_bound(nu, model, hi) > tol) {
    lo = hi;
    if (hi > cap / 2) {
      throw ResourceError("choose_m: tolerance unreachable within the table cap");
    }
    hi *= 2;
  }
  while (hi - lo > 1) {
    long mid = lo + (hi - lo) / 2;
    (theorem2_bound(nu, model, mid) <= tol ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace trifree::expect
