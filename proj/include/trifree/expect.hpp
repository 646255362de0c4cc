#pragma once

#include <optional>

#include "trifree/counts.hpp"
#include "trifree/rng.hpp"

// Estimators of E[psi1(nu + Y)] and E[psi(nu + Y)] for a count variable Y,
// with truncation bounds.  The identities behind the series forms:
//
//   E[psi(nu+Y)]  = psi(nu)  + sum_{y>=0} P(Y>y) / (nu+y)
//   E[psi1(nu+Y)] = psi1(nu) - sum_{y>=0} P(Y>y) / (nu+y)^2
//
// so the trigamma expectation costs a single trigamma evaluation no matter
// where the series is cut.  `nu` is the offset inside the polygamma, not a
// parameter of the model; the two may differ.
//
// Every series below is accumulated in ascending y with compensation, and
// the loop always runs through y = M even when terms have gone to zero, so
// evaluation and flop counts depend on M alone.

namespace trifree::expect {

enum class Method { trigamma_free, calibrated, gfwl, monte_carlo, exact_finite };

// Stable identifier used in CSV/JSON output and CLI flags.
const char* method_name(Method method);

struct ExpectationResult {
  double value;
  Method method;
  long m;  // truncation actually used
  // Deterministic bound on |value - truth|; absent for monte_carlo.
  std::optional<double> bound;
  long trigamma_evals;
};

// Truncation-point selection rule: either the mean rule (first integer
// strictly above twice the model mean) or the smallest M whose series
// bound is at most a given tolerance.
class TruncationPolicy {
 public:
  static TruncationPolicy default_rule() { return TruncationPolicy{true, 0.0}; }
  static TruncationPolicy tolerance(double t) { return TruncationPolicy{false, t}; }

  bool is_default() const { return default_; }
  double tol() const { return tol_; }

 private:
  TruncationPolicy(bool d, double t) : default_(d), tol_(t) {}
  bool default_;
  double tol_;
};

// Reference depth used when an error study needs a stand-in for the exact
// series value.
inline constexpr long kDefaultMRef = 1000000;

// Series estimator psi1(nu) - sum_{y=0}^{M} P(Y>y)/(nu+y)^2.  Truncation
// error lies in [0, bound]: the estimate never falls below the truth.
// One trigamma evaluation.
ExpectationResult psi1_trigamma_free(double nu, const counts::CountModel& model,
                                     long m);

// Series estimator shifted into the error bracket by rho* times the raw
// bound, cutting the worst case to (1 - rho*) of it.  One trigamma
// evaluation; the reported bound is the reduced worst case.
ExpectationResult psi1_calibrated(double nu, const counts::CountModel& model,
                                  long m);

// Pmf-weighted trigamma sum with a half-weighted continuation term,
// sum_{k=0}^{M} psi1(nu+k) P(Y=k) + psi1(nu+M+1) P(Y>M) / 2.
// M+2 trigamma evaluations; the continuation term bounds the error.
ExpectationResult psi1_gfwl(double nu, const counts::CountModel& model, long m);

// Sample mean of psi1(nu + Y_i) over m simulated draws.  No deterministic
// bound; m trigamma evaluations.
ExpectationResult psi1_monte_carlo(double nu, const counts::CountModel& model,
                                   long m, rng::Stream& stream);

// Exact value for a finite-support model: the series runs out of mass at
// the support end, so truncating at n-1 loses nothing.  Bit-for-bit equal
// to psi1_trigamma_free at M = n-1; bound exactly 0.
ExpectationResult psi1_exact_finite(double nu, const counts::CountModel& model);

// Series estimator psi(nu) + sum_{y=0}^{M} P(Y>y)/(nu+y) of E[psi(nu+Y)].
// The truncation error is non-positive (terms dropped are positive).  The
// reported bound P(Y>M+1) ln((nu+m_ref)/(nu+M)) integrates the leading
// tail envelope out to m_ref only; it is indicative, not a rigorous
// envelope of the full tail.  Zero trigamma evaluations.
ExpectationResult psi_digamma_expect(double nu, const counts::CountModel& model,
                                     long m, long m_ref = kDefaultMRef);

// P(Y > M+1)/(nu+M): the series truncation bound, standalone.
double theorem2_bound(double nu, const counts::CountModel& model, long m);

// rho* = 1/2 + (nu+M) / (2 (nu+M+1) (nu+M+2)): the calibration weight that
// minimizes the worst-case factor below.
double calibration_rho(double nu, long m);

// Worst-case factor U(rho) = max{|1-rho|, |rho - c|} with
// c = (nu+M)/((nu+M+1)(nu+M+2)): |calibrated error| <= U(rho) * bound.
double calibration_worst_factor(double rho, double nu, long m);

// Truncation error of the trigamma-free series at M, measured against the
// series extended through m_ref: sum_{y=M+1}^{m_ref} P(Y>y)/(nu+y)^2,
// accumulated term-by-term in its own floating scale.  Non-negative.
double tail_error(double nu, const counts::CountModel& model, long m,
                  long m_ref = kDefaultMRef);

// Signed truncation error of the gfwl estimator at M against m_ref:
// psi1(nu+M+1) P(Y>M) / 2  -  sum_{k=M+1}^{m_ref} psi1(nu+k) P(Y=k),
// again computed entirely from tail quantities.
double gfwl_tail_error(double nu, const counts::CountModel& model, long m,
                       long m_ref = kDefaultMRef);

// Truncation point for a policy: default rule ceil(2 E[Y]) + 1 (falling
// back to tolerance(1e-12) when the mean is infinite); tolerance rule the
// smallest M with theorem2_bound <= t, found by doubling then bisection on
// the monotone bound.  Throws ResourceError when the target exceeds the
// table cap.
long choose_m(double nu, const counts::CountModel& model,
              const TruncationPolicy& policy);

// Series partial sums over a prebuilt table, for callers that reuse one
// table across several offsets (information matrices do):
//   series_gap_sq = sum_{y=0}^{M} P(Y>y)/(nu+y)^2   [psi1(nu) minus this
//                   is the trigamma-free value]
//   series_gap    = sum_{y=0}^{M} P(Y>y)/(nu+y)
double series_gap_sq(double nu, const counts::TailTable& table);
double series_gap(double nu, const counts::TailTable& table);

}  // namespace trifree::expect
