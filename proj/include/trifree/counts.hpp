#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "trifree/rng.hpp"

// Count-model families over the non-negative integers, their zero-inflated
// and hurdle variants, and the truncated tail tables (pmf + survival) that
// feed the series expectations.
//
// Models are immutable value types; construction-time validation lives in
// validate().  Survival values P(Y > y) are kept accurate in relative terms
// deep into the tail, not just near the head of the distribution; see
// counts.cpp for the anchored tail construction.

namespace trifree::counts {

struct NegBinomial {
  double nu;  // size > 0
  double p;   // success probability in (0,1); mean nu(1-p)/p
};

struct BetaNegBinomial {
  double nu;     // size > 0
  double alpha;  // > 0; mean finite iff alpha > 1
  double beta;   // > 0
};

struct Binomial {
  long n;    // trials >= 0
  double p;  // in (0,1)
};

struct BetaBinomial {
  long n;
  double alpha;
  double beta;
};

using BaseModel =
    std::variant<NegBinomial, BetaNegBinomial, Binomial, BetaBinomial>;

// P(Y=0) gets extra mass phi; the base otherwise scaled by 1-phi.
struct ZeroInflated {
  double phi;  // in (0,1)
  BaseModel base;
};

// P(Y=0) = phi exactly; positives carry the zero-truncated base.
struct Hurdle {
  double phi;  // in (0,1); base must have P(Y=0) < 1
  BaseModel base;
};

using CountModel = std::variant<NegBinomial, BetaNegBinomial, Binomial,
                                BetaBinomial, ZeroInflated, Hurdle>;

// Throws std::invalid_argument on any out-of-range parameter.
void validate(const CountModel& model);

double pmf(const CountModel& model, long y);
double log_pmf(const CountModel& model, long y);

// Log-density at one point, reached by walking the pmf ratio recurrence up
// from zero instead of calling log-gamma at the point.  The walk costs
// O(y), but its rounding error stays near machine epsilon, which matters
// when summed log-likelihoods feed finite-difference gradients.
double log_pmf_walk(const CountModel& model, long y);

// Log-densities at every point 0..y_max from one recurrence sweep.
std::vector<double> log_pmf_profile(const CountModel& model, long y_max);

// P(Y > y); survival(model, -1) == 1.
double survival(const CountModel& model, long y);

// P(Y = 0).
double zero_prob(const CountModel& model);

// nullopt means the mean is infinite (beta-negative-binomial with alpha <= 1).
std::optional<double> mean(const CountModel& model);

// Largest support point for finitely supported models, else nullopt.
std::optional<long> support_upper_bound(const CountModel& model);

long sample_one(const CountModel& model, rng::Stream& stream);
std::vector<long> sample(const CountModel& model, rng::Stream& stream,
                         std::size_t count);

// Hard cap on table length (entries), guarding against runaway truncations.
inline constexpr long kMaxTableEntries = 100000000;

// sum_{y=from}^{to} pmf(y) * weight(y), streamed with O(1) memory via the
// forward pmf recurrence.  For zero-inflated and hurdle models `from` must
// be >= 1 (the zero cell is not part of any tail).
double pmf_weighted_tail(const CountModel& model, long from, long to,
                         const std::function<double(long)>& weight);

// sum_{y=from}^{to} P(Y > y) * weight(y), streamed downward from `to` so
// the smallest terms accumulate first; O(1) memory.  Same `from` >= 1 rule
// for wrapped models.
double survival_weighted_tail(const CountModel& model, long from, long to,
                              const std::function<double(long)>& weight);

// pmf[0..M] and survival[0..M+1] for one model.  The construction is a pure
// function of (model, y) for every entry: two tables over the same model
// agree bitwise on their overlap regardless of their truncation points.
class TailTable {
 public:
  TailTable(const CountModel& model, long m);

  long truncation() const { return m_; }
  const CountModel& model() const { return model_; }

  double pmf(long y) const;       // y in [0, M]
  double survival(long y) const;  // y in [-1, M+1]

 private:
  CountModel model_;
  long m_;
  std::vector<double> pmf_;
  std::vector<double> surv_;
};

}  // namespace trifree::counts
