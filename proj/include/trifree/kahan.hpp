#pragma once

#include <cmath>

namespace trifree {

// Compensated accumulator (Neumaier's variant of Kahan summation).  The
// running correction keeps the fold error at ~2 eps of the true sum even
// when individual terms are far smaller than the accumulated value, which
// is what the long probability and series sums here need.
//
// value() folds the correction back in; the (sum, correction) pair itself
// is the state, so intermediate value() calls are cheap and exact-to-fold.
class Kahan {
 public:
  Kahan() = default;
  explicit Kahan(double init) : sum_(init) {}

  void add(double x) {
    double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace trifree
