#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include "trifree/counts.hpp"
#include "trifree/expect.hpp"
#include "trifree/rng.hpp"

// Per-observation expected Fisher information for the unbounded count
// families and their zero-inflated / hurdle wrappers, with stable
// inversion, matrix comparison metrics, and Wald intervals.
//
// Every matrix is built as the negated expected Hessian of the
// log-density.  The infinite-series ingredients E[psi1(c + Y)] enter
// through their series gaps sum_y P(Y>y)/(c+y)^2 over the base
// distribution, so a whole matrix costs a handful of trigamma
// evaluations regardless of the truncation point.  The `_mc` variants
// replace those series by sample means of psi1(c + Y_i) over a single
// shared set of draws, mirroring how a simulation baseline would do it.
//
// Parameter order: fim_nb (nu, p); fim_zinb (phi, nu, p);
// fim_zibnb (phi, nu, alpha, beta); fim_hurdle phi followed by the base
// parameters.  Finite-support bases are rejected.

namespace trifree::fisher {

struct FisherMatrix {
  std::vector<std::string> labels;  // parameter names, row/column order
  Eigen::MatrixXd entries;          // symmetric, per observation
  std::string method;               // ingredient estimator tag
  long m;                           // truncation (or draw count) used
};

// fim_* with a policy resolve the truncation against the base
// distribution at the smallest polygamma offset, the loosest of the
// series bounds involved.
FisherMatrix fim_nb(double nu, double p, const expect::TruncationPolicy& policy);
FisherMatrix fim_nb(double nu, double p, long m);
FisherMatrix fim_nb_mc(double nu, double p, long m, rng::Stream& stream);

FisherMatrix fim_zinb(double phi, double nu, double p,
                      const expect::TruncationPolicy& policy);
FisherMatrix fim_zinb(double phi, double nu, double p, long m);
FisherMatrix fim_zinb_mc(double phi, double nu, double p, long m,
                         rng::Stream& stream);

FisherMatrix fim_zibnb(double phi, double nu, double alpha, double beta,
                       const expect::TruncationPolicy& policy);
FisherMatrix fim_zibnb(double phi, double nu, double alpha, double beta, long m);
FisherMatrix fim_zibnb_mc(double phi, double nu, double alpha, double beta,
                          long m, rng::Stream& stream);

FisherMatrix fim_hurdle(double phi, const counts::BaseModel& base,
                        const expect::TruncationPolicy& policy);
FisherMatrix fim_hurdle(double phi, const counts::BaseModel& base, long m);
FisherMatrix fim_hurdle_mc(double phi, const counts::BaseModel& base, long m,
                           rng::Stream& stream);

struct Inversion {
  Eigen::MatrixXd inverse;
  double condition;       // ratio of extreme |eigenvalues|
  double min_eigenvalue;  // smallest eigenvalue, signed
  bool singular;          // true when near-null directions were dropped
};

// Inverse via symmetric eigendecomposition.  Eigenvalues below
// 1000 * epsilon * max|eigenvalue| are treated as a null space: those
// directions are dropped (pseudo-inverse) and the result is flagged
// singular instead of failing.  A tiny eigenvalue is a finding about the
// model at those parameters, not a numerical error.
Inversion invert(const FisherMatrix& f);

// ||A - B||_F, the entrywise root-sum-of-squares distance.
double frobenius_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// max_k |sqrt(a_kk) - sqrt(b_kk)| over the diagonals of two inverse
// information matrices: the largest change any Wald interval's length
// could see (up to the common z/sqrt(N) factor).
double max_ci_length_change(const Eigen::MatrixXd& a_inv,
                            const Eigen::MatrixXd& b_inv);

struct CiSet {
  std::vector<std::string> labels;
  std::vector<double> estimate;
  std::vector<double> lower;
  std::vector<double> upper;
  double level;
  std::size_t n_obs;
  bool singular;  // inversion flag, propagated
};

// estimate_k +/- z_(1+level)/2 * sqrt((F^-1)_kk / N).  F is per-observation
// information, so the covariance of an N-sample MLE is F^-1 / N.
CiSet wald_ci(const std::vector<double>& estimates, const FisherMatrix& f,
              std::size_t n_obs, double level);

}  // namespace trifree::fisher
