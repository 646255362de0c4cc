#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "trifree/counts.hpp"
#include "trifree/expect.hpp"
#include "trifree/fisher.hpp"

// Maximum-likelihood fitting for the count families and their regression
// forms, plus the link functions and per-observation information
// aggregation the regression pipeline needs.
//
// Fits run on an unconstrained scale (log for positive parameters, logit
// for probabilities) through a simplex pre-search and a quasi-Newton
// polish with central finite-difference gradients.  Everything here is
// deterministic: equal data and initial values give bitwise-equal fits.

namespace trifree::infer {

// zanb / zabnb are the hurdle (zero-altered) variants.
enum class Family { nb, bnb, zinb, zibnb, zanb, zabnb };

const char* family_name(Family family);
std::optional<Family> family_from_name(std::string_view name);

// Natural-scale parameter layout per family:
//   nb    (nu, p)          bnb   (nu, alpha, beta)
//   zinb  (phi, nu, p)     zibnb (phi, nu, alpha, beta)
//   zanb  (phi, nu, p)     zabnb (phi, nu, alpha, beta)
std::size_t param_count(Family family);
std::vector<std::string> param_labels(Family family);

// Count model carrying the given natural-scale parameters; validates.
counts::CountModel make_model(Family family, const std::vector<double>& params);

struct MleFit {
  Family family;
  std::vector<std::string> labels;
  std::vector<double> params;  // natural scale; coefficients for regression
  double loglik;
  bool converged;    // implies loglik finite and grad_norm < 1e-5
  long iterations;
  double grad_norm;  // at the optimum, on the internal unconstrained scale
};

// Sum of log densities; -infinity when any data point has zero
// probability.  Throws std::invalid_argument on invalid parameters.
double loglik(Family family, const std::vector<double>& params,
              const std::vector<long>& data);

// Requires n >= 10, and at least one nonzero observation for the
// zero-inflated and hurdle families.  `init` is on the natural scale;
// when absent, moment-based starting values are used.
MleFit fit_probabilistic(Family family, const std::vector<long>& data);
MleFit fit_probabilistic(Family family, const std::vector<long>& data,
                         const std::vector<double>& init);

// Log-likelihood based model scores (lower is better).
double aic(const MleFit& fit);
double bic(const MleFit& fit, std::size_t n_obs);

// Per-observation information at the fitted parameters, dispatched by
// family (nb, zinb, zibnb, and the hurdle variants; none exists for a
// bare bnb fit).
fisher::FisherMatrix fim_at(const MleFit& fit,
                            const expect::TruncationPolicy& policy);
fisher::FisherMatrix fim_at(const MleFit& fit, long m);
fisher::FisherMatrix fim_at_mc(const MleFit& fit, long m, rng::Stream& stream);

// ---- Links -------------------------------------------------------------

enum class Link { logit, probit, log };

const char* link_name(Link link);
std::optional<Link> link_from_name(std::string_view name);

// link_apply maps a natural-scale value to the linear predictor scale;
// link_invert is its inverse; link_derivative is d(link_invert)/d(eta).
// The probit pair is built on the same normal-distribution constants as
// the Wald quantiles, so probit round trips agree with wald_ci's z scale.
// Domain errors (logit/probit outside (0,1), log outside (0,inf)) throw
// std::domain_error.
double link_apply(Link link, double value);
double link_invert(Link link, double eta);
double link_derivative(Link link, double eta);

// ---- Regression --------------------------------------------------------

struct Dataset {
  std::vector<long> responses;            // length n, all >= 0
  Eigen::MatrixXd covariates;             // n x d, no intercept column
  std::vector<std::string> column_names;  // d names
};

// Every parameter block shares the main-effects design [1 | X].  The
// zero-model block (phi) uses `zero_link`; positive parameters use log
// and p uses logit.  Coefficients stack block by block in param_labels
// order, each block d+1 wide with the intercept first; names follow the
// pattern "<param>:(Intercept)" and "<param>:<column>".
struct RegressionSpec {
  Family family;
  Link zero_link = Link::logit;
};

std::vector<Link> block_links(const RegressionSpec& spec);
std::vector<std::string> coefficient_names(const RegressionSpec& spec,
                                           const Dataset& data);

// Per-observation natural-scale parameters implied by a coefficient
// vector: row i holds (phi_i, nu_i, ...) for observation i.  Linear
// predictors are clamped to the links' safe ranges before inversion,
// exactly as during fitting.
Eigen::MatrixXd fitted_parameters(const RegressionSpec& spec,
                                  const Eigen::VectorXd& coefficients,
                                  const Dataset& data);

// Requires n > total coefficient count and a full-rank design; a rank
// deficient design is rejected with the offending columns named.
MleFit fit_regression(const RegressionSpec& spec, const Dataset& data);
MleFit fit_regression(const RegressionSpec& spec, const Dataset& data,
                      const Eigen::VectorXd& init);

// Coefficient-space information n^-1 sum_i J_i' F_i J_i where F_i is the
// per-observation parameter-scale matrix at observation i's fitted
// parameters and J_i the link Jacobian times the design row.  Requires a
// converged fit.  The policy overload resolves the truncation per
// observation; the reported m is the largest one used.
fisher::FisherMatrix regression_fim(const RegressionSpec& spec,
                                    const MleFit& fit, const Dataset& data,
                                    const expect::TruncationPolicy& policy);
fisher::FisherMatrix regression_fim(const RegressionSpec& spec,
                                    const MleFit& fit, const Dataset& data,
                                    long m);

}  // namespace trifree::infer
