#include "trifree/infer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "trifree/kahan.hpp"
#include "trifree/optim.hpp"
#include "trifree/specfun.hpp"

namespace trifree::infer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kSqrt2Pi = 2.5066282746310005024;

enum class Kind { positive, probability };

struct FamilyTraits {
  const char* name;
  bool wrapped;  // carries a zero-model parameter phi
  bool hurdle;
  bool bnb_base;
};

const FamilyTraits& traits(Family family) {
  static const FamilyTraits table[] = {
      {"nb", false, false, false},  {"bnb", false, false, true},
      {"zinb", true, false, false}, {"zibnb", true, false, true},
      {"zanb", true, true, false},  {"zabnb", true, true, true},
  };
  return table[static_cast<int>(family)];
}

std::vector<Kind> param_kinds(Family family) {
  const auto& t = traits(family);
  std::vector<Kind> kinds;
  if (t.wrapped) kinds.push_back(Kind::probability);  // phi
  kinds.push_back(Kind::positive);                    // nu
  if (t.bnb_base) {
    kinds.push_back(Kind::positive);  // alpha
    kinds.push_back(Kind::positive);  // beta
  } else {
    kinds.push_back(Kind::probability);  // p
  }
  return kinds;
}

counts::BaseModel base_from(Family family, const double* q) {
  if (traits(family).bnb_base) return counts::BetaNegBinomial{q[0], q[1], q[2]};
  return counts::NegBinomial{q[0], q[1]};
}

counts::CountModel lift(const counts::BaseModel& base) {
  return std::visit([](auto m) -> counts::CountModel { return m; }, base);
}

// Builds the variant without validating; fitting guarantees interior
// parameters, and the public entry points validate explicitly.
counts::CountModel assemble(Family family, const double* params) {
  const auto& t = traits(family);
  if (!t.wrapped) return lift(base_from(family, params));
  counts::BaseModel base = base_from(family, params + 1);
  if (t.hurdle) return counts::CountModel{counts::Hurdle{params[0], base}};
  return counts::CountModel{counts::ZeroInflated{params[0], base}};
}

double logistic(double x) {
  if (x >= 0.0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

// The unconstrained scale is clamped before inversion so every candidate
// the optimizer visits maps to a strictly interior parameter (exp and
// logistic stay away from 0, 1, and overflow).
double clamp30(double u) { return std::clamp(u, -30.0, 30.0); }

double to_natural_one(Kind kind, double u) {
  u = clamp30(u);
  return kind == Kind::probability ? logistic(u) : std::exp(u);
}

std::vector<double> to_natural(const std::vector<Kind>& kinds,
                               const Eigen::VectorXd& u) {
  std::vector<double> out(kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    out[i] = to_natural_one(kinds[i], u(long(i)));
  }
  return out;
}

Eigen::VectorXd to_internal(const std::vector<Kind>& kinds,
                            const std::vector<double>& params) {
  Eigen::VectorXd u(long(kinds.size()));
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    double v = params[i];
    u(long(i)) = kinds[i] == Kind::probability ? std::log(v / (1.0 - v))
                                               : std::log(v);
  }
  return u;
}

// Distinct (value, multiplicity) pairs; the log-likelihood loop then costs
// one log-density per distinct value instead of one per observation.
std::vector<std::pair<long, long>> tally(const std::vector<long>& data) {
  std::map<long, long> seen;
  for (long y : data) {
    if (y < 0) throw std::invalid_argument("count data must be non-negative");
    ++seen[y];
  }
  return {seen.begin(), seen.end()};
}

double loglik_pairs(const counts::CountModel& model,
                    const std::vector<std::pair<long, long>>& pairs) {
  if (pairs.empty()) return 0.0;
  // One recurrence sweep covers every distinct value, and its low rounding
  // noise keeps finite-difference gradients of the result meaningful.
  const std::vector<double> lp =
      counts::log_pmf_profile(model, pairs.back().first);
  Kahan acc;
  for (const auto& [y, mult] : pairs) {
    const double v = lp[static_cast<std::size_t>(y)];
    if (!std::isfinite(v)) return -kInf;
    acc.add(double(mult) * v);
  }
  return acc.value();
}

void check_data(Family family, const std::vector<long>& data) {
  if (data.size() < 10) {
    throw std::invalid_argument("fitting needs at least 10 observations");
  }
  bool any_nonzero = false;
  for (long y : data) {
    if (y < 0) throw std::invalid_argument("count data must be non-negative");
    if (y > 0) any_nonzero = true;
  }
  if (traits(family).wrapped && !any_nonzero) {
    throw std::invalid_argument(
        "all-zero data cannot identify a zero-inflated or hurdle model");
  }
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments sample_moments(const std::vector<long>& data) {
  if (data.empty()) return {};
  Kahan s;
  for (long y : data) s.add(double(y));
  double mean = s.value() / double(data.size());
  if (data.size() < 2) return {mean, 0.0};
  Kahan q;
  for (long y : data) {
    double d = double(y) - mean;
    q.add(d * d);
  }
  return {mean, q.value() / double(data.size() - 1)};
}

// Method-of-moments start for (nu, p): p = mean/var, nu = mean^2/(var-mean).
// Underdispersed or degenerate samples fall back to a diffuse start; the
// optimizer does the rest.
std::vector<double> nb_moment_init(const Moments& m) {
  if (!(m.mean > 0.0) || !(m.var > 0.0)) return {1.0, 0.5};
  double p = std::clamp(m.mean / m.var, 1e-3, 0.999);
  double nu = 50.0;
  if (m.var > m.mean * 1.0001) nu = m.mean * m.mean / (m.var - m.mean);
  nu = std::clamp(nu, 1e-2, 1e4);
  return {nu, p};
}

std::vector<double> default_init(Family family, const std::vector<long>& data) {
  const auto& t = traits(family);
  std::vector<long> positives;
  long zeros = 0;
  for (long y : data) {
    if (y > 0) {
      positives.push_back(y);
    } else {
      ++zeros;
    }
  }
  double zero_frac = double(zeros) / double(data.size());

  // Wrapped families start the base from the positive part, which tracks
  // the base distribution once zeros are mostly inflation.
  std::vector<double> base;
  if (t.bnb_base) {
    base = {3.0, 4.0, 3.0};
  } else {
    base = nb_moment_init(sample_moments(t.wrapped ? positives : data));
  }
  if (!t.wrapped) return base;

  double phi;
  if (t.hurdle) {
    phi = std::clamp(zero_frac, 0.02, 0.98);
  } else {
    double p0 = counts::zero_prob(lift(base_from(family, base.data())));
    phi = std::clamp((zero_frac - p0) / std::max(1.0 - p0, 1e-9), 0.02, 0.95);
  }
  std::vector<double> out{phi};
  out.insert(out.end(), base.begin(), base.end());
  return out;
}

}  // namespace

const char* family_name(Family family) { return traits(family).name; }

std::optional<Family> family_from_name(std::string_view name) {
  for (Family f : {Family::nb, Family::bnb, Family::zinb, Family::zibnb,
                   Family::zanb, Family::zabnb}) {
    if (name == traits(f).name) return f;
  }
  return std::nullopt;
}

std::size_t param_count(Family family) { return param_kinds(family).size(); }

std::vector<std::string> param_labels(Family family) {
  const auto& t = traits(family);
  std::vector<std::string> labels;
  if (t.wrapped) labels.emplace_back("phi");
  labels.emplace_back("nu");
  if (t.bnb_base) {
    labels.emplace_back("alpha");
    labels.emplace_back("beta");
  } else {
    labels.emplace_back("p");
  }
  return labels;
}

counts::CountModel make_model(Family family,
                              const std::vector<double>& params) {
  if (params.size() != param_count(family)) {
    throw std::invalid_argument("parameter count does not match family");
  }
  counts::CountModel model = assemble(family, params.data());
  counts::validate(model);
  return model;
}

double loglik(Family family, const std::vector<double>& params,
              const std::vector<long>& data) {
  counts::CountModel model = make_model(family, params);
  return loglik_pairs(model, tally(data));
}

MleFit fit_probabilistic(Family family, const std::vector<long>& data) {
  check_data(family, data);
  return fit_probabilistic(family, data, default_init(family, data));
}

MleFit fit_probabilistic(Family family, const std::vector<long>& data,
                         const std::vector<double>& init) {
  check_data(family, data);
  counts::validate(make_model(family, init));
  const auto kinds = param_kinds(family);
  const auto pairs = tally(data);

  auto objective = [&](const Eigen::VectorXd& u) -> double {
    std::vector<double> natural = to_natural(kinds, u);
    return -loglik_pairs(assemble(family, natural.data()), pairs);
  };

  optim::Result r = optim::minimize(objective, to_internal(kinds, init));

  MleFit fit;
  fit.family = family;
  fit.labels = param_labels(family);
  fit.params = to_natural(kinds, r.x);
  fit.loglik = -r.value;
  fit.converged = r.converged && std::isfinite(fit.loglik);
  fit.iterations = r.iterations;
  fit.grad_norm = r.grad_norm;
  return fit;
}

fisher::FisherMatrix fim_at_mc(const MleFit& fit, long m,
                               rng::Stream& stream) {
  const auto& q = fit.params;
  switch (fit.family) {
    case Family::nb:
      return fisher::fim_nb_mc(q[0], q[1], m, stream);
    case Family::zinb:
      return fisher::fim_zinb_mc(q[0], q[1], q[2], m, stream);
    case Family::zibnb:
      return fisher::fim_zibnb_mc(q[0], q[1], q[2], q[3], m, stream);
    case Family::zanb:
      return fisher::fim_hurdle_mc(q[0], counts::NegBinomial{q[1], q[2]}, m,
                                   stream);
    case Family::zabnb:
      return fisher::fim_hurdle_mc(
          q[0], counts::BetaNegBinomial{q[1], q[2], q[3]}, m, stream);
    case Family::bnb:
      break;
  }
  throw std::invalid_argument(
      "no per-observation information matrix for family bnb");
}

double aic(const MleFit& fit) {
  return 2.0 * double(fit.params.size()) - 2.0 * fit.loglik;
}

double bic(const MleFit& fit, std::size_t n_obs) {
  return double(fit.params.size()) * std::log(double(n_obs)) -
         2.0 * fit.loglik;
}

fisher::FisherMatrix fim_at(const MleFit& fit,
                            const expect::TruncationPolicy& policy) {
  const auto& q = fit.params;
  switch (fit.family) {
    case Family::nb:
      return fisher::fim_nb(q[0], q[1], policy);
    case Family::zinb:
      return fisher::fim_zinb(q[0], q[1], q[2], policy);
    case Family::zibnb:
      return fisher::fim_zibnb(q[0], q[1], q[2], q[3], policy);
    case Family::zanb:
      return fisher::fim_hurdle(q[0], counts::NegBinomial{q[1], q[2]},
                                policy);
    case Family::zabnb:
      return fisher::fim_hurdle(
          q[0], counts::BetaNegBinomial{q[1], q[2], q[3]}, policy);
    case Family::bnb:
      break;
  }
  throw std::invalid_argument(
      "no per-observation information matrix for family bnb");
}

fisher::FisherMatrix fim_at(const MleFit& fit, long m) {
  const auto& q = fit.params;
  switch (fit.family) {
    case Family::nb:
      return fisher::fim_nb(q[0], q[1], m);
    case Family::zinb:
      return fisher::fim_zinb(q[0], q[1], q[2], m);
    case Family::zibnb:
      return fisher::fim_zibnb(q[0], q[1], q[2], q[3], m);
    case Family::zanb:
      return fisher::fim_hurdle(q[0], counts::NegBinomial{q[1], q[2]}, m);
    case Family::zabnb:
      return fisher::fim_hurdle(q[0],
                                counts::BetaNegBinomial{q[1], q[2], q[3]}, m);
    case Family::bnb:
      break;
  }
  throw std::invalid_argument(
      "no per-observation information matrix for family bnb");
}

// ---- Links -------------------------------------------------------------

const char* link_name(Link link) {
  switch (link) {
    case Link::logit:
      return "logit";
    case Link::probit:
      return "probit";
    case Link::log:
      return "log";
  }
  return "";
}

std::optional<Link> link_from_name(std::string_view name) {
  if (name == "logit") return Link::logit;
  if (name == "probit") return Link::probit;
  if (name == "log") return Link::log;
  return std::nullopt;
}

double link_apply(Link link, double value) {
  switch (link) {
    case Link::logit:
      if (!(value > 0.0 && value < 1.0)) {
        throw std::domain_error("logit needs a value in (0,1)");
      }
      return std::log(value / (1.0 - value));
    case Link::probit:
      if (!(value > 0.0 && value < 1.0)) {
        throw std::domain_error("probit needs a value in (0,1)");
      }
      return specfun::normal_quantile(value);
    case Link::log:
      if (!(value > 0.0)) {
        throw std::domain_error("log link needs a positive value");
      }
      return std::log(value);
  }
  throw std::domain_error("unknown link");
}

double link_invert(Link link, double eta) {
  switch (link) {
    case Link::logit:
      return logistic(eta);
    case Link::probit:
      return 0.5 * std::erfc(-eta / kSqrt2);
    case Link::log:
      return std::exp(eta);
  }
  throw std::domain_error("unknown link");
}

double link_derivative(Link link, double eta) {
  switch (link) {
    case Link::logit:
      return logistic(eta) * logistic(-eta);
    case Link::probit:
      return std::exp(-0.5 * eta * eta) / kSqrt2Pi;
    case Link::log:
      return std::exp(eta);
  }
  throw std::domain_error("unknown link");
}

// ---- Regression --------------------------------------------------------

namespace {

// Linear predictors are clamped so the inverted parameters stay strictly
// interior in double precision: logistic and exp are safe to +-30, the
// normal CDF reaches 1.0 exactly past ~8.3.
double eta_limit(Link link) { return link == Link::probit ? 8.0 : 30.0; }

double clamp_eta(Link link, double eta) {
  double lim = eta_limit(link);
  return std::clamp(eta, -lim, lim);
}

std::string design_column_name(const Dataset& data, long j) {
  return j == 0 ? std::string("(Intercept)") : data.column_names[j - 1];
}

Eigen::MatrixXd design(const Dataset& data) {
  const long n = long(data.responses.size());
  const long d = data.covariates.cols();
  Eigen::MatrixXd x(n, d + 1);
  x.col(0).setOnes();
  if (d > 0) x.rightCols(d) = data.covariates;
  return x;
}

void check_dataset(const RegressionSpec& spec, const Dataset& data) {
  const long n = long(data.responses.size());
  if (long(data.column_names.size()) != data.covariates.cols()) {
    throw std::invalid_argument(
        "covariate column names do not match the covariate count");
  }
  if (data.covariates.cols() > 0 && data.covariates.rows() != n) {
    throw std::invalid_argument(
        "covariate rows do not match the response length");
  }
  bool any_nonzero = false;
  for (long y : data.responses) {
    if (y < 0) throw std::invalid_argument("responses must be non-negative");
    if (y > 0) any_nonzero = true;
  }
  for (long j = 0; j < data.covariates.cols(); ++j) {
    for (long i = 0; i < data.covariates.rows(); ++i) {
      if (!std::isfinite(data.covariates(i, j))) {
        std::ostringstream msg;
        msg << "non-finite covariate at row " << (i + 1) << ", column "
            << data.column_names[std::size_t(j)];
        throw std::invalid_argument(msg.str());
      }
    }
  }
  if (traits(spec.family).wrapped && !any_nonzero) {
    throw std::invalid_argument(
        "all-zero responses cannot identify a zero-inflated or hurdle model");
  }
}

void check_rank(const Eigen::MatrixXd& x, const Dataset& data) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  const long rank = qr.rank();
  if (rank >= x.cols()) return;
  const auto& perm = qr.colsPermutation().indices();
  std::ostringstream msg;
  msg << "rank-deficient design (rank " << rank << " of " << x.cols()
      << "); dependent columns:";
  for (long j = rank; j < x.cols(); ++j) {
    msg << ' ' << design_column_name(data, perm(j));
  }
  throw std::invalid_argument(msg.str());
}

// Natural parameters for one observation from its linear predictors.
void invert_row(const std::vector<Link>& links, const Eigen::MatrixXd& eta,
                long i, std::vector<double>& theta) {
  for (std::size_t k = 0; k < links.size(); ++k) {
    theta[k] = link_invert(links[k], clamp_eta(links[k], eta(i, long(k))));
  }
}

}  // namespace

std::vector<Link> block_links(const RegressionSpec& spec) {
  const auto& t = traits(spec.family);
  std::vector<Link> links;
  if (t.wrapped) links.push_back(spec.zero_link);
  links.push_back(Link::log);  // nu
  if (t.bnb_base) {
    links.push_back(Link::log);  // alpha
    links.push_back(Link::log);  // beta
  } else {
    links.push_back(Link::logit);  // p
  }
  return links;
}

std::vector<std::string> coefficient_names(const RegressionSpec& spec,
                                           const Dataset& data) {
  std::vector<std::string> names;
  for (const std::string& block : param_labels(spec.family)) {
    for (long j = 0; j <= data.covariates.cols(); ++j) {
      names.push_back(block + ":" + design_column_name(data, j));
    }
  }
  return names;
}

Eigen::MatrixXd fitted_parameters(const RegressionSpec& spec,
                                  const Eigen::VectorXd& coefficients,
                                  const Dataset& data) {
  const auto links = block_links(spec);
  const Eigen::MatrixXd x = design(data);
  const long b = long(links.size());
  const long w = x.cols();
  if (coefficients.size() != b * w) {
    throw std::invalid_argument(
        "coefficient count does not match the spec and design");
  }
  Eigen::Map<const Eigen::MatrixXd> cmat(coefficients.data(), w, b);
  Eigen::MatrixXd eta = x * cmat;
  Eigen::MatrixXd theta(x.rows(), b);
  std::vector<double> row(static_cast<std::size_t>(b));
  for (long i = 0; i < x.rows(); ++i) {
    invert_row(links, eta, i, row);
    for (long k = 0; k < b; ++k) theta(i, k) = row[std::size_t(k)];
  }
  return theta;
}

MleFit fit_regression(const RegressionSpec& spec, const Dataset& data) {
  check_dataset(spec, data);
  const std::vector<double> start =
      default_init(spec.family, data.responses);
  const auto links = block_links(spec);
  const long w = data.covariates.cols() + 1;
  Eigen::VectorXd c0 = Eigen::VectorXd::Zero(long(links.size()) * w);
  for (std::size_t k = 0; k < links.size(); ++k) {
    c0(long(k) * w) = link_apply(links[k], start[k]);
  }
  return fit_regression(spec, data, c0);
}

MleFit fit_regression(const RegressionSpec& spec, const Dataset& data,
                      const Eigen::VectorXd& init) {
  check_dataset(spec, data);
  const auto links = block_links(spec);
  const Eigen::MatrixXd x = design(data);
  const long n = x.rows();
  const long b = long(links.size());
  const long w = x.cols();
  const long total = b * w;
  if (init.size() != total) {
    throw std::invalid_argument(
        "initial coefficient count does not match the spec and design");
  }
  if (n <= total) {
    throw std::invalid_argument(
        "need more observations than coefficients to fit");
  }
  check_rank(x, data);

  const Family family = spec.family;
  std::vector<double> theta(static_cast<std::size_t>(b));
  auto objective = [&](const Eigen::VectorXd& c) -> double {
    Eigen::Map<const Eigen::MatrixXd> cmat(c.data(), w, b);
    Eigen::MatrixXd eta = x * cmat;
    Kahan acc;
    std::vector<double> row(static_cast<std::size_t>(b));
    for (long i = 0; i < n; ++i) {
      invert_row(links, eta, i, row);
      double lp = counts::log_pmf_walk(assemble(family, row.data()),
                                       data.responses[std::size_t(i)]);
      if (!std::isfinite(lp)) return kInf;
      acc.add(lp);
    }
    return -acc.value();
  };

  optim::Result r = optim::minimize(objective, init);

  MleFit fit;
  fit.family = family;
  fit.labels = coefficient_names(spec, data);
  fit.params.assign(r.x.data(), r.x.data() + r.x.size());
  fit.loglik = -r.value;
  fit.converged = r.converged && std::isfinite(fit.loglik);
  fit.iterations = r.iterations;
  fit.grad_norm = r.grad_norm;
  return fit;
}

namespace {

fisher::FisherMatrix per_obs_fim(Family family, const double* q, long m) {
  switch (family) {
    case Family::nb:
      return fisher::fim_nb(q[0], q[1], m);
    case Family::zinb:
      return fisher::fim_zinb(q[0], q[1], q[2], m);
    case Family::zibnb:
      return fisher::fim_zibnb(q[0], q[1], q[2], q[3], m);
    case Family::zanb:
      return fisher::fim_hurdle(q[0], counts::NegBinomial{q[1], q[2]}, m);
    case Family::zabnb:
      return fisher::fim_hurdle(q[0],
                                counts::BetaNegBinomial{q[1], q[2], q[3]}, m);
    case Family::bnb:
      break;
  }
  throw std::invalid_argument(
      "no per-observation information matrix for family bnb");
}

fisher::FisherMatrix per_obs_fim(Family family, const double* q,
                                 const expect::TruncationPolicy& policy) {
  switch (family) {
    case Family::nb:
      return fisher::fim_nb(q[0], q[1], policy);
    case Family::zinb:
      return fisher::fim_zinb(q[0], q[1], q[2], policy);
    case Family::zibnb:
      return fisher::fim_zibnb(q[0], q[1], q[2], q[3], policy);
    case Family::zanb:
      return fisher::fim_hurdle(q[0], counts::NegBinomial{q[1], q[2]},
                                policy);
    case Family::zabnb:
      return fisher::fim_hurdle(
          q[0], counts::BetaNegBinomial{q[1], q[2], q[3]}, policy);
    case Family::bnb:
      break;
  }
  throw std::invalid_argument(
      "no per-observation information matrix for family bnb");
}

template <typename PerObs>
fisher::FisherMatrix regression_fim_impl(const RegressionSpec& spec,
                                         const MleFit& fit,
                                         const Dataset& data,
                                         const PerObs& per_obs) {
  if (!fit.converged) {
    throw std::invalid_argument(
        "regression information requires a converged fit");
  }
  check_dataset(spec, data);
  const auto links = block_links(spec);
  const Eigen::MatrixXd x = design(data);
  const long n = x.rows();
  const long b = long(links.size());
  const long w = x.cols();
  if (long(fit.params.size()) != b * w) {
    throw std::invalid_argument(
        "fit coefficient count does not match the spec and design");
  }
  Eigen::Map<const Eigen::MatrixXd> cmat(fit.params.data(), w, b);
  Eigen::MatrixXd eta = x * cmat;

  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(b * w, b * w);
  std::vector<double> theta(static_cast<std::size_t>(b));
  std::vector<double> deriv(static_cast<std::size_t>(b));
  std::string tag;
  long used_m = 0;
  for (long i = 0; i < n; ++i) {
    for (long k = 0; k < b; ++k) {
      double e = clamp_eta(links[std::size_t(k)], eta(i, k));
      theta[std::size_t(k)] = link_invert(links[std::size_t(k)], e);
      deriv[std::size_t(k)] = link_derivative(links[std::size_t(k)], e);
    }
    fisher::FisherMatrix fi = per_obs(theta.data());
    tag = fi.method;
    used_m = std::max(used_m, fi.m);
    // J_i' F_i J_i in block form: block (a,c) is
    // F_i(a,c) * deriv_a * deriv_c * x_i x_i'.
    Eigen::VectorXd xi = x.row(i).transpose();
    Eigen::MatrixXd outer = xi * xi.transpose();
    for (long a = 0; a < b; ++a) {
      for (long c = 0; c < b; ++c) {
        double scale =
            fi.entries(a, c) * deriv[std::size_t(a)] * deriv[std::size_t(c)];
        acc.block(a * w, c * w, w, w) += scale * outer;
      }
    }
  }
  acc /= double(n);
  return fisher::FisherMatrix{coefficient_names(spec, data), std::move(acc),
                              std::move(tag), used_m};
}

}  // namespace

fisher::FisherMatrix regression_fim(const RegressionSpec& spec,
                                    const MleFit& fit, const Dataset& data,
                                    const expect::TruncationPolicy& policy) {
  return regression_fim_impl(spec, fit, data, [&](const double* q) {
    return per_obs_fim(spec.family, q, policy);
  });
}

fisher::FisherMatrix regression_fim(const RegressionSpec& spec,
                                    const MleFit& fit, const Dataset& data,
                                    long m) {
  return regression_fim_impl(spec, fit, data, [&](const double* q) {
    return per_obs_fim(spec.family, q, m);
  });
}

}  // namespace trifree::infer
