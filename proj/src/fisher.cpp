#include "trifree/fisher.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "trifree/kahan.hpp"
#include "trifree/specfun.hpp"

namespace trifree::fisher {

namespace {

using counts::BaseModel;
using counts::BetaNegBinomial;
using counts::CountModel;
using counts::NegBinomial;
using counts::TailTable;
using expect::TruncationPolicy;
using specfun::digamma;
using specfun::normal_quantile;
using specfun::trigamma;

// gap(c) = psi1(c) - E[psi1(c + Y)] over the base distribution; the only
// ingredient the matrices need beyond fixed-argument polygammas.
using GapFn = std::function<double(double)>;

void check_prob(double x, const char* what) {
  if (!(x > 0.0 && x < 1.0)) {
    throw std::invalid_argument(std::string("fisher: ") + what +
                                " must lie in (0,1)");
  }
}

void check_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::invalid_argument(std::string("fisher: ") + what +
                                " must be positive and finite");
  }
}

CountModel as_count_model(const BaseModel& b) {
  return std::visit([](const auto& m) { return CountModel{m}; }, b);
}

// Base-family information in its own parameters, plus the zero-probability
// gradient the wrappers need.
struct BaseInfo {
  Eigen::MatrixXd j;
  Eigen::VectorXd dp0;
  double p0;
};

BaseInfo nb_info(double nu, double p, const GapFn& gap) {
  BaseInfo out;
  out.p0 = std::pow(p, nu);
  out.j.resize(2, 2);
  out.j(0, 0) = gap(nu);
  out.j(0, 1) = out.j(1, 0) = -1.0 / p;
  out.j(1, 1) = nu / (p * p * (1.0 - p));
  out.dp0.resize(2);
  out.dp0(0) = out.p0 * std::log(p);
  out.dp0(1) = nu * out.p0 / p;
  return out;
}

BaseInfo bnb_info(double nu, double al, double be, const GapFn& gap) {
  double s = nu + al + be;
  double t_na = trigamma(nu + al);
  double t_a = trigamma(al);
  double t_ab = trigamma(al + be);
  // E[psi1(s+Y)] = psi1(s) - gap(s); the entries below are the negated
  // expected Hessian written in gap/trigamma terms.
  double e_s = trigamma(s) - gap(s);
  BaseInfo out;
  out.j.resize(3, 3);
  out.j(0, 0) = gap(nu) - t_na + e_s;
  out.j(0, 1) = out.j(1, 0) = e_s - t_na;
  out.j(0, 2) = out.j(2, 0) = e_s;
  out.j(1, 1) = t_a - t_ab - t_na + e_s;
  out.j(1, 2) = out.j(2, 1) = e_s - t_ab;
  out.j(2, 2) = gap(be) - t_ab + e_s;
  double d_na = digamma(nu + al);
  double d_s = digamma(s);
  double d_a = digamma(al);
  double d_ab = digamma(al + be);
  out.p0 = std::exp(specfun::log_beta(nu + al, be) - specfun::log_beta(al, be));
  out.dp0.resize(3);
  out.dp0(0) = out.p0 * (d_na - d_s);
  out.dp0(1) = out.p0 * (d_na - d_s - d_a + d_ab);
  out.dp0(2) = out.p0 * (d_ab - d_s);
  return out;
}

BaseInfo base_info(const BaseModel& base, const GapFn& gap) {
  if (const auto* nb = std::get_if<NegBinomial>(&base)) {
    return nb_info(nb->nu, nb->p, gap);
  }
  if (const auto* bnb = std::get_if<BetaNegBinomial>(&base)) {
    return bnb_info(bnb->nu, bnb->alpha, bnb->beta, gap);
  }
  throw std::invalid_argument("fisher: finite-support bases are not covered");
}

// Series gaps, all offsets served by one table over the base distribution.
GapFn series_gap(const TailTable& table) {
  return [&table](double c) { return expect::series_gap_sq(c, table); };
}

// Monte Carlo gaps: one shared set of draws from the base distribution,
// psi1 averaged per offset.
struct McGaps {
  std::vector<long> draws;
  double operator()(double c) const {
    Kahan sum;
    for (long y : draws) sum.add(trigamma(c + double(y)));
    return trigamma(c) - sum.value() / double(draws.size());
  }
};

double smallest_offset(const BaseModel& base) {
  if (const auto* nb = std::get_if<NegBinomial>(&base)) return nb->nu;
  const auto& bnb = std::get<BetaNegBinomial>(base);
  return std::min(bnb.nu, bnb.beta);
}

long resolve_m(const BaseModel& base, const TruncationPolicy& policy) {
  return expect::choose_m(smallest_offset(base), as_count_model(base), policy);
}

Eigen::MatrixXd zi_wrap(double phi, const BaseInfo& bi) {
  double q0 = phi + (1.0 - phi) * bi.p0;
  long k = bi.j.rows();
  Eigen::MatrixXd out(k + 1, k + 1);
  out(0, 0) = (1.0 - bi.p0) * (1.0 - bi.p0) / q0 +
              (1.0 - q0) / ((1.0 - phi) * (1.0 - phi));
  for (long i = 0; i < k; ++i) {
    out(0, i + 1) = out(i + 1, 0) = bi.dp0(i) / q0;
  }
  out.block(1, 1, k, k) =
      (1.0 - phi) *
      (bi.j - (phi / (bi.p0 * q0)) * (bi.dp0 * bi.dp0.transpose()));
  return out;
}

Eigen::MatrixXd hurdle_wrap(double phi, const BaseInfo& bi) {
  double r0 = 1.0 - bi.p0;
  if (!(r0 > 0.0)) {
    throw std::invalid_argument("fisher: hurdle base puts all mass at zero");
  }
  long k = bi.j.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k + 1, k + 1);
  out(0, 0) = 1.0 / (phi * (1.0 - phi));
  out.block(1, 1, k, k) =
      ((1.0 - phi) / r0) *
      (bi.j - (1.0 / (bi.p0 * r0)) * (bi.dp0 * bi.dp0.transpose()));
  return out;
}

std::vector<std::string> base_labels(const BaseModel& base) {
  if (std::holds_alternative<NegBinomial>(base)) return {"nu", "p"};
  return {"nu", "alpha", "beta"};
}

std::vector<std::string> with_phi(std::vector<std::string> labels) {
  labels.insert(labels.begin(), "phi");
  return labels;
}

McGaps draw_gaps(const BaseModel& base, long m, rng::Stream& stream) {
  if (m < 1) throw std::invalid_argument("fisher: draw count must be positive");
  return {counts::sample(as_count_model(base), stream, std::size_t(m))};
}

const char* kSeriesTag = "trigamma-free";
const char* kMcTag = "monte-carlo";

}  // namespace

FisherMatrix fim_nb(double nu, double p, long m) {
  check_positive(nu, "nu");
  check_prob(p, "p");
  TailTable table(CountModel{NegBinomial{nu, p}}, m);
  return {{"nu", "p"}, nb_info(nu, p, series_gap(table)).j, kSeriesTag, m};
}

FisherMatrix fim_nb(double nu, double p, const TruncationPolicy& policy) {
  check_positive(nu, "nu");
  check_prob(p, "p");
  return fim_nb(nu, p, resolve_m(NegBinomial{nu, p}, policy));
}

FisherMatrix fim_nb_mc(double nu, double p, long m, rng::Stream& stream) {
  check_positive(nu, "nu");
  check_prob(p, "p");
  McGaps gaps = draw_gaps(NegBinomial{nu, p}, m, stream);
  return {{"nu", "p"}, nb_info(nu, p, gaps).j, kMcTag, m};
}

FisherMatrix fim_zinb(double phi, double nu, double p, long m) {
  check_prob(phi, "phi");
  check_positive(nu, "nu");
  check_prob(p, "p");
  TailTable table(CountModel{NegBinomial{nu, p}}, m);
  return {{"phi", "nu", "p"},
          zi_wrap(phi, nb_info(nu, p, series_gap(table))), kSeriesTag, m};
}

FisherMatrix fim_zinb(double phi, double nu, double p,
                      const TruncationPolicy& policy) {
  check_positive(nu, "nu");
  check_prob(p, "p");
  return fim_zinb(phi, nu, p, resolve_m(NegBinomial{nu, p}, policy));
}

FisherMatrix fim_zinb_mc(double phi, double nu, double p, long m,
                         rng::Stream& stream) {
  check_prob(phi, "phi");
  check_positive(nu, "nu");
  check_prob(p, "p");
  McGaps gaps = draw_gaps(NegBinomial{nu, p}, m, stream);
  return {{"phi", "nu", "p"}, zi_wrap(phi, nb_info(nu, p, gaps)), kMcTag, m};
}

FisherMatrix fim_zibnb(double phi, double nu, double alpha, double beta,
                       long m) {
  check_prob(phi, "phi");
  check_positive(nu, "nu");
  check_positive(alpha, "alpha");
  check_positive(beta, "beta");
  TailTable table(CountModel{BetaNegBinomial{nu, alpha, beta}}, m);
  return {{"phi", "nu", "alpha", "beta"},
          zi_wrap(phi, bnb_info(nu, alpha, beta, series_gap(table))),
          kSeriesTag, m};
}

FisherMatrix fim_zibnb(double phi, double nu, double alpha, double beta,
                       const TruncationPolicy& policy) {
  check_positive(nu, "nu");
  check_positive(alpha, "alpha");
  check_positive(beta, "beta");
  return fim_zibnb(phi, nu, alpha, beta,
                   resolve_m(BetaNegBinomial{nu, alpha, beta}, policy));
}

FisherMatrix fim_zibnb_mc(double phi, double nu, double alpha, double beta,
                          long m, rng::Stream& stream) {
  check_prob(phi, "phi");
  check_positive(nu, "nu");
  check_positive(alpha, "alpha");
  check_positive(beta, "beta");
  McGaps gaps = draw_gaps(BetaNegBinomial{nu, alpha, beta}, m, stream);
  return {{"phi", "nu", "alpha", "beta"},
          zi_wrap(phi, bnb_info(nu, alpha, beta, gaps)), kMcTag, m};
}

FisherMatrix fim_hurdle(double phi, const BaseModel& base, long m) {
  check_prob(phi, "phi");
  counts::validate(as_count_model(base));
  TailTable table(as_count_model(base), m);
  return {with_phi(base_labels(base)),
          hurdle_wrap(phi, base_info(base, series_gap(table))), kSeriesTag, m};
}

FisherMatrix fim_hurdle(double phi, const BaseModel& base,
                        const TruncationPolicy& policy) {
  counts::validate(as_count_model(base));
  return fim_hurdle(phi, base, resolve_m(base, policy));
}

FisherMatrix fim_hurdle_mc(double phi, const BaseModel& base, long m,
                           rng::Stream& stream) {
  check_prob(phi, "phi");
  counts::validate(as_count_model(base));
  McGaps gaps = draw_gaps(base, m, stream);
  return {with_phi(base_labels(base)), hurdle_wrap(phi, base_info(base, gaps)),
          kMcTag, m};
}

Inversion invert(const FisherMatrix& f) {
  const Eigen::MatrixXd& a = f.entries;
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw std::invalid_argument("invert: matrix must be square and non-empty");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  if (es.info() != Eigen::Success) {
    throw std::domain_error("invert: eigendecomposition failed");
  }
  Eigen::VectorXd lam = es.eigenvalues();
  double max_abs = lam.cwiseAbs().maxCoeff();
  double min_abs = lam.cwiseAbs().minCoeff();
  double cutoff = 1000.0 * std::numeric_limits<double>::epsilon() * max_abs;
  Inversion out;
  out.min_eigenvalue = lam.minCoeff();
  out.condition = min_abs > 0.0 ? max_abs / min_abs
                                : std::numeric_limits<double>::infinity();
  out.singular = false;
  Eigen::VectorXd inv_lam(lam.size());
  for (long i = 0; i < lam.size(); ++i) {
    if (std::abs(lam(i)) < cutoff) {
      inv_lam(i) = 0.0;
      out.singular = true;
    } else {
      inv_lam(i) = 1.0 / lam(i);
    }
  }
  out.inverse = es.eigenvectors() * inv_lam.asDiagonal() *
                es.eigenvectors().transpose();
  return out;
}

double frobenius_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("frobenius_distance: shape mismatch");
  }
  return (a - b).norm();
}

double max_ci_length_change(const Eigen::MatrixXd& a_inv,
                            const Eigen::MatrixXd& b_inv) {
  if (a_inv.rows() != b_inv.rows() || a_inv.cols() != b_inv.cols() ||
      a_inv.rows() != a_inv.cols()) {
    throw std::invalid_argument("max_ci_length_change: shape mismatch");
  }
  double worst = 0.0;
  for (long k = 0; k < a_inv.rows(); ++k) {
    double da = a_inv(k, k);
    double db = b_inv(k, k);
    if (da < 0.0 || db < 0.0) {
      throw std::domain_error(
          "max_ci_length_change: negative diagonal (input is not an inverse "
          "information matrix)");
    }
    worst = std::max(worst, std::abs(std::sqrt(da) - std::sqrt(db)));
  }
  return worst;
}

CiSet wald_ci(const std::vector<double>& estimates, const FisherMatrix& f,
              std::size_t n_obs, double level) {
  if (n_obs == 0) throw std::invalid_argument("wald_ci: N must be positive");
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("wald_ci: level must lie in (0,1)");
  }
  if (long(estimates.size()) != f.entries.rows()) {
    throw std::invalid_argument("wald_ci: estimate count does not match F");
  }
  Inversion inv = invert(f);
  double z = normal_quantile(0.5 * (1.0 + level));
  CiSet out;
  out.labels = f.labels;
  out.estimate = estimates;
  out.level = level;
  out.n_obs = n_obs;
  out.singular = inv.singular;
  out.lower.resize(estimates.size());
  out.upper.resize(estimates.size());
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    double d = inv.inverse(long(k), long(k));
    double se = std::sqrt(std::max(d, 0.0) / double(n_obs));
    out.lower[k] = estimates[k] - z * se;
    out.upper[k] = estimates[k] + z * se;
  }
  return out;
}

}  // namespace trifree::fisher
