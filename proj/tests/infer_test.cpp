#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "trifree/counts.hpp"
#include "trifree/infer.hpp"
#include "trifree/rng.hpp"
#include "trifree/specfun.hpp"

namespace counts = trifree::counts;
namespace fi = trifree::fisher;
namespace in = trifree::infer;
namespace sf = trifree::specfun;

namespace {

std::vector<long> simulate(const counts::CountModel& model, std::uint64_t seed,
                           std::uint64_t stream, std::size_t n) {
  trifree::rng::Stream s(seed, stream);
  return counts::sample(model, s, n);
}

in::Dataset intercept_only(std::vector<long> responses) {
  in::Dataset d;
  d.responses = std::move(responses);
  d.covariates.resize(long(d.responses.size()), 0);
  return d;
}

}  // namespace

TEST_CASE("family names round trip") {
  using in::Family;
  for (Family f : {Family::nb, Family::bnb, Family::zinb, Family::zibnb,
                   Family::zanb, Family::zabnb}) {
    auto back = in::family_from_name(in::family_name(f));
    REQUIRE(back.has_value());
    CHECK(*back == f);
  }
  CHECK(!in::family_from_name("weibull").has_value());
  CHECK(in::param_count(Family::nb) == 2);
  CHECK(in::param_count(Family::zibnb) == 4);
  CHECK(in::param_labels(Family::zinb) ==
        std::vector<std::string>{"phi", "nu", "p"});
  CHECK(in::param_labels(Family::zabnb) ==
        std::vector<std::string>{"phi", "nu", "alpha", "beta"});
}

TEST_CASE("model construction validates parameters") {
  auto m = in::make_model(in::Family::zinb, {0.4, 10.0, 0.1});
  CHECK(counts::pmf(m, 0) > 0.0);
  CHECK_THROWS_AS((void)in::make_model(in::Family::zinb, {1.2, 10.0, 0.1}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)in::make_model(in::Family::nb, {10.0}),
                  std::invalid_argument);
}

TEST_CASE("links invert and differentiate consistently") {
  using in::Link;
  for (Link link : {Link::logit, Link::probit, Link::log}) {
    auto back = in::link_from_name(in::link_name(link));
    REQUIRE(back.has_value());
    CHECK(*back == link);
    for (double v : {0.05, 0.3, 0.5, 0.9}) {
      const double value = (link == Link::log) ? v * 10.0 : v;
      const double eta = in::link_apply(link, value);
      CHECK(in::link_invert(link, eta) ==
            doctest::Approx(value).epsilon(1e-10));
      const double h = 1e-6;
      const double fd =
          (in::link_invert(link, eta + h) - in::link_invert(link, eta - h)) /
          (2.0 * h);
      CHECK(in::link_derivative(link, eta) ==
            doctest::Approx(fd).epsilon(1e-6));
    }
  }
  CHECK(in::link_apply(Link::logit, 0.5) == 0.0);
  CHECK(in::link_apply(Link::probit, 0.5) == 0.0);
  // The probit scale is the same normal quantile the Wald intervals use.
  CHECK(in::link_apply(Link::probit, 0.975) ==
        doctest::Approx(sf::normal_quantile(0.975)).epsilon(1e-15));
  CHECK_THROWS_AS((void)in::link_apply(Link::logit, 1.0), std::domain_error);
  CHECK_THROWS_AS((void)in::link_apply(Link::probit, -0.1), std::domain_error);
  CHECK_THROWS_AS((void)in::link_apply(Link::log, 0.0), std::domain_error);
}

TEST_CASE("log-likelihood matches the high-precision reference") {
  const std::vector<long> data{0, 0, 1, 3, 7};
  CHECK(in::loglik(in::Family::zinb, {0.3, 2.0, 0.4}, data) ==
        doctest::Approx(-9.8014318603925745).epsilon(1e-12));
  const std::vector<long> zeros{0, 0, 0, 0};
  CHECK(in::loglik(in::Family::zinb, {0.3, 2.0, 0.4}, zeros) ==
        doctest::Approx(-3.5469277185304426).epsilon(1e-12));

  // Consistency with the per-point density for another family.
  counts::CountModel m{counts::BetaNegBinomial{4.733, 4.504, 4.733}};
  double direct = 0.0;
  for (long y : data) direct += counts::log_pmf(m, y);
  CHECK(in::loglik(in::Family::bnb, {4.733, 4.504, 4.733}, data) ==
        doctest::Approx(direct).epsilon(1e-10));

  CHECK_THROWS_AS((void)in::loglik(in::Family::zinb, {0.3, -2.0, 0.4}, data),
                  std::invalid_argument);
}

TEST_CASE("nb fits recover the truth within the documented spread") {
  const counts::CountModel truth{counts::NegBinomial{10.0, 0.1}};
  int inside = 0;
  int converged = 0;
  for (int r = 0; r < 50; ++r) {
    auto data = simulate(truth, 8675309, std::uint64_t(r), 1000);
    auto fit = in::fit_probabilistic(in::Family::nb, data);
    if (!fit.converged) continue;
    ++converged;
    const double nu = fit.params[0], p = fit.params[1];
    if (nu >= 9.119 && nu <= 11.078 && p >= 0.092 && p <= 0.110) ++inside;
  }
  CHECK(converged == 50);
  CHECK(inside >= 45);
}

TEST_CASE("fitted likelihood dominates the truth's likelihood") {
  const counts::CountModel truth{counts::ZeroInflated{0.4, counts::NegBinomial{10.0, 0.1}}};
  auto data = simulate(truth, 424242, 0, 800);
  auto fit = in::fit_probabilistic(in::Family::zinb, data);
  REQUIRE(fit.converged);
  CHECK(fit.grad_norm < 1e-5);
  const double at_truth = in::loglik(in::Family::zinb, {0.4, 10.0, 0.1}, data);
  CHECK(fit.loglik >= at_truth - 1e-9);
  CHECK(fit.loglik == doctest::Approx(in::loglik(in::Family::zinb, fit.params,
                                                 data)).epsilon(1e-12));
}

TEST_CASE("fitting is deterministic") {
  const counts::CountModel truth{counts::NegBinomial{4.0, 0.3}};
  auto data = simulate(truth, 777, 0, 500);
  auto a = in::fit_probabilistic(in::Family::nb, data);
  auto b = in::fit_probabilistic(in::Family::nb, data);
  REQUIRE(a.converged);
  CHECK(a.params == b.params);
  CHECK(a.loglik == b.loglik);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("information criteria follow their formulas") {
  const counts::CountModel truth{counts::NegBinomial{4.0, 0.3}};
  auto data = simulate(truth, 1234, 1, 400);
  auto fit = in::fit_probabilistic(in::Family::nb, data);
  REQUIRE(fit.converged);
  const double k = double(fit.params.size());
  CHECK(in::aic(fit) == doctest::Approx(2.0 * k - 2.0 * fit.loglik));
  CHECK(in::bic(fit, data.size()) ==
        doctest::Approx(k * std::log(double(data.size())) - 2.0 * fit.loglik));
}

TEST_CASE("fit preconditions are enforced") {
  CHECK_THROWS_AS(
      (void)in::fit_probabilistic(in::Family::nb, {1, 2, 3}),
      std::invalid_argument);
  const std::vector<long> zeros(40, 0);
  CHECK_THROWS_AS((void)in::fit_probabilistic(in::Family::zinb, zeros),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)in::fit_probabilistic(in::Family::zanb, zeros),
                  std::invalid_argument);
}

TEST_CASE("information dispatch at the fitted parameters") {
  const counts::CountModel truth{counts::ZeroInflated{0.4, counts::NegBinomial{10.0, 0.1}}};
  auto data = simulate(truth, 5150, 0, 800);
  auto fit = in::fit_probabilistic(in::Family::zinb, data);
  REQUIRE(fit.converged);
  auto f = in::fim_at(fit, 5000);
  auto direct = fi::fim_zinb(fit.params[0], fit.params[1], fit.params[2], 5000);
  CHECK((f.entries - direct.entries).norm() == 0.0);
  CHECK(f.labels == direct.labels);

  in::MleFit bnb_fit{in::Family::bnb,
                     in::param_labels(in::Family::bnb),
                     {4.733, 4.504, 4.733},
                     0.0,
                     true,
                     0,
                     0.0};
  CHECK_THROWS_AS((void)in::fim_at(bnb_fit, 5000), std::invalid_argument);
}

TEST_CASE("coefficient names stack blocks over the design") {
  in::Dataset d;
  d.responses = {1, 2, 3};
  d.covariates.resize(3, 2);
  d.covariates << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  d.column_names = {"age", "dose"};
  in::RegressionSpec spec{in::Family::zinb, in::Link::probit};
  CHECK(in::coefficient_names(spec, d) ==
        std::vector<std::string>{"phi:(Intercept)", "phi:age", "phi:dose",
                                 "nu:(Intercept)", "nu:age", "nu:dose",
                                 "p:(Intercept)", "p:age", "p:dose"});
  CHECK(in::block_links(spec) ==
        std::vector<in::Link>{in::Link::probit, in::Link::log,
                              in::Link::logit});
}

TEST_CASE("intercept-only regression agrees with the probabilistic fit") {
  const counts::CountModel truth{counts::ZeroInflated{0.4, counts::NegBinomial{10.0, 0.1}}};
  auto data = simulate(truth, 90210, 0, 600);
  auto prob = in::fit_probabilistic(in::Family::zinb, data);
  REQUIRE(prob.converged);

  in::RegressionSpec spec{in::Family::zinb, in::Link::logit};
  auto reg = in::fit_regression(spec, intercept_only(data));
  REQUIRE(reg.converged);
  REQUIRE(reg.params.size() == 3);
  CHECK(in::link_invert(in::Link::logit, reg.params[0]) ==
        doctest::Approx(prob.params[0]).epsilon(1e-4));
  CHECK(std::exp(reg.params[1]) == doctest::Approx(prob.params[1]).epsilon(1e-4));
  CHECK(in::link_invert(in::Link::logit, reg.params[2]) ==
        doctest::Approx(prob.params[2]).epsilon(1e-4));

  // The zero-link choice cannot move an intercept-only MLE.
  auto probit_reg = in::fit_regression(
      in::RegressionSpec{in::Family::zinb, in::Link::probit},
      intercept_only(data));
  REQUIRE(probit_reg.converged);
  CHECK(in::link_invert(in::Link::probit, probit_reg.params[0]) ==
        doctest::Approx(in::link_invert(in::Link::logit, reg.params[0]))
            .epsilon(1e-3));
}

TEST_CASE("fitted parameters apply the links rowwise") {
  in::RegressionSpec spec{in::Family::zinb, in::Link::probit};
  in::Dataset d = intercept_only({0, 1, 2, 3});
  Eigen::VectorXd coef(3);
  coef << -0.5, 2.0, -1.0;
  auto rows = in::fitted_parameters(spec, coef, d);
  REQUIRE(rows.rows() == 4);
  REQUIRE(rows.cols() == 3);
  for (long i = 0; i < 4; ++i) {
    CHECK(rows(i, 0) ==
          doctest::Approx(in::link_invert(in::Link::probit, -0.5)).epsilon(1e-14));
    CHECK(rows(i, 1) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
    CHECK(rows(i, 2) ==
          doctest::Approx(in::link_invert(in::Link::logit, -1.0)).epsilon(1e-14));
  }
}

TEST_CASE("regression information is the link-chained parameter information") {
  const counts::CountModel truth{counts::ZeroInflated{0.4, counts::NegBinomial{10.0, 0.1}}};
  auto data = simulate(truth, 31337, 0, 600);
  in::RegressionSpec spec{in::Family::zinb, in::Link::probit};
  auto fit = in::fit_regression(spec, intercept_only(data));
  REQUIRE(fit.converged);

  auto f = in::regression_fim(spec, fit, intercept_only(data), 4000);
  REQUIRE(f.entries.rows() == 3);

  // Intercept-only: every observation shares one parameter row, so the
  // aggregate is exactly J^T F J with J the diagonal of link slopes.
  const double phi = in::link_invert(in::Link::probit, fit.params[0]);
  const double nu = std::exp(fit.params[1]);
  const double p = in::link_invert(in::Link::logit, fit.params[2]);
  auto base = fi::fim_zinb(phi, nu, p, 4000);
  Eigen::Vector3d slopes(in::link_derivative(in::Link::probit, fit.params[0]),
                         in::link_derivative(in::Link::log, fit.params[1]),
                         in::link_derivative(in::Link::logit, fit.params[2]));
  Eigen::MatrixXd want =
      slopes.asDiagonal() * base.entries * slopes.asDiagonal();
  CHECK((f.entries - want).norm() < 1e-10 * want.norm());
}

TEST_CASE("rank-deficient designs are rejected by name") {
  in::Dataset d;
  d.responses = std::vector<long>(40, 1);
  for (std::size_t i = 0; i < d.responses.size(); i += 3) d.responses[i] = 0;
  d.covariates.resize(40, 2);
  for (long i = 0; i < 40; ++i) {
    d.covariates(i, 0) = double(i % 5);
    d.covariates(i, 1) = 2.0 * double(i % 5);  // collinear with the first
  }
  d.column_names = {"raw", "doubled"};
  in::RegressionSpec spec{in::Family::zinb, in::Link::logit};
  try {
    (void)in::fit_regression(spec, d);
    FAIL("expected a rank-deficiency rejection");
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    CHECK(what.find("rank-deficient") != std::string::npos);
    // One of the two collinear columns must be named as dependent.
    const bool named = what.find("raw") != std::string::npos ||
                       what.find("doubled") != std::string::npos;
    CHECK(named);
  }
}
