#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "trifree/counts.hpp"
#include "trifree/expect.hpp"
#include "trifree/rng.hpp"
#include "trifree/specfun.hpp"

namespace counts = trifree::counts;
namespace ex = trifree::expect;
namespace sf = trifree::specfun;
using counts::CountModel;

namespace {

const counts::NegBinomial kNb{10.0, 0.1};

// Random test models spanning the unbounded families, driven by one
// reproducible stream.
CountModel random_model(trifree::rng::Stream& s) {
  const double u = s.next_double();
  const double nu = 0.5 + 19.5 * s.next_double();
  if (u < 0.34) {
    return counts::NegBinomial{nu, 0.05 + 0.9 * s.next_double()};
  }
  if (u < 0.67) {
    return counts::BetaNegBinomial{nu, 1.5 + 8.0 * s.next_double(),
                                   0.5 + 8.0 * s.next_double()};
  }
  return counts::ZeroInflated{
      0.05 + 0.9 * s.next_double(),
      counts::NegBinomial{nu, 0.05 + 0.9 * s.next_double()}};
}

double offset_of(const CountModel& m) {
  if (const auto* nb = std::get_if<counts::NegBinomial>(&m)) return nb->nu;
  if (const auto* bnb = std::get_if<counts::BetaNegBinomial>(&m)) {
    return bnb->nu;
  }
  if (const auto* zi = std::get_if<counts::ZeroInflated>(&m)) {
    if (const auto* nb = std::get_if<counts::NegBinomial>(&zi->base)) {
      return nb->nu;
    }
    return std::get<counts::BetaNegBinomial>(zi->base).nu;
  }
  return 1.0;
}

}  // namespace

TEST_CASE("series value matches the high-precision reference") {
  auto r = ex::psi1_trigamma_free(10.0, CountModel{kNb}, 1000000);
  CHECK(r.value == doctest::Approx(0.011042942703698313).epsilon(1e-12));
  CHECK(r.trigamma_evals == 1);
  REQUIRE(r.bound.has_value());
  CHECK(*r.bound >= 0.0);

  auto zi = ex::psi1_trigamma_free(
      10.0, CountModel{counts::ZeroInflated{0.4, kNb}}, 1000000);
  CHECK(zi.value == doctest::Approx(0.048692299894893286).epsilon(1e-12));

  auto d = ex::psi_digamma_expect(10.0, CountModel{kNb}, 100000);
  CHECK(d.value == doctest::Approx(4.5543376820607668).epsilon(1e-12));
}

TEST_CASE("truncation error is one-sided and within its bound") {
  trifree::rng::Stream s(314159, 0);
  int checked = 0;
  for (int i = 0; i < 150; ++i) {
    CountModel m = random_model(s);
    const double nu = offset_of(m);
    const long grid = 1 + long(s.next_double() * 300.0);
    const double ref =
        ex::psi1_trigamma_free(nu, m, ex::kDefaultMRef).value;
    const double est = ex::psi1_trigamma_free(nu, m, grid).value;
    const double bound = ex::theorem2_bound(nu, m, grid);
    const double err = est - ref;
    CHECK(err >= -1e-15);
    CHECK(err <= bound * (1.0 + 1e-12) + 1e-15);
    ++checked;
  }
  CHECK(checked == 150);
}

TEST_CASE("calibrated estimate lands inside the shrunken band") {
  trifree::rng::Stream s(271828, 1);
  for (int i = 0; i < 80; ++i) {
    CountModel m = random_model(s);
    const double nu = offset_of(m);
    const long grid = 1 + long(s.next_double() * 200.0);
    const double ref =
        ex::psi1_trigamma_free(nu, m, ex::kDefaultMRef).value;
    const double est = ex::psi1_calibrated(nu, m, grid).value;
    const double bound = ex::theorem2_bound(nu, m, grid);
    const double rho = ex::calibration_rho(nu, grid);
    const double worst = ex::calibration_worst_factor(rho, nu, grid);
    CHECK(worst < 1.0);
    CHECK(std::abs(est - ref) <= worst * bound + 1e-15);
  }
}

TEST_CASE("calibration weight has its closed-form corner value") {
  // At offset 1 and truncation 0 the optimal weight is 7/12.
  CHECK(ex::calibration_rho(1.0, 0) == doctest::Approx(7.0 / 12.0).epsilon(1e-15));
  // The weight always lies strictly between one half and one.
  for (double nu : {0.3, 1.0, 10.0}) {
    for (long m : {0L, 5L, 500L}) {
      double rho = ex::calibration_rho(nu, m);
      CHECK(rho > 0.5);
      CHECK(rho < 1.0);
    }
  }
}

TEST_CASE("finite-support expectation equals direct enumeration") {
  trifree::rng::Stream s(161803, 2);
  for (int i = 0; i < 40; ++i) {
    const long n = 1 + long(s.next_double() * 199.0);
    const double nu = 0.5 + 19.5 * s.next_double();
    CountModel m;
    if (s.next_double() < 0.5) {
      m = counts::Binomial{n, 0.05 + 0.9 * s.next_double()};
    } else {
      m = counts::BetaBinomial{n, 0.5 + 6.0 * s.next_double(),
                               0.5 + 6.0 * s.next_double()};
    }
    double direct = 0.0;
    for (long y = 0; y <= n; ++y) {
      direct += counts::pmf(m, y) * sf::trigamma(nu + double(y));
    }
    auto r = ex::psi1_exact_finite(nu, m);
    CHECK(r.value == doctest::Approx(direct).epsilon(1e-12));
    REQUIRE(r.bound.has_value());
    CHECK(*r.bound == 0.0);
  }
}

TEST_CASE("trigamma call counts are exact per method") {
  CountModel m{kNb};
  sf::trigamma_counter_enable(true);
  for (long grid : {10L, 1000L}) {
    sf::trigamma_counter_reset();
    auto free = ex::psi1_trigamma_free(10.0, m, grid);
    CHECK(sf::trigamma_evals() == 1);
    CHECK(free.trigamma_evals == 1);

    sf::trigamma_counter_reset();
    auto cal = ex::psi1_calibrated(10.0, m, grid);
    CHECK(sf::trigamma_evals() == 1);
    CHECK(cal.trigamma_evals == 1);

    sf::trigamma_counter_reset();
    auto gfwl = ex::psi1_gfwl(10.0, m, grid);
    CHECK(sf::trigamma_evals() == std::uint64_t(grid + 2));
    CHECK(gfwl.trigamma_evals == grid + 2);

    sf::trigamma_counter_reset();
    trifree::rng::Stream s(5, 0);
    auto mc = ex::psi1_monte_carlo(10.0, m, grid, s);
    CHECK(sf::trigamma_evals() == std::uint64_t(grid));
    CHECK(mc.trigamma_evals == grid);
  }
  sf::trigamma_counter_enable(false);
}

TEST_CASE("monte carlo is reproducible and statistically consistent") {
  CountModel m{kNb};
  trifree::rng::Stream s1(77, 3);
  trifree::rng::Stream s2(77, 3);
  auto a = ex::psi1_monte_carlo(10.0, m, 20000, s1);
  auto b = ex::psi1_monte_carlo(10.0, m, 20000, s2);
  CHECK(a.value == b.value);
  CHECK(!a.bound.has_value());
  // Sample-mean error scale is about 6e-5 here; allow five sigmas.
  CHECK(a.value == doctest::Approx(0.011042942703698313).epsilon(0.03));
}

TEST_CASE("truncation choice follows the mean rule and tolerance rule") {
  CountModel m{kNb};
  CHECK(ex::choose_m(10.0, m, ex::TruncationPolicy::default_rule()) == 181);

  CountModel z{counts::ZeroInflated{0.4, kNb}};
  CHECK(ex::choose_m(10.0, z, ex::TruncationPolicy::default_rule()) == 109);

  for (double tol : {1e-6, 1e-9, 1e-12}) {
    long chosen = ex::choose_m(10.0, m, ex::TruncationPolicy::tolerance(tol));
    CHECK(ex::theorem2_bound(10.0, m, chosen) <= tol);
    if (chosen > 0) {
      CHECK(ex::theorem2_bound(10.0, m, chosen - 1) > tol);
    }
  }
}

TEST_CASE("tail errors agree with value differences") {
  // Grids kept small enough that the tail dominates the cancellation noise
  // in the value difference.
  CountModel m{kNb};
  for (long grid : {25L, 60L, 100L}) {
    const double ref = ex::psi1_trigamma_free(10.0, m, ex::kDefaultMRef).value;
    CHECK(ex::tail_error(10.0, m, grid) ==
          doctest::Approx(ex::psi1_trigamma_free(10.0, m, grid).value - ref)
              .epsilon(1e-9));
    CHECK(ex::gfwl_tail_error(10.0, m, grid) ==
          doctest::Approx(ex::psi1_gfwl(10.0, m, grid).value - ref)
              .epsilon(1e-9));
  }
}

TEST_CASE("series gaps match their defining sums") {
  CountModel m{kNb};
  counts::TailTable table(m, 200);
  double sq = 0.0, lin = 0.0;
  for (long y = 0; y <= 200; ++y) {
    sq += table.survival(y) / ((10.0 + y) * (10.0 + y));
    lin += table.survival(y) / (10.0 + y);
  }
  CHECK(ex::series_gap_sq(10.0, table) == doctest::Approx(sq).epsilon(1e-13));
  CHECK(ex::series_gap(10.0, table) == doctest::Approx(lin).epsilon(1e-13));
}

TEST_CASE("degenerate point mass reduces to the trigamma value") {
  CountModel degenerate{counts::Binomial{0, 0.3}};
  auto r = ex::psi1_trigamma_free(2.5, degenerate, 10);
  CHECK(r.value == doctest::Approx(sf::trigamma(2.5)).epsilon(1e-15));
  auto e = ex::psi1_exact_finite(2.5, degenerate);
  CHECK(e.value == doctest::Approx(sf::trigamma(2.5)).epsilon(1e-15));
}

TEST_CASE("invalid inputs throw") {
  CountModel m{kNb};
  CHECK_THROWS_AS((void)ex::psi1_trigamma_free(-1.0, m, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)ex::psi1_trigamma_free(10.0, m, -1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)ex::psi1_exact_finite(10.0, m), std::invalid_argument);
}
