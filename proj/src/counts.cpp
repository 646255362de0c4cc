#include "trifree/counts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "trifree/errors.hpp"
#include "trifree/kahan.hpp"
#include "trifree/specfun.hpp"

namespace trifree::counts {

namespace {

using specfun::digamma;
using specfun::log_beta;
using specfun::log_gamma;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLn2 = 0.69314718055994530942;

// Survival values above this threshold come from the forward complement
// 1 - sum(pmf); below it the complement has lost too many leading digits
// and entries are rebuilt from anchored tail sums instead.
constexpr double kDeepSwitch = 1e-4;

// Anchors sit at multiples of kAnchorChunk so that every table over the
// same model computes every deep entry through the identical chain of
// operations, independent of where the table happens to end.
constexpr long kAnchorChunk = 512;

// Forward terms per unbounded tail sum before handing the remainder to the
// integral closure (only sub-geometric tails ever get that far).
constexpr long kAnchorMaxTerms = 4096;

// 64-point Gauss-Legendre nodes and weights on [0,1] for the tail closure.
constexpr double kGlNodes[64] = {
    0.0003474791321139302715, 0.001829941614022360327, 0.00449331426162783963, 0.008331873057687021534,
    0.01333658610504451813, 0.01949560017397314054, 0.02679431257079859197, 0.03521541393403021209,
    0.04473893146074859712, 0.05534227700244294707, 0.06700030092295359012, 0.07968535187370981862,
    0.09336734243860122013, 0.1080138205283292962, 0.1235900463697340517, 0.1400590749141945866,
    0.1573818434728833787, 0.1755172643726713301, 0.1944223224138033749, 0.2140521768986829829,
    0.2343602679900527272, 0.2552984271464735213, 0.276816991373267956, 0.2988649210180041982,
    0.321389920831165942, 0.3443385640048945219, 0.3676564188956162918, 0.3912881781299964579,
    0.415177789788003591, 0.4392685903519397228, 0.4635034391061004803, 0.4878248536682877837,
    0.5121751463317122163, 0.5364965608938995197, 0.5607314096480602772, 0.584822210211996409,
    0.6087118218700035421, 0.6323435811043837082, 0.6556614359951054781, 0.678610079168834058,
    0.7011350789819958018, 0.723183008626732044, 0.7447015728535264787, 0.7656397320099472728,
    0.7859478231013170171, 0.8055776775861966251, 0.8244827356273286699, 0.8426181565271166213,
    0.8599409250858054134, 0.8764099536302659483, 0.8919861794716707038, 0.9066326575613987799,
    0.9203146481262901814, 0.9329996990770464099, 0.9446577229975570529, 0.9552610685392514029,
    0.9647845860659697879, 0.973205687429201408, 0.9805043998260268595, 0.9866634138949554819,
    0.9916681269423129785, 0.9955066857383721604, 0.9981700583859776397, 0.9996525208678860697,
};
constexpr double kGlWeights[64] = {
    0.0008916403608482164736, 0.002073516630281233818, 0.003252228984489181428, 0.004423379913181973862,
    0.005584069730065564409, 0.006731523948359321299, 0.007863015238012359661, 0.008975857887848671543,
    0.01006741157676510469, 0.01113508690419162708, 0.01217635128435543667, 0.01318873485752732934,
    0.01416983630712974161, 0.01511732853620123943, 0.01602896417742577679, 0.0169025809185708047,
    0.01773610662844119191, 0.01852756427012002302, 0.01927507658930781456, 0.01997687056636017069,
    0.02063128162131176431, 0.0212367575618267945, 0.02179186226466172669, 0.02229527908187828153,
    0.02274581396370907224, 0.02314239829065720865, 0.02348409140810500866, 0.02377008285741515433,
    0.02399969429822915386, 0.02417238111740147858, 0.02428773372075171347, 0.02434547850456986019,
    0.02434547850456986019, 0.02428773372075171347, 0.02417238111740147858, 0.02399969429822915386,
    0.02377008285741515433, 0.02348409140810500866, 0.02314239829065720865, 0.02274581396370907224,
    0.02229527908187828153, 0.02179186226466172669, 0.0212367575618267945, 0.02063128162131176431,
    0.01997687056636017069, 0.01927507658930781456, 0.01852756427012002302, 0.01773610662844119191,
    0.0169025809185708047, 0.01602896417742577679, 0.01511732853620123943, 0.01416983630712974161,
    0.01318873485752732934, 0.01217635128435543667, 0.01113508690419162708, 0.01006741157676510469,
    0.008975857887848671543, 0.007863015238012359661, 0.006731523948359321299, 0.005584069730065564409,
    0.004423379913181973862, 0.003252228984489181428, 0.002073516630281233818, 0.0008916403608482164736,
};

void check(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void validate_base(const BaseModel& b) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NegBinomial>) {
          check(m.nu > 0.0 && std::isfinite(m.nu), "NegBinomial: nu must be positive and finite");
          check(m.p > 0.0 && m.p < 1.0, "NegBinomial: p must lie in (0,1)");
        } else if constexpr (std::is_same_v<T, BetaNegBinomial>) {
          check(m.nu > 0.0 && std::isfinite(m.nu), "BetaNegBinomial: nu must be positive and finite");
          check(m.alpha > 0.0 && std::isfinite(m.alpha), "BetaNegBinomial: alpha must be positive and finite");
          check(m.beta > 0.0 && std::isfinite(m.beta), "BetaNegBinomial: beta must be positive and finite");
        } else if constexpr (std::is_same_v<T, Binomial>) {
          check(m.n >= 0, "Binomial: n must be >= 0");
          check(m.p > 0.0 && m.p < 1.0, "Binomial: p must lie in (0,1)");
        } else {
          check(m.n >= 0, "BetaBinomial: n must be >= 0");
          check(m.alpha > 0.0 && std::isfinite(m.alpha), "BetaBinomial: alpha must be positive and finite");
          check(m.beta > 0.0 && std::isfinite(m.beta), "BetaBinomial: beta must be positive and finite");
        }
      },
      b);
}

// Largest support point, or -1 for unbounded support.
long base_finite_end(const BaseModel& b) {
  if (const auto* bin = std::get_if<Binomial>(&b)) return bin->n;
  if (const auto* bb = std::get_if<BetaBinomial>(&b)) return bb->n;
  return -1;
}

double base_log_pmf(const BaseModel& b, long y) {
  if (y < 0) return kNegInf;
  double yd = double(y);
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NegBinomial>) {
          return log_gamma(m.nu + yd) - log_gamma(yd + 1.0) - log_gamma(m.nu) +
                 m.nu * std::log(m.p) + yd * std::log1p(-m.p);
        } else if constexpr (std::is_same_v<T, BetaNegBinomial>) {
          return log_gamma(m.nu + yd) - log_gamma(yd + 1.0) - log_gamma(m.nu) +
                 log_beta(m.nu + m.alpha, yd + m.beta) - log_beta(m.alpha, m.beta);
        } else if constexpr (std::is_same_v<T, Binomial>) {
          if (y > m.n) return kNegInf;
          double nd = double(m.n);
          return log_gamma(nd + 1.0) - log_gamma(yd + 1.0) - log_gamma(nd - yd + 1.0) +
                 yd * std::log(m.p) + (nd - yd) * std::log1p(-m.p);
        } else {
          if (y > m.n) return kNegInf;
          double nd = double(m.n);
          return log_gamma(nd + 1.0) - log_gamma(yd + 1.0) - log_gamma(nd - yd + 1.0) +
                 log_beta(yd + m.alpha, nd - yd + m.beta) - log_beta(m.alpha, m.beta);
        }
      },
      b);
}

// f(y+1)/f(y); zero once y is at or past the support end.
double base_ratio(const BaseModel& b, long y) {
  double yd = double(y);
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NegBinomial>) {
          return (m.nu + yd) * (1.0 - m.p) / (yd + 1.0);
        } else if constexpr (std::is_same_v<T, BetaNegBinomial>) {
          return (m.nu + yd) * (m.beta + yd) /
                 ((yd + 1.0) * (m.nu + m.alpha + m.beta + yd));
        } else if constexpr (std::is_same_v<T, Binomial>) {
          if (y >= m.n) return 0.0;
          return (double(m.n) - yd) / (yd + 1.0) * (m.p / (1.0 - m.p));
        } else {
          if (y >= m.n) return 0.0;
          return (double(m.n) - yd) * (m.alpha + yd) /
                 ((yd + 1.0) * (double(m.n) - 1.0 - yd + m.beta));
        }
      },
      b);
}

// Upper bound on every ratio f(k+1)/f(k) for k >= y.  Lets a tail sum stop
// with a geometric remainder bound even where ratios are still rising
// toward their limit; 1.0 disables the early stop.
double base_ratio_sup(const BaseModel& b, long y) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NegBinomial>) {
          // Ratios are monotone toward 1-p (up for nu<1, down for nu>1).
          return std::max(base_ratio(b, y), 1.0 - m.p);
        } else if constexpr (std::is_same_v<T, Binomial>) {
          return base_ratio(b, y);  // strictly decreasing in y
        } else {
          return 1.0;
        }
      },
      b);
}

// Continuous extension of log f at real argument t (tail closure only; the
// finitely supported families never reach it).
double base_log_density(const BaseModel& b, double t) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NegBinomial>) {
          return log_gamma(m.nu + t) - log_gamma(t + 1.0) - log_gamma(m.nu) +
                 m.nu * std::log(m.p) + t * std::log1p(-m.p);
        } else if constexpr (std::is_same_v<T, BetaNegBinomial>) {
          return log_gamma(m.nu + t) - log_gamma(t + 1.0) - log_gamma(m.nu) +
                 log_beta(m.nu + m.alpha, t + m.beta) - log_beta(m.alpha, m.beta);
        } else {
          throw std::logic_error("tail closure reached a finite-support family");
        }
      },
      b);
}

double base_log_density_slope(const BaseModel& b, double t) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NegBinomial>) {
          return digamma(m.nu + t) - digamma(t + 1.0) + std::log1p(-m.p);
        } else if constexpr (std::is_same_v<T, BetaNegBinomial>) {
          return digamma(m.nu + t) - digamma(t + 1.0) + digamma(t + m.beta) -
                 digamma(m.nu + m.alpha + m.beta + t);
        } else {
          throw std::logic_error("tail closure reached a finite-support family");
        }
      },
      b);
}

// Remainder sum_{k > K} f(k) for tails the geometric cutoff cannot finish
// (ratios creeping up toward 1): midpoint-rule integral plus the leading
// Euler-Maclaurin correction,
//     sum ~ int_{K+1/2}^inf g(t) dt + g'(K+1/2)/24,
// with the integral mapped onto [0,1] by t = c w^(-1/a), a the local decay
// exponent -c (log g)'(c) - 1.  For power-law tails the mapped integrand is
// nearly constant; for exponential tails a grows like (decay rate)*c and
// the same map turns into the matching logarithmic transform.
double tail_closure(const BaseModel& b, double c) {
  double lc = base_log_density(b, c);
  if (!(lc > -745.0)) return 0.0;
  double slope = base_log_density_slope(b, c);
  double a = -slope * c - 1.0;
  if (!(a > 1e-3)) {
    throw ResourceError("survival tail: decay too slow to close the sum");
  }
  double inv_a = 1.0 / a;
  double log_jac = std::log(c * inv_a);
  Kahan acc;
  for (int panel = 0; panel < 2; ++panel) {
    double lo = panel == 0 ? 0.0 : 0.5;
    for (int i = 0; i < 64; ++i) {
      double w = lo + 0.5 * kGlNodes[i];
      double lw = std::log(w);
      double t = c * std::exp(-inv_a * lw);
      double lt = base_log_density(b, t);
      if (!(lt > -745.0)) continue;
      acc.add(0.5 * kGlWeights[i] * std::exp(lt + log_jac + (-inv_a - 1.0) * lw));
    }
  }
  double r = acc.value() + std::exp(lc) * slope / 24.0;
  return r > 0.0 ? r : 0.0;
}

// sum_{k > start} f(k) given f(start+1).  Pure in (model, start, seed);
// used by tables (recurrence-seeded) and by point survival queries.
double tail_sum_from(const BaseModel& b, long start, double f_next, long fin) {
  Kahan acc;
  double f = f_next;
  long cap = fin >= 0 ? fin + 1 : start + kAnchorMaxTerms;
  for (long k = start + 1; k <= cap; ++k) {
    if (f == 0.0) return acc.value();
    acc.add(f);
    double q = base_ratio_sup(b, k);
    if (q < 1.0) {
      double rem = f * q / (1.0 - q);
      if (rem < 1e-16 * acc.value()) return acc.value();
    }
    f *= base_ratio(b, k);
  }
  if (fin >= 0) return acc.value();
  return acc.value() + tail_closure(b, double(cap) + 0.5);
}

// Forward pmf recurrence with exact power-of-two rescaling so the chain
// survives dips below the double range; value() underflows to zero only
// when the true pmf is genuinely below ~5e-324.
struct ScaledPmf {
  double mantissa = 0.0;
  int exp2 = 0;

  static ScaledPmf from_log(double lp) {
    if (lp == kNegInf) return {0.0, 0};
    int e = 0;
    if (lp < -620.0) e = int(std::floor((lp + 620.0) / kLn2));
    return {std::exp(lp - double(e) * kLn2), e};
  }

  double value() const { return exp2 == 0 ? mantissa : std::ldexp(mantissa, exp2); }

  void renorm() {
    if (mantissa == 0.0) {
      exp2 = 0;
      return;
    }
    while (mantissa < 0x1p-512) {
      mantissa *= 0x1p512;
      exp2 -= 512;
    }
    while (mantissa > 0x1p512) {
      mantissa *= 0x1p-512;
      exp2 += 512;
    }
  }

  void step_up(const BaseModel& b, long y) {  // f(y) -> f(y+1)
    mantissa *= base_ratio(b, y);
    renorm();
  }

  void step_down(const BaseModel& b, long y) {  // f(y+1) -> f(y)
    double r = base_ratio(b, y);
    if (!(r > 0.0)) throw std::logic_error("downward pmf step left the support");
    mantissa /= r;
    renorm();
  }
};

double base_zero_prob(const BaseModel& b) { return std::exp(base_log_pmf(b, 0)); }

struct Unwrapped {
  enum class Kind { plain, zero_inflated, hurdle };
  BaseModel base;
  double scale;      // survival / positive-pmf multiplier
  double zero_mass;  // extra mass parked at zero (ZI), or exact p0 (hurdle)
  Kind kind;
};

Unwrapped unwrap(const CountModel& model) {
  return std::visit(
      [](const auto& m) -> Unwrapped {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ZeroInflated>) {
          return {m.base, 1.0 - m.phi, m.phi, Unwrapped::Kind::zero_inflated};
        } else if constexpr (std::is_same_v<T, Hurdle>) {
          double p0 = base_zero_prob(m.base);
          return {m.base, (1.0 - m.phi) / (1.0 - p0), m.phi, Unwrapped::Kind::hurdle};
        } else {
          return {BaseModel{m}, 1.0, 0.0, Unwrapped::Kind::plain};
        }
      },
      model);
}

// P(Y > y) for a base family, evaluated at one point.
double base_survival_point(const BaseModel& b, long y) {
  if (y < 0) return 1.0;
  long fin = base_finite_end(b);
  if (fin >= 0 && y >= fin) return 0.0;
  // Forward complement, keeping the running pmf for a possible tail pass.
  ScaledPmf f = ScaledPmf::from_log(base_log_pmf(b, 0));
  Kahan run(1.0);
  for (long k = 0; k <= y; ++k) {
    run.add(-f.value());
    f.step_up(b, k);
  }
  double s = run.value();
  if (s >= kDeepSwitch) return s;
  // Deep tail: the complement has cancelled away; sum the tail directly.
  return tail_sum_from(b, y, f.value(), fin);
}

}  // namespace

void validate(const CountModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ZeroInflated>) {
          check(m.phi > 0.0 && m.phi < 1.0, "ZeroInflated: phi must lie in (0,1)");
          validate_base(m.base);
        } else if constexpr (std::is_same_v<T, Hurdle>) {
          check(m.phi > 0.0 && m.phi < 1.0, "Hurdle: phi must lie in (0,1)");
          validate_base(m.base);
          if (base_zero_prob(m.base) >= 1.0 - 1e-12) {
            throw std::invalid_argument("Hurdle: base model has no mass above zero");
          }
        } else {
          validate_base(BaseModel{m});
        }
      },
      model);
}

double log_pmf(const CountModel& model, long y) {
  validate(model);
  if (y < 0) return kNegInf;
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ZeroInflated>) {
          if (y == 0) {
            return std::log(m.phi + (1.0 - m.phi) * base_zero_prob(m.base));
          }
          return std::log1p(-m.phi) + base_log_pmf(m.base, y);
        } else if constexpr (std::is_same_v<T, Hurdle>) {
          if (y == 0) return std::log(m.phi);
          double p0 = base_zero_prob(m.base);
          return std::log1p(-m.phi) - std::log1p(-p0) + base_log_pmf(m.base, y);
        } else {
          return base_log_pmf(BaseModel{m}, y);
        }
      },
      model);
}

double pmf(const CountModel& model, long y) { return std::exp(log_pmf(model, y)); }

namespace {

// Anchor at the closed-form zero cell, then accumulate log ratios.  Each
// step adds error on the scale of machine epsilon, so even thousand-step
// walks stay orders of magnitude quieter than a log-gamma call whose
// absolute error grows with the magnitude of the result.
double base_log_pmf_walk(const BaseModel& b, long y) {
  if (y < 0) return kNegInf;
  const long end = base_finite_end(b);
  if (end >= 0 && y > end) return kNegInf;
  Kahan acc;
  acc.add(base_log_pmf(b, 0));
  for (long k = 0; k < y; ++k) acc.add(std::log(base_ratio(b, k)));
  return acc.value();
}

std::vector<double> base_log_pmf_profile(const BaseModel& b, long y_max) {
  std::vector<double> out(static_cast<std::size_t>(y_max) + 1);
  const long end = base_finite_end(b);
  Kahan acc;
  acc.add(base_log_pmf(b, 0));
  out[0] = acc.value();
  for (long k = 0; k < y_max; ++k) {
    if (end >= 0 && k >= end) {
      out[static_cast<std::size_t>(k) + 1] = kNegInf;
      continue;
    }
    acc.add(std::log(base_ratio(b, k)));
    out[static_cast<std::size_t>(k) + 1] = acc.value();
  }
  return out;
}

}  // namespace

double log_pmf_walk(const CountModel& model, long y) {
  validate(model);
  if (y < 0) return kNegInf;
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ZeroInflated>) {
          if (y == 0) {
            return std::log(m.phi + (1.0 - m.phi) * base_zero_prob(m.base));
          }
          return std::log1p(-m.phi) + base_log_pmf_walk(m.base, y);
        } else if constexpr (std::is_same_v<T, Hurdle>) {
          if (y == 0) return std::log(m.phi);
          double p0 = base_zero_prob(m.base);
          return std::log1p(-m.phi) - std::log1p(-p0) +
                 base_log_pmf_walk(m.base, y);
        } else {
          return base_log_pmf_walk(BaseModel{m}, y);
        }
      },
      model);
}

std::vector<double> log_pmf_profile(const CountModel& model, long y_max) {
  validate(model);
  if (y_max < 0) throw std::invalid_argument("profile needs y_max >= 0");
  if (y_max >= kMaxTableEntries) {
    throw ResourceError("log-density profile exceeds the table cap");
  }
  return std::visit(
      [&](const auto& m) -> std::vector<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ZeroInflated>) {
          std::vector<double> out = base_log_pmf_profile(m.base, y_max);
          const double shift = std::log1p(-m.phi);
          for (std::size_t i = 1; i < out.size(); ++i) out[i] += shift;
          out[0] = std::log(m.phi + (1.0 - m.phi) * base_zero_prob(m.base));
          return out;
        } else if constexpr (std::is_same_v<T, Hurdle>) {
          std::vector<double> out = base_log_pmf_profile(m.base, y_max);
          const double p0 = base_zero_prob(m.base);
          const double shift = std::log1p(-m.phi) - std::log1p(-p0);
          for (std::size_t i = 1; i < out.size(); ++i) out[i] += shift;
          out[0] = std::log(m.phi);
          return out;
        } else {
          return base_log_pmf_profile(BaseModel{m}, y_max);
        }
      },
      model);
}

double zero_prob(const CountModel& model) {
  validate(model);
  return std::visit(
      [](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ZeroInflated>) {
          return m.phi + (1.0 - m.phi) * base_zero_prob(m.base);
        } else if constexpr (std::is_same_v<T, Hurdle>) {
          return m.phi;
        } else {
          return base_zero_prob(BaseModel{m});
        }
      },
      model);
}

double survival(const CountModel& model, long y) {
  validate(model);
  if (y < 0) return 1.0;
  Unwrapped u = unwrap(model);
  double s = base_survival_point(u.base, y);
  return u.kind == Unwrapped::Kind::plain ? s : u.scale * s;
}

std::optional<double> mean(const CountModel& model) {
  validate(model);
  return std::visit(
      [](const auto& m) -> std::optional<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NegBinomial>) {
          return m.nu * (1.0 - m.p) / m.p;
        } else if constexpr (std::is_same_v<T, BetaNegBinomial>) {
          if (m.alpha <= 1.0) return std::nullopt;
          return m.nu * m.beta / (m.alpha - 1.0);
        } else if constexpr (std::is_same_v<T, Binomial>) {
          return double(m.n) * m.p;
        } else if constexpr (std::is_same_v<T, BetaBinomial>) {
          return double(m.n) * m.alpha / (m.alpha + m.beta);
        } else if constexpr (std::is_same_v<T, ZeroInflated>) {
          auto mb = mean(std::visit([](const auto& x) { return CountModel{x}; }, m.base));
          if (!mb) return std::nullopt;
          return (1.0 - m.phi) * *mb;
        } else {
          auto mb = mean(std::visit([](const auto& x) { return CountModel{x}; }, m.base));
          if (!mb) return std::nullopt;
          return (1.0 - m.phi) * *mb / (1.0 - base_zero_prob(m.base));
        }
      },
      model);
}

std::optional<long> support_upper_bound(const CountModel& model) {
  long fin = base_finite_end(unwrap(model).base);
  if (fin < 0) return std::nullopt;
  return fin;
}

namespace {

long sample_base(const BaseModel& b, rng::Stream& stream) {
  return std::visit(
      [&](const auto& m) -> long {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, NegBinomial>) {
          double lambda = stream.next_gamma(m.nu, (1.0 - m.p) / m.p);
          return stream.next_poisson(lambda);
        } else if constexpr (std::is_same_v<T, BetaNegBinomial>) {
          double q = stream.next_beta(m.alpha, m.beta);
          // Guard the gamma scale against a beta draw rounding to an endpoint.
          q = std::min(std::max(q, 1e-300), 1.0 - 1e-16);
          double lambda = stream.next_gamma(m.nu, (1.0 - q) / q);
          return stream.next_poisson(lambda);
        } else if constexpr (std::is_same_v<T, Binomial>) {
          long c = 0;
          for (long i = 0; i < m.n; ++i) c += stream.next_double() < m.p;
          return c;
        } else {
          double q = stream.next_beta(m.alpha, m.beta);
          long c = 0;
          for (long i = 0; i < m.n; ++i) c += stream.next_double() < q;
          return c;
        }
      },
      b);
}

long sample_one_impl(const CountModel& model, rng::Stream& stream) {
  return std::visit(
      [&](const auto& m) -> long {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ZeroInflated>) {
          if (stream.next_double() < m.phi) return 0;
          return sample_base(m.base, stream);
        } else if constexpr (std::is_same_v<T, Hurdle>) {
          if (stream.next_double() < m.phi) return 0;
          for (;;) {
            long y = sample_base(m.base, stream);
            if (y > 0) return y;
          }
        } else {
          return sample_base(BaseModel{m}, stream);
        }
      },
      model);
}

}  // namespace

long sample_one(const CountModel& model, rng::Stream& stream) {
  validate(model);
  return sample_one_impl(model, stream);
}

std::vector<long> sample(const CountModel& model, rng::Stream& stream,
                         std::size_t count) {
  validate(model);
  std::vector<long> out(count);
  for (auto& y : out) y = sample_one_impl(model, stream);
  return out;
}

double pmf_weighted_tail(const CountModel& model, long from, long to,
                         const std::function<double(long)>& weight) {
  validate(model);
  Unwrapped u = unwrap(model);
  if (u.kind != Unwrapped::Kind::plain && from < 1) {
    throw std::invalid_argument("pmf_weighted_tail: wrapped models need from >= 1");
  }
  if (from < 0) throw std::invalid_argument("pmf_weighted_tail: from must be >= 0");
  long hi = to;
  long fin = base_finite_end(u.base);
  if (fin >= 0) hi = std::min(hi, fin);
  if (hi < from) return 0.0;
  ScaledPmf f = ScaledPmf::from_log(base_log_pmf(u.base, from));
  Kahan acc;
  for (long y = from; y <= hi; ++y) {
    acc.add(f.value() * weight(y));
    f.step_up(u.base, y);
  }
  return u.scale * acc.value();
}

double survival_weighted_tail(const CountModel& model, long from, long to,
                              const std::function<double(long)>& weight) {
  validate(model);
  Unwrapped u = unwrap(model);
  if (u.kind != Unwrapped::Kind::plain && from < 1) {
    throw std::invalid_argument("survival_weighted_tail: wrapped models need from >= 1");
  }
  if (from < 0) throw std::invalid_argument("survival_weighted_tail: from must be >= 0");
  long hi = to;
  long fin = base_finite_end(u.base);
  if (fin >= 0) hi = std::min(hi, fin - 1);  // P(Y > y) = 0 for y >= fin
  if (hi < from) return 0.0;
  // Downward pass: survival values grow as y falls, so the smallest terms
  // accumulate first.
  Kahan srun(base_survival_point(u.base, hi));
  ScaledPmf f = ScaledPmf::from_log(base_log_pmf(u.base, hi));
  Kahan acc;
  for (long y = hi;; --y) {
    acc.add(srun.value() * weight(y));
    if (y == from) break;
    srun.add(f.value());  // P(Y > y-1) = P(Y > y) + P(Y = y)
    f.step_down(u.base, y - 1);
  }
  return u.scale * acc.value();
}

TailTable::TailTable(const CountModel& model, long m) : model_(model), m_(m) {
  validate(model);
  if (m < 0) throw std::invalid_argument("TailTable: truncation must be >= 0");
  if (m + 2 > kMaxTableEntries) {
    throw ResourceError("TailTable: truncation exceeds the table entry cap");
  }

  Unwrapped u = unwrap(model);
  long fin = base_finite_end(u.base);

  // Anchors read one seed entry past the last anchor point.
  long a_top = kAnchorChunk * ((m + 1 + kAnchorChunk - 1) / kAnchorChunk);
  long ext = a_top + 2;
  std::vector<double> f(std::size_t(ext), 0.0);
  {
    ScaledPmf sp = ScaledPmf::from_log(base_log_pmf(u.base, 0));
    for (long y = 0; y < ext; ++y) {
      f[std::size_t(y)] = sp.value();
      sp.step_up(u.base, y);
    }
  }

  std::vector<double> sb(std::size_t(m + 2), 0.0);
  if (fin >= 0 && fin <= m + 1) {
    // Support ends inside the table: exact backward partial sums.
    double s = 0.0;
    for (long y = m + 1; y >= 0; --y) {
      sb[std::size_t(y)] = s;
      s += f[std::size_t(y)];
    }
  } else {
    long deep_start = -1;
    Kahan run(1.0);
    for (long y = 0; y <= m + 1; ++y) {
      run.add(-f[std::size_t(y)]);
      double s = run.value();
      if (s < kDeepSwitch) {
        deep_start = y;
        break;
      }
      sb[std::size_t(y)] = s;
    }
    long y = deep_start;
    while (y >= 0 && y <= m + 1) {
      long a = kAnchorChunk * ((y + kAnchorChunk - 1) / kAnchorChunk);
      double s = (fin >= 0 && a >= fin)
                     ? 0.0
                     : tail_sum_from(u.base, a, f[std::size_t(a + 1)], fin);
      for (long j = a;; --j) {
        if (j <= m + 1) sb[std::size_t(j)] = s;
        if (j == y) break;
        s += f[std::size_t(j)];
      }
      y = a + 1;
    }
  }

  pmf_.resize(std::size_t(m + 1));
  surv_.resize(std::size_t(m + 2));
  for (long y = 0; y <= m; ++y) pmf_[std::size_t(y)] = u.scale * f[std::size_t(y)];
  for (long y = 0; y <= m + 1; ++y) surv_[std::size_t(y)] = u.scale * sb[std::size_t(y)];
  if (u.kind == Unwrapped::Kind::zero_inflated) {
    pmf_[0] = u.zero_mass + u.scale * f[0];
  } else if (u.kind == Unwrapped::Kind::hurdle) {
    pmf_[0] = u.zero_mass;
  }
}

double TailTable::pmf(long y) const {
  if (y < 0 || y > m_) throw std::out_of_range("TailTable::pmf: index outside [0, M]");
  return pmf_[std::size_t(y)];
}

double TailTable::survival(long y) const {
  if (y == -1) return 1.0;
  if (y < -1 || y > m_ + 1) {
    throw std::out_of_range("TailTable::survival: index outside [-1, M+1]");
  }
  return surv_[std::size_t(y)];
}

}  // namespace trifree::counts
