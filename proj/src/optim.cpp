#include "trifree/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace trifree::optim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Non-finite objective values (NaN included) are treated as +infinity so
// the search backs away from infeasible regions instead of propagating
// poison through comparisons.
double guarded(const Objective& f, const Eigen::VectorXd& x) {
  double v = f(x);
  return std::isfinite(v) ? v : kInf;
}

struct SimplexOutcome {
  Eigen::VectorXd x;
  double value;
  long iterations;
};

// Nelder-Mead with the classic reflection/expansion/contraction/shrink
// coefficients (1, 2, 0.5, 0.5).  The initial simplex perturbs each
// coordinate by 0.1 * max(1, |x0_i|), which keeps the first moves
// proportionate whether the start is near zero or far from it.
SimplexOutcome simplex_search(const Objective& f, const Eigen::VectorXd& x0,
                              long budget) {
  const long n = x0.size();
  std::vector<Eigen::VectorXd> pts(std::size_t(n) + 1, x0);
  std::vector<double> vals(std::size_t(n) + 1);
  for (long i = 0; i < n; ++i) {
    pts[std::size_t(i) + 1](i) += 0.1 * std::max(1.0, std::abs(x0(i)));
  }
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = guarded(f, pts[i]);

  std::vector<std::size_t> order(pts.size());
  long used = 0;
  while (used < budget) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];

    // Relative spread of function values; once the simplex has collapsed
    // onto one level set the polish phase takes over.
    double spread = vals[worst] - vals[best];
    if (std::isfinite(spread) &&
        spread <= 1e-12 * (1.0 + std::abs(vals[best]))) {
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= double(n);

    ++used;
    Eigen::VectorXd reflected = centroid + (centroid - pts[worst]);
    double fr = guarded(f, reflected);
    if (fr < vals[best]) {
      Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[worst]);
      double fe = guarded(f, expanded);
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second_worst]) {
      pts[worst] = reflected;
      vals[worst] = fr;
      continue;
    }
    Eigen::VectorXd contracted = centroid + 0.5 * (pts[worst] - centroid);
    double fc = guarded(f, contracted);
    if (fc < vals[worst]) {
      pts[worst] = contracted;
      vals[worst] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = guarded(f, pts[i]);
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < vals.size(); ++i) {
    if (vals[i] < vals[best]) best = i;
  }
  return {pts[best], vals[best], used};
}

}  // namespace

Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x,
                            double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (long i = 0; i < x.size(); ++i) {
    const double xi = x(i);
    probe(i) = xi + h;
    double up = guarded(f, probe);
    probe(i) = xi - h;
    double down = guarded(f, probe);
    probe(i) = xi;
    g(i) = (std::isfinite(up) && std::isfinite(down))
               ? (up - down) / (2.0 * h)
               : 0.0;
  }
  return g;
}

Result minimize(const Objective& f, const Eigen::VectorXd& x0,
                const Options& options) {
  const long n = x0.size();
  const long budget = options.max_iterations;

  // Phase 1: simplex pre-search with half the budget.  It tolerates the
  // rough, cliff-ridden surfaces that finite-difference methods cannot
  // start on, and hands the polish phase a point in the right basin.
  SimplexOutcome pre = simplex_search(f, x0, budget / 2);

  Eigen::VectorXd x = pre.x;
  double fx = pre.value;
  long used = pre.iterations;

  // Phase 2: BFGS with Armijo backtracking on the finite-difference
  // gradient.  The inverse Hessian estimate starts at the identity and is
  // only updated when the curvature condition s'y > 0 holds, which keeps
  // it positive definite.
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g = fd_gradient(f, x, options.fd_step);
  double gnorm = g.norm();

  // The finite-difference gradient carries rounding noise proportional to
  // the objective's magnitude, so near the optimum the iterates wander
  // inside a noise ball.  The iterate with the smallest observed gradient
  // norm is the best certificate of stationarity, and an extended run of
  // sub-noise objective changes means the floor has been reached.
  Eigen::VectorXd x_best = x;
  double f_best = fx;
  double g_best = gnorm;

  while (used < budget && gnorm >= options.grad_tolerance) {
    ++used;
    const bool was_identity = h_inv.isIdentity(0.0);
    Eigen::VectorXd direction = -(h_inv * g);
    double slope = g.dot(direction);
    if (!(slope < 0.0)) {
      h_inv.setIdentity();
      direction = -g;
      slope = g.dot(direction);
      if (!(slope < 0.0)) break;
    }

    // Armijo with a cushion of a few ulps of the objective: near the
    // optimum the true per-step decrease falls below evaluation noise, and
    // without the cushion the search would reject every step long before
    // the gradient certificate is reached.
    const double cushion = 4.0 * kEps * (1.0 + std::abs(fx));
    double step = 1.0;
    double f_new = kInf;
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int half = 0; half < 60; ++half) {
      x_new = x + step * direction;
      f_new = guarded(f, x_new);
      if (f_new <= fx + 1e-4 * step * slope + cushion) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Steepest descent deserves one retry; if even that finds no
      // decrease the surface is rising in every probed direction.
      if (was_identity) break;
      h_inv.setIdentity();
      continue;
    }

    Eigen::VectorXd g_new = fd_gradient(f, x_new, options.fd_step);
    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd y = g_new - g;
    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && std::isfinite(sy)) {
      // Standard BFGS inverse update: H <- (I - r s y')H(I - r y s') + r s s'.
      double rho = 1.0 / sy;
      Eigen::MatrixXd outer = Eigen::MatrixXd::Identity(n, n) -
                              rho * s * y.transpose();
      h_inv = outer * h_inv * outer.transpose() +
              rho * s * s.transpose();
    }

    x = x_new;
    fx = f_new;
    g = g_new;
    gnorm = g.norm();
    if (gnorm < g_best) {
      x_best = x;
      f_best = fx;
      g_best = gnorm;
    }
  }

  return {x_best, f_best, g_best < options.grad_tolerance, used, g_best};
}

}  // namespace trifree::optim
