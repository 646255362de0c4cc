#pragma once

#include <Eigen/Dense>
#include <functional>

// Derivative-free minimization for smooth objectives whose gradients are
// not available in closed form: a simplex pre-search to escape poor
// starting points, then a quasi-Newton polish driven by central
// finite-difference gradients.  Deterministic: equal inputs give equal
// results.  Objectives may return +infinity (or NaN, treated the same)
// to mark infeasible points.

namespace trifree::optim {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct Result {
  Eigen::VectorXd x;
  double value;
  bool converged;   // gradient norm at x fell below the tolerance
  long iterations;  // simplex plus quasi-Newton iterations consumed
  double grad_norm;
};

struct Options {
  long max_iterations = 2000;
  double grad_tolerance = 1e-5;  // Euclidean norm of the FD gradient
  double fd_step = 1e-6;         // central-difference step per coordinate
};

// Central finite-difference gradient, step h per coordinate.
Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x,
                            double h);

Result minimize(const Objective& f, const Eigen::VectorXd& x0,
                const Options& options = {});

}  // namespace trifree::optim
