#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace gdm {

// Objective to minimize. Returns f(x) and writes the gradient into *grad.
// May return +inf (or throw NonFiniteUtility) for points outside the domain.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct BfgsOptions {
  double gradient_tolerance = 1e-5;  // max-norm
  int max_iterations = 500;
  double max_step = 5.0;  // max-norm of the first trial step of each line search
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
};

// Quasi-Newton minimization with inverse-Hessian BFGS updates and a
// strong-Wolfe line search. Never returns a point worse than x0.
BfgsResult minimize_bfgs(const Objective& objective, const Eigen::VectorXd& x0,
                         const BfgsOptions& options = {});

}  // namespace gdm
