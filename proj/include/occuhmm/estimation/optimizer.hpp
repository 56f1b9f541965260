#pragma once

#include "occuhmm/hmm/model.hpp"

#include <functional>

namespace occuhmm {

using Objective = std::function<double(const Vector&)>;
using GradientFn = std::function<Vector(const Vector&)>;

struct OptimizerSettings {
  int max_iterations = 1000;
  // Converged when the relative objective change drops below rel_tol and the
  // gradient max-norm below grad_tol.
  double rel_tol = 1e-9;
  double grad_tol = 1e-5;
};

struct OptimizerResult {
  Vector x;
  double value = 0.0;
  Vector gradient;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
};

// Central differences with step 1e-6 * (1 + |x_i|).
Vector central_difference_gradient(const Objective& f, const Vector& x);

// Central second differences with step 1e-3 * (1 + |x_i|).
Matrix finite_difference_hessian(const Objective& f, const Vector& x);

// BFGS quasi-Newton minimisation with Armijo backtracking. Non-finite
// objective values are treated as +inf and rejected by the line search. The
// returned point is never worse than x0.
OptimizerResult minimize_bfgs(const Objective& f, const GradientFn& grad, Vector x0,
                              const OptimizerSettings& settings = {});

}  // namespace occuhmm
