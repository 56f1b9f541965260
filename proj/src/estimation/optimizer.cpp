#include "occuhmm/estimation/optimizer.hpp"

#include "occuhmm/error.hpp"

#include <cmath>
#include <limits>

namespace occuhmm {

namespace {

double safe(const Objective& f, const Vector& x, int& evaluations) {
  ++evaluations;
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

Vector central_difference_gradient(const Objective& f, const Vector& x) {
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x(i)));
    xp(i) = x(i) + h;
    const double up = f(xp);
    xp(i) = x(i) - h;
    const double down = f(xp);
    xp(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

Matrix finite_difference_hessian(const Objective& f, const Vector& x) {
  const auto n = x.size();
  Matrix h(n, n);
  Vector step(n);
  for (Eigen::Index i = 0; i < n; ++i) step(i) = 1e-3 * (1.0 + std::abs(x(i)));
  const double f0 = f(x);
  Vector xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    xp(i) = x(i) + step(i);
    const double up = f(xp);
    xp(i) = x(i) - step(i);
    const double down = f(xp);
    xp(i) = x(i);
    h(i, i) = (up - 2.0 * f0 + down) / (step(i) * step(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      xp(i) = x(i) + step(i);
      xp(j) = x(j) + step(j);
      const double pp = f(xp);
      xp(j) = x(j) - step(j);
      const double pm = f(xp);
      xp(i) = x(i) - step(i);
      const double mm = f(xp);
      xp(j) = x(j) + step(j);
      const double mp = f(xp);
      xp(i) = x(i);
      xp(j) = x(j);
      h(i, j) = h(j, i) = (pp - pm - mp + mm) / (4.0 * step(i) * step(j));
    }
  }
  return h;
}

OptimizerResult minimize_bfgs(const Objective& f, const GradientFn& grad, Vector x0,
                              const OptimizerSettings& settings) {
  OptimizerResult res;
  const auto n = x0.size();
  res.x = std::move(x0);
  res.value = safe(f, res.x, res.evaluations);
  if (!std::isfinite(res.value)) throw InputError("objective is not finite at the starting point");
  res.gradient = grad(res.x);
  res.evaluations += 2 * static_cast<int>(n);

  Matrix hinv = Matrix::Identity(n, n);
  bool scaled = false;
  for (res.iterations = 0; res.iterations < settings.max_iterations; ++res.iterations) {
    if (!res.gradient.allFinite()) break;
    Vector dir = -hinv * res.gradient;
    double slope = res.gradient.dot(dir);
    if (!(slope < 0)) {
      // Lost descent; restart from steepest descent.
      hinv.setIdentity();
      dir = -res.gradient;
      slope = res.gradient.dot(dir);
      if (!(slope < 0)) break;
    }
    // Cap the step so a poor Hessian estimate cannot jump far away.
    const double max_step = 10.0 * std::max(1.0, res.x.norm());
    if (dir.norm() > max_step) {
      dir *= max_step / dir.norm();
      slope = res.gradient.dot(dir);
    }

    double step = 1.0;
    Vector trial;
    double trial_value = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      trial = res.x + step * dir;
      trial_value = safe(f, trial, res.evaluations);
      if (trial_value <= res.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Vector trial_grad = grad(trial);
    res.evaluations += 2 * static_cast<int>(n);
    const Vector s = trial - res.x;
    const Vector y = trial_grad - res.gradient;
    const double rel_change = std::abs(res.value - trial_value) / std::max(1.0, std::abs(trial_value));
    res.x = trial;
    res.value = trial_value;
    res.gradient = trial_grad;

    if (rel_change < settings.rel_tol && res.gradient.cwiseAbs().maxCoeff() < settings.grad_tol) {
      res.converged = true;
      ++res.iterations;
      return res;
    }

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        hinv *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Matrix I = Matrix::Identity(n, n);
      hinv = (I - rho * s * y.transpose()) * hinv * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
  }
  res.converged = res.gradient.allFinite() && res.gradient.cwiseAbs().maxCoeff() < settings.grad_tol;
  return res;
}

}  // namespace occuhmm
