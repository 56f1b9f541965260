#pragma once

// Shared test models and covariate paths.

#include "occuhmm/hmm/model.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace fixture {

using occuhmm::Family;
using occuhmm::HmmModel;

// Three well-separated Gaussian states driven by one covariate.
inline HmmModel three_state(int n_covariates = 1) {
  HmmModel m;
  m.n_states = 3;
  m.transition = occuhmm::TransitionCoefficients::zeros(3, n_covariates);
  const double b0[3][3] = {{0, -3, -3}, {-1, 0, -1.5}, {-1, -2.5, 0}};
  const double b1[3][3] = {{0, 1.5, 0}, {2.5, 0, 2}, {-0.5, -1, 0}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      m.transition.at(i, j, 0) = b0[i][j];
      for (int p = 1; p <= n_covariates; ++p) m.transition.at(i, j, p) = b1[i][j] / n_covariates;
    }
  m.emissions.channels = {{Family::gaussian, {0.0, 5.0, 10.0}, {1.0, 1.5, 2.0}}};
  m.initial_distribution = occuhmm::Vector::Constant(3, 1.0 / 3);
  return m;
}

// Unit-variance AR(1) path started from its stationary law.
inline std::vector<double> ar1_path(std::size_t T, double phi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> e(0.0, std::sqrt(1 - phi * phi));
  std::vector<double> z(T);
  double x = std::normal_distribution<double>(0.0, 1.0)(rng);
  for (std::size_t t = 0; t < T; ++t) {
    x = phi * x + e(rng);
    z[t] = x;
  }
  return z;
}

inline occuhmm::CovariateSeries ar1_covariate(std::size_t T, double phi, std::uint64_t seed, int columns = 1) {
  const auto z = ar1_path(T, phi, seed);
  occuhmm::CovariateSeries cov;
  cov.values.resize(static_cast<Eigen::Index>(T), columns);
  for (std::size_t t = 0; t < T; ++t)
    for (int c = 0; c < columns; ++c) cov.values(static_cast<Eigen::Index>(t), c) = z[t];
  return cov;
}

}  // namespace fixture
