#pragma once

#include "occuhmm/estimation/optimizer.hpp"
#include "occuhmm/estimation/working_params.hpp"
#include "occuhmm/hmm/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace occuhmm {

struct FitConfig {
  OptimizerSettings optimizer;
  int restarts = 5;              // perturbed restarts on top of the initializer
  double restart_scale = 0.5;    // sd of the working-scale perturbation
  std::uint64_t seed = 1;
  bool estimate_initial = false;  // only with InitialPolicy::fixed
  bool sort_states = true;        // ascending first-channel location
  bool compute_covariance = true;
};

struct FitResult {
  HmmModel model;
  double loglik = 0.0;
  double initial_loglik = 0.0;
  bool converged = false;
  int n_evaluations = 0;
  int iterations = 0;
  int n_parameters = 0;
  double aic = 0.0;
  Vector working;                             // working vector of `model`
  std::vector<std::string> parameter_names;
  bool estimate_initial = false;
  std::optional<Matrix> working_covariance;  // inverse observed information
  Vector hessian_eigenvalues;                // of the negative log-likelihood Hessian
  std::string covariance_note;               // why the covariance is missing
};

// Data-driven starting model. Linear channels (gaussian, gamma) are split into
// N quantile bands, state i taking the i-th band's mean and within-band sd.
// von Mises channels use the bands of the first channel. Off-diagonal
// transition intercepts give total switching mass 0.1 per row; slopes are 0.
HmmModel initial_model(const ObservationSeries& obs, int n_states, const std::vector<Family>& families,
                       int n_covariates);

// Maximum likelihood over the working parameters with finite-difference
// gradients. The initializer is always one of the candidates, so the result's
// log-likelihood is never below loglik(init).
FitResult fit_mle(const ObservationSeries& obs, const CovariateSeries& cov, const HmmModel& init,
                  const FitConfig& config = {});

// Negative log-likelihood as a function of the working vector; +inf when the
// likelihood cannot be evaluated.
Objective negative_loglik_objective(const ObservationSeries& obs, const CovariateSeries& cov,
                                    const ParameterMap& map);

// Relabels states so that the first channel's locations ascend. Transition
// coefficients and any fixed initial distribution are permuted to match.
HmmModel sort_states_by_location(const HmmModel& model);

// Inverse of the finite-difference Hessian of `objective` at `x`. Throws
// SingularityError with an eigenvalue report when the Hessian is not safely
// positive definite.
struct CovarianceEstimate {
  Matrix covariance;
  Vector eigenvalues;
};
CovarianceEstimate inverse_hessian_covariance(const Objective& objective, const Vector& x);

// Square roots of the covariance diagonal, working scale.
Vector standard_errors(const FitResult& fit);
Vector standard_errors(const Objective& negative_loglik, const Vector& x);

}  // namespace occuhmm
