#pragma once

#include "occuhmm/dirichlet/spline.hpp"
#include "occuhmm/hmm/model.hpp"
#include "occuhmm/occupancy/curve.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace occuhmm {

// log Gamma(sum a) - sum log Gamma(a_i) + sum (a_i - 1) log x_i.
// Throws DomainError for boundary x and InputError for non-positive alpha.
double dirichlet_logpdf(std::span<const double> alpha, std::span<const double> x);

// Clamps every component to [eps, 1 - eps] and renormalises. Vectors with no
// component outside the band are returned unchanged.
std::vector<double> clip_simplex(std::span<const double> x, double epsilon = 1e-6);

struct DirichletSmoothConfig {
  int basis_dimension = 10;
  int degree = 3;
  double lower_quantile = 0.005;  // basis range over the covariate
  double upper_quantile = 0.995;
  std::size_t burn_in = 1000;
  double clip_epsilon = 1e-6;
  std::vector<double> log10_lambda_grid{-3, -2, -1, 0, 1, 2, 3, 4};
  int cv_folds = 5;
  int max_cycles = 3;  // coordinate sweeps of the per-state lambda search
  std::optional<std::vector<double>> fixed_lambda;  // skips cross-validation
  int max_iterations = 200;
  double rel_tol = 1e-8;
};

struct DirichletSmoothFit {
  SplineBasis basis;
  Matrix coefficients;  // K x N, column i holds f_i
  std::vector<double> lambda;
  double penalized_loglik = 0.0;
  double clip_epsilon = 1e-6;
  bool converged = false;
  std::size_t n_used = 0;      // time points entering the fit
  std::size_t n_dropped = 0;   // after burn-in, outside the basis range
  double cv_score = 0.0;       // held-out negative log-likelihood of the chosen lambda (0 if fixed)

  int n_states() const { return static_cast<int>(coefficients.cols()); }
  double roughness() const;  // sum_i c_i^T P c_i
};

// Penalised maximum likelihood for fixed smoothing parameters on a prepared
// design (rows b(z_t)) and clipped log responses. Uses Fisher scoring with
// step halving; `start` warm-starts the coefficients.
struct PenalizedFit {
  Matrix coefficients;
  double penalized_loglik = 0.0;
  bool converged = false;
  int iterations = 0;
};
PenalizedFit fit_dirichlet_penalized(const Matrix& design, const Matrix& log_x, const Matrix& penalty,
                                     std::span<const double> lambda, const Matrix* start = nullptr,
                                     int max_iterations = 200, double rel_tol = 1e-8);

// Penalised log-likelihood and its gradient with respect to the K x N
// coefficients (column-major flattening).
double dirichlet_penalized_objective(const Matrix& design, const Matrix& log_x, const Matrix& penalty,
                                     std::span<const double> lambda, const Matrix& coefficients,
                                     Matrix* gradient = nullptr);

DirichletSmoothFit fit_dirichlet_smooth(const StateProbSeries& probs, std::span<const double> covariate,
                                        const DirichletSmoothConfig& config = {});

// Dirichlet mean alpha(z) / sum alpha(z) on the grid. Throws
// ExtrapolationError naming the first grid point outside the basis range.
OccupancyCurve predict_occupancy(const DirichletSmoothFit& fit, std::span<const double> grid);

void write_dirichlet_fit(std::ostream& out, const DirichletSmoothFit& fit);
DirichletSmoothFit read_dirichlet_fit(std::istream& in);

}  // namespace occuhmm
