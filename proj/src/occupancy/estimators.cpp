#include "occuhmm/occupancy/estimators.hpp"

#include "occuhmm/error.hpp"
#include "occuhmm/hmm/recursions.hpp"
#include "occuhmm/hmm/tpm.hpp"
#include "occuhmm/occupancy/stationary.hpp"

#include <cmath>
#include <string>

namespace occuhmm {

OccupancyCurve hypothetical_stationary_curve(const HmmModel& model, std::span<const double> grid,
                                             std::span<const double> fixed_covariates, int covariate_index) {
  model.validate();
  const int p = model.n_covariates();
  if (p == 0) throw InputError("stationary curve needs a model with at least one covariate");
  if (covariate_index < 0 || covariate_index >= p) throw InputError("covariate index out of range");
  if (!fixed_covariates.empty() && fixed_covariates.size() != static_cast<std::size_t>(p))
    throw InputError("fixed covariates need one entry per covariate");
  if (fixed_covariates.empty() && p > 1)
    throw InputError("fixed values for the remaining covariates are required");

  OccupancyCurve curve;
  curve.grid.assign(grid.begin(), grid.end());
  curve.counts.assign(grid.size(), 0);
  curve.method = OccupancyMethod::stationary;
  curve.probs.resize(static_cast<Eigen::Index>(grid.size()), model.n_states);
  std::vector<double> z(static_cast<std::size_t>(p), 0.0);
  if (!fixed_covariates.empty()) z.assign(fixed_covariates.begin(), fixed_covariates.end());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    z[static_cast<std::size_t>(covariate_index)] = grid[k];
    curve.probs.row(static_cast<Eigen::Index>(k)) =
        stationary_distribution(tpm_from_covariates(model.transition, z)).transpose();
  }
  curve.validate();
  return curve;
}

OccupancyAccumulator accumulate_path_occupancy(const HmmModel& model, std::span<const double> path,
                                               const BinEdges& edges, std::size_t burn_in,
                                               std::size_t restart_every) {
  model.validate();
  if (model.n_covariates() != 1) throw InputError("path occupancy needs a single-covariate model");
  const int n = model.n_states;
  OccupancyAccumulator acc(edges, n);
  Matrix gamma(n, n);
  Vector delta(n), next(n);
  std::size_t since_start = 0;
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (!std::isfinite(path[t]))
      throw InputError("covariate path has a non-finite value at index " + std::to_string(t));
    const auto z = path.subspan(t, 1);
    if (t == 0 || (restart_every > 0 && t % restart_every == 0)) {
      delta = segment_start_distribution(model, z);
      since_start = 0;
    } else {
      fill_tpm(model.transition, z, gamma);
      next.noalias() = gamma.transpose() * delta;
      delta = next;
      ++since_start;
    }
    if (since_start >= burn_in) acc.add(path[t], delta);
  }
  return acc;
}

OccupancyCurve monte_carlo_truth(const HmmModel& model, const CovariateGenerator& generator,
                                 const MonteCarloConfig& config, std::uint64_t seed) {
  if (!generator) throw InputError("missing covariate generator");
  if (config.length <= config.burn_in) throw InputError("Monte Carlo length must exceed the burn-in");
  const std::vector<double> path = generator(config.length, seed);
  if (path.size() != config.length) throw InputError("covariate generator returned a path of the wrong length");
  return monte_carlo_truth_from_path(model, path, config);
}

OccupancyCurve monte_carlo_truth_from_path(const HmmModel& model, std::span<const double> path,
                                           const MonteCarloConfig& config) {
  if (path.size() <= config.burn_in) throw InputError("Monte Carlo path must exceed the burn-in");
  const std::span<const double> kept = path.subspan(config.burn_in);
  const BinEdges edges = resolve_bins(config.binning, kept);
  const auto acc = accumulate_path_occupancy(model, path, edges, config.burn_in);
  if (acc.total() == 0) throw InputError("all Monte Carlo bins are empty");
  return acc.finish(config.binning.min_count, OccupancyMethod::monte_carlo);
}

}  // namespace occuhmm
