#pragma once

#include "occuhmm/hmm/model.hpp"
#include "occuhmm/occupancy/binning.hpp"
#include "occuhmm/occupancy/curve.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace occuhmm {

// rho(z) on `grid` for covariate `covariate_index`, holding the remaining
// covariates at `fixed_covariates` (one entry per covariate; the entry at
// covariate_index is ignored).
OccupancyCurve hypothetical_stationary_curve(const HmmModel& model, std::span<const double> grid,
                                             std::span<const double> fixed_covariates = {},
                                             int covariate_index = 0);

// Produces a covariate path of the requested length, deterministic in seed.
using CovariateGenerator = std::function<std::vector<double>(std::size_t length, std::uint64_t seed)>;

struct MonteCarloConfig {
  std::size_t length = 10'000'000;
  std::size_t burn_in = 1000;
  BinningConfig binning;
};

// Propagates the model along `path` (single segment, restarting every
// `restart_every` steps if non-zero, each restart followed by its own burn-in)
// and bins delta(t) on `edges`.
OccupancyAccumulator accumulate_path_occupancy(const HmmModel& model, std::span<const double> path,
                                               const BinEdges& edges, std::size_t burn_in,
                                               std::size_t restart_every = 0);

// Ground truth Pr(state | z) from one long simulated covariate path.
OccupancyCurve monte_carlo_truth(const HmmModel& model, const CovariateGenerator& generator,
                                 const MonteCarloConfig& config, std::uint64_t seed);

// Same on an already simulated path; config.length is ignored. Bins are
// resolved on the path after burn-in.
OccupancyCurve monte_carlo_truth_from_path(const HmmModel& model, std::span<const double> path,
                                           const MonteCarloConfig& config);

}  // namespace occuhmm
