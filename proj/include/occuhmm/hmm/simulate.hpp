#pragma once

#include "occuhmm/hmm/model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace occuhmm {

struct SimulatedPath {
  std::vector<int> states;  // 0-based
  ObservationSeries obs;
};

// Samples the latent chain (S_t drawn from row S_{t-1} of Gamma(z_t), segment
// starts from the initial policy) and one observation per channel and index.
// Covariate segment ids are copied to the observations.
SimulatedPath simulate_hmm(const HmmModel& model, const CovariateSeries& cov, std::uint64_t seed);

// One draw from a von Mises distribution (Best & Fisher rejection sampler).
double sample_von_mises(std::mt19937_64& rng, double mean, double kappa);

}  // namespace occuhmm
