#pragma once

#include "occuhmm/hmm/model.hpp"
#include "occuhmm/occupancy/binning.hpp"
#include "occuhmm/occupancy/curve.hpp"

#include <cstddef>
#include <span>
#include <string>

namespace occuhmm {

struct ResamplingOptions {
  std::size_t burn_in = 1000;
  std::size_t min_count = 5;
  std::size_t restart_every = 0;  // re-initialise every k steps (0 = one path)
  double min_coverage = 0.8;      // fraction of bins meeting min_count
  OccupancyMethod method = OccupancyMethod::ar_resample;
};

struct ResamplingResult {
  OccupancyCurve curve;
  std::size_t dropped_outside = 0;  // synthetic values outside the bin range
  double coverage = 0.0;
  std::string warning;  // non-empty when coverage is below min_coverage
};

// Propagates the fitted model along a synthetic single-covariate path and
// bins delta(t) on `edges`.
ResamplingResult occupancy_via_resampling(const HmmModel& model, std::span<const double> synthetic,
                                          const BinEdges& edges, const ResamplingOptions& options = {});

}  // namespace occuhmm
