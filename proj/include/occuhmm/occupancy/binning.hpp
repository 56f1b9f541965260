#pragma once

#include "occuhmm/hmm/model.hpp"
#include "occuhmm/occupancy/curve.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace occuhmm {

enum class RangePolicy {
  full,      // observed min to max
  quantile,  // central quantile band of the observed values
  fixed,     // explicit bounds, e.g. to share a grid across estimators
};

struct BinningConfig {
  int n_bins = 50;
  RangePolicy range = RangePolicy::quantile;
  double lower_quantile = 0.005;
  double upper_quantile = 0.995;
  double fixed_lower = 0.0;
  double fixed_upper = 1.0;
  std::size_t min_count = 5;

  void validate() const;
};

// Equidistant bins on [lower, upper]; the upper edge belongs to the last bin.
struct BinEdges {
  double lower = 0.0;
  double upper = 1.0;
  int n_bins = 1;

  // -1 when z falls outside [lower, upper].
  int index_of(double z) const;
  std::vector<double> centers() const;
  double width() const { return (upper - lower) / n_bins; }
};

BinEdges resolve_bins(const BinningConfig& config, std::span<const double> covariate);

// Streaming per-bin sums of state-probability vectors.
class OccupancyAccumulator {
 public:
  OccupancyAccumulator(BinEdges edges, int n_states);

  void add(double z, const double* delta);
  void add(double z, const Vector& delta) { add(z, delta.data()); }
  void merge(const OccupancyAccumulator& other);

  const BinEdges& edges() const { return edges_; }
  std::size_t outside() const { return outside_; }
  std::size_t total() const;

  OccupancyCurve finish(std::size_t min_count, OccupancyMethod method) const;

 private:
  BinEdges edges_;
  int n_states_;
  Matrix sums_;  // n_bins x N
  std::vector<std::size_t> counts_;
  std::size_t outside_ = 0;
};

// Mean of delta(t) per covariate bin, after dropping the first `burn_in`
// indices of every segment. Bins below min_count are reported missing.
OccupancyCurve bin_occupancy(const StateProbSeries& probs, std::span<const double> covariate,
                             const BinningConfig& config, std::size_t burn_in,
                             const std::vector<int>& segment_ids = {});

}  // namespace occuhmm
