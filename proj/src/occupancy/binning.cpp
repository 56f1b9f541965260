#include "occuhmm/occupancy/binning.hpp"

#include "occuhmm/error.hpp"
#include "occuhmm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace occuhmm {

void BinningConfig::validate() const {
  if (n_bins < 2) throw InputError("binning needs at least 2 bins");
  if (range == RangePolicy::quantile &&
      !(lower_quantile >= 0 && lower_quantile < upper_quantile && upper_quantile <= 1))
    throw InputError("binning quantile bounds must satisfy 0 <= lower < upper <= 1");
  if (range == RangePolicy::fixed && !(fixed_lower < fixed_upper))
    throw InputError("fixed binning range must satisfy lower < upper");
}

int BinEdges::index_of(double z) const {
  if (!(z >= lower && z <= upper)) return -1;
  const int k = static_cast<int>(std::floor((z - lower) / (upper - lower) * n_bins));
  return std::min(k, n_bins - 1);
}

std::vector<double> BinEdges::centers() const {
  std::vector<double> c(static_cast<std::size_t>(n_bins));
  const double w = width();
  for (int k = 0; k < n_bins; ++k) c[static_cast<std::size_t>(k)] = lower + (k + 0.5) * w;
  return c;
}

BinEdges resolve_bins(const BinningConfig& config, std::span<const double> covariate) {
  config.validate();
  BinEdges edges;
  edges.n_bins = config.n_bins;
  switch (config.range) {
    case RangePolicy::fixed:
      edges.lower = config.fixed_lower;
      edges.upper = config.fixed_upper;
      return edges;
    case RangePolicy::full: {
      if (covariate.empty()) throw InputError("cannot bin an empty covariate series");
      const auto [lo, hi] = std::minmax_element(covariate.begin(), covariate.end());
      edges.lower = *lo;
      edges.upper = *hi;
      break;
    }
    case RangePolicy::quantile: {
      if (covariate.empty()) throw InputError("cannot bin an empty covariate series");
      const double ps[] = {config.lower_quantile, config.upper_quantile};
      const auto q = stats::quantiles(covariate, ps);
      edges.lower = q[0];
      edges.upper = q[1];
      break;
    }
  }
  if (!(edges.upper > edges.lower)) {
    // Degenerate (constant) covariate: a single occupied bin centred on the value.
    const double half = std::max(1e-9, std::abs(edges.lower) * 1e-9);
    edges.lower -= half * config.n_bins;
    edges.upper += half * config.n_bins;
  }
  return edges;
}

OccupancyAccumulator::OccupancyAccumulator(BinEdges edges, int n_states)
    : edges_(edges),
      n_states_(n_states),
      sums_(Matrix::Zero(edges.n_bins, n_states)),
      counts_(static_cast<std::size_t>(edges.n_bins), 0) {}

void OccupancyAccumulator::add(double z, const double* delta) {
  const int k = edges_.index_of(z);
  if (k < 0) {
    ++outside_;
    return;
  }
  for (int i = 0; i < n_states_; ++i) sums_(k, i) += delta[i];
  ++counts_[static_cast<std::size_t>(k)];
}

void OccupancyAccumulator::merge(const OccupancyAccumulator& other) {
  if (other.edges_.n_bins != edges_.n_bins || other.edges_.lower != edges_.lower ||
      other.edges_.upper != edges_.upper || other.n_states_ != n_states_)
    throw InputError("cannot merge accumulators over different bins");
  sums_ += other.sums_;
  for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
  outside_ += other.outside_;
}

std::size_t OccupancyAccumulator::total() const {
  std::size_t n = 0;
  for (auto c : counts_) n += c;
  return n;
}

OccupancyCurve OccupancyAccumulator::finish(std::size_t min_count, OccupancyMethod method) const {
  OccupancyCurve curve;
  curve.grid = edges_.centers();
  curve.counts = counts_;
  curve.method = method;
  curve.probs.resize(edges_.n_bins, n_states_);
  for (int k = 0; k < edges_.n_bins; ++k) {
    const auto count = counts_[static_cast<std::size_t>(k)];
    if (count == 0 || count < min_count) {
      curve.probs.row(k).setConstant(std::numeric_limits<double>::quiet_NaN());
    } else {
      curve.probs.row(k) = sums_.row(k) / static_cast<double>(count);
    }
  }
  return curve;
}

OccupancyCurve bin_occupancy(const StateProbSeries& probs, std::span<const double> covariate,
                             const BinningConfig& config, std::size_t burn_in,
                             const std::vector<int>& segment_ids) {
  const auto T = probs.length();
  if (covariate.size() != T) throw InputError("state probabilities and covariate differ in length");
  if (burn_in >= T) throw InputError("burn-in must be shorter than the series");
  std::vector<std::size_t> kept;
  kept.reserve(T);
  for (const auto& [begin, end] : segment_ranges(segment_ids, T))
    for (std::size_t t = begin + burn_in; t < end; ++t) kept.push_back(t);
  if (kept.empty()) throw InputError("no indices remain after burn-in");

  std::vector<double> z(kept.size());
  for (std::size_t k = 0; k < kept.size(); ++k) z[k] = covariate[kept[k]];
  const BinEdges edges = resolve_bins(config, z);
  OccupancyAccumulator acc(edges, static_cast<int>(probs.probs.cols()));
  for (std::size_t t : kept) acc.add(covariate[t], probs.probs.data() + t * static_cast<std::size_t>(probs.probs.cols()));
  if (acc.total() == 0) throw InputError("all occupancy bins are empty");
  return acc.finish(config.min_count, OccupancyMethod::binned);
}

}  // namespace occuhmm
