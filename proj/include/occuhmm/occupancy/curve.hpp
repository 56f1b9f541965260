#pragma once

#include "occuhmm/hmm/model.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace occuhmm {

enum class OccupancyMethod { stationary, binned, ar_resample, block_bootstrap, dirichlet, monte_carlo };

const char* method_tag(OccupancyMethod method);
OccupancyMethod parse_method_tag(const std::string& tag);

// Pr(state | z) on a grid. A row of NaNs marks a grid point with too few
// samples to report.
struct OccupancyCurve {
  std::vector<double> grid;
  RowMatrix probs;  // grid.size() x N
  std::vector<std::size_t> counts;
  OccupancyMethod method = OccupancyMethod::stationary;

  std::size_t size() const { return grid.size(); }
  int n_states() const { return static_cast<int>(probs.cols()); }
  bool has_value(std::size_t k) const;
  void validate() const;
};

// CSV with header `z,count,p_1,...,p_N,method`; missing probabilities are
// empty fields. Numbers use the shortest round-trip representation.
void write_curve_csv(std::ostream& out, const OccupancyCurve& curve);
OccupancyCurve read_curve_csv(std::istream& in);

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

}  // namespace occuhmm
