#pragma once

#include "occuhmm/resampling/seasonal.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace occuhmm {

struct BlockBootstrapConfig {
  std::size_t block_length = 1;
  std::size_t output_blocks = 1;
  // When set, the trend is removed before resampling and re-added on a
  // synthetic time axis that starts at the first input timestamp and advances
  // by `time_step` per index.
  std::optional<SeasonalTrend> detrend;
  std::vector<double> times;  // input timestamps; empty means 0, 1, 2, ...
  double time_step = 0.0;     // 0 = median spacing of `times`

  void validate(std::size_t series_length) const;
};

// Concatenation of output_blocks draws (with replacement) from the
// floor(T / L) consecutive non-overlapping blocks; any tail shorter than L is
// discarded.
std::vector<double> block_bootstrap(std::span<const double> series, const BlockBootstrapConfig& config,
                                    std::uint64_t seed);

}  // namespace occuhmm
