#include "occuhmm/resampling/bootstrap.hpp"

#include "occuhmm/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace occuhmm {

void BlockBootstrapConfig::validate(std::size_t series_length) const {
  if (block_length < 1) throw InputError("block length must be at least 1");
  if (output_blocks < 1) throw InputError("at least one output block is required");
  if (block_length > series_length) throw InputError("block length exceeds the series length");
  if (!times.empty() && times.size() != series_length) throw InputError("timestamps and series differ in length");
  if (time_step < 0 || !std::isfinite(time_step)) throw InputError("time step must be non-negative");
}

std::vector<double> block_bootstrap(std::span<const double> series, const BlockBootstrapConfig& config,
                                    std::uint64_t seed) {
  const std::size_t T = series.size();
  config.validate(T);
  const std::size_t L = config.block_length;
  const std::size_t M = T / L;
  if (M == 0) throw InputError("no complete block fits in the series");

  std::vector<double> times = config.times;
  if (times.empty()) {
    times.resize(T);
    for (std::size_t t = 0; t < T; ++t) times[t] = static_cast<double>(t);
  }
  std::vector<double> base(series.begin(), series.end());
  if (config.detrend) base = config.detrend->residuals(series, times);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, M - 1);
  std::vector<double> out;
  out.reserve(config.output_blocks * L);
  for (std::size_t b = 0; b < config.output_blocks; ++b) {
    const std::size_t first = pick(rng) * L;
    out.insert(out.end(), base.begin() + static_cast<std::ptrdiff_t>(first),
               base.begin() + static_cast<std::ptrdiff_t>(first + L));
  }

  if (config.detrend) {
    double step = config.time_step;
    if (step == 0.0) {
      std::vector<double> diffs;
      for (std::size_t t = 1; t < T; ++t) diffs.push_back(times[t] - times[t - 1]);
      if (diffs.empty()) throw InputError("cannot infer the sampling interval from one timestamp");
      std::nth_element(diffs.begin(), diffs.begin() + static_cast<std::ptrdiff_t>(diffs.size() / 2), diffs.end());
      step = diffs[diffs.size() / 2];
    }
    for (std::size_t k = 0; k < out.size(); ++k)
      out[k] += config.detrend->evaluate(times.front() + static_cast<double>(k) * step);
  }
  return out;
}

}  // namespace occuhmm
