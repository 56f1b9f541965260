#include "occuhmm/resampling/occupancy.hpp"

#include "occuhmm/error.hpp"
#include "occuhmm/occupancy/estimators.hpp"

#include <sstream>

namespace occuhmm {

ResamplingResult occupancy_via_resampling(const HmmModel& model, std::span<const double> synthetic,
                                          const BinEdges& edges, const ResamplingOptions& options) {
  if (options.method != OccupancyMethod::ar_resample && options.method != OccupancyMethod::block_bootstrap)
    throw InputError("resampling occupancy is tagged ar-resample or block-bootstrap");
  const OccupancyAccumulator acc =
      accumulate_path_occupancy(model, synthetic, edges, options.burn_in, options.restart_every);
  ResamplingResult res;
  res.curve = acc.finish(options.min_count, options.method);
  res.dropped_outside = acc.outside();
  std::size_t covered = 0;
  for (std::size_t c : res.curve.counts) covered += c >= options.min_count ? 1 : 0;
  res.coverage = static_cast<double>(covered) / static_cast<double>(res.curve.size());
  if (res.coverage < options.min_coverage) {
    std::ostringstream os;
    os << "only " << covered << " of " << res.curve.size() << " bins reach " << options.min_count
       << " samples; bin counts:";
    for (std::size_t c : res.curve.counts) os << ' ' << c;
    res.warning = os.str();
  }
  return res;
}

}  // namespace occuhmm
