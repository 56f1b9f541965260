#pragma once

#include "occuhmm/hmm/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace occuhmm {

// Flat unconstrained parameter vector. Layout:
//   transition beta, row by row (pair-major, intercept first)
//   per channel, per state: location then dispersion
//     gaussian  (mean, log sd)
//     gamma     (log mean, log sd)
//     von_mises (mean, log kappa)
//   optionally N-1 logits log(delta_i / delta_1), i = 2..N
struct WorkingParams {
  Vector theta;
  bool estimate_initial = false;
};

// Layout of the working vector for models shaped like a template.
class ParameterMap {
 public:
  explicit ParameterMap(const HmmModel& shape, bool estimate_initial = false);

  std::size_t size() const { return size_; }
  bool estimate_initial() const { return estimate_initial_; }

  Vector to_working(const HmmModel& model) const;
  HmmModel to_model(std::span<const double> theta) const;
  HmmModel to_model(const Vector& theta) const { return to_model(std::span<const double>(theta.data(), theta.size())); }

  // Index of the location entry for (channel, state).
  std::size_t location_index(std::size_t channel, int state) const;
  std::size_t dispersion_index(std::size_t channel, int state) const { return location_index(channel, state) + 1; }

  // Human-readable label per working entry, e.g. "beta[1->2][1]", "mean[0][2]".
  std::vector<std::string> names() const;

 private:
  HmmModel shape_;
  bool estimate_initial_;
  std::size_t n_beta_;
  std::size_t size_;
};

WorkingParams transform(const HmmModel& model, bool estimate_initial = false);
HmmModel untransform(const WorkingParams& params, const HmmModel& shape);

// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

}  // namespace occuhmm
