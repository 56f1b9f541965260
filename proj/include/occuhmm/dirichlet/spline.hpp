#pragma once

#include "occuhmm/hmm/model.hpp"

#include <span>
#include <vector>

namespace occuhmm {

// B-spline basis on [lower, upper] with equally spaced interior knots and
// repeated boundary knots. `dimension` counts basis functions, so there are
// dimension - degree - 1 interior knots.
class SplineBasis {
 public:
  SplineBasis() = default;
  SplineBasis(double lower, double upper, int dimension = 10, int degree = 3);

  int dimension() const { return dimension_; }
  int degree() const { return degree_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  const std::vector<double>& knots() const { return knots_; }
  bool contains(double z) const { return z >= lower_ && z <= upper_; }

  // Basis values at z (length `dimension`); z must lie in [lower, upper].
  Vector evaluate(double z) const;
  Matrix design(std::span<const double> z) const;
  // D^T D with D the (K-2) x K second-difference operator.
  Matrix penalty() const;

 private:
  double lower_ = 0.0;
  double upper_ = 1.0;
  int dimension_ = 0;
  int degree_ = 3;
  std::vector<double> knots_;
};

}  // namespace occuhmm
