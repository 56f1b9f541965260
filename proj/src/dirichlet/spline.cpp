#include "occuhmm/dirichlet/spline.hpp"

#include "occuhmm/error.hpp"

#include <cmath>

namespace occuhmm {

SplineBasis::SplineBasis(double lower, double upper, int dimension, int degree)
    : lower_(lower), upper_(upper), dimension_(dimension), degree_(degree) {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(upper > lower))
    throw InputError("spline range must be finite with upper > lower");
  if (degree < 1) throw InputError("spline degree must be at least 1");
  if (dimension < degree + 1) throw InputError("spline dimension must exceed the degree");
  const int interior = dimension - degree - 1;
  knots_.reserve(static_cast<std::size_t>(dimension + degree + 1));
  for (int i = 0; i <= degree; ++i) knots_.push_back(lower);
  for (int i = 1; i <= interior; ++i) knots_.push_back(lower + (upper - lower) * i / (interior + 1));
  for (int i = 0; i <= degree; ++i) knots_.push_back(upper);
}

Vector SplineBasis::evaluate(double z) const {
  if (!(z >= lower_ && z <= upper_)) throw ExtrapolationError("spline evaluated outside its range");
  // Knot span: t[mu] <= z < t[mu+1], with z == upper assigned to the last span.
  const int p = degree_;
  int mu = dimension_ - 1;
  for (int j = p; j < dimension_; ++j)
    if (z < knots_[static_cast<std::size_t>(j + 1)]) {
      mu = j;
      break;
    }
  // de Boor's triangular scheme for the p+1 non-zero basis values.
  std::vector<double> b(static_cast<std::size_t>(p + 1), 0.0), left(b.size()), right(b.size());
  b[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[static_cast<std::size_t>(j)] = z - knots_[static_cast<std::size_t>(mu + 1 - j)];
    right[static_cast<std::size_t>(j)] = knots_[static_cast<std::size_t>(mu + j)] - z;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
      const double temp = b[static_cast<std::size_t>(r)] / denom;
      b[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * temp;
      saved = left[static_cast<std::size_t>(j - r)] * temp;
    }
    b[static_cast<std::size_t>(j)] = saved;
  }
  Vector out = Vector::Zero(dimension_);
  for (int r = 0; r <= p; ++r) out(mu - p + r) = b[static_cast<std::size_t>(r)];
  return out;
}

Matrix SplineBasis::design(std::span<const double> z) const {
  Matrix x(static_cast<Eigen::Index>(z.size()), dimension_);
  for (std::size_t t = 0; t < z.size(); ++t) x.row(static_cast<Eigen::Index>(t)) = evaluate(z[t]).transpose();
  return x;
}

Matrix SplineBasis::penalty() const {
  const int k = dimension_;
  if (k < 3) return Matrix::Zero(k, k);
  Matrix d = Matrix::Zero(k - 2, k);
  for (int i = 0; i < k - 2; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -2.0;
    d(i, i + 2) = 1.0;
  }
  return d.transpose() * d;
}

}  // namespace occuhmm
