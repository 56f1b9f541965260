#include "occuhmm/occupancy/stationary.hpp"

#include "occuhmm/error.hpp"

#include <algorithm>
#include <cmath>

namespace occuhmm {

Vector stationary_distribution(const Matrix& tpm) {
  const auto n = tpm.rows();
  if (n < 1 || tpm.cols() != n) throw InputError("transition matrix must be square");
  if (!tpm.allFinite()) throw InputError("transition matrix must be finite");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(tpm.row(i).sum() - 1.0) > 1e-9 || tpm.row(i).minCoeff() < 0)
      throw InputError("transition matrix must be row-stochastic");
  }
  const Matrix system = Matrix::Identity(n, n) - tpm.transpose() + Matrix::Ones(n, n);
  const Vector rhs = Vector::Ones(n);
  Eigen::FullPivLU<Matrix> lu(system);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible())
    throw SingularityError("stationary distribution is not unique (reducible or degenerate chain)");
  Vector rho = lu.solve(rhs);
  // One step of iterative refinement keeps the balance residual at round-off.
  rho += lu.solve(rhs - system * rho);
  for (auto& v : rho) v = std::max(v, 0.0);
  rho /= rho.sum();
  return rho;
}

}  // namespace occuhmm
