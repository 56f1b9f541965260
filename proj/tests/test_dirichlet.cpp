#include "doctest.h"

#include "occuhmm/dirichlet/smooth.hpp"
#include "occuhmm/dirichlet/spline.hpp"
#include "occuhmm/error.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace occuhmm;

namespace {

// Cox-de Boor recursion straight from the definition.
double naive_bspline(const std::vector<double>& t, int i, int p, double z, bool last_span) {
  if (p == 0) {
    const double a = t[static_cast<std::size_t>(i)], b = t[static_cast<std::size_t>(i + 1)];
    if (a < b && z >= a && (z < b || (last_span && z == b))) return 1.0;
    return 0.0;
  }
  double out = 0.0;
  const double d1 = t[static_cast<std::size_t>(i + p)] - t[static_cast<std::size_t>(i)];
  const double d2 = t[static_cast<std::size_t>(i + p + 1)] - t[static_cast<std::size_t>(i + 1)];
  if (d1 > 0) out += (z - t[static_cast<std::size_t>(i)]) / d1 * naive_bspline(t, i, p - 1, z, last_span);
  if (d2 > 0) out += (t[static_cast<std::size_t>(i + p + 1)] - z) / d2 * naive_bspline(t, i + 1, p - 1, z, last_span);
  return out;
}

std::vector<double> sample_dirichlet(std::mt19937_64& rng, const std::vector<double>& alpha) {
  std::vector<double> x(alpha.size());
  double s = 0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    x[i] = std::gamma_distribution<double>(alpha[i], 1.0)(rng);
    s += x[i];
  }
  for (double& v : x) v /= s;
  return x;
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("Dirichlet log density") {
  CHECK(dirichlet_logpdf(std::vector<double>{1, 1}, std::vector<double>{0.3, 0.7}) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(dirichlet_logpdf(std::vector<double>{2, 2}, std::vector<double>{0.5, 0.5}) - std::log(1.5)) < 1e-12);
  CHECK_THROWS_AS(dirichlet_logpdf(std::vector<double>{2, 2}, std::vector<double>{1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(dirichlet_logpdf(std::vector<double>{2, 2}, std::vector<double>{0.4, 0.4}), DomainError);
  CHECK_THROWS_AS(dirichlet_logpdf(std::vector<double>{0, 2}, std::vector<double>{0.5, 0.5}), InputError);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.6, 8.0);
  boost::math::quadrature::tanh_sinh<double> integrator;
  // The mass within 1e-14 of either end is below (1e-14)^0.6 for these alphas.
  for (int rep = 0; rep < 30; ++rep) {
    const std::vector<double> a{u(rng), u(rng)};
    const double total = integrator.integrate(
        [&](double x) { return std::exp(dirichlet_logpdf(a, std::vector<double>{x, 1.0 - x})); }, 1e-14, 1.0 - 1e-14);
    CHECK(std::abs(total - 1.0) < 1e-6);
  }
}

TEST_CASE("simplex clipping") {
  const auto c = clip_simplex(std::vector<double>{1.0, 0.0});
  CHECK(c[0] == doctest::Approx(0.999999).epsilon(1e-12));
  CHECK(c[1] == doctest::Approx(0.000001).epsilon(1e-6));
  CHECK(std::abs(c[0] + c[1] - 1.0) <= 1e-15);
  const std::vector<double> inner{0.2, 0.3, 0.5};
  CHECK(clip_simplex(inner) == inner);
  CHECK(clip_simplex(std::vector<double>{0.5, 0.5}, 0.4) == std::vector<double>{0.5, 0.5});
  CHECK_THROWS_AS(clip_simplex(inner, 0.0), InputError);
}

TEST_CASE("cubic B-spline basis") {
  const SplineBasis basis(-2.0, 3.0, 10, 3);
  CHECK(basis.knots().size() == 14);
  CHECK(basis.knots()[4] == doctest::Approx(-2.0 + 5.0 / 7.0));

  // Greville abscissae reproduce the identity function.
  std::vector<double> greville(10);
  for (int j = 0; j < 10; ++j)
    greville[static_cast<std::size_t>(j)] = (basis.knots()[static_cast<std::size_t>(j + 1)] + basis.knots()[static_cast<std::size_t>(j + 2)] +
                                             basis.knots()[static_cast<std::size_t>(j + 3)]) / 3.0;
  for (int k = 0; k <= 200; ++k) {
    const double z = -2.0 + 5.0 * k / 200.0;
    const Vector b = basis.evaluate(z);
    CHECK(b.sum() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(b.minCoeff() >= 0.0);
    double lin = 0;
    for (int j = 0; j < 10; ++j) {
      lin += greville[static_cast<std::size_t>(j)] * b(j);
      CHECK(std::abs(b(j) - naive_bspline(basis.knots(), j, 3, z, k == 200)) < 1e-13);
    }
    CHECK(lin == doctest::Approx(z).epsilon(1e-13));
  }
  CHECK_THROWS_AS(basis.evaluate(3.0001), ExtrapolationError);

  const Matrix p = basis.penalty();
  CHECK((p - p.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(p);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  const Vector lin = Vector::LinSpaced(10, -1.0, 4.0);
  CHECK((p * lin).norm() < 1e-12);
  CHECK((p * Vector::Ones(10)).norm() < 1e-12);

  CHECK_THROWS_AS(SplineBasis(1.0, 1.0), InputError);
  CHECK_THROWS_AS(SplineBasis(0.0, 1.0, 3, 3), InputError);
}

TEST_CASE("analytic gradient of the penalised Dirichlet likelihood") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 2 + rep % 3;
    const SplineBasis basis(-1.5, 1.5, 8);
    std::vector<double> z(300);
    for (double& v : z) v = std::clamp(nd(rng), -1.5, 1.5);
    const Matrix design = basis.design(z);
    Matrix log_x(300, n);
    for (int t = 0; t < 300; ++t) {
      const auto x = sample_dirichlet(rng, std::vector<double>(static_cast<std::size_t>(n), 3.0));
      for (int i = 0; i < n; ++i) log_x(t, i) = std::log(x[static_cast<std::size_t>(i)]);
    }
    Matrix c(8, n);
    for (Eigen::Index k = 0; k < c.size(); ++k) c.data()[k] = 0.5 * nd(rng) + 1.0;
    const std::vector<double> lambda(static_cast<std::size_t>(n), 2.5);
    Matrix grad;
    dirichlet_penalized_objective(design, log_x, basis.penalty(), lambda, c, &grad);
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      const double h = 1e-6 * (1 + std::abs(c.data()[k]));
      Matrix up = c, down = c;
      up.data()[k] += h;
      down.data()[k] -= h;
      const double fd = (dirichlet_penalized_objective(design, log_x, basis.penalty(), lambda, up) -
                         dirichlet_penalized_objective(design, log_x, basis.penalty(), lambda, down)) / (2 * h);
      CHECK(std::abs(fd - grad.data()[k]) <= 1e-4 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("penalised objective at an underflowing predictor is non-finite, not an exception") {
  const SplineBasis basis(0.0, 1.0, 6);
  const std::vector<double> z{0.1, 0.5, 0.9};
  Matrix log_x(3, 2);
  log_x.setConstant(std::log(0.5));
  Matrix c = Matrix::Constant(6, 2, 1.0);
  c.col(0).setConstant(-800.0);
  const std::vector<double> lambda{1.0, 1.0};
  Matrix grad;
  double value = 0;
  CHECK_NOTHROW(value = dirichlet_penalized_objective(basis.design(z), log_x, basis.penalty(), lambda, c, &grad));
  CHECK_FALSE(std::isfinite(value));
}

TEST_CASE("Dirichlet smoothing recovers a logistic occupancy curve") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd(0.0, 1.0);
  const std::size_t T = 5000;
  std::vector<double> z(T);
  StateProbSeries probs;
  probs.probs.resize(static_cast<Eigen::Index>(T), 2);
  for (std::size_t t = 0; t < T; ++t) {
    z[t] = nd(rng);
    const double p = logistic(1.5 * z[t] - 0.5);
    const auto x = sample_dirichlet(rng, {50 * p, 50 * (1 - p)});
    probs.probs(static_cast<Eigen::Index>(t), 0) = x[0];
    probs.probs(static_cast<Eigen::Index>(t), 1) = x[1];
  }
  DirichletSmoothConfig cfg;
  cfg.burn_in = 0;
  const auto fit = fit_dirichlet_smooth(probs, z, cfg);
  CHECK(fit.converged);
  CHECK(fit.n_used + fit.n_dropped == T);
  std::vector<double> grid;
  for (int k = 0; k <= 100; ++k) grid.push_back(fit.basis.lower() + (fit.basis.upper() - fit.basis.lower()) * k / 100.0);
  const auto curve = predict_occupancy(fit, grid);
  CHECK(curve.method == OccupancyMethod::dirichlet);
  double worst = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    worst = std::max(worst, std::abs(curve.probs(static_cast<Eigen::Index>(k), 0) - logistic(1.5 * grid[k] - 0.5)));
    CHECK(std::abs(curve.probs.row(static_cast<Eigen::Index>(k)).sum() - 1.0) < 1e-14);
  }
  CHECK(worst < 0.03);

  CHECK_THROWS_AS(predict_occupancy(fit, std::vector<double>{fit.basis.upper() + 0.01}), ExtrapolationError);

  std::stringstream ss;
  write_dirichlet_fit(ss, fit);
  const auto back = read_dirichlet_fit(ss);
  const auto again = predict_occupancy(back, grid);
  CHECK(again.probs == curve.probs);
  CHECK(back.lambda == fit.lambda);
}

TEST_CASE("Dirichlet smoothing limits") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  const std::size_t T = 1200;
  std::vector<double> z(T);
  StateProbSeries probs;
  probs.probs.resize(static_cast<Eigen::Index>(T), 3);
  for (std::size_t t = 0; t < T; ++t) {
    z[t] = u(rng);
    probs.probs.row(static_cast<Eigen::Index>(t)) << 0.2, 0.3, 0.5;
  }
  DirichletSmoothConfig cfg;
  cfg.burn_in = 100;
  const auto flat = fit_dirichlet_smooth(probs, z, cfg);
  const auto curve = predict_occupancy(flat, std::vector<double>{flat.basis.lower(), 5.0, flat.basis.upper()});
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(curve.probs(k, 0) - 0.2) < 0.01);
    CHECK(std::abs(curve.probs(k, 2) - 0.5) < 0.01);
  }

  // Noisy signal for the penalty experiments.
  for (std::size_t t = 0; t < T; ++t) {
    const double p = 0.5 + 0.3 * std::sin(z[t]);
    const auto x = sample_dirichlet(rng, {20 * p, 20 * (1 - p) * 0.5, 20 * (1 - p) * 0.5});
    probs.probs.row(static_cast<Eigen::Index>(t)) << x[0], x[1], x[2];
  }
  cfg.fixed_lambda = std::vector<double>(3, 1e10);
  const auto stiff = fit_dirichlet_smooth(probs, z, cfg);
  const Matrix& c = stiff.coefficients;
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index k = 0; k + 2 < c.rows(); ++k)
      CHECK(std::abs(c(k, i) - 2 * c(k + 1, i) + c(k + 2, i)) < 1e-4);

  double previous = std::numeric_limits<double>::infinity();
  for (int e = -3; e <= 4; ++e) {
    cfg.fixed_lambda = std::vector<double>(3, std::pow(10.0, e));
    const double r = fit_dirichlet_smooth(probs, z, cfg).roughness();
    CHECK(r <= previous * (1 + 1e-9));
    previous = r;
  }

  cfg.fixed_lambda.reset();
  cfg.burn_in = 1150;
  CHECK_THROWS_AS(fit_dirichlet_smooth(probs, z, cfg), InputError);
  cfg.burn_in = T;
  CHECK_THROWS_AS(fit_dirichlet_smooth(probs, z, cfg), InputError);
}
