#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "occuhmm/error.hpp"
#include "occuhmm/estimation/fit.hpp"
#include "occuhmm/estimation/optimizer.hpp"
#include "occuhmm/estimation/working_params.hpp"
#include "occuhmm/hmm/recursions.hpp"
#include "occuhmm/hmm/simulate.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace occuhmm;

namespace {

using fixture::ar1_covariate;
using fixture::three_state;

void check_same_model(const HmmModel& a, const HmmModel& b, double tol) {
  REQUIRE(a.n_states == b.n_states);
  CHECK((a.transition.beta - b.transition.beta).cwiseAbs().maxCoeff() <= tol);
  for (std::size_t ch = 0; ch < a.emissions.n_channels(); ++ch)
    for (int s = 0; s < a.n_states; ++s) {
      const auto i = static_cast<std::size_t>(s);
      CHECK(std::abs(a.emissions.channels[ch].location[i] - b.emissions.channels[ch].location[i]) <= tol);
      CHECK(std::abs(a.emissions.channels[ch].dispersion[i] - b.emissions.channels[ch].dispersion[i]) <= tol);
    }
  CHECK((a.initial_distribution - b.initial_distribution).cwiseAbs().maxCoeff() <= tol);
}

}  // namespace

TEST_CASE("working transform of simple values") {
  HmmModel m = three_state();
  m.emissions.channels.push_back({Family::von_mises, {0.0, 1.0, -1.0}, {std::numbers::e, 1.0, 2.0}});
  const ParameterMap map(m);
  const Vector theta = map.to_working(m);
  CHECK(theta(static_cast<Eigen::Index>(map.dispersion_index(0, 0))) == 0.0);  // sd 1
  CHECK(theta(static_cast<Eigen::Index>(map.dispersion_index(1, 0))) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(map.size() == 12 + 6 + 6);
  CHECK(map.names().size() == map.size());
  CHECK(map.names().front() == "beta[1->2][0]");
  CHECK(map.names()[map.location_index(1, 2)] == "mean[1][3]");

  m.emissions.channels[1].dispersion[0] = 0.0;
  CHECK_THROWS_AS(map.to_working(m), DomainError);
}

TEST_CASE("working transform round trip on random models") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    auto in = oracle::random_instance(rng, 2 + rep % 3, 3);
    const bool est = in.model.initial_policy == InitialPolicy::fixed;
    const WorkingParams w = transform(in.model, est);
    const HmmModel back = untransform(w, in.model);
    check_same_model(back, in.model, 1e-12);
  }
}

TEST_CASE("angles wrap into the half-open circle") {
  CHECK(wrap_angle(0.5) == 0.5);
  CHECK(wrap_angle(std::numbers::pi) == std::numbers::pi);
  CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(2 * std::numbers::pi + 0.25) == doctest::Approx(0.25));
  CHECK(wrap_angle(-7.0) == doctest::Approx(-7.0 + 2 * std::numbers::pi));
}

TEST_CASE("finite-difference derivatives") {
  const Objective f = [](const Vector& x) { return std::exp(x(0)) * std::sin(x(1)) + x(0) * x(1) * x(1); };
  const Vector x = (Vector(2) << 0.3, -1.2).finished();
  const Vector g = central_difference_gradient(f, x);
  CHECK(g(0) == doctest::Approx(std::exp(0.3) * std::sin(-1.2) + 1.44).epsilon(1e-8));
  CHECK(g(1) == doctest::Approx(std::exp(0.3) * std::cos(-1.2) + 2 * 0.3 * -1.2).epsilon(1e-8));

  Matrix a(3, 3);
  a << 4, 1, 0.5, 1, 3, -0.2, 0.5, -0.2, 2;
  const Objective q = [&](const Vector& v) { return 0.5 * v.dot(a * v) + v.sum(); };
  const Matrix h = finite_difference_hessian(q, Vector::Constant(3, 0.7));
  CHECK((h - a).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("BFGS minimises the Rosenbrock function") {
  const Objective f = [](const Vector& x) {
    return 100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2);
  };
  const GradientFn g = [&](const Vector& x) { return central_difference_gradient(f, x); };
  const auto r = minimize_bfgs(f, g, (Vector(2) << -1.2, 1.0).finished());
  CHECK(r.converged);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x(1) == doctest::Approx(1.0).epsilon(1e-4));

  const Objective bad = [](const Vector&) { return std::nan(""); };
  CHECK_THROWS_AS(minimize_bfgs(bad, g, Vector::Zero(2)), InputError);
}

TEST_CASE("standard error of a quadratic toy likelihood") {
  for (double c : {0.25, 4.0, 900.0}) {
    const Objective f = [c](const Vector& x) { return 0.5 * c * (x(0) - 1.3) * (x(0) - 1.3) + 7.0; };
    const Vector se = standard_errors(f, Vector::Constant(1, 1.3));
    CHECK(std::abs(se(0) - 1.0 / std::sqrt(c)) < 1e-4);
  }
  // Gaussian mean with known sd: SE = sd / sqrt(n).
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(2.0, 1.5);
  std::vector<double> xs(400);
  for (double& x : xs) x = d(rng);
  const Objective nll = [&](const Vector& m) {
    double s = 0;
    for (double x : xs) s += 0.5 * std::pow((x - m(0)) / 1.5, 2);
    return s;
  };
  CHECK(std::abs(standard_errors(nll, Vector::Constant(1, 2.0))(0) - 1.5 / 20.0) < 1e-4);

  const Objective flat = [](const Vector& x) { return std::pow(x(0) + x(1), 2); };
  CHECK_THROWS_AS(standard_errors(flat, Vector::Zero(2)), SingularityError);
}

TEST_CASE("quantile-split initial model") {
  ObservationSeries obs;
  obs.values.resize(300, 1);
  for (int t = 0; t < 300; ++t) obs.values(t, 0) = 300 - t;  // order must not matter
  const HmmModel m = initial_model(obs, 3, {Family::gaussian}, 2);
  CHECK(m.emissions.channels[0].location[0] == doctest::Approx(50.5));
  CHECK(m.emissions.channels[0].location[2] == doctest::Approx(250.5));
  CHECK(m.emissions.channels[0].dispersion[1] == doctest::Approx(std::sqrt(100.0 * 101.0 / 12.0)));
  CHECK(m.transition.at(0, 1, 0) == doctest::Approx(std::log(0.05 / 0.9)));
  CHECK(m.transition.at(2, 0, 2) == 0.0);
  // Each row keeps 0.9 on the diagonal at zero covariates.
  const double off = std::exp(m.transition.at(0, 1, 0));
  CHECK(1.0 / (1.0 + 2 * off) == doctest::Approx(0.9));

  CHECK_THROWS_AS(initial_model(obs, 1, {Family::gaussian}, 0), InputError);
  CHECK_THROWS_AS(initial_model(obs, 2, {Family::gaussian, Family::gamma}, 0), InputError);
}

TEST_CASE("fit rejects degenerate requests") {
  const HmmModel truth = three_state();
  const CovariateSeries cov = ar1_covariate(100, 0.9, 1);
  auto sim = simulate_hmm(truth, cov, 2);

  HmmModel one;
  one.n_states = 1;
  one.transition.n_states = 1;
  one.transition.n_covariates = 1;
  one.transition.beta.resize(0, 2);
  one.emissions.channels = {{Family::gaussian, {0.0}, {1.0}}};
  one.initial_distribution = Vector::Ones(1);
  CHECK_THROWS_AS(fit_mle(sim.obs, cov, one), InputError);

  HmmModel g = truth;
  g.emissions.channels[0].family = Family::gamma;
  g.emissions.channels[0].location = {1.0, 2.0, 3.0};
  sim.obs.values(5, 0) = -1.0;
  CHECK_THROWS_AS(fit_mle(sim.obs, cov, g), InputError);

  FitConfig est;
  est.estimate_initial = true;
  CHECK_THROWS_AS(fit_mle(sim.obs, cov, truth, est), InputError);
}

TEST_CASE("fit from the truth improves the likelihood and satisfies the AIC identity") {
  const HmmModel truth = three_state();
  const CovariateSeries cov = ar1_covariate(600, 0.95, 5);
  const auto sim = simulate_hmm(truth, cov, 6);
  FitConfig cfg;
  cfg.restarts = 1;
  const FitResult fit = fit_mle(sim.obs, cov, truth, cfg);
  CHECK(fit.converged);
  CHECK(fit.loglik >= forward_loglik(truth, sim.obs, cov));
  CHECK(fit.loglik == doctest::Approx(forward_loglik(fit.model, sim.obs, cov)).epsilon(1e-10));
  CHECK(fit.aic == -2.0 * fit.loglik + 2.0 * fit.n_parameters);
  CHECK(fit.n_parameters == 18);
  REQUIRE(fit.working_covariance.has_value());
  const Vector se = standard_errors(fit);
  for (int s = 0; s < 3; ++s) {
    const auto k = static_cast<Eigen::Index>(ParameterMap(truth).location_index(0, s));
    CHECK(std::abs(fit.model.emissions.channels[0].location[static_cast<std::size_t>(s)] -
                   truth.emissions.channels[0].location[static_cast<std::size_t>(s)]) < 4 * se(k));
  }
}

TEST_CASE("fit never ends below its initializer on random instances") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 12; ++rep) {
    auto in = oracle::random_instance(rng, 2 + rep % 2, 40);
    FitConfig cfg;
    cfg.restarts = 1;
    cfg.seed = static_cast<std::uint64_t>(rep);
    cfg.compute_covariance = false;
    cfg.estimate_initial = in.model.initial_policy == InitialPolicy::fixed;
    cfg.optimizer.max_iterations = 200;
    const FitResult fit = fit_mle(in.obs, in.cov, in.model, cfg);
    CHECK(fit.loglik >= forward_loglik(in.model, in.obs, in.cov));
    CHECK(fit.aic == -2.0 * fit.loglik + 2.0 * fit.n_parameters);
  }
}

TEST_CASE("state relabelling preserves the likelihood and sorts locations") {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 100; ++rep) {
    auto in = oracle::random_instance(rng, 2 + rep % 3, 6);
    const HmmModel sorted = sort_states_by_location(in.model);
    const auto& loc = sorted.emissions.channels[0].location;
    for (std::size_t s = 1; s < loc.size(); ++s) CHECK(loc[s - 1] <= loc[s]);
    const double a = forward_loglik(in.model, in.obs, in.cov);
    const double b = forward_loglik(sorted, in.obs, in.cov);
    CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)));
  }

  // A fit started from a relabelled truth reports sorted states.
  const HmmModel truth = three_state();
  const CovariateSeries cov = ar1_covariate(400, 0.95, 9);
  const auto sim = simulate_hmm(truth, cov, 10);
  HmmModel reversed = truth;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) reversed.transition.beta.row(reversed.transition.pair_index(i, j)) = truth.transition.beta.row(truth.transition.pair_index(2 - i, 2 - j));
  reversed.emissions.channels[0].location = {10.0, 5.0, 0.0};
  reversed.emissions.channels[0].dispersion = {2.0, 1.5, 1.0};
  FitConfig cfg;
  cfg.restarts = 0;
  cfg.compute_covariance = false;
  const FitResult fit = fit_mle(sim.obs, cov, reversed, cfg);
  const auto& loc = fit.model.emissions.channels[0].location;
  CHECK(loc[0] < loc[1]);
  CHECK(loc[1] < loc[2]);
}

TEST_CASE("multi-start fits are deterministic in the seed") {
  const HmmModel truth = three_state();
  const CovariateSeries cov = ar1_covariate(300, 0.95, 12);
  const auto sim = simulate_hmm(truth, cov, 13);
  FitConfig cfg;
  cfg.restarts = 2;
  cfg.seed = 99;
  cfg.compute_covariance = false;
  const FitResult a = fit_mle(sim.obs, cov, truth, cfg);
  const FitResult b = fit_mle(sim.obs, cov, truth, cfg);
  CHECK(a.working == b.working);
  CHECK(a.loglik == b.loglik);
  CHECK(a.n_evaluations == b.n_evaluations);
}

TEST_CASE("standard errors shrink with the square root of the series length") {
  HmmModel truth;
  truth.n_states = 2;
  truth.transition = TransitionCoefficients::zeros(2, 0);
  truth.transition.at(0, 1, 0) = -2.5;
  truth.transition.at(1, 0, 0) = -2.0;
  truth.emissions.channels = {{Family::gaussian, {0.0, 6.0}, {1.0, 1.0}}};
  truth.initial_distribution = Vector::Constant(2, 0.5);
  const ParameterMap map(truth);
  std::vector<Vector> se;
  for (std::size_t T : {500u, 2000u, 8000u}) {
    CovariateSeries cov;
    cov.values.resize(static_cast<Eigen::Index>(T), 0);
    const auto sim = simulate_hmm(truth, cov, 40 + T);
    FitConfig cfg;
    cfg.restarts = 0;
    const FitResult fit = fit_mle(sim.obs, cov, truth, cfg);
    se.push_back(standard_errors(fit));
  }
  for (std::size_t k = 0; k + 1 < se.size(); ++k)
    for (Eigen::Index i = 0; i < se[k].size(); ++i) {
      const double ratio = se[k](i) / se[k + 1](i);
      CHECK(ratio > 2.0 * 0.75);
      CHECK(ratio < 2.0 * 1.25);
    }
  (void)map;
}

TEST_CASE("duplicated covariate column gives a singular information matrix") {
  const HmmModel truth = three_state(2);
  const CovariateSeries cov = ar1_covariate(500, 0.9, 31, 2);
  const auto sim = simulate_hmm(truth, cov, 32);
  FitConfig cfg;
  cfg.restarts = 0;
  const FitResult fit = fit_mle(sim.obs, cov, truth, cfg);
  CHECK_FALSE(fit.working_covariance.has_value());
  CHECK(fit.hessian_eigenvalues.size() == fit.n_parameters);
  CHECK_THROWS_AS(standard_errors(fit), SingularityError);
  try {
    standard_errors(fit);
  } catch (const SingularityError& e) {
    CHECK(std::string(e.what()).find("eigenvalues") != std::string::npos);
  }
}
