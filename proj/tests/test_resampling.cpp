#include "doctest.h"
#include "fixtures.hpp"

#include "occuhmm/error.hpp"
#include "occuhmm/hmm/tpm.hpp"
#include "occuhmm/occupancy/estimators.hpp"
#include "occuhmm/occupancy/stationary.hpp"
#include "occuhmm/resampling/ar.hpp"
#include "occuhmm/resampling/bootstrap.hpp"
#include "occuhmm/resampling/occupancy.hpp"
#include "occuhmm/resampling/seasonal.hpp"
#include "occuhmm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace occuhmm;

namespace {

std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

// Lag-1 least squares on the centred series from index `start` on.
double lag1_cls(const std::vector<double>& x, std::size_t start) {
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double num = 0, den = 0;
  for (std::size_t t = start; t < x.size(); ++t) {
    num += (x[t] - mean) * (x[t - 1] - mean);
    den += (x[t - 1] - mean) * (x[t - 1] - mean);
  }
  return num / den;
}

}  // namespace

TEST_CASE("AR stationarity check") {
  CHECK(is_stationary(std::vector<double>{}));
  CHECK(is_stationary(std::vector<double>{0.95}));
  CHECK_FALSE(is_stationary(std::vector<double>{1.0}));
  CHECK_FALSE(is_stationary(std::vector<double>{-1.01}));
  CHECK_THROWS_AS(ArModel({1.0}, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(ArModel({0.5}, 0.0, 0.0), DomainError);

  // AR(2) stationarity triangle: phi1 + phi2 < 1, phi2 - phi1 < 1, |phi2| < 1.
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  int agree = 0;
  for (int i = 0; i < 2000; ++i) {
    const double a = u(rng), b = u(rng);
    const bool triangle = a + b < 1 && b - a < 1 && std::abs(b) < 1;
    agree += is_stationary(std::vector<double>{a, b}) == triangle;
  }
  CHECK(agree == 2000);
}

TEST_CASE("AR fitting") {
  SUBCASE("white noise selects negligible coefficients") {
    const auto fit = fit_ar_detailed(white_noise(10000, 3), 5);
    for (double phi : fit.model.phi()) CHECK(std::abs(phi) < 0.05);
    CHECK(fit.aic.size() == 6);
    CHECK(fit.model.noise_sd() == doctest::Approx(1.0).epsilon(0.03));
  }
  SUBCASE("persistent AR(1)") {
    const auto x = fixture::ar1_path(10000, 0.95, 4);
    const auto m = fit_ar(x, 5);
    REQUIRE(m.order() >= 1);
    CHECK(m.phi()[0] >= 0.93);
    CHECK(m.phi()[0] <= 0.97);
    const auto m1 = fit_ar(x, 1);
    CHECK(m1.phi()[0] == doctest::Approx(lag1_cls(x, 1)).epsilon(1e-12));
  }
  SUBCASE("AR(2) order and coefficients") {
    const ArModel truth({0.5, 0.3}, 2.0, 0.7);
    const auto x = simulate_ar(truth, 100000, 5);
    const auto fit = fit_ar_detailed(x, 5);
    CHECK(fit.selected_order >= 2);
    CHECK(fit.model.phi()[0] == doctest::Approx(0.5).epsilon(0.04));
    CHECK(fit.model.phi()[1] == doctest::Approx(0.3).epsilon(0.06));
    CHECK(fit.model.process_mean() == doctest::Approx(truth.process_mean()).epsilon(0.02));
    CHECK(fit.model.noise_sd() == doctest::Approx(0.7).epsilon(0.01));
  }
  SUBCASE("degenerate input") {
    CHECK_THROWS_AS(fit_ar(std::vector<double>(100, 4.2)), InputError);
    CHECK_THROWS_AS(fit_ar(white_noise(40, 1), 5), InputError);
    auto x = white_noise(100, 1);
    x[7] = std::nan("");
    CHECK_THROWS_AS(fit_ar(x, 2), InputError);
  }
}

TEST_CASE("AR(1) coefficient recovery across replicates") {
  for (double phi : {0.5, 0.7, 0.95}) {
    const double band = 4.0 * std::sqrt((1 - phi * phi) / 10000.0);
    int first_order = 0, selected = 0;
    for (std::uint64_t r = 0; r < 100; ++r) {
      const auto x = fixture::ar1_path(10000, phi, 1000 + r);
      first_order += std::abs(fit_ar(x, 1).phi()[0] - phi) <= band;
      selected += std::abs(implied_autocorrelation(fit_ar(x, 5), 1)[1] - phi) <= band;
    }
    CHECK(first_order >= 95);
    CHECK(selected >= 95);
  }
}

TEST_CASE("implied autocorrelation") {
  const auto r1 = implied_autocorrelation(ArModel(std::vector<double>{0.8}, 0.0, 1.0), 4);
  for (int k = 0; k <= 4; ++k) CHECK(r1[static_cast<std::size_t>(k)] == doctest::Approx(std::pow(0.8, k)).epsilon(1e-14));
  const auto r2 = implied_autocorrelation(ArModel({0.5, 0.3}, 0.0, 1.0), 3);
  CHECK(r2[1] == doctest::Approx(0.5 / 0.7).epsilon(1e-14));
  CHECK(r2[2] == doctest::Approx(0.5 * 0.5 / 0.7 + 0.3).epsilon(1e-14));
  CHECK(r2[3] == doctest::Approx(0.5 * r2[2] + 0.3 * r2[1]).epsilon(1e-14));
  CHECK(implied_autocorrelation(ArModel({}, 1.0, 1.0), 2) == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("AR simulation") {
  const ArModel still({0.6, 0.2}, 1.0, 1e-12);
  for (double v : simulate_ar(still, 1000, 1)) CHECK(std::abs(v - 5.0) < 1e-6);

  const ArModel ar(std::vector<double>{0.95}, 0.0, std::sqrt(1 - 0.95 * 0.95));
  const auto x = simulate_ar(ar, 1000000, 7);
  const double r1 = stats::lag1_autocorrelation(x);
  CHECK(r1 >= 0.945);
  CHECK(r1 <= 0.955);
  CHECK(stats::variance(x) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(simulate_ar(ar, 500, 9) == simulate_ar(ar, 500, 9));
  CHECK(simulate_ar(ar, 500, 9) != simulate_ar(ar, 500, 10));
  CHECK(simulate_ar(ArModel({}, 3.0, 1.0), 10, 1).size() == 10);
}

TEST_CASE("seasonal trend regression") {
  std::vector<double> doy(730), z(730);
  for (std::size_t i = 0; i < doy.size(); ++i) {
    doy[i] = static_cast<double>(i % 365) + 0.5;
    z[i] = 20.0 + 5.0 * std::sin(2 * std::numbers::pi * doy[i] / 365.0);
  }
  const auto exact = fit_seasonal_trend(z, doy);
  CHECK(std::abs(exact.coefficients[0] - 20.0) < 1e-8);
  CHECK(std::abs(exact.coefficients[1] - 5.0) < 1e-8);
  CHECK(std::abs(exact.coefficients[2]) < 1e-8);
  CHECK(exact.residual_sd < 1e-8);
  CHECK(exact.evaluate(100.0) == doctest::Approx(20.0 + 5.0 * std::sin(2 * std::numbers::pi * 100.0 / 365.0)));

  const auto noise = white_noise(730, 12, 2.0);
  std::vector<double> noisy(730);
  for (std::size_t i = 0; i < 730; ++i) noisy[i] = z[i] + 3.0 * std::cos(2 * std::numbers::pi * doy[i] / 365.0) + noise[i];
  const auto fit = fit_seasonal_trend(noisy, doy);
  const auto res = fit.residuals(noisy, doy);
  CHECK(std::abs(stats::mean(res)) < 1e-10);
  CHECK(fit.coefficients[2] == doctest::Approx(3.0).epsilon(0.1));

  int inside = 0;
  for (std::uint64_t r = 0; r < 50; ++r) {
    const auto pure = fit_seasonal_trend(white_noise(730, 100 + r), doy);
    inside += std::abs(pure.coefficients[1]) < 3 * pure.standard_errors[1] &&
              std::abs(pure.coefficients[2]) < 3 * pure.standard_errors[2];
  }
  CHECK(inside >= 47);

  CHECK_THROWS_AS(fit_seasonal_trend(white_noise(50, 1), std::vector<double>(50, 12.0)), SingularityError);
  CHECK_THROWS_AS(fit_seasonal_trend(white_noise(5, 1), std::vector<double>(5, 1.0)), InputError);
}

TEST_CASE("block bootstrap structure") {
  const auto x = white_noise(1000, 21);
  SUBCASE("single block repeats the input") {
    BlockBootstrapConfig cfg{.block_length = 1000, .output_blocks = 3};
    const auto y = block_bootstrap(x, cfg, 1);
    REQUIRE(y.size() == 3000);
    for (std::size_t i = 0; i < 3000; ++i) CHECK(y[i] == x[i % 1000]);
  }
  SUBCASE("every output block is an input block") {
    BlockBootstrapConfig cfg{.block_length = 37, .output_blocks = 500};
    const auto y = block_bootstrap(x, cfg, 2);
    REQUIRE(y.size() == 37u * 500u);
    const std::size_t M = 1000 / 37;
    for (std::size_t b = 0; b < 500; ++b) {
      bool found = false;
      for (std::size_t i = 0; i < M && !found; ++i)
        found = std::equal(y.begin() + static_cast<std::ptrdiff_t>(b * 37), y.begin() + static_cast<std::ptrdiff_t>((b + 1) * 37),
                           x.begin() + static_cast<std::ptrdiff_t>(i * 37));
      CHECK(found);
    }
    // The tail beyond M * L never appears.
    for (std::size_t t = M * 37; t < 1000; ++t) CHECK(std::find(y.begin(), y.end(), x[t]) == y.end());
  }
  SUBCASE("unit blocks resample values") {
    BlockBootstrapConfig cfg{.block_length = 1, .output_blocks = 1000000};
    const auto y = block_bootstrap(x, cfg, 3);
    const double sd = std::sqrt(stats::variance(x));
    CHECK(std::abs(stats::mean(y) - stats::mean(x)) < 3 * sd / std::sqrt(1e6));
    CHECK(stats::ks_distance(x, y) < 0.02);
  }
  SUBCASE("determinism and errors") {
    BlockBootstrapConfig cfg{.block_length = 10, .output_blocks = 20};
    CHECK(block_bootstrap(x, cfg, 5) == block_bootstrap(x, cfg, 5));
    CHECK(block_bootstrap(x, cfg, 5) != block_bootstrap(x, cfg, 6));
    cfg.block_length = 1001;
    CHECK_THROWS_AS(block_bootstrap(x, cfg, 1), InputError);
    cfg.block_length = 0;
    CHECK_THROWS_AS(block_bootstrap(x, cfg, 1), InputError);
  }
  SUBCASE("seasonal trend is removed and re-added on a continuing time axis") {
    std::vector<double> t(1000), z(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
      t[i] = 50.0 + 0.5 * static_cast<double>(i);
      z[i] = 10.0 + 4.0 * std::sin(2 * std::numbers::pi * t[i] / 365.0) + x[i];
    }
    BlockBootstrapConfig cfg{.block_length = 1000, .output_blocks = 2};
    cfg.detrend = fit_seasonal_trend(z, t);
    cfg.times = t;
    const auto y = block_bootstrap(z, cfg, 1);
    const auto res = cfg.detrend->residuals(z, t);
    for (std::size_t i = 0; i < 2000; ++i)
      CHECK(y[i] == doctest::Approx(res[i % 1000] + cfg.detrend->evaluate(50.0 + 0.5 * static_cast<double>(i))).epsilon(1e-12));
    for (std::size_t i = 0; i < 1000; ++i) CHECK(y[i] == doctest::Approx(z[i]).epsilon(1e-12));
  }
}

TEST_CASE("occupancy from a synthetic path") {
  const HmmModel m = fixture::three_state();
  SUBCASE("constant path reproduces the stationary distribution") {
    const std::vector<double> path(5000, 0.4);
    const BinEdges edges{0.0, 1.0, 10};
    const auto r = occupancy_via_resampling(m, path, edges, {.burn_in = 100});
    const Vector rho = stationary_distribution(tpm_from_covariates(m.transition, std::vector<double>{0.4}));
    const int bin = edges.index_of(0.4);
    REQUIRE(r.curve.has_value(static_cast<std::size_t>(bin)));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(r.curve.probs(bin, i) - rho(i)) < 1e-6);
    CHECK(r.curve.method == OccupancyMethod::ar_resample);
    CHECK(r.coverage == doctest::Approx(0.1));
    CHECK_FALSE(r.warning.empty());
  }
  SUBCASE("values outside the range are dropped and counted") {
    std::vector<double> path = fixture::ar1_path(20000, 0.7, 3);
    const BinEdges edges{-1.0, 1.0, 20};
    const auto r = occupancy_via_resampling(m, path, edges,
                                            {.burn_in = 0, .method = OccupancyMethod::block_bootstrap});
    std::size_t outside = 0;
    for (double z : path) outside += edges.index_of(z) < 0;
    CHECK(r.dropped_outside == outside);
    CHECK(r.curve.method == OccupancyMethod::block_bootstrap);
    CHECK(r.warning.empty());
    CHECK_THROWS_AS(occupancy_via_resampling(m, path, edges, {.method = OccupancyMethod::dirichlet}), InputError);
  }
}

TEST_CASE("AR-resampled occupancy approaches the Monte Carlo truth with length") {
  const HmmModel m = fixture::three_state();
  const ArModel ar(std::vector<double>{0.7}, 0.0, std::sqrt(1 - 0.49));
  MonteCarloConfig mc;
  mc.length = 4000000;
  mc.binning.n_bins = 20;
  mc.binning.range = RangePolicy::fixed;
  mc.binning.fixed_lower = -1.645;
  mc.binning.fixed_upper = 1.645;
  const auto truth = monte_carlo_truth(m, [&](std::size_t n, std::uint64_t s) { return simulate_ar(ar, n, s); }, mc, 77);
  const BinEdges edges = resolve_bins(mc.binning, {});
  std::vector<double> dev;
  for (std::size_t len : {100000u, 1000000u}) {
    double worst = 0, sum = 0;
    for (std::uint64_t rep = 0; rep < 3; ++rep) {
      const auto r = occupancy_via_resampling(m, simulate_ar(ar, len, 500 + rep), edges);
      double d = 0;
      for (std::size_t k = 0; k < truth.size(); ++k)
        for (int i = 0; i < 3; ++i)
          d = std::max(d, std::abs(r.curve.probs(static_cast<Eigen::Index>(k), i) - truth.probs(static_cast<Eigen::Index>(k), i)));
      worst = std::max(worst, d);
      sum += d;
    }
    dev.push_back(sum / 3);
    (void)worst;
  }
  CHECK(dev[1] < dev[0]);
  CHECK(dev[1] < 0.03);
}
