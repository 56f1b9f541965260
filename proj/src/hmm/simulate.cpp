#include "occuhmm/hmm/simulate.hpp"

#include "occuhmm/estimation/working_params.hpp"
#include "occuhmm/hmm/recursions.hpp"
#include "occuhmm/hmm/tpm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace occuhmm {

namespace {

int draw_state(std::mt19937_64& rng, const double* probs, int n) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (int i = 0; i < n - 1; ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return n - 1;
}

}  // namespace

double sample_von_mises(std::mt19937_64& rng, double mean, double kappa) {
  constexpr double pi = std::numbers::pi;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  if (kappa < 1e-8) return wrap_angle(mean + pi * (2.0 * unif(rng) - 1.0));
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  for (;;) {
    const double u1 = unif(rng), u2 = unif(rng), u3 = unif(rng);
    const double z = std::cos(pi * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      const double theta = (u3 > 0.5 ? 1.0 : -1.0) * std::acos(std::clamp(f, -1.0, 1.0));
      return wrap_angle(mean + theta);
    }
  }
}

SimulatedPath simulate_hmm(const HmmModel& model, const CovariateSeries& cov, std::uint64_t seed) {
  model.validate();
  const std::size_t T = cov.length();
  const int n = model.n_states;
  std::mt19937_64 rng(seed);
  SimulatedPath out;
  out.states.assign(T, 0);
  out.obs.values.resize(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(model.emissions.n_channels()));
  out.obs.segment_ids = cov.segment_ids;

  Matrix gamma(n, n);
  for (const auto& [begin, end] : segment_ranges(cov.segment_ids, T)) {
    for (std::size_t t = begin; t < end; ++t) {
      const auto row = row_span(cov.values, static_cast<Eigen::Index>(t));
      if (t == begin) {
        const Vector d = segment_start_distribution(model, row);
        out.states[t] = draw_state(rng, d.data(), n);
      } else {
        fill_tpm(model.transition, row, gamma);
        const Eigen::RowVectorXd r = gamma.row(out.states[t - 1]);
        out.states[t] = draw_state(rng, r.data(), n);
      }
    }
  }
  for (std::size_t t = 0; t < T; ++t) {
    const auto s = static_cast<std::size_t>(out.states[t]);
    for (std::size_t ch = 0; ch < model.emissions.n_channels(); ++ch) {
      const auto& e = model.emissions.channels[ch];
      const double loc = e.location[s], disp = e.dispersion[s];
      double x = 0.0;
      switch (e.family) {
        case Family::gaussian: x = std::normal_distribution<double>(loc, disp)(rng); break;
        case Family::gamma: x = std::gamma_distribution<double>(loc * loc / (disp * disp), disp * disp / loc)(rng); break;
        case Family::von_mises: x = sample_von_mises(rng, loc, disp); break;
      }
      out.obs.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(ch)) = x;
    }
  }
  return out;
}

}  // namespace occuhmm
