#include "occuhmm/hmm/emission.hpp"

#include "occuhmm/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace occuhmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

struct ChannelCache {
  Family family;
  std::vector<double> a;  // gaussian: mean, gamma: shape, von Mises: mean
  std::vector<double> b;  // gaussian: sd, gamma: scale, von Mises: kappa
  std::vector<double> log_norm;
};

ChannelCache make_cache(const ChannelEmission& ch) {
  ChannelCache c{ch.family, ch.location, ch.dispersion, std::vector<double>(ch.location.size())};
  for (std::size_t i = 0; i < ch.location.size(); ++i) {
    switch (ch.family) {
      case Family::gaussian:
        c.log_norm[i] = -std::log(ch.dispersion[i]) - 0.5 * kLogTwoPi;
        break;
      case Family::gamma: {
        const double mean = ch.location[i];
        const double var = ch.dispersion[i] * ch.dispersion[i];
        const double shape = mean * mean / var;
        const double scale = var / mean;
        c.a[i] = shape;
        c.b[i] = scale;
        c.log_norm[i] = -std::lgamma(shape) - shape * std::log(scale);
        break;
      }
      case Family::von_mises:
        c.log_norm[i] = -kLogTwoPi - log_bessel_i0(ch.dispersion[i]);
        break;
    }
  }
  return c;
}

double cached_log_density(const ChannelCache& c, std::size_t state, double x) {
  switch (c.family) {
    case Family::gaussian: {
      const double u = (x - c.a[state]) / c.b[state];
      return c.log_norm[state] - 0.5 * u * u;
    }
    case Family::gamma:
      if (!(x > 0)) return kNegInf;
      return c.log_norm[state] + (c.a[state] - 1) * std::log(x) - x / c.b[state];
    case Family::von_mises:
      if (!(x > -std::numbers::pi - 1e-12 && x <= std::numbers::pi + 1e-12)) return kNegInf;
      return c.log_norm[state] + c.b[state] * std::cos(x - c.a[state]);
  }
  return kNegInf;
}

}  // namespace

double log_bessel_i0(double kappa) {
  if (kappa < 0) throw InputError("von Mises concentration must be >= 0");
  if (kappa < 500.0) return std::log(std::cyl_bessel_i(0.0, kappa));
  // Large-argument asymptotic expansion; truncation error below 1e-12 here.
  const double r = 1.0 / (8.0 * kappa);
  const double series = 1.0 + r * (1.0 + r * (9.0 / 2.0 + r * (225.0 / 6.0)));
  return kappa - 0.5 * std::log(2.0 * std::numbers::pi * kappa) + std::log(series);
}

double gaussian_log_density(double x, double mean, double sd) {
  if (!(sd > 0)) throw InputError("gaussian sd must be > 0");
  const double u = (x - mean) / sd;
  return -std::log(sd) - 0.5 * kLogTwoPi - 0.5 * u * u;
}

double gamma_log_density(double x, double mean, double sd) {
  if (!(mean > 0) || !(sd > 0)) throw InputError("gamma mean and sd must be > 0");
  if (!(x > 0)) return kNegInf;
  const double var = sd * sd;
  const double shape = mean * mean / var;
  const double scale = var / mean;
  return -std::lgamma(shape) - shape * std::log(scale) + (shape - 1) * std::log(x) - x / scale;
}

double von_mises_log_density(double x, double mean, double kappa) {
  if (!(x > -std::numbers::pi - 1e-12 && x <= std::numbers::pi + 1e-12)) return kNegInf;
  return kappa * std::cos(x - mean) - kLogTwoPi - log_bessel_i0(kappa);
}

double emission_log_density(const EmissionSpec& spec, int state, std::span<const double> x) {
  if (x.size() != spec.n_channels()) throw InputError("observation row does not match channel count");
  if (state < 0 || static_cast<std::size_t>(state) >= (spec.channels.empty() ? 0 : spec.channels[0].location.size()))
    throw InputError("state index out of range");
  double total = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    if (std::isnan(x[c])) continue;
    const auto& ch = spec.channels[c];
    const auto s = static_cast<std::size_t>(state);
    switch (ch.family) {
      case Family::gaussian: total += gaussian_log_density(x[c], ch.location[s], ch.dispersion[s]); break;
      case Family::gamma: total += gamma_log_density(x[c], ch.location[s], ch.dispersion[s]); break;
      case Family::von_mises:
        if (ch.dispersion[s] < 0) throw InputError("von Mises concentration must be >= 0");
        total += von_mises_log_density(x[c], ch.location[s], ch.dispersion[s]);
        break;
    }
  }
  return total;
}

DensityValue emission_density(const EmissionSpec& spec, int state, std::span<const double> x) {
  const double lp = emission_log_density(spec, state, x);
  return {std::exp(lp), lp != kNegInf};
}

RowMatrix log_emission_matrix(const EmissionSpec& spec, int n_states, const ObservationSeries& obs) {
  spec.validate(n_states);
  if (obs.n_channels() != spec.n_channels())
    throw InputError("observation series has " + std::to_string(obs.n_channels()) +
                     " channels, model expects " + std::to_string(spec.n_channels()));
  std::vector<ChannelCache> caches;
  caches.reserve(spec.n_channels());
  for (const auto& ch : spec.channels) caches.push_back(make_cache(ch));

  const auto T = static_cast<Eigen::Index>(obs.length());
  RowMatrix out = RowMatrix::Zero(T, n_states);
  for (Eigen::Index t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < caches.size(); ++c) {
      const double x = obs.values(t, static_cast<Eigen::Index>(c));
      if (std::isnan(x)) continue;
      for (int i = 0; i < n_states; ++i)
        out(t, i) += cached_log_density(caches[c], static_cast<std::size_t>(i), x);
    }
  }
  return out;
}

}  // namespace occuhmm
