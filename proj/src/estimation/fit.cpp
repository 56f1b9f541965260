#include "occuhmm/estimation/fit.hpp"

#include "occuhmm/error.hpp"
#include "occuhmm/hmm/recursions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace occuhmm {

namespace {

constexpr double kRelativeEigenFloor = 1e-8;

double band_sd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Approximate inverse of the mean resultant length function A1.
double kappa_from_resultant(double r) {
  double k;
  if (r < 0.53) k = 2 * r + r * r * r + 5 * std::pow(r, 5) / 6;
  else if (r < 0.85) k = -0.4 + 1.39 * r + 0.43 / (1 - r);
  else k = 1 / (r * r * r - 4 * r * r + 3 * r);
  return std::clamp(k, 0.05, 500.0);
}

// Rank-based band (0..n_states-1) for every finite entry of `column`, -1 otherwise.
std::vector<int> quantile_bands(const std::vector<double>& column, int n_states) {
  std::vector<std::size_t> order;
  for (std::size_t t = 0; t < column.size(); ++t)
    if (std::isfinite(column[t])) order.push_back(t);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  std::vector<int> band(column.size(), -1);
  const std::size_t n = order.size();
  for (std::size_t r = 0; r < n; ++r)
    band[order[r]] = static_cast<int>(r * static_cast<std::size_t>(n_states) / n);
  return band;
}

std::vector<double> channel_column(const ObservationSeries& obs, std::size_t ch) {
  std::vector<double> col(obs.length());
  for (std::size_t t = 0; t < obs.length(); ++t) col[t] = obs.values(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(ch));
  return col;
}

std::string eigen_report(const Vector& eig, const Matrix& vectors) {
  std::ostringstream os;
  os.precision(4);
  os << "Hessian of the negative log-likelihood is not safely positive definite; eigenvalues [";
  for (Eigen::Index i = 0; i < eig.size(); ++i) os << (i ? ", " : "") << eig(i);
  os << "]";
  if (eig.size() > 0) {
    const Vector v = vectors.col(0);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return std::abs(v(a)) > std::abs(v(b)); });
    os << "; weakest direction loads on working entries";
    for (std::size_t k = 0; k < std::min<std::size_t>(3, idx.size()); ++k) os << " " << idx[k] << " (" << v(idx[k]) << ")";
  }
  return os.str();
}

struct HessianAnalysis {
  Vector eigenvalues;
  std::optional<Matrix> covariance;
  std::string note;
};

HessianAnalysis analyze_hessian(const Objective& objective, const Vector& x) {
  Matrix h = finite_difference_hessian(objective, x);
  HessianAnalysis out;
  if (!h.allFinite()) {
    out.note = "Hessian of the negative log-likelihood has non-finite entries";
    return out;
  }
  h = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  out.eigenvalues = es.eigenvalues();
  const double largest = out.eigenvalues.cwiseAbs().maxCoeff();
  if (!(out.eigenvalues(0) > kRelativeEigenFloor * largest)) {
    out.note = eigen_report(out.eigenvalues, es.eigenvectors());
    return out;
  }
  const Vector inv = out.eigenvalues.cwiseInverse();
  out.covariance = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  return out;
}

}  // namespace

HmmModel initial_model(const ObservationSeries& obs, int n_states, const std::vector<Family>& families,
                       int n_covariates) {
  if (n_states < 2) throw InputError("at least two states are required");
  if (families.size() != obs.n_channels()) throw InputError("one emission family per observed channel is required");
  if (obs.length() == 0) throw InputError("no observations");
  HmmModel m;
  m.n_states = n_states;
  m.transition = TransitionCoefficients::zeros(n_states, n_covariates);
  const double off = std::log(0.1 / (n_states - 1) / 0.9);
  m.transition.beta.col(0).setConstant(off);
  m.initial_distribution = Vector::Constant(n_states, 1.0 / n_states);
  m.initial_policy = InitialPolicy::stationary;

  const std::vector<int> lead_bands =
      families[0] == Family::von_mises ? std::vector<int>(obs.length(), -1) : quantile_bands(channel_column(obs, 0), n_states);

  const auto ns = static_cast<std::size_t>(n_states);
  for (std::size_t ch = 0; ch < families.size(); ++ch) {
    ChannelEmission e;
    e.family = families[ch];
    e.location.resize(ns);
    e.dispersion.resize(ns);
    const std::vector<double> col = channel_column(obs, ch);
    std::vector<double> finite;
    for (double v : col)
      if (std::isfinite(v)) finite.push_back(v);
    if (finite.size() < ns) throw InputError("too few observed values to initialise channel " + std::to_string(ch));

    if (e.family == Family::von_mises) {
      for (std::size_t s = 0; s < ns; ++s) {
        double c = 0.0, sn = 0.0;
        std::size_t n = 0;
        for (std::size_t t = 0; t < col.size(); ++t) {
          if (!std::isfinite(col[t])) continue;
          if (lead_bands[t] >= 0 && lead_bands[t] != static_cast<int>(s)) continue;
          c += std::cos(col[t]);
          sn += std::sin(col[t]);
          ++n;
        }
        if (n == 0) {
          e.location[s] = 0.0;
          e.dispersion[s] = 1.0;
          continue;
        }
        e.location[s] = std::atan2(sn, c);
        e.dispersion[s] = kappa_from_resultant(std::hypot(c, sn) / static_cast<double>(n));
      }
    } else {
      const std::vector<int> bands = quantile_bands(col, n_states);
      const double overall_mean = std::accumulate(finite.begin(), finite.end(), 0.0) / static_cast<double>(finite.size());
      const double overall_sd = std::max(band_sd(finite, overall_mean), 1e-6);
      for (std::size_t s = 0; s < ns; ++s) {
        std::vector<double> v;
        for (std::size_t t = 0; t < col.size(); ++t)
          if (bands[t] == static_cast<int>(s)) v.push_back(col[t]);
        double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double sd = band_sd(v, mean);
        if (!(sd > 1e-3 * overall_sd)) sd = overall_sd / n_states;
        if (e.family == Family::gamma) {
          mean = std::max(mean, 1e-3 * std::max(overall_mean, 1e-6));
          sd = std::max(sd, 1e-3 * mean);
        }
        e.location[s] = mean;
        e.dispersion[s] = sd;
      }
    }
    m.emissions.channels.push_back(std::move(e));
  }
  m.validate();
  return m;
}

Objective negative_loglik_objective(const ObservationSeries& obs, const CovariateSeries& cov, const ParameterMap& map) {
  return [&obs, &cov, map](const Vector& theta) {
    try {
      const HmmModel m = map.to_model(theta);
      for (const auto& e : m.emissions.channels)
        for (double d : e.dispersion)
          if (!(d >= std::numeric_limits<double>::min()) || !std::isfinite(d)) return std::numeric_limits<double>::infinity();
      const double ll = forward_loglik(m, obs, cov);
      return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
}

HmmModel sort_states_by_location(const HmmModel& model) {
  model.validate();
  if (model.emissions.channels.empty()) return model;
  const auto& loc = model.emissions.channels[0].location;
  const auto n = static_cast<std::size_t>(model.n_states);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return loc[static_cast<std::size_t>(a)] < loc[static_cast<std::size_t>(b)]; });

  HmmModel out = model;
  for (int a = 0; a < model.n_states; ++a)
    for (int b = 0; b < model.n_states; ++b) {
      if (a == b) continue;
      out.transition.beta.row(out.transition.pair_index(a, b)) =
          model.transition.beta.row(model.transition.pair_index(perm[static_cast<std::size_t>(a)], perm[static_cast<std::size_t>(b)]));
    }
  for (std::size_t ch = 0; ch < model.emissions.n_channels(); ++ch)
    for (std::size_t k = 0; k < n; ++k) {
      const auto src = static_cast<std::size_t>(perm[k]);
      out.emissions.channels[ch].location[k] = model.emissions.channels[ch].location[src];
      out.emissions.channels[ch].dispersion[k] = model.emissions.channels[ch].dispersion[src];
    }
  for (std::size_t k = 0; k < n; ++k)
    out.initial_distribution(static_cast<Eigen::Index>(k)) = model.initial_distribution(perm[k]);
  return out;
}

FitResult fit_mle(const ObservationSeries& obs, const CovariateSeries& cov, const HmmModel& init, const FitConfig& config) {
  if (init.n_states < 2) throw InputError("a single-state model has no transitions to fit");
  init.validate();
  check_aligned(obs, cov);
  if (init.emissions.n_channels() != obs.n_channels()) throw InputError("model and observations have different channel counts");
  if (init.n_covariates() != static_cast<int>(cov.n_covariates()))
    throw InputError("model and covariates have different covariate counts");
  if (config.estimate_initial && init.initial_policy != InitialPolicy::fixed)
    throw InputError("the initial distribution can only be estimated under the fixed initial policy");
  if (config.restarts < 0) throw InputError("restarts must be non-negative");

  const ParameterMap map(init, config.estimate_initial);
  const Objective f = negative_loglik_objective(obs, cov, map);
  const GradientFn g = [&f](const Vector& x) { return central_difference_gradient(f, x); };
  const Vector theta0 = map.to_working(init);
  const double f0 = f(theta0);
  if (!std::isfinite(f0)) throw InputError("log-likelihood is not finite at the initial model");

  FitResult res;
  OptimizerResult best;
  best.value = std::numeric_limits<double>::infinity();
  int evaluations = 1;
  for (int k = 0; k <= config.restarts; ++k) {
    Vector start = theta0;
    if (k > 0) {
      std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                        static_cast<std::uint32_t>(k)};
      std::mt19937_64 rng(seq);
      std::normal_distribution<double> noise(0.0, config.restart_scale);
      for (Eigen::Index i = 0; i < start.size(); ++i) start(i) += noise(rng);
      ++evaluations;
      if (!std::isfinite(f(start))) continue;
    }
    OptimizerResult r = minimize_bfgs(f, g, start, config.optimizer);
    evaluations += r.evaluations;
    if (r.value < best.value) best = std::move(r);
  }

  HmmModel fitted = map.to_model(best.x);
  if (config.sort_states) fitted = sort_states_by_location(fitted);
  res.model = fitted;
  res.working = map.to_working(fitted);
  res.loglik = -best.value;
  res.initial_loglik = -f0;
  res.converged = best.converged;
  res.iterations = best.iterations;
  res.n_parameters = static_cast<int>(map.size());
  res.aic = -2.0 * res.loglik + 2.0 * res.n_parameters;
  res.parameter_names = map.names();
  res.estimate_initial = config.estimate_initial;

  if (config.compute_covariance) {
    HessianAnalysis h = analyze_hessian(f, res.working);
    evaluations += 2 * res.n_parameters * res.n_parameters + 1;
    res.hessian_eigenvalues = std::move(h.eigenvalues);
    res.working_covariance = std::move(h.covariance);
    res.covariance_note = std::move(h.note);
  } else {
    res.covariance_note = "covariance not requested";
  }
  res.n_evaluations = evaluations;
  return res;
}

CovarianceEstimate inverse_hessian_covariance(const Objective& objective, const Vector& x) {
  HessianAnalysis h = analyze_hessian(objective, x);
  if (!h.covariance) throw SingularityError(h.note);
  return {*h.covariance, h.eigenvalues};
}

Vector standard_errors(const FitResult& fit) {
  if (!fit.working_covariance) throw SingularityError(fit.covariance_note.empty() ? "no covariance available" : fit.covariance_note);
  return fit.working_covariance->diagonal().cwiseSqrt();
}

Vector standard_errors(const Objective& negative_loglik, const Vector& x) {
  return inverse_hessian_covariance(negative_loglik, x).covariance.diagonal().cwiseSqrt();
}

}  // namespace occuhmm
