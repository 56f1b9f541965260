#include "occuhmm/sim/harness.hpp"

#include "occuhmm/error.hpp"
#include "occuhmm/estimation/working_params.hpp"
#include "occuhmm/hmm/recursions.hpp"
#include "occuhmm/hmm/simulate.hpp"
#include "occuhmm/resampling/ar.hpp"
#include "occuhmm/resampling/bootstrap.hpp"
#include "occuhmm/resampling/occupancy.hpp"
#include "occuhmm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#ifndef OCCUHMM_SOURCE_DIR
#define OCCUHMM_SOURCE_DIR "."
#endif

namespace occuhmm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

CovariateProcess covariate_process_from_json(const Json& j) {
  check_keys(j, {"kind", "phi", "marginal_sd", "mean", "amplitude", "period", "noise_sd"}, "covariate process");
  CovariateProcess p;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "ar1") p.kind = CovariateProcess::Kind::ar1;
  else if (kind == "seasonal") p.kind = CovariateProcess::Kind::seasonal;
  else throw InputError("unknown covariate process '" + kind + "'");
  p.phi = j.value("phi", p.phi);
  p.marginal_sd = j.value("marginal_sd", p.marginal_sd);
  p.mean = j.value("mean", p.mean);
  p.amplitude = j.value("amplitude", p.amplitude);
  p.period = j.value("period", p.period);
  p.noise_sd = j.value("noise_sd", p.noise_sd);
  p.validate();
  return p;
}

Json covariate_process_to_json(const CovariateProcess& p) {
  if (p.kind == CovariateProcess::Kind::ar1)
    return {{"kind", "ar1"}, {"phi", p.phi}, {"marginal_sd", p.marginal_sd}, {"mean", p.mean}};
  return {{"kind", "seasonal"}, {"mean", p.mean}, {"amplitude", p.amplitude}, {"period", p.period}, {"noise_sd", p.noise_sd}};
}

void CovariateProcess::validate() const {
  if (kind == Kind::ar1) {
    if (!(std::abs(phi) < 1)) throw InputError("AR(1) covariate needs |phi| < 1");
    if (!(marginal_sd > 0)) throw InputError("AR(1) covariate needs a positive marginal sd");
  } else {
    if (!(period > 0) || !std::isfinite(amplitude) || !(noise_sd >= 0))
      throw InputError("seasonal covariate needs period > 0, finite amplitude and noise sd >= 0");
  }
  if (!std::isfinite(mean)) throw InputError("covariate mean must be finite");
}

std::vector<double> CovariateProcess::generate(std::size_t length, std::uint64_t seed) const {
  if (kind == Kind::ar1) {
    const ArModel ar(std::vector<double>{phi}, mean * (1 - phi), marginal_sd * std::sqrt(1 - phi * phi));
    return simulate_ar(ar, length, seed);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> z(length);
  for (std::size_t t = 0; t < length; ++t)
    z[t] = mean + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period) + noise_sd * noise(rng);
  return z;
}

void SettingSpec::validate() const {
  covariate.validate();
  model.validate();
  if (model.n_covariates() != 1) throw InputError("setting models take exactly one covariate");
  if (length < 10) throw InputError("setting series length must be at least 10");
  if (replicates < 1) throw InputError("replicate count must be positive");
  if (block_length < 1 || block_length > length) throw InputError("block length must lie in [1, length]");
}

std::map<std::string, SettingSpec> parse_settings(const Json& j) {
  check_keys(j, {"version", "description", "model", "settings"}, "settings file");
  if (j.value("version", 0) != 1) throw InputError("unsupported settings file version");
  const HmmModel shared = j.contains("model") ? model_from_json(j["model"]) : HmmModel{};
  std::map<std::string, SettingSpec> out;
  for (const auto& [id, s] : j.at("settings").items()) {
    check_keys(s, {"description", "covariate", "model", "length", "replicates", "block_length"}, "setting " + id);
    SettingSpec spec;
    spec.id = id;
    spec.covariate = covariate_process_from_json(s.at("covariate"));
    if (s.contains("model")) spec.model = model_from_json(s["model"]);
    else if (j.contains("model")) spec.model = shared;
    else throw InputError("setting " + id + " has no model");
    spec.length = s.value("length", spec.length);
    spec.replicates = s.value("replicates", spec.replicates);
    const auto period_block = static_cast<std::size_t>(std::llround(spec.covariate.period));
    spec.block_length = s.value("block_length", spec.covariate.kind == CovariateProcess::Kind::seasonal ? period_block
                                                                                                         : spec.block_length);
    spec.validate();
    out.emplace(id, std::move(spec));
  }
  if (out.empty()) throw InputError("settings file defines no settings");
  return out;
}

std::map<std::string, SettingSpec> load_settings(const std::filesystem::path& path) {
  return parse_settings(read_json_file(path));
}

std::filesystem::path default_settings_path() {
  return std::filesystem::path(OCCUHMM_SOURCE_DIR) / "config" / "settings.json";
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

SettingData generate_setting(const SettingSpec& spec, std::uint64_t seed) {
  spec.validate();
  SettingData d;
  d.cov = CovariateSeries::from_column(spec.covariate.generate(spec.length, derive_seed(seed, 0, 0)));
  auto path = simulate_hmm(spec.model, d.cov, derive_seed(seed, 0, 1));
  d.obs = std::move(path.obs);
  d.states = std::move(path.states);
  return d;
}

const EstimatorSummary& ExperimentReport::summary(OccupancyMethod method) const {
  for (const auto& s : summaries)
    if (s.method == method) return s;
  throw InputError(std::string("no summary for estimator ") + method_tag(method));
}

TruthCurve setting_truth(const SettingSpec& spec, const ExperimentConfig& config) {
  const auto& mc = config.monte_carlo;
  const std::vector<double> path = spec.covariate.generate(mc.length, config.truth_seed);
  TruthCurve t;
  t.curve = monte_carlo_truth_from_path(spec.model, path, mc);
  t.edges = resolve_bins(mc.binning, std::span<const double>(path).subspan(mc.burn_in));
  std::vector<double> sub;
  for (std::size_t i = mc.burn_in; i < path.size(); i += 10) sub.push_back(path[i]);
  t.central90[0] = stats::quantile(sub, 0.05);
  t.central90[1] = stats::quantile(sub, 0.95);
  t.central50[0] = stats::quantile(sub, 0.25);
  t.central50[1] = stats::quantile(sub, 0.75);
  return t;
}

EstimatorSummary summarize_estimator(OccupancyMethod method, const std::vector<const OccupancyCurve*>& curves,
                                     const OccupancyCurve& truth, const double central90[2], const double central50[2]) {
  const std::size_t G = truth.size();
  const int n = truth.n_states();
  EstimatorSummary s;
  s.method = method;
  s.n_curves = static_cast<int>(curves.size());
  s.mean.method = method;
  s.mean.grid = truth.grid;
  s.mean.counts.assign(G, 0);
  s.mean.probs = RowMatrix::Constant(static_cast<Eigen::Index>(G), n, kNaN);
  s.lower = s.mean.probs;
  s.upper = s.mean.probs;
  s.bias = s.mean.probs;
  bool any_counts = false;
  for (const auto* c : curves)
    for (std::size_t k : c->counts) any_counts = any_counts || k > 0;

  double bias50 = 0, bias90 = 0;
  int n50 = 0, n90 = 0, n_cover = 0, covered = 0;
  for (std::size_t g = 0; g < G; ++g) {
    const auto gi = static_cast<Eigen::Index>(g);
    double weight = 0;
    Vector acc = Vector::Zero(n);
    std::vector<std::vector<double>> values(static_cast<std::size_t>(n));
    for (const auto* c : curves) {
      if (c->size() != G) throw InputError("estimator curves must share the truth grid");
      if (!c->has_value(g)) continue;
      const double w = any_counts ? static_cast<double>(c->counts[g]) : 1.0;
      acc += w * c->probs.row(gi).transpose();
      weight += w;
      s.mean.counts[g] += c->counts[g];
      for (int i = 0; i < n; ++i) values[static_cast<std::size_t>(i)].push_back(c->probs(gi, i));
    }
    if (weight <= 0) continue;
    s.mean.probs.row(gi) = (acc / weight).transpose();
    for (int i = 0; i < n; ++i) {
      s.lower(gi, i) = stats::quantile(values[static_cast<std::size_t>(i)], 0.025);
      s.upper(gi, i) = stats::quantile(values[static_cast<std::size_t>(i)], 0.975);
    }
    if (!truth.has_value(g)) continue;
    double worst = 0;
    bool inside = true;
    for (int i = 0; i < n; ++i) {
      s.bias(gi, i) = s.mean.probs(gi, i) - truth.probs(gi, i);
      worst = std::max(worst, std::abs(s.bias(gi, i)));
      inside = inside && s.lower(gi, i) <= truth.probs(gi, i) && truth.probs(gi, i) <= s.upper(gi, i);
    }
    s.max_abs_bias = std::max(s.max_abs_bias, worst);
    ++n_cover;
    covered += inside;
    const double z = truth.grid[g];
    if (z >= central90[0] && z <= central90[1]) {
      s.max_abs_bias_central90 = std::max(s.max_abs_bias_central90, worst);
      bias90 += s.bias.row(gi).cwiseAbs().mean();
      ++n90;
    }
    if (z >= central50[0] && z <= central50[1]) {
      bias50 += s.bias.row(gi).cwiseAbs().mean();
      ++n50;
    }
  }
  s.mean_abs_bias_central50 = n50 ? bias50 / n50 : kNaN;
  s.mean_abs_bias_central90 = n90 ? bias90 / n90 : kNaN;
  s.envelope_coverage = n_cover ? static_cast<double>(covered) / n_cover : kNaN;
  return s;
}

namespace {

HmmModel perturbed_truth(const HmmModel& truth, double sd, std::uint64_t seed) {
  const ParameterMap map(truth);
  Vector theta = map.to_working(truth);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sd);
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) += noise(rng);
  return map.to_model(theta);
}

}  // namespace

HmmModel replicate_start(const SettingSpec& spec, const SettingData& data, std::uint64_t seed,
                         const ExperimentConfig& config) {
  if (!config.cold_start) return perturbed_truth(spec.model, config.init_perturbation, derive_seed(seed, 1, 0));
  std::vector<Family> families;
  for (const auto& c : spec.model.emissions.channels) families.push_back(c.family);
  HmmModel m = initial_model(data.obs, spec.model.n_states, families, spec.model.n_covariates());
  m.initial_policy = spec.model.initial_policy;
  return m;
}

std::uint64_t replicate_seed(std::uint64_t base_seed, int index) {
  return derive_seed(base_seed, 100, static_cast<std::uint64_t>(index));
}

namespace {

ReplicateResult run_replicate(const SettingSpec& spec, const std::vector<OccupancyMethod>& estimators,
                              const TruthCurve& truth, int index, std::uint64_t seed, const ExperimentConfig& config) {
  ReplicateResult r;
  r.index = index;
  r.seed = seed;
  try {
    const SettingData data = generate_setting(spec, seed);
    const HmmModel init = replicate_start(spec, data, seed, config);
    FitConfig fc = config.fit;
    fc.seed = derive_seed(seed, 2, 0);
    const FitResult fit = fit_mle(data.obs, data.cov, init, fc);
    r.loglik = fit.loglik;
    r.converged = fit.converged;
    r.iterations = fit.iterations;
    const ParameterMap map(fit.model);
    for (int s = 0; s < spec.model.n_states; ++s) {
      r.emission_means.push_back(fit.model.emissions.channels[0].location[static_cast<std::size_t>(s)]);
      const auto k = static_cast<Eigen::Index>(map.location_index(0, s));
      r.emission_mean_se.push_back(fit.working_covariance ? std::sqrt((*fit.working_covariance)(k, k)) : kNaN);
    }
    if (!fit.converged) {
      r.failure = "fit did not converge";
      return r;
    }

    const std::vector<double> z = data.cov.column(0);
    ResamplingOptions ro;
    ro.burn_in = config.resampling_burn_in;
    ro.min_count = config.monte_carlo.binning.min_count;
    for (OccupancyMethod m : estimators) {
      switch (m) {
        case OccupancyMethod::stationary:
          r.curves[m] = hypothetical_stationary_curve(fit.model, truth.curve.grid);
          break;
        case OccupancyMethod::ar_resample: {
          const ArModel ar = fit_ar(z, config.ar_max_order);
          const auto syn = simulate_ar(ar, config.synthetic_length, derive_seed(seed, 3, 0));
          ro.method = m;
          auto res = occupancy_via_resampling(fit.model, syn, truth.edges, ro);
          r.dropped[m] = res.dropped_outside;
          r.curves[m] = std::move(res.curve);
          break;
        }
        case OccupancyMethod::block_bootstrap: {
          BlockBootstrapConfig bb;
          bb.block_length = spec.block_length;
          bb.output_blocks = (config.synthetic_length + spec.block_length - 1) / spec.block_length;
          const auto syn = block_bootstrap(z, bb, derive_seed(seed, 4, 0));
          ro.method = m;
          auto res = occupancy_via_resampling(fit.model, syn, truth.edges, ro);
          r.dropped[m] = res.dropped_outside;
          r.curves[m] = std::move(res.curve);
          break;
        }
        case OccupancyMethod::dirichlet: {
          const StateProbSeries probs = propagate_state_probs(fit.model, data.cov);
          const DirichletSmoothFit dfit = fit_dirichlet_smooth(probs, z, config.dirichlet);
          OccupancyCurve c;
          c.method = m;
          c.grid = truth.curve.grid;
          c.counts.assign(c.grid.size(), 0);
          c.probs = RowMatrix::Constant(static_cast<Eigen::Index>(c.grid.size()), spec.model.n_states, kNaN);
          for (std::size_t g = 0; g < c.grid.size(); ++g)
            if (dfit.basis.contains(c.grid[g]))
              c.probs.row(static_cast<Eigen::Index>(g)) = predict_occupancy(dfit, std::span<const double>(&c.grid[g], 1)).probs.row(0);
          r.curves[m] = std::move(c);
          break;
        }
        default:
          throw InputError(std::string("estimator not available in experiments: ") + method_tag(m));
      }
    }
    r.ok = true;
  } catch (const Error& e) {
    r.ok = false;
    r.failure = e.what();
  }
  return r;
}

}  // namespace

ExperimentReport run_experiment(const SettingSpec& spec, const std::vector<OccupancyMethod>& estimators, int replicates,
                                std::uint64_t base_seed, const ExperimentConfig& config) {
  spec.validate();
  if (replicates < 1) throw InputError("at least one replicate is required");
  for (OccupancyMethod m : estimators)
    if (m == OccupancyMethod::binned || m == OccupancyMethod::monte_carlo)
      throw InputError(std::string("estimator not available in experiments: ") + method_tag(m));

  ExperimentReport rep;
  rep.setting = spec.id;
  rep.base_seed = base_seed;
  rep.estimators = estimators;
  const TruthCurve truth = setting_truth(spec, config);
  rep.truth = truth.curve;
  rep.edges = truth.edges;
  std::copy(truth.central90, truth.central90 + 2, rep.central90);
  std::copy(truth.central50, truth.central50 + 2, rep.central50);

  for (int r = 0; r < replicates; ++r) {
    rep.replicates.push_back(run_replicate(spec, estimators, truth, r, replicate_seed(base_seed, r), config));
    rep.n_failed += rep.replicates.back().ok ? 0 : 1;
  }
  if (rep.n_failed > config.max_failure_fraction * replicates)
    throw NumericalError(std::to_string(rep.n_failed) + " of " + std::to_string(replicates) +
                         " replicates failed; first failure: " +
                         std::find_if(rep.replicates.begin(), rep.replicates.end(), [](const auto& x) { return !x.ok; })->failure);

  for (OccupancyMethod m : estimators) {
    std::vector<const OccupancyCurve*> curves;
    for (const auto& r : rep.replicates)
      if (r.ok) curves.push_back(&r.curves.at(m));
    rep.summaries.push_back(summarize_estimator(m, curves, rep.truth, rep.central90, rep.central50));
  }
  return rep;
}

}  // namespace occuhmm
