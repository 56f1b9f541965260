#pragma once

#include "occuhmm/dirichlet/smooth.hpp"
#include "occuhmm/estimation/fit.hpp"
#include "occuhmm/hmm/model.hpp"
#include "occuhmm/io/json_format.hpp"
#include "occuhmm/occupancy/curve.hpp"
#include "occuhmm/occupancy/estimators.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace occuhmm {

// Covariate process of a simulation setting.
//   ar1:      Gaussian AR(1) with coefficient phi and marginal sd
//   seasonal: mean + amplitude * sin(2 pi t / period) + N(0, noise_sd^2), t = 0, 1, ...
struct CovariateProcess {
  enum class Kind { ar1, seasonal };
  Kind kind = Kind::ar1;
  double phi = 0.95;
  double marginal_sd = 1.0;
  double mean = 0.0;
  double amplitude = 2.0;
  double period = 100.0;
  double noise_sd = 1.0;

  void validate() const;
  std::vector<double> generate(std::size_t length, std::uint64_t seed) const;
};

Json covariate_process_to_json(const CovariateProcess& p);
CovariateProcess covariate_process_from_json(const Json& j);

struct SettingSpec {
  std::string id;
  CovariateProcess covariate;
  HmmModel model;
  std::size_t length = 2000;
  int replicates = 200;
  std::size_t block_length = 100;  // block bootstrap

  void validate() const;
};

// Settings keyed by id, read from a versioned JSON file.
std::map<std::string, SettingSpec> load_settings(const std::filesystem::path& path);
std::map<std::string, SettingSpec> parse_settings(const Json& j);

// Settings file shipped with the sources.
std::filesystem::path default_settings_path();

// Independent 64-bit seed for (base, stream, index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

struct SettingData {
  ObservationSeries obs;
  CovariateSeries cov;
  std::vector<int> states;
};

SettingData generate_setting(const SettingSpec& spec, std::uint64_t seed);

struct ExperimentConfig {
  MonteCarloConfig monte_carlo;
  std::uint64_t truth_seed = 1;
  std::size_t synthetic_length = 1'000'000;
  std::size_t resampling_burn_in = 1000;
  int ar_max_order = 5;
  DirichletSmoothConfig dirichlet = [] {
    DirichletSmoothConfig c;
    c.burn_in = 100;
    return c;
  }();
  FitConfig fit = [] {
    FitConfig c;
    c.restarts = 0;
    return c;
  }();
  bool cold_start = false;          // quantile-split start instead of perturbed truth
  double init_perturbation = 0.1;   // sd of the working-scale perturbation of the truth
  double max_failure_fraction = 0.2;
};

// Starting model of a replicate fit: the truth perturbed on the working scale
// with the replicate's own stream, or the quantile-split start in cold mode.
HmmModel replicate_start(const SettingSpec& spec, const SettingData& data, std::uint64_t replicate_seed,
                         const ExperimentConfig& config);
// Seed of replicate `index` under `base_seed`.
std::uint64_t replicate_seed(std::uint64_t base_seed, int index);

struct ReplicateResult {
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string failure;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> emission_means;    // first channel, per state
  std::vector<double> emission_mean_se;  // NaN when unavailable
  std::map<OccupancyMethod, OccupancyCurve> curves;
  std::map<OccupancyMethod, std::size_t> dropped;  // resampled values outside the grid
};

struct EstimatorSummary {
  OccupancyMethod method = OccupancyMethod::stationary;
  int n_curves = 0;
  OccupancyCurve mean;  // bin-count weighted where counts exist, plain mean otherwise
  RowMatrix lower;      // pointwise 2.5% envelope
  RowMatrix upper;      // pointwise 97.5% envelope
  RowMatrix bias;       // mean - truth
  double max_abs_bias = 0.0;            // over every grid point with a value
  double max_abs_bias_central90 = 0.0;  // grid points inside the central 90% covariate range
  double mean_abs_bias_central50 = 0.0;
  double mean_abs_bias_central90 = 0.0;
  double envelope_coverage = 0.0;  // share of grid points whose envelope holds the truth for every state
};

struct ExperimentReport {
  std::string setting;
  std::uint64_t base_seed = 0;
  std::vector<OccupancyMethod> estimators;
  OccupancyCurve truth;
  BinEdges edges;
  double central90[2] = {0, 0};
  double central50[2] = {0, 0};
  std::vector<ReplicateResult> replicates;
  std::vector<EstimatorSummary> summaries;
  int n_failed = 0;

  const EstimatorSummary& summary(OccupancyMethod method) const;
};

// Monte Carlo truth plus central covariate ranges of the truth path.
struct TruthCurve {
  OccupancyCurve curve;
  BinEdges edges;
  double central90[2] = {0, 0};
  double central50[2] = {0, 0};
};
TruthCurve setting_truth(const SettingSpec& spec, const ExperimentConfig& config);

// Runs `replicates` replicates with seeds derived from `base_seed`. Fails
// with NumericalError when more than max_failure_fraction of them fail.
ExperimentReport run_experiment(const SettingSpec& spec, const std::vector<OccupancyMethod>& estimators,
                                int replicates, std::uint64_t base_seed, const ExperimentConfig& config = {});

// Aggregation step of run_experiment, exposed for tests.
EstimatorSummary summarize_estimator(OccupancyMethod method, const std::vector<const OccupancyCurve*>& curves,
                                     const OccupancyCurve& truth, const double central90[2], const double central50[2]);

// <prefix>_truth.csv, <prefix>_curves.csv, <prefix>_summary.csv, <prefix>_report.json
void write_report(const std::filesystem::path& dir, const std::string& prefix, const ExperimentReport& report,
                  const ExperimentConfig& config);

}  // namespace occuhmm
