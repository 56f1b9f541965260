#include "occuhmm/sim/harness.hpp"

#include "occuhmm/error.hpp"

#include <cmath>
#include <fstream>

namespace occuhmm {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

void write_report(const std::filesystem::path& dir, const std::string& prefix, const ExperimentReport& report,
                  const ExperimentConfig& config) {
  std::filesystem::create_directories(dir);
  const int n = report.truth.n_states();
  {
    auto out = open_output(dir / (prefix + "_truth.csv"));
    write_curve_csv(out, report.truth);
  }
  {
    auto out = open_output(dir / (prefix + "_curves.csv"));
    out << "replicate,method,z,count";
    for (int i = 1; i <= n; ++i) out << ",p_" << i;
    out << '\n';
    for (const auto& r : report.replicates) {
      if (!r.ok) continue;
      for (const auto& [method, curve] : r.curves) {
        for (std::size_t g = 0; g < curve.size(); ++g) {
          out << r.index << ',' << method_tag(method) << ',' << format_double(curve.grid[g]) << ',' << curve.counts[g];
          for (int i = 0; i < n; ++i) out << ',' << cell(curve.probs(static_cast<Eigen::Index>(g), i));
          out << '\n';
        }
      }
    }
  }
  {
    auto out = open_output(dir / (prefix + "_summary.csv"));
    out << "method,z";
    for (const char* col : {"truth", "mean", "lower", "upper"})
      for (int i = 1; i <= n; ++i) out << ',' << col << '_' << i;
    out << '\n';
    for (const auto& s : report.summaries) {
      for (std::size_t g = 0; g < s.mean.size(); ++g) {
        const auto gi = static_cast<Eigen::Index>(g);
        out << method_tag(s.method) << ',' << format_double(s.mean.grid[g]);
        for (const RowMatrix* m : {&report.truth.probs, &s.mean.probs, &s.lower, &s.upper})
          for (int i = 0; i < n; ++i) out << ',' << cell((*m)(gi, i));
        out << '\n';
      }
    }
  }

  Json j;
  j["setting"] = report.setting;
  j["base_seed"] = report.base_seed;
  j["replicates"] = report.replicates.size();
  j["failed"] = report.n_failed;
  j["central90"] = {report.central90[0], report.central90[1]};
  j["central50"] = {report.central50[0], report.central50[1]};
  j["grid"] = {{"lower", report.edges.lower}, {"upper", report.edges.upper}, {"n_bins", report.edges.n_bins}};
  Json cfg;
  cfg["truth_seed"] = config.truth_seed;
  cfg["monte_carlo_length"] = config.monte_carlo.length;
  cfg["monte_carlo_burn_in"] = config.monte_carlo.burn_in;
  cfg["binning"] = binning_to_json(config.monte_carlo.binning);
  cfg["synthetic_length"] = config.synthetic_length;
  cfg["resampling_burn_in"] = config.resampling_burn_in;
  cfg["ar_max_order"] = config.ar_max_order;
  cfg["dirichlet"] = dirichlet_config_to_json(config.dirichlet);
  cfg["fit"] = fit_config_to_json(config.fit);
  cfg["cold_start"] = config.cold_start;
  cfg["init_perturbation"] = config.init_perturbation;
  j["config"] = cfg;
  Json est = Json::object();
  for (const auto& s : report.summaries) {
    est[method_tag(s.method)] = {
        {"curves", s.n_curves},
        {"max_abs_bias", number_or_null(s.max_abs_bias)},
        {"max_abs_bias_central90", number_or_null(s.max_abs_bias_central90)},
        {"mean_abs_bias_central50", number_or_null(s.mean_abs_bias_central50)},
        {"mean_abs_bias_central90", number_or_null(s.mean_abs_bias_central90)},
        {"envelope_coverage", number_or_null(s.envelope_coverage)},
    };
  }
  j["estimators"] = est;
  Json reps = Json::array();
  for (const auto& r : report.replicates) {
    Json x;
    x["index"] = r.index;
    x["seed"] = r.seed;
    x["ok"] = r.ok;
    if (!r.failure.empty()) x["failure"] = r.failure;
    x["loglik"] = number_or_null(r.loglik);
    x["converged"] = r.converged;
    x["iterations"] = r.iterations;
    Json means = Json::array(), ses = Json::array();
    for (double v : r.emission_means) means.push_back(number_or_null(v));
    for (double v : r.emission_mean_se) ses.push_back(number_or_null(v));
    x["emission_means"] = means;
    x["emission_mean_se"] = ses;
    Json dropped = Json::object();
    for (const auto& [m, k] : r.dropped) dropped[method_tag(m)] = k;
    x["dropped_outside"] = dropped;
    reps.push_back(x);
  }
  j["replicate_results"] = reps;
  write_json_file(dir / (prefix + "_report.json"), j);
}

}  // namespace occuhmm
