#include "run_config.hpp"

#include "occuhmm/error.hpp"
#include "occuhmm/resampling/occupancy.hpp"
#include "occuhmm/sim/harness.hpp"

namespace occuhmm::cli {

namespace {

void overlay(Json& base, const Json& user, const std::string& where) {
  if (!user.is_object()) throw InputError("config section '" + where + "' must be an object");
  for (const auto& [key, value] : user.items()) {
    const std::string name = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) throw InputError("unknown config key '" + name + "'");
    Json& slot = base[key];
    if (slot.is_object() && value.is_object()) overlay(slot, value, name);
    else slot = value;
  }
}

Json* lookup(Json& j, const std::string& dotted) {
  Json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(key)) return nullptr;
    node = &(*node)[key];
    if (dot == std::string::npos) return node;
    start = dot + 1;
  }
}

}  // namespace

const std::vector<std::string>& path_keys() {
  static const std::vector<std::string> keys = {"output_dir", "data.track", "data.series", "model.init",
                                                "model.file", "simulate.settings"};
  return keys;
}

Json default_run_config() {
  Json fit = fit_config_to_json(FitConfig{});
  fit.erase("seed");
  const ExperimentConfig exp;
  Json sim_fit = fit_config_to_json(exp.fit);
  sim_fit.erase("seed");

  Json j;
  j["seed"] = 1;
  j["output_dir"] = "occuhmm_out";
  j["strict"] = false;
  j["data"] = {{"track", nullptr},
               {"series", nullptr},
               {"coordinates", "planar"},
               {"columns", {{"timestamp", "timestamp"}, {"x", "x"}, {"y", "y"}, {"covariates", Json::array()}}}};
  j["preprocess"] = {{"interval", 3600},
                     {"snap_tolerance", 600},
                     {"max_covariate_gap", 3},
                     {"min_segment_length", 24},
                     {"outlier_distance", nullptr}};
  j["model"] = {{"n_states", 2},
                {"channels", {"step", "angle"}},
                {"families", {"gamma", "von_mises"}},
                {"covariates", Json::array()},
                {"initial_policy", "stationary"},
                {"init", nullptr},
                {"file", nullptr}};
  j["fit"] = fit;
  const ResamplingOptions ro;
  j["occupancy"] = {{"method", "stationary"},
                    {"covariate", nullptr},
                    {"binning", binning_to_json(BinningConfig{})},
                    {"burn_in", ro.burn_in},
                    {"ar_max_order", 5},
                    {"block_length", 100},
                    {"synthetic_length", 1'000'000},
                    {"dirichlet", dirichlet_config_to_json(DirichletSmoothConfig{})},
                    {"generator", nullptr},
                    {"monte_carlo_length", 10'000'000},
                    {"max_points", 5000}};
  j["simulate"] = {{"settings", nullptr},
                   {"setting", "I"},
                   {"replicates", nullptr},
                   {"estimators", {"stationary", "ar-resample", "block-bootstrap", "dirichlet"}},
                   {"monte_carlo_length", exp.monte_carlo.length},
                   {"monte_carlo_burn_in", exp.monte_carlo.burn_in},
                   {"binning", binning_to_json(exp.monte_carlo.binning)},
                   {"truth_seed", exp.truth_seed},
                   {"synthetic_length", exp.synthetic_length},
                   {"resampling_burn_in", exp.resampling_burn_in},
                   {"ar_max_order", exp.ar_max_order},
                   {"dirichlet", dirichlet_config_to_json(exp.dirichlet)},
                   {"fit", sim_fit},
                   {"cold_start", exp.cold_start},
                   {"init_perturbation", exp.init_perturbation},
                   {"max_failure_fraction", exp.max_failure_fraction},
                   {"export_datasets", 0}};
  return j;
}

Json resolve_run_config(const Json& user, const std::filesystem::path& base_dir) {
  Json j = default_run_config();
  overlay(j, user, "");
  for (const auto& key : path_keys()) {
    Json* v = lookup(j, key);
    if (!v || v->is_null()) continue;
    if (!v->is_string()) throw InputError("config key '" + key + "' must be a path string");
    std::filesystem::path p = v->get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    *v = p.lexically_normal().string();
  }
  return j;
}

}  // namespace occuhmm::cli
