#include "occuhmm/io/json_format.hpp"

#include "occuhmm/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace occuhmm {

namespace {

template <class T>
void take(const Json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("bad value for '") + key + "': " + e.what());
    }
  }
}

std::vector<double> to_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw InputError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw InputError("unknown key '" + key + "' in " + where);
  }
}

const char* policy_name(InitialPolicy policy) {
  switch (policy) {
    case InitialPolicy::stationary: return "stationary";
    case InitialPolicy::uniform: return "uniform";
    case InitialPolicy::fixed: return "fixed";
  }
  return "stationary";
}

InitialPolicy parse_policy(const std::string& name) {
  if (name == "stationary") return InitialPolicy::stationary;
  if (name == "uniform") return InitialPolicy::uniform;
  if (name == "fixed") return InitialPolicy::fixed;
  throw InputError("unknown initial policy '" + name + "'");
}

const char* range_policy_name(RangePolicy policy) {
  switch (policy) {
    case RangePolicy::full: return "full";
    case RangePolicy::quantile: return "quantile";
    case RangePolicy::fixed: return "fixed";
  }
  return "quantile";
}

RangePolicy parse_range_policy(const std::string& name) {
  if (name == "full") return RangePolicy::full;
  if (name == "quantile") return RangePolicy::quantile;
  if (name == "fixed") return RangePolicy::fixed;
  throw InputError("unknown range policy '" + name + "'");
}

Json model_to_json(const HmmModel& model) {
  model.validate();
  const int n = model.n_states;
  Json j;
  j["n_states"] = n;
  j["initial_policy"] = policy_name(model.initial_policy);
  j["initial_distribution"] = to_vector(model.initial_distribution);
  Json terms = Json::array();
  for (int p = 0; p <= model.n_covariates(); ++p) {
    std::vector<std::vector<double>> m(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b) m[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = model.transition.at(a, b, p);
    terms.push_back(m);
  }
  j["transition"] = terms;
  Json em = Json::array();
  for (const auto& c : model.emissions.channels)
    em.push_back({{"family", family_name(c.family)}, {"location", c.location}, {"dispersion", c.dispersion}});
  j["emissions"] = em;
  return j;
}

HmmModel model_from_json(const Json& j) {
  check_keys(j, {"n_states", "initial_policy", "initial_distribution", "transition", "emissions"}, "model");
  try {
    HmmModel m;
    m.n_states = j.at("n_states").get<int>();
    const int n = m.n_states;
    if (n < 2) throw InputError("model needs at least 2 states");
    const auto& terms = j.at("transition");
    if (!terms.is_array() || terms.empty()) throw InputError("transition must list the intercept matrix and slope matrices");
    m.transition = TransitionCoefficients::zeros(n, static_cast<int>(terms.size()) - 1);
    for (std::size_t p = 0; p < terms.size(); ++p) {
      const auto mat = terms[p].get<std::vector<std::vector<double>>>();
      if (mat.size() != static_cast<std::size_t>(n)) throw InputError("transition matrices must be N x N");
      for (int a = 0; a < n; ++a) {
        if (mat[static_cast<std::size_t>(a)].size() != static_cast<std::size_t>(n)) throw InputError("transition matrices must be N x N");
        for (int b = 0; b < n; ++b)
          if (a != b) m.transition.at(a, b, static_cast<int>(p)) = mat[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      }
    }
    for (const auto& c : j.at("emissions")) {
      check_keys(c, {"family", "location", "dispersion"}, "emission channel");
      m.emissions.channels.push_back({parse_family(c.at("family").get<std::string>()),
                                      c.at("location").get<std::vector<double>>(),
                                      c.at("dispersion").get<std::vector<double>>()});
    }
    m.initial_policy = j.contains("initial_policy") ? parse_policy(j["initial_policy"].get<std::string>())
                                                    : InitialPolicy::stationary;
    if (j.contains("initial_distribution")) {
      const auto d = j["initial_distribution"].get<std::vector<double>>();
      m.initial_distribution = Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
    } else {
      m.initial_distribution = Vector::Constant(n, 1.0 / n);
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed model: ") + e.what());
  }
}

Json fit_config_to_json(const FitConfig& c) {
  return {{"max_iterations", c.optimizer.max_iterations},
          {"rel_tol", c.optimizer.rel_tol},
          {"grad_tol", c.optimizer.grad_tol},
          {"restarts", c.restarts},
          {"restart_scale", c.restart_scale},
          {"seed", c.seed},
          {"estimate_initial", c.estimate_initial},
          {"sort_states", c.sort_states},
          {"compute_covariance", c.compute_covariance}};
}

FitConfig fit_config_from_json(const Json& j, FitConfig c) {
  check_keys(j, {"max_iterations", "rel_tol", "grad_tol", "restarts", "restart_scale", "seed", "estimate_initial",
                 "sort_states", "compute_covariance"},
             "fit options");
  take(j, "max_iterations", c.optimizer.max_iterations);
  take(j, "rel_tol", c.optimizer.rel_tol);
  take(j, "grad_tol", c.optimizer.grad_tol);
  take(j, "restarts", c.restarts);
  take(j, "restart_scale", c.restart_scale);
  take(j, "seed", c.seed);
  take(j, "estimate_initial", c.estimate_initial);
  take(j, "sort_states", c.sort_states);
  take(j, "compute_covariance", c.compute_covariance);
  if (c.optimizer.max_iterations < 1 || c.restarts < 0 || !(c.restart_scale >= 0))
    throw InputError("invalid fit options");
  return c;
}

Json binning_to_json(const BinningConfig& c) {
  return {{"n_bins", c.n_bins},
          {"range", range_policy_name(c.range)},
          {"lower_quantile", c.lower_quantile},
          {"upper_quantile", c.upper_quantile},
          {"fixed_lower", c.fixed_lower},
          {"fixed_upper", c.fixed_upper},
          {"min_count", c.min_count}};
}

BinningConfig binning_from_json(const Json& j, BinningConfig c) {
  check_keys(j, {"n_bins", "range", "lower_quantile", "upper_quantile", "fixed_lower", "fixed_upper", "min_count"},
             "binning options");
  take(j, "n_bins", c.n_bins);
  if (j.contains("range")) c.range = parse_range_policy(j["range"].get<std::string>());
  take(j, "lower_quantile", c.lower_quantile);
  take(j, "upper_quantile", c.upper_quantile);
  take(j, "fixed_lower", c.fixed_lower);
  take(j, "fixed_upper", c.fixed_upper);
  take(j, "min_count", c.min_count);
  c.validate();
  return c;
}

Json dirichlet_config_to_json(const DirichletSmoothConfig& c) {
  Json j{{"basis_dimension", c.basis_dimension},
         {"degree", c.degree},
         {"lower_quantile", c.lower_quantile},
         {"upper_quantile", c.upper_quantile},
         {"burn_in", c.burn_in},
         {"clip_epsilon", c.clip_epsilon},
         {"log10_lambda_grid", c.log10_lambda_grid},
         {"cv_folds", c.cv_folds},
         {"max_cycles", c.max_cycles},
         {"max_iterations", c.max_iterations},
         {"rel_tol", c.rel_tol}};
  j["fixed_lambda"] = c.fixed_lambda ? Json(*c.fixed_lambda) : Json(nullptr);
  return j;
}

DirichletSmoothConfig dirichlet_config_from_json(const Json& j, DirichletSmoothConfig c) {
  check_keys(j, {"basis_dimension", "degree", "lower_quantile", "upper_quantile", "burn_in", "clip_epsilon",
                 "log10_lambda_grid", "cv_folds", "max_cycles", "fixed_lambda", "max_iterations", "rel_tol"},
             "dirichlet options");
  take(j, "basis_dimension", c.basis_dimension);
  take(j, "degree", c.degree);
  take(j, "lower_quantile", c.lower_quantile);
  take(j, "upper_quantile", c.upper_quantile);
  take(j, "burn_in", c.burn_in);
  take(j, "clip_epsilon", c.clip_epsilon);
  take(j, "log10_lambda_grid", c.log10_lambda_grid);
  take(j, "cv_folds", c.cv_folds);
  take(j, "max_cycles", c.max_cycles);
  take(j, "max_iterations", c.max_iterations);
  take(j, "rel_tol", c.rel_tol);
  if (auto it = j.find("fixed_lambda"); it != j.end()) {
    if (it->is_null()) c.fixed_lambda.reset();
    else c.fixed_lambda = it->get<std::vector<double>>();
  }
  return c;
}

Json fit_result_to_json(const FitResult& fit) {
  Json j;
  j["model"] = model_to_json(fit.model);
  j["loglik"] = fit.loglik;
  j["initial_loglik"] = fit.initial_loglik;
  j["aic"] = fit.aic;
  j["n_parameters"] = fit.n_parameters;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["n_evaluations"] = fit.n_evaluations;
  Json params = Json::array();
  for (std::size_t k = 0; k < fit.parameter_names.size(); ++k) {
    Json p{{"name", fit.parameter_names[k]}, {"estimate", fit.working(static_cast<Eigen::Index>(k))}};
    p["se"] = fit.working_covariance ? Json(std::sqrt((*fit.working_covariance)(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))))
                                     : Json(nullptr);
    params.push_back(p);
  }
  j["working_parameters"] = params;
  j["hessian_eigenvalues"] = to_vector(fit.hessian_eigenvalues);
  if (!fit.covariance_note.empty()) j["covariance_note"] = fit.covariance_note;
  return j;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("cannot parse " + path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace occuhmm
