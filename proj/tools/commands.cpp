#include "cli.hpp"
#include "run_config.hpp"
#include "svg.hpp"

#include "occuhmm/error.hpp"
#include "occuhmm/hmm/recursions.hpp"
#include "occuhmm/movement/track.hpp"
#include "occuhmm/occupancy/binning.hpp"
#include "occuhmm/occupancy/estimators.hpp"
#include "occuhmm/resampling/ar.hpp"
#include "occuhmm/resampling/bootstrap.hpp"
#include "occuhmm/resampling/occupancy.hpp"
#include "occuhmm/sim/harness.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

namespace occuhmm::cli {

namespace fs = std::filesystem;

namespace {

struct Context {
  Json config;
  fs::path out;
  std::uint64_t seed = 1;
  bool strict = false;
};

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::ifstream open_input(const fs::path& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + what + " " + path.string());
  return in;
}

void write_text(const fs::path& path, const std::string& text) { open_output(path) << text; }

void persist(const Context& ctx, const std::string& command) {
  write_json_file(ctx.out / ("config_" + command + ".json"), ctx.config);
}

std::vector<std::string> strings(const Json& j) { return j.get<std::vector<std::string>>(); }

AlignedSeries load_series(Context& ctx) {
  Json& data = ctx.config["data"];
  if (data["series"].is_null()) data["series"] = (ctx.out / "series.csv").string();
  const fs::path path = data["series"].get<std::string>();
  auto in = open_input(path, "series file");
  const Json& model = ctx.config["model"];
  return read_aligned_csv(in, strings(model["channels"]), strings(model["covariates"]));
}

HmmModel load_model(Context& ctx) {
  Json& model = ctx.config["model"];
  if (model["file"].is_null()) model["file"] = (ctx.out / "model.json").string();
  return model_from_json(read_json_file(model["file"].get<std::string>()));
}

void check_model_matches(const HmmModel& model, const AlignedSeries& s) {
  if (model.emissions.channels.size() != s.obs.n_channels())
    throw InputError("model has " + std::to_string(model.emissions.channels.size()) + " emission channels, data has " +
                     std::to_string(s.obs.n_channels()));
  if (static_cast<std::size_t>(model.n_covariates()) != s.cov.n_covariates())
    throw InputError("model uses " + std::to_string(model.n_covariates()) + " covariates, data has " +
                     std::to_string(s.cov.n_covariates()));
}

FitConfig fit_config(const Json& section, std::uint64_t seed) {
  FitConfig c = fit_config_from_json(section);
  c.seed = seed;
  return c;
}

// --- preprocess ---------------------------------------------------------------

int cmd_preprocess(Context& ctx) {
  const Json& data = ctx.config["data"];
  if (data["track"].is_null()) throw InputError("data.track is not set");
  const Json& cols = data["columns"];
  ColumnMapping mapping;
  mapping.timestamp = cols["timestamp"].get<std::string>();
  mapping.x = cols["x"].get<std::string>();
  mapping.y = cols["y"].get<std::string>();
  mapping.covariates = strings(cols["covariates"]);
  const Json& p = ctx.config["preprocess"];
  PreprocessConfig pc;
  pc.mode = parse_coordinate_mode(data["coordinates"].get<std::string>());
  pc.interval = p["interval"].get<std::int64_t>();
  pc.snap_tolerance = p["snap_tolerance"].get<std::int64_t>();
  pc.max_covariate_gap = p["max_covariate_gap"].get<int>();
  pc.min_segment_length = p["min_segment_length"].get<int>();
  if (!p["outlier_distance"].is_null()) pc.outlier_distance = p["outlier_distance"].get<double>();
  pc.validate();

  PreprocessLog log;
  auto in = open_input(data["track"].get<std::string>(), "track file");
  const RawTrack track = read_track_csv(in, mapping, pc.mode, &log);
  const AlignedSeries series = preprocess_track(track, pc, &log);
  {
    auto out = open_output(ctx.out / "series.csv");
    write_aligned_csv(out, series);
  }
  ctx.config["data"]["series"] = (ctx.out / "series.csv").string();
  std::size_t segments = 0;
  for (std::size_t t = 0; t < series.length(); ++t)
    segments += t == 0 || series.obs.segment_ids[t] != series.obs.segment_ids[t - 1];
  Json j{{"records_read", log.records_read},
         {"duplicate_timestamps", log.duplicate_timestamps},
         {"outside_tolerance", log.outside_tolerance},
         {"snap_collisions", log.snap_collisions},
         {"grid_slots", log.grid_slots},
         {"missing_positions", log.missing_positions},
         {"outliers_removed", log.outliers_removed},
         {"covariate_values_imputed", log.covariate_values_imputed},
         {"segments_formed", log.segments_formed},
         {"segments_dropped", log.segments_dropped},
         {"rows_dropped", log.rows_dropped},
         {"rows_written", series.length()},
         {"segments_written", segments}};
  write_json_file(ctx.out / "preprocess_log.json", j);
  persist(ctx, "preprocess");
  std::cerr << "preprocess: " << series.length() << " rows in " << segments << " segments written to "
            << (ctx.out / "series.csv").string() << '\n';
  return 0;
}

// --- fit ----------------------------------------------------------------------

int cmd_fit(Context& ctx) {
  const AlignedSeries s = load_series(ctx);
  const Json& m = ctx.config["model"];
  const int n_states = m["n_states"].get<int>();
  HmmModel init;
  if (!m["init"].is_null()) {
    init = model_from_json(read_json_file(m["init"].get<std::string>()));
  } else {
    std::vector<Family> families;
    for (const auto& f : strings(m["families"])) families.push_back(parse_family(f));
    if (families.size() != s.obs.n_channels())
      throw InputError("model.families lists " + std::to_string(families.size()) + " families for " +
                       std::to_string(s.obs.n_channels()) + " channels");
    init = initial_model(s.obs, n_states, families, static_cast<int>(s.cov.n_covariates()));
    init.initial_policy = parse_policy(m["initial_policy"].get<std::string>());
  }
  check_model_matches(init, s);
  const FitResult fit = fit_mle(s.obs, s.cov, init, fit_config(ctx.config["fit"], ctx.seed));

  write_json_file(ctx.out / "model.json", model_to_json(fit.model));
  Json report = fit_result_to_json(fit);
  report["channels"] = s.channel_names;
  report["covariates"] = s.covariate_names;
  report["n_observations"] = s.length();
  write_json_file(ctx.out / "fit_report.json", report);
  persist(ctx, "fit");
  std::cerr << "fit: loglik " << format_double(fit.loglik) << ", AIC " << format_double(fit.aic)
            << (fit.converged ? ", converged" : ", NOT converged") << " after " << fit.iterations << " iterations\n";
  if (!fit.covariance_note.empty()) std::cerr << "fit: " << fit.covariance_note << '\n';
  if (ctx.strict && !fit.converged) {
    std::cerr << "occuhmm: error: optimizer did not converge (strict mode)\n";
    return 3;
  }
  return 0;
}

// --- occupancy ----------------------------------------------------------------

OccupancyMethod parse_cli_method(const std::string& name) {
  if (name == "ar") return OccupancyMethod::ar_resample;
  if (name == "bb") return OccupancyMethod::block_bootstrap;
  if (name == "mc") return OccupancyMethod::monte_carlo;
  try {
    return parse_method_tag(name);
  } catch (const InputError&) {
    throw InputError("unknown occupancy method '" + name + "' (expected stationary, binned, ar, bb, dirichlet or mc)");
  }
}

void write_state_probs(const fs::path& path, const AlignedSeries& s, std::span<const double> z,
                       const StateProbSeries& probs) {
  auto out = open_output(path);
  out << "t,segment,z";
  for (Eigen::Index i = 1; i <= probs.probs.cols(); ++i) out << ",p_" << i;
  out << '\n';
  for (std::size_t t = 0; t < s.length(); ++t) {
    out << s.times[t] << ',' << s.obs.segment_ids[t] << ',' << format_double(z[t]);
    for (Eigen::Index i = 0; i < probs.probs.cols(); ++i)
      out << ',' << format_double(probs.probs(static_cast<Eigen::Index>(t), i));
    out << '\n';
  }
}

std::string occupancy_svg(const OccupancyCurve& curve, std::span<const double> z, const StateProbSeries& probs,
                          std::size_t max_points, const std::string& covariate) {
  const std::size_t T = z.size();
  const std::size_t stride = std::max<std::size_t>(1, (T + max_points - 1) / std::max<std::size_t>(max_points, 1));
  std::vector<plot::Panel> panels;
  for (int i = 0; i < curve.n_states(); ++i) {
    plot::Panel p;
    p.title = "state " + std::to_string(i + 1);
    p.x_label = covariate;
    p.y_label = "Pr(state)";
    p.fixed_y = true;
    plot::Layer pts;
    pts.kind = plot::Layer::Kind::points;
    pts.color = "#888888";
    pts.opacity = 0.35;
    pts.width = 1.2;
    for (std::size_t t = 0; t < T; t += stride) {
      pts.x.push_back(z[t]);
      pts.y.push_back(probs.probs(static_cast<Eigen::Index>(t), i));
    }
    plot::Layer line;
    line.color = plot::state_color(i);
    line.width = 2.5;
    line.label = method_tag(curve.method);
    line.x = curve.grid;
    for (std::size_t g = 0; g < curve.size(); ++g) line.y.push_back(curve.probs(static_cast<Eigen::Index>(g), i));
    p.layers = {pts, line};
    panels.push_back(std::move(p));
  }
  return plot::render(panels);
}

int cmd_occupancy(Context& ctx) {
  const HmmModel model = load_model(ctx);
  const AlignedSeries s = load_series(ctx);
  check_model_matches(model, s);
  const Json& o = ctx.config["occupancy"];
  const OccupancyMethod method = parse_cli_method(o["method"].get<std::string>());
  if (s.cov.n_covariates() == 0) throw InputError("occupancy curves need at least one covariate");
  std::size_t p = 0;
  if (!o["covariate"].is_null()) {
    const std::string name = o["covariate"].get<std::string>();
    const auto it = std::find(s.covariate_names.begin(), s.covariate_names.end(), name);
    if (it == s.covariate_names.end()) throw InputError("occupancy.covariate '" + name + "' is not a model covariate");
    p = static_cast<std::size_t>(it - s.covariate_names.begin());
  }
  const std::vector<double> z = s.cov.column(p);
  const BinningConfig binning = binning_from_json(o["binning"]);
  const BinEdges edges = resolve_bins(binning, z);
  const std::vector<double> grid = edges.centers();
  const StateProbSeries probs = propagate_state_probs(model, s.cov);
  const auto burn_in = o["burn_in"].get<std::size_t>();
  const auto synthetic_length = o["synthetic_length"].get<std::size_t>();
  const bool single = s.cov.n_covariates() == 1;
  auto need_single = [&](const char* what) {
    if (!single) throw InputError(std::string(what) + " needs a single-covariate model");
  };
  ResamplingOptions ro;
  ro.burn_in = burn_in;
  ro.min_count = binning.min_count;
  ro.method = method;

  OccupancyCurve curve;
  bool converged = true;
  switch (method) {
    case OccupancyMethod::stationary: {
      std::vector<double> fixed;
      for (std::size_t c = 0; c < s.cov.n_covariates(); ++c) fixed.push_back(s.cov.values.col(static_cast<Eigen::Index>(c)).mean());
      curve = hypothetical_stationary_curve(model, grid, fixed, static_cast<int>(p));
      break;
    }
    case OccupancyMethod::binned:
      curve = bin_occupancy(probs, z, binning, burn_in, s.obs.segment_ids);
      break;
    case OccupancyMethod::ar_resample: {
      need_single("ar-resample");
      const ArFit ar = fit_ar_detailed(z, o["ar_max_order"].get<int>());
      std::cerr << "occupancy: AR order " << ar.selected_order << " selected by AIC\n";
      auto res = occupancy_via_resampling(model, simulate_ar(ar.model, synthetic_length, derive_seed(ctx.seed, 3, 0)), edges, ro);
      if (!res.warning.empty()) std::cerr << "occupancy: warning: " << res.warning << '\n';
      curve = std::move(res.curve);
      break;
    }
    case OccupancyMethod::block_bootstrap: {
      need_single("block-bootstrap");
      BlockBootstrapConfig bb;
      bb.block_length = o["block_length"].get<std::size_t>();
      if (bb.block_length == 0) throw InputError("block length must be positive");
      bb.output_blocks = (synthetic_length + bb.block_length - 1) / bb.block_length;
      auto res = occupancy_via_resampling(model, block_bootstrap(z, bb, derive_seed(ctx.seed, 4, 0)), edges, ro);
      if (!res.warning.empty()) std::cerr << "occupancy: warning: " << res.warning << '\n';
      curve = std::move(res.curve);
      break;
    }
    case OccupancyMethod::dirichlet: {
      need_single("dirichlet smoothing");
      const DirichletSmoothFit fit = fit_dirichlet_smooth(probs, z, dirichlet_config_from_json(o["dirichlet"]));
      converged = fit.converged;
      {
        auto out = open_output(ctx.out / "dirichlet_fit.json");
        write_dirichlet_fit(out, fit);
      }
      curve.method = method;
      curve.grid = grid;
      curve.counts.assign(grid.size(), 0);
      curve.probs = RowMatrix::Constant(static_cast<Eigen::Index>(grid.size()), model.n_states,
                                        std::numeric_limits<double>::quiet_NaN());
      for (std::size_t g = 0; g < grid.size(); ++g)
        if (fit.basis.contains(grid[g]))
          curve.probs.row(static_cast<Eigen::Index>(g)) = predict_occupancy(fit, std::span<const double>(&grid[g], 1)).probs.row(0);
      break;
    }
    case OccupancyMethod::monte_carlo: {
      need_single("monte-carlo");
      if (o["generator"].is_null()) throw InputError("occupancy.generator must describe the covariate process for mc");
      const CovariateProcess gen = covariate_process_from_json(o["generator"]);
      const auto path = gen.generate(o["monte_carlo_length"].get<std::size_t>(), derive_seed(ctx.seed, 5, 0));
      curve = accumulate_path_occupancy(model, path, edges, burn_in).finish(binning.min_count, method);
      break;
    }
  }

  const std::string tag = method_tag(method);
  {
    auto out = open_output(ctx.out / ("occupancy_" + tag + ".csv"));
    write_curve_csv(out, curve);
  }
  write_state_probs(ctx.out / "state_probs.csv", s, z, probs);
  write_text(ctx.out / ("occupancy_" + tag + ".svg"),
             occupancy_svg(curve, z, probs, o["max_points"].get<std::size_t>(), s.covariate_names[p]));
  persist(ctx, "occupancy_" + tag);
  std::cerr << "occupancy: " << tag << " curve on " << curve.size() << " grid points\n";
  if (ctx.strict && !converged) {
    std::cerr << "occuhmm: error: Dirichlet smoother did not converge (strict mode)\n";
    return 3;
  }
  return 0;
}

// --- simulate -----------------------------------------------------------------

std::string experiment_svg(const ExperimentReport& r, OccupancyMethod method) {
  std::vector<plot::Panel> panels;
  for (int i = 0; i < r.truth.n_states(); ++i) {
    plot::Panel p;
    p.title = std::string(method_tag(method)) + ": state " + std::to_string(i + 1);
    p.x_label = "covariate";
    p.y_label = "Pr(state)";
    p.fixed_y = true;
    for (const auto& rep : r.replicates) {
      if (!rep.ok) continue;
      const OccupancyCurve& c = rep.curves.at(method);
      plot::Layer l;
      l.color = plot::state_color(i);
      l.width = 0.8;
      l.opacity = 0.3;
      l.x = c.grid;
      for (std::size_t g = 0; g < c.size(); ++g) l.y.push_back(c.probs(static_cast<Eigen::Index>(g), i));
      p.layers.push_back(std::move(l));
    }
    plot::Layer truth;
    truth.color = "#000000";
    truth.width = 2.5;
    truth.label = "truth";
    truth.x = r.truth.grid;
    for (std::size_t g = 0; g < r.truth.size(); ++g) truth.y.push_back(r.truth.probs(static_cast<Eigen::Index>(g), i));
    p.layers.push_back(std::move(truth));
    panels.push_back(std::move(p));
  }
  return plot::render(panels);
}

void export_dataset(const fs::path& path, const SettingData& d) {
  AlignedSeries s;
  s.channel_names = {"obs"};
  s.covariate_names = {"z"};
  s.obs = d.obs;
  s.obs.segment_ids.assign(d.obs.length(), 0);
  s.cov = d.cov;
  s.cov.segment_ids = s.obs.segment_ids;
  for (std::size_t t = 0; t < d.obs.length(); ++t) s.times.push_back(std::to_string(t));
  auto out = open_output(path);
  write_aligned_csv(out, s);
}

int cmd_simulate(Context& ctx) {
  Json& sim = ctx.config["simulate"];
  if (sim["settings"].is_null()) sim["settings"] = default_settings_path().lexically_normal().string();
  const auto settings = load_settings(sim["settings"].get<std::string>());
  const std::string id = sim["setting"].get<std::string>();
  const auto it = settings.find(id);
  if (it == settings.end()) {
    std::string known;
    for (const auto& [k, v] : settings) known += (known.empty() ? "" : ", ") + k;
    throw InputError("unknown setting '" + id + "' (available: " + known + ")");
  }
  const SettingSpec& spec = it->second;
  if (sim["replicates"].is_null()) sim["replicates"] = spec.replicates;
  const int replicates = sim["replicates"].get<int>();

  ExperimentConfig exp;
  exp.monte_carlo.length = sim["monte_carlo_length"].get<std::size_t>();
  exp.monte_carlo.burn_in = sim["monte_carlo_burn_in"].get<std::size_t>();
  exp.monte_carlo.binning = binning_from_json(sim["binning"]);
  exp.truth_seed = sim["truth_seed"].get<std::uint64_t>();
  exp.synthetic_length = sim["synthetic_length"].get<std::size_t>();
  exp.resampling_burn_in = sim["resampling_burn_in"].get<std::size_t>();
  exp.ar_max_order = sim["ar_max_order"].get<int>();
  exp.dirichlet = dirichlet_config_from_json(sim["dirichlet"]);
  exp.fit = fit_config(sim["fit"], ctx.seed);
  exp.cold_start = sim["cold_start"].get<bool>();
  exp.init_perturbation = sim["init_perturbation"].get<double>();
  exp.max_failure_fraction = sim["max_failure_fraction"].get<double>();
  std::vector<OccupancyMethod> estimators;
  for (const auto& name : strings(sim["estimators"])) estimators.push_back(parse_cli_method(name));

  const std::string prefix = "setting_" + id;
  const int exports = sim["export_datasets"].get<int>();
  for (int r = 0; r < exports; ++r) {
    const std::uint64_t rs = replicate_seed(ctx.seed, r);
    const SettingData d = generate_setting(spec, rs);
    export_dataset(ctx.out / (prefix + "_data_" + std::to_string(r) + ".csv"), d);
    write_json_file(ctx.out / (prefix + "_init_" + std::to_string(r) + ".json"),
                    model_to_json(replicate_start(spec, d, rs, exp)));
  }

  const ExperimentReport report = run_experiment(spec, estimators, replicates, ctx.seed, exp);
  write_report(ctx.out, prefix, report, exp);
  for (OccupancyMethod m : estimators)
    write_text(ctx.out / (prefix + "_" + method_tag(m) + ".svg"), experiment_svg(report, m));
  persist(ctx, "simulate");
  std::cerr << "simulate: setting " << id << ", " << replicates - report.n_failed << " of " << replicates
            << " replicates used\n";
  for (const auto& s : report.summaries)
    std::cerr << "  " << method_tag(s.method) << ": max |bias| " << format_double(s.max_abs_bias)
              << ", central 90% max |bias| " << format_double(s.max_abs_bias_central90) << ", envelope coverage "
              << format_double(s.envelope_coverage) << '\n';
  return 0;
}

// --- decode -------------------------------------------------------------------

int cmd_decode(Context& ctx) {
  const HmmModel model = load_model(ctx);
  const AlignedSeries s = load_series(ctx);
  check_model_matches(model, s);
  const std::vector<int> states = viterbi(model, s.obs, s.cov);
  {
    auto out = open_output(ctx.out / "states.csv");
    out << "t,segment,state\n";
    for (std::size_t t = 0; t < states.size(); ++t)
      out << s.times[t] << ',' << s.obs.segment_ids[t] << ',' << states[t] + 1 << '\n';
  }
  plot::Panel p;
  if (!s.x.empty()) {
    p.title = "decoded track";
    p.x_label = "x";
    p.y_label = "y";
    p.equal_aspect = true;
    plot::Layer l;
    l.kind = plot::Layer::Kind::segments;
    l.width = 1.2;
    for (std::size_t t = 0; t < states.size(); ++t) {
      const bool joined = t > 0 && s.obs.segment_ids[t] == s.obs.segment_ids[t - 1];
      l.x.push_back(s.x[t]);
      l.y.push_back(s.y[t]);
      l.segment_colors.push_back(joined ? plot::state_color(states[t]) : std::string("none"));
    }
    p.layers.push_back(std::move(l));
    for (int i = 0; i < model.n_states; ++i) {
      plot::Layer key;
      key.color = plot::state_color(i);
      key.label = "state " + std::to_string(i + 1);
      p.layers.push_back(std::move(key));
    }
  } else {
    p.title = "decoded states";
    p.x_label = "row";
    p.y_label = s.channel_names.front();
    for (int i = 0; i < model.n_states; ++i) {
      plot::Layer l;
      l.kind = plot::Layer::Kind::points;
      l.color = plot::state_color(i);
      l.width = 1.5;
      l.label = "state " + std::to_string(i + 1);
      for (std::size_t t = 0; t < states.size(); ++t)
        if (states[t] == i) {
          l.x.push_back(static_cast<double>(t));
          l.y.push_back(s.obs.values(static_cast<Eigen::Index>(t), 0));
        }
      p.layers.push_back(std::move(l));
    }
  }
  write_text(ctx.out / "states.svg", plot::render({p}, 640, 480));
  persist(ctx, "decode");
  std::cerr << "decode: " << states.size() << " rows decoded\n";
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Covariate-driven hidden Markov models and state occupancy estimation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out_dir, method, setting;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  bool strict = false;
  app.add_option("--config", config_path, "run configuration (JSON)");
  app.add_option("--seed", seed, "base seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--method", method, "occupancy method: stationary, binned, ar, bb, dirichlet, mc");
  app.add_option("--setting", setting, "simulation setting id");
  app.add_option("--replicates", replicates, "simulation replicates");
  app.add_flag("--strict", strict, "exit with code 3 when an optimizer does not converge");
  auto* pre = app.add_subcommand("preprocess", "tracking data to the aligned step/angle series");
  auto* fit = app.add_subcommand("fit", "maximum likelihood fit");
  auto* occ = app.add_subcommand("occupancy", "state occupancy curve of a fitted model");
  auto* sim = app.add_subcommand("simulate", "simulation experiment for one setting");
  auto* dec = app.add_subcommand("decode", "most likely state sequence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Context ctx;
    Json user = Json::object();
    fs::path base = fs::current_path();
    if (!config_path.empty()) {
      user = read_json_file(config_path);
      base = fs::absolute(config_path).parent_path();
    }
    if (seed) user["seed"] = *seed;
    if (!out_dir.empty()) user["output_dir"] = fs::absolute(out_dir).lexically_normal().string();
    if (!method.empty()) user["occupancy"]["method"] = method;
    if (!setting.empty()) user["simulate"]["setting"] = setting;
    if (replicates) user["simulate"]["replicates"] = *replicates;
    if (strict) user["strict"] = true;
    ctx.config = resolve_run_config(user, base);
    ctx.out = ctx.config["output_dir"].get<std::string>();
    ctx.seed = ctx.config["seed"].get<std::uint64_t>();
    ctx.strict = ctx.config["strict"].get<bool>();
    fs::create_directories(ctx.out);

    if (pre->parsed()) return cmd_preprocess(ctx);
    if (fit->parsed()) return cmd_fit(ctx);
    if (occ->parsed()) return cmd_occupancy(ctx);
    if (sim->parsed()) return cmd_simulate(ctx);
    if (dec->parsed()) return cmd_decode(ctx);
    return 2;
  } catch (const InputError& e) {
    std::cerr << "occuhmm: error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "occuhmm: numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "occuhmm: error: invalid configuration value: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "occuhmm: error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "occuhmm: numerical failure: " << e.what() << '\n';
    return 3;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"occuhmm"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace occuhmm::cli
