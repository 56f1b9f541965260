#include "doctest.h"
#include "fixtures.hpp"

#include "cli.hpp"
#include "occuhmm/hmm/simulate.hpp"
#include "occuhmm/io/json_format.hpp"
#include "occuhmm/movement/track.hpp"
#include "occuhmm/occupancy/curve.hpp"
#include "occuhmm/sim/harness.hpp"
#include "occuhmm/stats.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace occuhmm;
namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(OCCUHMM_TEST_DATA);

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("occuhmm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

struct Run {
  int code;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream captured;
  auto* old = std::cerr.rdbuf(captured.rdbuf());
  const int code = cli::run(args);
  std::cerr.rdbuf(old);
  return {code, captured.str()};
}

// Single-channel series in the canonical layout.
void write_series(const fs::path& p, const ObservationSeries& obs, const std::vector<double>& z) {
  AlignedSeries s;
  s.channel_names = {"obs"};
  s.covariate_names = {"z"};
  s.obs = obs;
  s.obs.segment_ids.assign(obs.length(), 0);
  s.cov = CovariateSeries::from_column(z);
  s.cov.segment_ids = s.obs.segment_ids;
  for (std::size_t t = 0; t < obs.length(); ++t) s.times.push_back(std::to_string(t));
  std::ofstream out(p);
  write_aligned_csv(out, s);
}

Json series_config(const fs::path& dir, int n_states) {
  return {{"output_dir", (dir / "out").string()},
          {"data", {{"series", (dir / "series.csv").string()}}},
          {"model", {{"n_states", n_states}, {"channels", {"obs"}}, {"families", {"gaussian"}}, {"covariates", {"z"}}}}};
}

std::vector<std::string> csv_files(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("preprocess reproduces the golden series byte for byte") {
  const fs::path dir = fresh_dir("golden");
  write_file(dir / "run.json", Json{{"output_dir", "out"},
                                     {"data", {{"track", (kData / "golden_track.csv").string()},
                                               {"columns", {{"covariates", {"temp"}}}}}},
                                     {"preprocess", {{"min_segment_length", 1}}}}
                                   .dump());
  const auto r = run({"preprocess", "--config", (dir / "run.json").string()});
  REQUIRE(r.code == 0);
  CHECK(slurp(dir / "out" / "series.csv") == slurp(kData / "golden_series.csv"));
  const Json log = read_json_file(dir / "out" / "preprocess_log.json");
  CHECK(log["rows_written"] == 3);
  CHECK(fs::exists(dir / "out" / "config_preprocess.json"));
}

TEST_CASE("preprocess input errors exit with code 2") {
  const fs::path dir = fresh_dir("badinput");
  write_file(dir / "nolat.csv", "timestamp,x\n2020-06-01T10:00:00Z,1\n");
  write_file(dir / "empty.csv", "");
  write_file(dir / "run.json", Json{{"output_dir", "out"}, {"data", {{"track", "nolat.csv"}}}}.dump());
  auto r = run({"preprocess", "--config", (dir / "run.json").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("'y'") != std::string::npos);
  write_file(dir / "run.json", Json{{"output_dir", "out"}, {"data", {{"track", "empty.csv"}}}}.dump());
  CHECK(run({"preprocess", "--config", (dir / "run.json").string()}).code == 2);
  write_file(dir / "run.json", Json{{"output_dir", "out"}, {"data", {{"track", "empty.csv"}}}, {"colour", 1}}.dump());
  r = run({"preprocess", "--config", (dir / "run.json").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("colour") != std::string::npos);
  CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("fit validates its start, reaches a fixed point and honours strict mode") {
  const fs::path dir = fresh_dir("fit");
  const HmmModel truth = fixture::three_state();
  const auto z = fixture::ar1_path(1500, 0.9, 4);
  const auto path = simulate_hmm(truth, CovariateSeries::from_column(z), 8);
  write_series(dir / "series.csv", path.obs, z);

  Json bad = model_to_json(truth);
  bad["emissions"][0]["dispersion"][1] = 0.0;
  write_file(dir / "bad_init.json", bad.dump());
  Json cfg = series_config(dir, 3);
  cfg["model"]["init"] = (dir / "bad_init.json").string();
  write_file(dir / "bad.json", cfg.dump());
  CHECK(run({"fit", "--config", (dir / "bad.json").string()}).code == 2);

  cfg["model"].erase("init");
  write_file(dir / "run.json", cfg.dump());
  REQUIRE(run({"fit", "--config", (dir / "run.json").string()}).code == 0);
  const Json first = read_json_file(dir / "out" / "fit_report.json");
  CHECK(first["converged"] == true);

  fs::copy_file(dir / "out" / "model.json", dir / "refit_init.json");
  cfg["model"]["init"] = (dir / "refit_init.json").string();
  cfg["output_dir"] = (dir / "refit").string();
  write_file(dir / "refit.json", cfg.dump());
  REQUIRE(run({"fit", "--config", (dir / "refit.json").string()}).code == 0);
  const Json second = read_json_file(dir / "refit" / "fit_report.json");
  CHECK(std::abs(second["loglik"].get<double>() - first["loglik"].get<double>()) < 1e-6);

  cfg["fit"] = {{"max_iterations", 1}};
  cfg["output_dir"] = (dir / "strict").string();
  cfg["model"].erase("init");
  write_file(dir / "strict.json", cfg.dump());
  CHECK(run({"fit", "--config", (dir / "strict.json").string(), "--strict"}).code == 3);
  CHECK(run({"fit", "--config", (dir / "strict.json").string()}).code == 0);
}

TEST_CASE("an exported simulation replicate refits to the harness log-likelihood") {
  const fs::path dir = fresh_dir("export");
  write_file(dir / "sim.json",
             Json{{"output_dir", "sim"},
                  {"simulate", {{"monte_carlo_length", 100000}, {"synthetic_length", 20000}, {"export_datasets", 1},
                                {"estimators", {"stationary"}}}}}
                 .dump());
  REQUIRE(run({"simulate", "--config", (dir / "sim.json").string(), "--setting", "I", "--replicates", "1"}).code == 0);
  Json cfg = series_config(dir, 3);
  cfg["data"]["series"] = (dir / "sim" / "setting_I_data_0.csv").string();
  cfg["model"]["init"] = (dir / "sim" / "setting_I_init_0.json").string();
  cfg["fit"] = {{"restarts", 0}};
  write_file(dir / "fit.json", cfg.dump());
  REQUIRE(run({"fit", "--config", (dir / "fit.json").string()}).code == 0);
  const Json report = read_json_file(dir / "sim" / "setting_I_report.json");
  const Json fit = read_json_file(dir / "out" / "fit_report.json");
  CHECK(fit["loglik"].get<double>() == report["replicate_results"][0]["loglik"].get<double>());
}

TEST_CASE("occupancy methods: flat stationary curve, propagated validation, estimator agreement") {
  const fs::path dir = fresh_dir("occupancy");

  SUBCASE("intercept-only model gives constant rows") {
    HmmModel flat = fixture::three_state();
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (a != b) flat.transition.at(a, b, 1) = 0.0;
    write_file(dir / "flat.json", model_to_json(flat).dump());
    const auto z = fixture::ar1_path(500, 0.5, 1);
    write_series(dir / "series.csv", simulate_hmm(flat, CovariateSeries::from_column(z), 2).obs, z);
    Json cfg = series_config(dir, 3);
    cfg["model"]["file"] = (dir / "flat.json").string();
    write_file(dir / "run.json", cfg.dump());
    REQUIRE(run({"occupancy", "--config", (dir / "run.json").string(), "--method", "stationary"}).code == 0);
    std::ifstream in(dir / "out" / "occupancy_stationary.csv");
    const OccupancyCurve c = read_curve_csv(in);
    for (std::size_t g = 1; g < c.size(); ++g)
      for (int i = 0; i < 3; ++i) CHECK(c.probs(static_cast<Eigen::Index>(g), i) == doctest::Approx(c.probs(0, i)).epsilon(1e-12));
    CHECK(fs::exists(dir / "out" / "occupancy_stationary.svg"));
    CHECK(slurp(dir / "out" / "occupancy_stationary.svg").rfind("<svg", 0) == 0);

    cfg["occupancy"] = {{"block_length", 501}};
    write_file(dir / "bb.json", cfg.dump());
    const auto r = run({"occupancy", "--config", (dir / "bb.json").string(), "--method", "bb"});
    CHECK(r.code == 2);
    CHECK(r.err.find("block") != std::string::npos);
    CHECK(run({"occupancy", "--config", (dir / "run.json").string(), "--method", "kriging"}).code == 2);
  }

  SUBCASE("dirichlet and block bootstrap agree on a long fast-covariate series") {
    const SettingSpec spec = load_settings(default_settings_path()).at("II");
    SettingSpec longer = spec;
    longer.length = 20000;
    const SettingData d = generate_setting(longer, 21);
    write_series(dir / "series.csv", d.obs, d.cov.column(0));
    write_file(dir / "truth.json", model_to_json(spec.model).dump());
    Json cfg = series_config(dir, 3);
    cfg["model"]["file"] = (dir / "truth.json").string();
    cfg["occupancy"] = {{"binning", {{"n_bins", 30}}}, {"synthetic_length", 400000}};
    write_file(dir / "run.json", cfg.dump());
    REQUIRE(run({"occupancy", "--config", (dir / "run.json").string(), "--method", "bb"}).code == 0);
    REQUIRE(run({"occupancy", "--config", (dir / "run.json").string(), "--method", "dirichlet"}).code == 0);
    std::ifstream a(dir / "out" / "occupancy_block-bootstrap.csv"), b(dir / "out" / "occupancy_dirichlet.csv");
    const OccupancyCurve bb = read_curve_csv(a), dir_curve = read_curve_csv(b);
    const auto zc = d.cov.column(0);
    const double lo = stats::quantile(zc, 0.05), hi = stats::quantile(zc, 0.95);
    double worst = 0;
    int compared = 0;
    for (std::size_t g = 0; g < bb.size(); ++g) {
      if (bb.grid[g] < lo || bb.grid[g] > hi || !bb.has_value(g) || !dir_curve.has_value(g)) continue;
      ++compared;
      for (int i = 0; i < 3; ++i)
        worst = std::max(worst, std::abs(bb.probs(static_cast<Eigen::Index>(g), i) - dir_curve.probs(static_cast<Eigen::Index>(g), i)));
    }
    CHECK(compared > 15);
    CHECK(worst < 0.05);
  }
}

TEST_CASE("decode recovers noiseless states, breaks ties low and rejects channel mismatches") {
  const fs::path dir = fresh_dir("decode");
  HmmModel m = fixture::three_state();
  m.emissions.channels[0].dispersion = {1e-3, 1e-3, 1e-3};
  const auto z = fixture::ar1_path(400, 0.9, 6);
  const auto path = simulate_hmm(m, CovariateSeries::from_column(z), 7);
  write_series(dir / "series.csv", path.obs, z);
  write_file(dir / "model.json", model_to_json(m).dump());
  Json cfg = series_config(dir, 3);
  cfg["model"]["file"] = (dir / "model.json").string();
  write_file(dir / "run.json", cfg.dump());
  REQUIRE(run({"decode", "--config", (dir / "run.json").string()}).code == 0);
  std::ifstream in(dir / "out" / "states.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,segment,state");
  std::size_t t = 0, agree = 0;
  while (std::getline(in, line)) {
    const int s = std::stoi(line.substr(line.rfind(',') + 1));
    agree += s - 1 == path.states[t];
    ++t;
  }
  CHECK(t == 400);
  CHECK(agree == 400);
  CHECK(fs::exists(dir / "out" / "states.svg"));

  // two indistinguishable states: every step is a tie
  HmmModel tie;
  tie.n_states = 2;
  tie.transition = TransitionCoefficients::zeros(2, 1);
  tie.emissions.channels = {{Family::gaussian, {0.0, 0.0}, {1.0, 1.0}}};
  tie.initial_distribution = Vector::Constant(2, 0.5);
  write_file(dir / "tie.json", model_to_json(tie).dump());
  cfg["model"]["file"] = (dir / "tie.json").string();
  cfg["output_dir"] = (dir / "tie").string();
  write_file(dir / "tie_run.json", cfg.dump());
  REQUIRE(run({"decode", "--config", (dir / "tie_run.json").string()}).code == 0);
  const std::string states = slurp(dir / "tie" / "states.csv");
  CHECK(states.find(",2\n") == std::string::npos);

  HmmModel two = fixture::three_state();
  two.emissions.channels.push_back({Family::gaussian, {0, 0, 0}, {1, 1, 1}});
  write_file(dir / "two.json", model_to_json(two).dump());
  cfg["model"]["file"] = (dir / "two.json").string();
  write_file(dir / "mismatch.json", cfg.dump());
  CHECK(run({"decode", "--config", (dir / "mismatch.json").string()}).code == 2);
}

TEST_CASE("simulate smoke run and byte-identical reruns from the resolved config") {
  const fs::path dir = fresh_dir("rerun");
  write_file(dir / "sim.json", Json{{"output_dir", "a"},
                                    {"simulate", {{"monte_carlo_length", 100000}, {"synthetic_length", 20000}}}}
                                   .dump());
  REQUIRE(run({"simulate", "--config", (dir / "sim.json").string(), "--setting", "I", "--replicates", "2", "--seed", "5"}).code == 0);
  const Json report = read_json_file(dir / "a" / "setting_I_report.json");
  CHECK(report["replicate_results"].size() == 2);
  for (const char* tag : {"stationary", "ar-resample", "block-bootstrap", "dirichlet"})
    CHECK(fs::exists(dir / "a" / ("setting_I_" + std::string(tag) + ".svg")));

  Json resolved = read_json_file(dir / "a" / "config_simulate.json");
  CHECK(resolved["seed"] == 5);
  CHECK(resolved["simulate"]["replicates"] == 2);
  resolved["output_dir"] = (dir / "b").string();
  write_file(dir / "again.json", resolved.dump());
  REQUIRE(run({"simulate", "--config", (dir / "again.json").string()}).code == 0);
  const auto files = csv_files(dir / "a");
  CHECK(files == csv_files(dir / "b"));
  for (const auto& f : files) CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
}
