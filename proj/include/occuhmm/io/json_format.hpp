#pragma once

// JSON forms of models and option blocks. Every option reader starts from the
// given defaults and overrides only the keys present; unknown keys raise
// InputError so typos do not pass silently.

#include "occuhmm/dirichlet/smooth.hpp"
#include "occuhmm/estimation/fit.hpp"
#include "occuhmm/hmm/model.hpp"
#include "occuhmm/occupancy/binning.hpp"
#include "occuhmm/occupancy/estimators.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>

namespace occuhmm {

using Json = nlohmann::ordered_json;

// {"n_states", "initial_policy", "initial_distribution",
//  "transition": [N x N intercepts, N x N slopes per covariate] (diagonals 0),
//  "emissions": [{"family", "location", "dispersion"}, ...]}
Json model_to_json(const HmmModel& model);
HmmModel model_from_json(const Json& j);

Json fit_config_to_json(const FitConfig& c);
FitConfig fit_config_from_json(const Json& j, FitConfig defaults = {});

Json binning_to_json(const BinningConfig& c);
BinningConfig binning_from_json(const Json& j, BinningConfig defaults = {});

Json dirichlet_config_to_json(const DirichletSmoothConfig& c);
DirichletSmoothConfig dirichlet_config_from_json(const Json& j, DirichletSmoothConfig defaults = {});

Json fit_result_to_json(const FitResult& fit);

const char* policy_name(InitialPolicy policy);
InitialPolicy parse_policy(const std::string& name);
const char* range_policy_name(RangePolicy policy);
RangePolicy parse_range_policy(const std::string& name);

Json read_json_file(const std::filesystem::path& path);
// Two-space indented dump with a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

// Throws InputError naming the first key of `j` not listed in `allowed`.
void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where);

}  // namespace occuhmm
