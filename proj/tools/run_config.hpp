#pragma once

#include "occuhmm/io/json_format.hpp"

#include <filesystem>
#include <string>

namespace occuhmm::cli {

// Every key a run configuration may hold, with its default value. Keys whose
// default is null accept any value.
Json default_run_config();

// Overlays `user` on the defaults, rejecting unknown keys. Relative paths are
// taken relative to `base_dir` and stored absolute.
Json resolve_run_config(const Json& user, const std::filesystem::path& base_dir);

// Path-valued keys as "section.key" (or a top-level key).
const std::vector<std::string>& path_keys();

}  // namespace occuhmm::cli
