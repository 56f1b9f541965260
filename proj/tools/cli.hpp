#pragma once

#include <string>
#include <vector>

namespace occuhmm::cli {

// Exit codes: 0 success, 2 input or validation error, 3 numerical failure.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace occuhmm::cli
