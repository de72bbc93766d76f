#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "strawkit/config.hpp"

namespace strawkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitItemFailure = 1;
inline constexpr int kExitInvalidConfig = 2;

/// Environment variable holding the default parallelism degree.
inline constexpr const char* kThreadsEnv = "STRAWKIT_THREADS";

/// Executes a fully resolved configuration. Per-item failures are reported on `err`
/// and yield exit 1 after partial results are written; InvalidConfig yields exit 2.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses arguments (without the program name), merges the config file and flags, runs.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace strawkit::cli
