#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lagaboost::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kPartialFailure = 3, kNumericalFailure = 4 };

struct RunConfig {
  std::string command;
  std::string data;
  std::string model;
  std::string out;
  std::string likelihood = "bernoulli-probit";
  std::string structure = "grouped";
  std::string group_col = "group";
  std::vector<std::string> loc_cols{"loc1", "loc2"};
  std::string response_col = "y";
  int iterations = 100;
  double learning_rate = 0.1;
  int max_depth = 5;
  int min_leaf = 10;
  std::uint64_t seed = 0;
  std::string algorithm = "lagaboost";
  int folds = 4;
  std::string scenario = "grouped-binary";
  int runs = 10;
  std::string axis = "rho";
  int threads = 0;  ///< 0: all available cores

  /// Set for the simulate command when the boosting flags were given explicitly.
  bool tuning_given = false;
};

/// Worker count: available cores, capped by `requested` (or LAGABOOST_THREADS
/// when requested is 0).
int resolve_threads(int requested);

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_predict(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& log);
int cmd_tune(const RunConfig& config, std::ostream& out, std::ostream& log);

/// Parses argv, merges an optional --config JSON file (flags win), validates,
/// dispatches, and maps exceptions to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& log);

}  // namespace lagaboost::cli
