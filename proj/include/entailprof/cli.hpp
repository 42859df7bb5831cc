#ifndef ENTAILPROF_CLI_HPP_
#define ENTAILPROF_CLI_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace entailprof {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitIo = 2 };

/// Fully resolved settings of one CLI run. Serialized as config.json in the
/// run directory; `--config <file>` loads it back and flags override it.
struct RunConfig {
  std::string command;
  std::string data;
  std::string test_data;
  std::string hypotheses;
  std::vector<std::string> labels;
  std::string task;
  std::uint64_t seed = 0;
  int folds = 5;
  std::vector<std::size_t> n;
  std::vector<std::string> select{"random"};
  std::vector<std::size_t> k{1};
  double threshold = 0.5;
  double lr = 0.1;
  int epochs = 10;
  std::size_t head_dim = 128;
  std::string embeddings;
  std::string pair_scores;
  int ngram_min = 1;
  int ngram_max = 5;
  std::size_t hash_dim = 4096;
  bool lowercase = true;
  bool include_zero_shot = false;
  double l2 = 1e-4;
  double baseline_lr = 0.5;
  int baseline_epochs = 200;
  std::vector<std::string> reports;
};

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

/// Entry point of the `entailprof` tool. `args` excludes the program name.
/// Returns one of ExitCode.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace entailprof

#endif  // ENTAILPROF_CLI_HPP_
