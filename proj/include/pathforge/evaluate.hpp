#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "pathforge/puzzle.hpp"
#include "pathforge/search_harness.hpp"
#include "pathforge/trainer.hpp"

namespace pathforge {

class invalid_method_config : public std::invalid_argument {
 public:
  explicit invalid_method_config(const std::string& what) : std::invalid_argument(what) {}
};

enum class EvalMethod { greedy, pass_at_1, beam, mcts };

std::string eval_method_name(EvalMethod m);
EvalMethod eval_method_from_name(const std::string& name);

// Default sampling budget per instance: 8 draws for countdown, 20 for the
// 24 game.
int default_pass_samples(Task task);

struct EvalConfig {
  EvalMethod method = EvalMethod::greedy;
  // Decode settings for greedy and pass_at_1 (greedy forces temperature 0
  // and a single sample internally).
  double temperature = 0.7;
  double top_p = 0.8;
  int max_tokens = 256;
  int n_samples = 0;  // pass_at_1 draws per instance; 0 means the task default
  // Step scoring plus shape limits for the guided searches.
  Evaluator evaluator;
  BeamConfig beam;
  MctsConfig mcts;
  uint64_t seed = 0;
  // false records 0.0 seconds everywhere, making result files byte-stable
  // across machines.
  bool collect_timing = true;
};

// Flag validation before any side effect; throws invalid_method_config.
void validate_eval_config(const EvalConfig& config, Task task);

// The resolved settings a run actually uses (task defaults filled in); its
// serialized form feeds the report's config digest.
nlohmann::json eval_config_to_json(const EvalConfig& config, Task task);

struct EvalEntry {
  std::string method;
  double success_rate = 0.0;  // successes over the method's denominator, exact
  int n_instances = 0;
  double wall_clock = 0.0;  // summed decode/search seconds, nothing else
  std::string config_digest;
};

nlohmann::json eval_entry_to_json(const EvalEntry& e);
EvalEntry eval_entry_from_json(const nlohmann::json& j);

struct EvalOutcome {
  EvalEntry entry;
  // One row per generated path: {method, instance, path, success, seconds}
  // plus `selected` for the guided searches, where every explored path is
  // persisted and the chosen one is flagged. An instance whose search found
  // no path at all contributes one empty-path failure row so summaries
  // rebuild losslessly from rows alone.
  std::vector<nlohmann::json> rows;
};

// Scores instances under one method. Greedy: one zero-temperature decode
// each. pass_at_1: n sampled decodes each, success averaged per sample.
// beam / mcts: success of the selected path. Per-instance randomness is
// seeded by mix_seed(config.seed, instance key hash), so results are
// independent of instance order and worker count.
EvalOutcome evaluate(const Policy& policy, const std::vector<PuzzleInstance>& instances,
                     const EvalConfig& config);

// Rebuilds the summary entry from persisted rows (the machine-readable
// source of truth); digest is copied through.
EvalEntry entry_from_rows(const std::vector<nlohmann::json>& rows, const std::string& digest);

// Aligned text table over entries sorted by method id; success rates as
// percentages with one decimal, seconds with two. Pure function of its
// input, so regeneration is byte-identical.
std::string render_report(const std::vector<EvalEntry>& entries);

// Validation-based checkpoint choice: scores every checkpoint by
// success_rate on the instances under the given method and returns the
// best, ties to the later step.
SelectedCheckpoint select_checkpoint_by_eval(const std::vector<std::string>& checkpoint_files,
                                             const std::vector<PuzzleInstance>& valid_instances,
                                             const EvalConfig& config);

}  // namespace pathforge
