#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathforge/puzzle.hpp"

namespace pathforge {

// Rejection-sampling instance generator. Every emitted countdown instance is
// guaranteed a witness whose intermediate results are all positive integers;
// game24 instances are guaranteed solvable with exact rational arithmetic.
struct GeneratorConfig {
  Task task = Task::countdown;
  int count = 0;
  int input_lo = 1;
  int input_hi = 99;
  int target_lo = 10;
  int target_hi = 100;
  std::vector<int> exclude_targets;  // e.g. {24} for countdown training data

  // Abort after this many consecutive rejected samples; a tiny range with no
  // solvable instance otherwise loops forever.
  long max_consecutive_rejects = 200000;
};

class config_unsatisfiable : public std::runtime_error {
public:
  explicit config_unsatisfiable(const std::string& what) : std::runtime_error(what) {}
};

std::vector<PuzzleInstance> generate_instances(const GeneratorConfig& cfg, uint64_t seed);

// Ranked game24 case list (CSV with "Rank" and "Puzzles" columns). Returns
// instances ordered by rank.
std::vector<PuzzleInstance> load_game24_ranked_csv(const std::string& path);

// Canonical rank-based split: ranks 1..900 shuffled into 720 train and 180
// valid cases (seeded), ranks 901..1000 as test.
struct Game24Splits {
  std::vector<PuzzleInstance> train, valid, test;
};
Game24Splits split_game24_ranked(const std::vector<PuzzleInstance>& ranked, uint64_t seed);

}  // namespace pathforge
