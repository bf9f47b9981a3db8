#include "pathforge/generator.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "pathforge/io.hpp"
#include "pathforge/oracle.hpp"
#include "pathforge/rng.hpp"

namespace pathforge {

std::vector<PuzzleInstance> generate_instances(const GeneratorConfig& cfg, uint64_t seed) {
  Rng rng(seed);
  std::vector<PuzzleInstance> out;
  out.reserve(cfg.count);
  long rejects = 0;
  const bool game24 = cfg.task == Task::game24;
  const int input_hi = game24 ? std::min(cfg.input_hi, 13) : cfg.input_hi;

  while (static_cast<int>(out.size()) < cfg.count) {
    if (rejects > cfg.max_consecutive_rejects) {
      throw config_unsatisfiable("no solvable instance found within the configured ranges");
    }
    PuzzleInstance inst;
    inst.task = cfg.task;
    for (int i = 0; i < 4; ++i) {
      inst.inputs[i] = static_cast<int>(rng.uniform_int(cfg.input_lo, input_hi));
    }
    inst.target = game24 ? 24 : static_cast<int>(rng.uniform_int(cfg.target_lo, cfg.target_hi));
    if (std::find(cfg.exclude_targets.begin(), cfg.exclude_targets.end(), inst.target) !=
        cfg.exclude_targets.end()) {
      ++rejects;
      continue;
    }
    std::vector<Rational> values;
    for (int v : inst.inputs) values.push_back(Rational(v));
    // Countdown promises an all-integer witness; game24 only promises
    // solvability in exact rational arithmetic.
    if (!reachable(values, Rational(inst.target), /*integer_only=*/!game24)) {
      ++rejects;
      continue;
    }
    rejects = 0;
    out.push_back(inst);
  }
  return out;
}

std::vector<PuzzleInstance> load_game24_ranked_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw data_error(path + ": empty file");

  // Header row decides the column positions of "Rank" and "Puzzles".
  int rank_col = -1, puzzle_col = -1;
  {
    std::stringstream header(line);
    std::string cell;
    int col = 0;
    while (std::getline(header, cell, ',')) {
      if (cell == "Rank") rank_col = col;
      if (cell == "Puzzles") puzzle_col = col;
      ++col;
    }
  }
  if (rank_col < 0 || puzzle_col < 0) {
    throw data_error(path + ": header must contain 'Rank' and 'Puzzles' columns");
  }

  std::vector<std::pair<int, PuzzleInstance>> ranked;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    int col = 0, rank = -1;
    std::string puzzle;
    while (std::getline(row, cell, ',')) {
      if (col == rank_col) rank = std::atoi(cell.c_str());
      if (col == puzzle_col) puzzle = cell;
      ++col;
    }
    std::stringstream nums(puzzle);
    PuzzleInstance inst;
    inst.task = Task::game24;
    inst.target = 24;
    int v, i = 0;
    while (nums >> v && i < 4) inst.inputs[i++] = v;
    if (rank < 1 || i != 4) {
      throw data_error(path + ":" + std::to_string(line_no) + ": bad rank or puzzle cell");
    }
    if (auto reason = inst.invalid_reason()) {
      throw data_error(path + ":" + std::to_string(line_no) + ": " + *reason);
    }
    ranked.emplace_back(rank, inst);
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<PuzzleInstance> out;
  out.reserve(ranked.size());
  for (auto& [rank, inst] : ranked) out.push_back(inst);
  return out;
}

Game24Splits split_game24_ranked(const std::vector<PuzzleInstance>& ranked, uint64_t seed) {
  if (ranked.size() < 1000) {
    throw data_error("ranked game24 list must contain at least 1000 cases");
  }
  Game24Splits splits;
  std::vector<PuzzleInstance> head(ranked.begin(), ranked.begin() + 900);
  Rng rng(seed);
  rng.shuffle(head);
  splits.train.assign(head.begin(), head.begin() + 720);
  splits.valid.assign(head.begin() + 720, head.end());
  splits.test.assign(ranked.begin() + 900, ranked.begin() + 1000);
  return splits;
}

}  // namespace pathforge
