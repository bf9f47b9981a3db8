#pragma once

#include <string>
#include <vector>

#include "pathforge/puzzle.hpp"

namespace pathforge {

enum class Strategy { bfs, dfs };
enum class Heuristic { none, target_distance };

// Deliberately incomplete searches: the frontier cap (BFS) and the expansion
// budget (DFS) are what make them miss solvable instances, which is exactly
// the failure data the downstream pipeline wants. Defaults were calibrated
// on freshly generated countdown instances so that BFS lands well below DFS.
struct ClassicSearchConfig {
  Strategy strategy = Strategy::dfs;
  int beam_width = 36;       // BFS: states kept per level
  long max_expansions = 90;  // DFS: nodes expanded before giving up
  Heuristic heuristic = Heuristic::target_distance;
  bool integer_only = true;  // restrict steps to positive integer results
};

struct ExploredPath {
  ReasoningPath path;
  Verdict verdict;
};

struct SearchOutcome {
  std::vector<ExploredPath> paths;  // explored root-to-leaf paths, in emit order
  bool solved = false;
};

// Ranks a state by min over its values of |value - target|; ties prefer
// fewer remaining numbers, then lexicographic order of the rendered state.
double target_distance_of(const std::vector<Rational>& values, int target);

SearchOutcome classic_solve(const PuzzleInstance& inst, const ClassicSearchConfig& cfg);

}  // namespace pathforge
