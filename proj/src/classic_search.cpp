#include "pathforge/classic_search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pathforge/expand.hpp"
#include "pathforge/path_text.hpp"

namespace pathforge {
namespace {

struct Node {
  std::vector<ValueNode> state;
  std::vector<ReasoningStep> steps;
};

struct RankKey {
  double dist;
  size_t count;
  std::string lex;

  bool operator<(const RankKey& o) const {
    if (dist != o.dist) return dist < o.dist;
    if (count != o.count) return count < o.count;
    return lex < o.lex;
  }
};

RankKey rank_of(const Node& node, int target) {
  std::vector<Rational> values;
  values.reserve(node.state.size());
  for (const ValueNode& v : node.state) values.push_back(v.value);
  return RankKey{target_distance_of(values, target), values.size(),
                 render_value_list(values)};
}

void order_by_heuristic(std::vector<Node>& nodes, const ClassicSearchConfig& cfg, int target) {
  if (cfg.heuristic == Heuristic::none) return;
  std::vector<std::pair<RankKey, size_t>> keyed;
  keyed.reserve(nodes.size());
  for (size_t i = 0; i < nodes.size(); ++i) keyed.emplace_back(rank_of(nodes[i], target), i);
  std::stable_sort(keyed.begin(), keyed.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Node> sorted;
  sorted.reserve(nodes.size());
  for (auto& [key, idx] : keyed) sorted.push_back(std::move(nodes[idx]));
  nodes = std::move(sorted);
}

void emit_leaf(const PuzzleInstance& inst, const Node& node, SearchOutcome& out) {
  ReasoningPath path = finish_path(node.steps, node.state[0]);
  Verdict verdict = verify(inst, path);
  out.solved = out.solved || verdict.success;
  out.paths.push_back(ExploredPath{std::move(path), std::move(verdict)});
}

SearchOutcome solve_bfs(const PuzzleInstance& inst, const ClassicSearchConfig& cfg) {
  SearchOutcome out;
  std::vector<Node> frontier{Node{value_nodes_of(inst), {}}};
  for (int depth = 0; depth < 3; ++depth) {
    std::vector<Node> level;
    for (const Node& node : frontier) {
      for (StepCandidate& cand : expand_state(node.state, cfg.integer_only)) {
        Node child;
        child.state = std::move(cand.next);
        child.steps = node.steps;
        child.steps.push_back(std::move(cand.step));
        level.push_back(std::move(child));
      }
    }
    order_by_heuristic(level, cfg, inst.target);
    if (static_cast<int>(level.size()) > cfg.beam_width) level.resize(cfg.beam_width);
    frontier = std::move(level);
    if (frontier.empty()) return out;
  }
  // Every final-depth frontier leaf becomes a path, hit or miss.
  for (const Node& node : frontier) emit_leaf(inst, node, out);
  return out;
}

struct DfsState {
  const PuzzleInstance& inst;
  const ClassicSearchConfig& cfg;
  SearchOutcome out;
  long expansions = 0;
  bool stop = false;  // first success or exhausted budget
};

void dfs_rec(DfsState& s, const Node& node) {
  if (node.state.size() == 1) {
    emit_leaf(s.inst, node, s.out);
    if (s.out.paths.back().verdict.success) s.stop = true;
    return;
  }
  if (s.expansions >= s.cfg.max_expansions) {
    // Budget refused this expansion: record the abandoned branch and unwind.
    if (!node.steps.empty()) {
      ReasoningPath partial;
      partial.steps = node.steps;
      Verdict verdict = verify(s.inst, partial);
      s.out.paths.push_back(ExploredPath{std::move(partial), std::move(verdict)});
    }
    s.stop = true;
    return;
  }
  ++s.expansions;
  std::vector<Node> children;
  for (StepCandidate& cand : expand_state(node.state, s.cfg.integer_only)) {
    Node child;
    child.state = std::move(cand.next);
    child.steps = node.steps;
    child.steps.push_back(std::move(cand.step));
    children.push_back(std::move(child));
  }
  order_by_heuristic(children, s.cfg, s.inst.target);
  for (const Node& child : children) {
    dfs_rec(s, child);
    if (s.stop) return;
  }
}

SearchOutcome solve_dfs(const PuzzleInstance& inst, const ClassicSearchConfig& cfg) {
  DfsState s{inst, cfg};
  dfs_rec(s, Node{value_nodes_of(inst), {}});
  return std::move(s.out);
}

}  // namespace

double target_distance_of(const std::vector<Rational>& values, int target) {
  double best = std::numeric_limits<double>::infinity();
  for (const Rational& v : values) {
    best = std::min(best, std::abs(v.to_double() - static_cast<double>(target)));
  }
  return best;
}

SearchOutcome classic_solve(const PuzzleInstance& inst, const ClassicSearchConfig& cfg) {
  if (cfg.beam_width < 1) throw std::invalid_argument("beam_width must be at least 1");
  if (cfg.max_expansions < 1) throw std::invalid_argument("max_expansions must be at least 1");
  return cfg.strategy == Strategy::bfs ? solve_bfs(inst, cfg) : solve_dfs(inst, cfg);
}

}  // namespace pathforge
