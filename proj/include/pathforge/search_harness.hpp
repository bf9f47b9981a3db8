#pragma once

#include <functional>
#include <optional>

#include "pathforge/classic_search.hpp"
#include "pathforge/expand.hpp"
#include "pathforge/policy.hpp"

namespace pathforge {

// Raised when sampling could not produce a single arithmetically valid step
// within the retry budget (or a state has no legal expansion at all).
class no_valid_candidates : public std::runtime_error {
 public:
  explicit no_valid_candidates(const std::string& what) : std::runtime_error(what) {}
};

// Step-level scores. The oracle answers sure/impossible exactly; the likely
// band belongs to the uninformative constant evaluator.
inline constexpr double kScoreSure = 1.0;
inline constexpr double kScoreLikely = 0.1;
inline constexpr double kScoreImpossible = 0.0001;

enum class EvalMode { oracle, constant };

struct Evaluator {
  EvalMode mode = EvalMode::oracle;
};

// Scores a partial state: oracle mode consults exact reachability of the
// target from the remaining values; constant mode always returns the likely
// band.
double evaluate_step(const Evaluator& evaluator, const std::vector<Rational>& remaining,
                     const Rational& target, bool integer_only);

// A partial solution under construction: the steps taken plus the live
// values (with their expression trees).
struct SearchState {
  std::vector<ReasoningStep> steps;
  std::vector<ValueNode> values;
};

SearchState initial_state(const PuzzleInstance& inst);

// The text the policy conditions on: the instance prompt followed by each
// committed step line and its newline.
std::string state_prompt(const PuzzleInstance& inst, const SearchState& state);

struct ProposeConfig {
  enum class Mode { ranked, sampled };
  Mode mode = Mode::ranked;
  // Sampled mode only: line sampling transform and total attempt budget.
  double temperature = 0.7;
  double top_p = 0.8;
  int retry_budget = 24;
  uint64_t seed = 0;
};

struct ProposedStep {
  ReasoningStep step;
  std::vector<ValueNode> next_values;
  double line_logprob = 0.0;  // policy log-probability of the step line + newline
};

// Up to k valid next steps conditioned on the rendered state. Ranked mode
// enumerates every legal step and orders by policy line log-probability
// (ties by rendered text); k = 0 means all. Sampled mode draws lines from
// the policy, keeps those that parse into replay-exact steps, and throws
// no_valid_candidates if the budget produces none.
std::vector<ProposedStep> propose_steps(const Policy& policy, const PuzzleInstance& inst,
                                        const SearchState& state, int k,
                                        const ProposeConfig& config = {});

struct GuidedResult {
  std::vector<ExploredPath> all_paths;
  std::optional<ReasoningPath> selected;
  bool solved = false;
};

struct BeamConfig {
  int beam_size = 5;
  int depth = 4;  // step rounds + the answer construction round
  // Evaluations per state; both evaluator modes are deterministic so repeat
  // samples collapse to one call.
  int samples_per_eval = 3;
  uint64_t seed = 0;
  ProposeConfig propose;
};

// Breadth-first beam over proposed steps: each round pools every candidate
// child of the live beam, keeps the top beam_size by (score, cumulative
// policy log-probability, rendered text), and finishes states that reach a
// single value by constructing their answer line. selected is the finished
// path with the best terminal score (verify: success 1.0, else impossible).
GuidedResult beam_search(const Policy& policy, const Evaluator& evaluator,
                         const PuzzleInstance& inst, const BeamConfig& config);

struct MctsConfig {
  int iterations = 100;
  double c_explore = 1.0;
  int depth = 4;
  uint64_t seed = 0;
  ProposeConfig propose;
};

// Read-only snapshot of one tree node for auditing the search.
struct MctsNodeView {
  int parent = -1;
  std::vector<int> children;
  int visits = 0;
  double value_sum = 0.0;
  double score = 0.0;
  bool expanded = false;
  bool terminal = false;
  bool exhausted = false;
};

using MctsInspector = std::function<void(int iteration, const std::vector<MctsNodeView>&)>;

// UCT search: selection by mean value + c_explore * sqrt(ln N_parent /
// N_child) with unvisited children first (insertion order), expansion via
// propose_steps, reward-proportional rollout, terminal-reward
// backpropagation. Fully explored subtrees are pruned from selection so
// terminals are never revisited. The inspector, when set, observes the tree
// after every iteration.
GuidedResult mcts_search(const Policy& policy, const Evaluator& evaluator,
                         const PuzzleInstance& inst, const MctsConfig& config,
                         const MctsInspector& inspect = {});

}  // namespace pathforge
