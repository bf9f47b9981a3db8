#include "pathforge/search_harness.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "pathforge/oracle.hpp"
#include "pathforge/path_text.hpp"
#include "pathforge/rng.hpp"

namespace pathforge {

namespace {

bool integer_only_for(const PuzzleInstance& inst) { return inst.task == Task::countdown; }

std::vector<Rational> plain_values(const std::vector<ValueNode>& nodes) {
  std::vector<Rational> out;
  out.reserve(nodes.size());
  for (const ValueNode& n : nodes) out.push_back(n.value);
  return out;
}

ReasoningPath partial_path(std::vector<ReasoningStep> steps) {
  ReasoningPath path;
  path.steps = std::move(steps);
  return path;
}

void validate_propose_config(const ProposeConfig& config) {
  if (config.temperature < 0.0 || !std::isfinite(config.temperature)) {
    throw std::invalid_argument("propose temperature must be finite and non-negative");
  }
  if (!(config.top_p > 0.0) || config.top_p > 1.0) {
    throw std::invalid_argument("propose top_p must be in (0, 1]");
  }
  if (config.retry_budget < 1) {
    throw std::invalid_argument("propose retry_budget must be positive");
  }
}

// Log-probability of emitting `line` right after the prefix stream, summed
// over the line's tokens (the caller includes the trailing newline).
double line_logprob_after(const PolicyStream& prefix, const Vocabulary& vocab,
                          const std::string& line) {
  std::unique_ptr<PolicyStream> s = prefix.clone();
  double total = 0.0;
  for (int tok : vocab.encode(line)) {
    total += log_softmax(s->logits())[tok];
    s->push(tok);
  }
  return total;
}

bool steps_equal(const ReasoningStep& a, const ReasoningStep& b) {
  return a.op == b.op && a.a == b.a && a.b == b.b && a.result == b.result &&
         a.remaining == b.remaining;
}

// One greedy or sampled line from the prefix stream: tokens up to and
// excluding the first newline (or eos / length cap). Temperature 0 is the
// deterministic argmax walk.
std::string sample_line(const PolicyStream& prefix, const Vocabulary& vocab,
                        const ProposeConfig& config, Rng& rng) {
  constexpr int kMaxLineTokens = 64;
  std::unique_ptr<PolicyStream> s = prefix.clone();
  const int eos = vocab.id_of("<eos>");
  const int newline = vocab.id_of("\n");
  std::string text;
  for (int n = 0; n < kMaxLineTokens; ++n) {
    Eigen::VectorXd logits = s->logits();
    int tok;
    if (config.temperature == 0.0) {
      tok = 0;
      for (int i = 1; i < logits.size(); ++i) {
        if (logits[i] > logits[tok]) tok = i;
      }
    } else {
      tok = sample_from_logits(logits, config.temperature, config.top_p, rng);
    }
    if (tok == eos || tok == newline) break;
    text += vocab.surface(tok);
    s->push(tok);
  }
  return text;
}

}  // namespace

double evaluate_step(const Evaluator& evaluator, const std::vector<Rational>& remaining,
                     const Rational& target, bool integer_only) {
  if (evaluator.mode == EvalMode::constant) return kScoreLikely;
  return reachable(remaining, target, integer_only) ? kScoreSure : kScoreImpossible;
}

SearchState initial_state(const PuzzleInstance& inst) {
  return SearchState{{}, value_nodes_of(inst)};
}

std::string state_prompt(const PuzzleInstance& inst, const SearchState& state) {
  std::string text = inst.prompt();
  for (const ReasoningStep& step : state.steps) {
    text += render_step(step);
    text += '\n';
  }
  return text;
}

std::vector<ProposedStep> propose_steps(const Policy& policy, const PuzzleInstance& inst,
                                        const SearchState& state, int k,
                                        const ProposeConfig& config) {
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  if (state.values.size() < 2) throw std::invalid_argument("state is terminal");
  validate_propose_config(config);

  const bool integer_only = integer_only_for(inst);
  std::vector<StepCandidate> candidates = expand_state(state.values, integer_only);
  if (candidates.empty()) {
    throw no_valid_candidates("state has no legal steps");
  }

  const Vocabulary& vocab = policy.vocab();
  std::unique_ptr<PolicyStream> prefix = policy.open_stream();
  for (int tok : vocab.encode(state_prompt(inst, state))) prefix->push(tok);

  std::vector<ProposedStep> out;

  if (config.mode == ProposeConfig::Mode::ranked) {
    struct Scored {
      ProposedStep prop;
      std::string rendered;
    };
    std::vector<Scored> scored;
    scored.reserve(candidates.size());
    for (StepCandidate& cand : candidates) {
      std::string rendered = render_step(cand.step);
      double lp = line_logprob_after(*prefix, vocab, rendered + "\n");
      scored.push_back(
          Scored{ProposedStep{std::move(cand.step), std::move(cand.next), lp}, std::move(rendered)});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
      if (a.prop.line_logprob != b.prop.line_logprob) {
        return a.prop.line_logprob > b.prop.line_logprob;
      }
      return a.rendered < b.rendered;
    });
    size_t keep = (k == 0) ? scored.size() : std::min(scored.size(), static_cast<size_t>(k));
    out.reserve(keep);
    for (size_t i = 0; i < keep; ++i) out.push_back(std::move(scored[i].prop));
    return out;
  }

  // Sampled mode: draw whole lines and keep the ones that land in the
  // enumerated successor space (slot-ordered operands, exact arithmetic,
  // canonical remaining list). Anything else is filtered and the budget
  // covers total attempts, valid or not. Temperature 0 makes every attempt
  // identical, so a single invalid draw exhausts the candidate space.
  Rng rng(config.seed);
  std::set<std::string> seen;
  const size_t want = (k == 0) ? candidates.size() : static_cast<size_t>(k);
  for (int attempt = 0; attempt < config.retry_budget && out.size() < want; ++attempt) {
    if (config.temperature == 0.0 && attempt > 0) break;
    std::string line = sample_line(*prefix, vocab, config, rng);
    if (line.empty()) continue;
    ParseResult parsed = parse_path(line);
    const ReasoningPath* path = std::get_if<ReasoningPath>(&parsed);
    if (!path || path->answer || path->steps.size() != 1) continue;
    const ReasoningStep& step = path->steps.front();
    auto match = std::find_if(candidates.begin(), candidates.end(), [&](const StepCandidate& c) {
      return steps_equal(c.step, step);
    });
    if (match == candidates.end()) continue;
    std::string rendered = render_step(match->step);
    if (!seen.insert(rendered).second) continue;
    out.push_back(ProposedStep{match->step, match->next,
                               line_logprob_after(*prefix, vocab, rendered + "\n")});
    if (config.temperature == 0.0) break;
  }
  if (out.empty()) {
    throw no_valid_candidates("no valid step sampled within the retry budget");
  }
  return out;
}

namespace {

struct BeamItem {
  SearchState state;
  double cum_logprob = 0.0;
  double score = 0.0;
  std::string key;  // concatenated step lines, the lexicographic tie-break
};

struct FinishedItem {
  ReasoningPath path;
  Verdict verdict;
  double terminal_score = 0.0;
  double cum_logprob = 0.0;
  std::string key;
};

}  // namespace

GuidedResult beam_search(const Policy& policy, const Evaluator& evaluator,
                         const PuzzleInstance& inst, const BeamConfig& config) {
  if (config.beam_size < 1 || config.beam_size > 64) {
    throw std::invalid_argument("beam_size must be in [1, 64]");
  }
  if (config.depth < 1) throw std::invalid_argument("depth must be positive");
  if (config.samples_per_eval < 1) {
    throw std::invalid_argument("samples_per_eval must be positive");
  }
  if (auto why = inst.invalid_reason()) throw std::invalid_argument(*why);
  validate_propose_config(config.propose);

  const bool integer_only = integer_only_for(inst);
  const Rational target(inst.target);
  GuidedResult result;
  std::vector<FinishedItem> finished;

  // Sampled proposals get a distinct child seed per call so beam items do
  // not replay each other's draws; ranked mode never reads the seed.
  uint64_t propose_calls = 0;
  auto propose_for = [&](const SearchState& state) {
    ProposeConfig pc = config.propose;
    pc.seed = mix_seed(config.seed ^ config.propose.seed, propose_calls++);
    return propose_steps(policy, inst, state, 0, pc);
  };

  std::vector<BeamItem> beam;
  beam.push_back(BeamItem{initial_state(inst), 0.0, 0.0, ""});

  for (int round = 0; round < config.depth && !beam.empty(); ++round) {
    std::vector<BeamItem> pool;
    for (BeamItem& item : beam) {
      if (item.state.values.size() == 1) {
        // Answer construction round for a finished chain.
        ReasoningPath path = finish_path(item.state.steps, item.state.values.front());
        Verdict verdict = verify(inst, path);
        double terminal = verdict.success ? kScoreSure : kScoreImpossible;
        result.all_paths.push_back(ExploredPath{path, verdict});
        finished.push_back(
            FinishedItem{std::move(path), verdict, terminal, item.cum_logprob, item.key});
        continue;
      }
      std::vector<ProposedStep> proposals;
      try {
        proposals = propose_for(item.state);
      } catch (const no_valid_candidates&) {
        // Nothing to extend this chain with; keep it as an abandoned branch.
        if (!item.state.steps.empty()) {
          ReasoningPath path = partial_path(item.state.steps);
          result.all_paths.push_back(ExploredPath{path, verify(inst, path)});
        }
        continue;
      }
      for (ProposedStep& prop : proposals) {
        BeamItem child;
        child.state.steps = item.state.steps;
        child.state.steps.push_back(prop.step);
        child.state.values = std::move(prop.next_values);
        child.cum_logprob = item.cum_logprob + prop.line_logprob;
        // Deterministic evaluators make repeat samples identical, so
        // samples_per_eval collapses to a single call.
        child.score = evaluate_step(evaluator, plain_values(child.state.values), target,
                                    integer_only);
        child.key = item.key + render_step(prop.step) + "\n";
        pool.push_back(std::move(child));
      }
    }
    std::stable_sort(pool.begin(), pool.end(), [](const BeamItem& a, const BeamItem& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.cum_logprob != b.cum_logprob) return a.cum_logprob > b.cum_logprob;
      return a.key < b.key;
    });
    if (pool.size() > static_cast<size_t>(config.beam_size)) pool.resize(config.beam_size);
    beam = std::move(pool);
  }

  // Depth ran out with live chains: emit them as answerless partial paths.
  for (BeamItem& item : beam) {
    if (item.state.steps.empty()) continue;
    ReasoningPath path = partial_path(item.state.steps);
    result.all_paths.push_back(ExploredPath{path, verify(inst, path)});
  }

  const FinishedItem* best = nullptr;
  for (const FinishedItem& f : finished) {
    if (best == nullptr || f.terminal_score > best->terminal_score ||
        (f.terminal_score == best->terminal_score &&
         (f.cum_logprob > best->cum_logprob ||
          (f.cum_logprob == best->cum_logprob && f.key < best->key)))) {
      best = &f;
    }
  }
  if (best != nullptr) {
    result.selected = best->path;
    result.solved = best->verdict.success;
  }
  return result;
}

namespace {

struct MctsNode {
  int parent = -1;
  std::vector<int> children;
  int depth = 0;  // committed steps from the root
  SearchState state;
  double score = 0.0;
  int visits = 0;
  double value_sum = 0.0;
  bool expanded = false;
  bool terminal = false;
  bool exhausted = false;
};

}  // namespace

GuidedResult mcts_search(const Policy& policy, const Evaluator& evaluator,
                         const PuzzleInstance& inst, const MctsConfig& config,
                         const MctsInspector& inspect) {
  if (config.iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (!(config.c_explore > 0.0)) throw std::invalid_argument("c_explore must be positive");
  if (config.depth < 1) throw std::invalid_argument("depth must be positive");
  if (auto why = inst.invalid_reason()) throw std::invalid_argument(*why);
  validate_propose_config(config.propose);

  const bool integer_only = integer_only_for(inst);
  const Rational target(inst.target);
  GuidedResult result;
  Rng rng(config.seed);

  uint64_t propose_calls = 0;
  auto propose_for = [&](const SearchState& state) {
    ProposeConfig pc = config.propose;
    pc.seed = mix_seed(config.seed ^ config.propose.seed, propose_calls++);
    return propose_steps(policy, inst, state, 0, pc);
  };

  std::set<std::string> seen_paths;
  double best_reward = -1.0;
  // Records one explored root-to-leaf path (deduplicated by rendering) and
  // tracks the best finished path for selection.
  auto record = [&](const ReasoningPath& path, double reward, bool finished) {
    std::string text = render_path(path);
    if (seen_paths.insert(text).second) {
      Verdict verdict = verify(inst, path);
      result.all_paths.push_back(ExploredPath{path, verdict});
      if (verdict.success) result.solved = true;
    }
    if (finished && reward > best_reward) {
      best_reward = reward;
      result.selected = path;
    }
  };

  std::vector<MctsNode> nodes;

  auto evaluate_of = [&](const std::vector<ValueNode>& values) {
    return evaluate_step(evaluator, plain_values(values), target, integer_only);
  };

  // Creates all children of nodes[index]. May throw no_valid_candidates,
  // which propagates to the caller of mcts_search.
  auto expand = [&](int index) {
    std::vector<ProposedStep> proposals = propose_for(nodes[index].state);
    for (ProposedStep& prop : proposals) {
      MctsNode child;
      child.parent = index;
      child.depth = nodes[index].depth + 1;
      child.state.steps = nodes[index].state.steps;
      child.state.steps.push_back(prop.step);
      child.state.values = std::move(prop.next_values);
      child.score = evaluate_of(child.state.values);
      child.terminal = child.state.values.size() == 1 || child.depth >= config.depth;
      nodes.push_back(std::move(child));
      nodes[index].children.push_back(static_cast<int>(nodes.size()) - 1);
    }
    nodes[index].expanded = true;
  };

  // Marks a finished-or-terminal node exhausted and propagates upward:
  // an expanded node with every child exhausted has nothing left to visit.
  auto mark_exhausted_from = [&](int index) {
    nodes[index].exhausted = true;
    for (int p = nodes[index].parent; p >= 0; p = nodes[p].parent) {
      if (!nodes[p].expanded) break;
      bool all = true;
      for (int c : nodes[p].children) {
        if (!nodes[c].exhausted) {
          all = false;
          break;
        }
      }
      if (!all) break;
      nodes[p].exhausted = true;
    }
  };

  // Reward of a terminal node: verify finished chains, score depth-capped
  // dead ends as impossible. Either way the explored path is recorded.
  auto terminal_reward = [&](int index) {
    const MctsNode& node = nodes[index];
    if (node.state.values.size() == 1) {
      ReasoningPath path = finish_path(node.state.steps, node.state.values.front());
      Verdict verdict = verify(inst, path);
      double reward = verdict.success ? kScoreSure : kScoreImpossible;
      record(path, reward, true);
      return reward;
    }
    record(partial_path(node.state.steps), kScoreImpossible, false);
    return kScoreImpossible;
  };

  // Score-proportional random walk from a freshly expanded node down to a
  // terminal state.
  auto rollout = [&](int index) {
    SearchState cur = nodes[index].state;
    int depth = nodes[index].depth;
    while (cur.values.size() > 1 && depth < config.depth) {
      std::vector<ProposedStep> proposals = propose_for(cur);
      std::vector<double> scores;
      scores.reserve(proposals.size());
      double total = 0.0;
      for (const ProposedStep& prop : proposals) {
        double s = evaluate_of(prop.next_values);
        scores.push_back(s);
        total += s;
      }
      double draw = rng.uniform01() * total;
      size_t pick = proposals.size() - 1;
      double acc = 0.0;
      for (size_t i = 0; i < proposals.size(); ++i) {
        acc += scores[i];
        if (draw < acc) {
          pick = i;
          break;
        }
      }
      cur.steps.push_back(proposals[pick].step);
      cur.values = std::move(proposals[pick].next_values);
      ++depth;
    }
    if (cur.values.size() == 1) {
      ReasoningPath path = finish_path(cur.steps, cur.values.front());
      Verdict verdict = verify(inst, path);
      double reward = verdict.success ? kScoreSure : kScoreImpossible;
      record(path, reward, true);
      return reward;
    }
    record(partial_path(cur.steps), kScoreImpossible, false);
    return kScoreImpossible;
  };

  // The root is expanded up front and is never a rollout endpoint itself,
  // so every iteration descends into a child: sum(child visits) equals the
  // root's visit count, and equals visits - 1 for every other expanded node
  // (the off-by-one is the iteration that created it).
  MctsNode root;
  root.state = initial_state(inst);
  root.score = evaluate_of(root.state.values);
  nodes.push_back(std::move(root));
  expand(0);

  for (int iter = 1; iter <= config.iterations; ++iter) {
    if (nodes[0].exhausted) break;

    std::vector<int> path_idx{0};
    int cur = 0;
    while (nodes[cur].expanded && !nodes[cur].terminal) {
      int next = -1;
      for (int c : nodes[cur].children) {
        if (!nodes[c].exhausted && nodes[c].visits == 0) {
          next = c;
          break;
        }
      }
      if (next < 0) {
        double best = 0.0;
        for (int c : nodes[cur].children) {
          if (nodes[c].exhausted) continue;
          double mean = nodes[c].value_sum / nodes[c].visits;
          double uct = mean + config.c_explore *
                                  std::sqrt(std::log(static_cast<double>(nodes[cur].visits)) /
                                            nodes[c].visits);
          if (next < 0 || uct > best) {
            best = uct;
            next = c;
          }
        }
      }
      if (next < 0) {
        // Unreachable: exhaustion propagates eagerly, so a selected node
        // always has a live child.
        throw std::logic_error("selection reached a node with no live children");
      }
      cur = next;
      path_idx.push_back(cur);
    }

    double reward;
    if (nodes[cur].terminal) {
      reward = terminal_reward(cur);
      mark_exhausted_from(cur);
    } else {
      expand(cur);
      reward = rollout(cur);
    }
    for (int ni : path_idx) {
      nodes[ni].visits += 1;
      nodes[ni].value_sum += reward;
    }

    if (inspect) {
      std::vector<MctsNodeView> views;
      views.reserve(nodes.size());
      for (const MctsNode& n : nodes) {
        views.push_back(MctsNodeView{n.parent, n.children, n.visits, n.value_sum, n.score,
                                     n.expanded, n.terminal, n.exhausted});
      }
      inspect(iter, views);
    }
  }

  return result;
}

}  // namespace pathforge
