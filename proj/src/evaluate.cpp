#include "pathforge/evaluate.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "pathforge/io.hpp"
#include "pathforge/path_text.hpp"

namespace pathforge {

using nlohmann::json;

std::string eval_method_name(EvalMethod m) {
  switch (m) {
    case EvalMethod::greedy: return "greedy";
    case EvalMethod::pass_at_1: return "pass_at_1";
    case EvalMethod::beam: return "beam";
    case EvalMethod::mcts: return "mcts";
  }
  return "greedy";
}

EvalMethod eval_method_from_name(const std::string& name) {
  if (name == "greedy") return EvalMethod::greedy;
  if (name == "pass_at_1") return EvalMethod::pass_at_1;
  if (name == "beam") return EvalMethod::beam;
  if (name == "mcts") return EvalMethod::mcts;
  throw invalid_method_config("unknown evaluation method: " + name);
}

int default_pass_samples(Task task) { return task == Task::countdown ? 8 : 20; }

namespace {

void check_propose(const ProposeConfig& p, const std::string& where) {
  if (!std::isfinite(p.temperature) || p.temperature < 0.0) {
    throw invalid_method_config(where + ": propose temperature must be finite and >= 0");
  }
  if (!(p.top_p > 0.0) || p.top_p > 1.0) {
    throw invalid_method_config(where + ": propose top_p must lie in (0, 1]");
  }
  if (p.retry_budget < 1) {
    throw invalid_method_config(where + ": propose retry budget must be >= 1");
  }
}

std::string evaluator_mode_name(const Evaluator& e) {
  return e.mode == EvalMode::oracle ? "oracle" : "constant";
}

json propose_to_json(const ProposeConfig& p) {
  return json{{"mode", p.mode == ProposeConfig::Mode::ranked ? "ranked" : "sampled"},
              {"temperature", p.temperature},
              {"top_p", p.top_p},
              {"retry_budget", p.retry_budget},
              {"seed", p.seed}};
}

double elapsed_seconds(std::chrono::steady_clock::time_point from) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - from).count();
}

}  // namespace

void validate_eval_config(const EvalConfig& config, Task task) {
  switch (config.method) {
    case EvalMethod::greedy:
      if (config.max_tokens < 1) {
        throw invalid_method_config("greedy: max_tokens must be >= 1");
      }
      break;
    case EvalMethod::pass_at_1: {
      if (!std::isfinite(config.temperature) || config.temperature < 0.0) {
        throw invalid_method_config("pass_at_1: temperature must be finite and >= 0");
      }
      if (!(config.top_p > 0.0) || config.top_p > 1.0) {
        throw invalid_method_config("pass_at_1: top_p must lie in (0, 1]");
      }
      if (config.max_tokens < 1) {
        throw invalid_method_config("pass_at_1: max_tokens must be >= 1");
      }
      if (config.n_samples < 0) {
        throw invalid_method_config("pass_at_1: n_samples must be >= 0 (0 = task default)");
      }
      (void)task;
      break;
    }
    case EvalMethod::beam:
      if (config.beam.beam_size < 1 || config.beam.beam_size > 64) {
        throw invalid_method_config("beam: beam_size must lie in [1, 64]");
      }
      if (config.beam.depth < 1) throw invalid_method_config("beam: depth must be >= 1");
      if (config.beam.samples_per_eval < 1) {
        throw invalid_method_config("beam: samples_per_eval must be >= 1");
      }
      check_propose(config.beam.propose, "beam");
      break;
    case EvalMethod::mcts:
      if (config.mcts.iterations < 1) {
        throw invalid_method_config("mcts: iterations must be >= 1");
      }
      if (!std::isfinite(config.mcts.c_explore) || config.mcts.c_explore <= 0.0) {
        throw invalid_method_config("mcts: c_explore must be positive");
      }
      if (config.mcts.depth < 1) throw invalid_method_config("mcts: depth must be >= 1");
      check_propose(config.mcts.propose, "mcts");
      break;
  }
}

json eval_config_to_json(const EvalConfig& config, Task task) {
  json j{{"method", eval_method_name(config.method)}, {"seed", config.seed}};
  switch (config.method) {
    case EvalMethod::greedy:
      j["max_tokens"] = config.max_tokens;
      break;
    case EvalMethod::pass_at_1:
      j["temperature"] = config.temperature;
      j["top_p"] = config.top_p;
      j["max_tokens"] = config.max_tokens;
      j["n_samples"] = config.n_samples > 0 ? config.n_samples : default_pass_samples(task);
      break;
    case EvalMethod::beam:
      j["evaluator"] = evaluator_mode_name(config.evaluator);
      j["beam"] = json{{"beam_size", config.beam.beam_size},
                       {"depth", config.beam.depth},
                       {"samples_per_eval", config.beam.samples_per_eval},
                       {"propose", propose_to_json(config.beam.propose)}};
      break;
    case EvalMethod::mcts:
      j["evaluator"] = evaluator_mode_name(config.evaluator);
      j["mcts"] = json{{"iterations", config.mcts.iterations},
                       {"c_explore", config.mcts.c_explore},
                       {"depth", config.mcts.depth},
                       {"propose", propose_to_json(config.mcts.propose)}};
      break;
  }
  return j;
}

json eval_entry_to_json(const EvalEntry& e) {
  return json{{"method", e.method},
              {"success_rate", e.success_rate},
              {"n_instances", e.n_instances},
              {"wall_clock", e.wall_clock},
              {"config_digest", e.config_digest}};
}

EvalEntry eval_entry_from_json(const json& j) {
  EvalEntry e;
  e.method = j.at("method").get<std::string>();
  e.success_rate = j.at("success_rate").get<double>();
  e.n_instances = j.at("n_instances").get<int>();
  e.wall_clock = j.at("wall_clock").get<double>();
  e.config_digest = j.at("config_digest").get<std::string>();
  return e;
}

namespace {

json make_row(const std::string& method, const PuzzleInstance& inst, const std::string& path,
              bool success, double seconds) {
  return json{{"method", method},
              {"instance", instance_to_json(inst)},
              {"path", path},
              {"success", success},
              {"seconds", seconds}};
}

// Decoded samples for one instance (greedy is the one-sample, zero
// temperature case).
void decode_rows(const Policy& policy, const PuzzleInstance& inst, const EvalConfig& config,
                 int n, double temperature, double top_p, std::vector<json>& rows) {
  DecodeConfig dc;
  dc.temperature = temperature;
  dc.top_p = top_p;
  dc.max_tokens = config.max_tokens;
  dc.n_samples = n;
  dc.seed = mix_seed(config.seed, fnv1a64(inst.key()));
  std::vector<int> x = policy.vocab().encode(inst.prompt());
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::vector<int>> samples = decode(policy, x, dc);
  double seconds = config.collect_timing ? elapsed_seconds(t0) : 0.0;
  double share = seconds / static_cast<double>(samples.size());
  std::string method = eval_method_name(config.method);
  for (const auto& tokens : samples) {
    std::string text = policy.vocab().decode(tokens);
    Verdict v = verify_text(inst, text);
    rows.push_back(make_row(method, inst, text, v.success, share));
  }
}

void search_rows(const Policy& policy, const PuzzleInstance& inst, const EvalConfig& config,
                 std::vector<json>& rows) {
  std::string method = eval_method_name(config.method);
  uint64_t inst_seed = mix_seed(config.seed, fnv1a64(inst.key()));
  GuidedResult result;
  auto t0 = std::chrono::steady_clock::now();
  bool ran_dry = false;
  if (config.method == EvalMethod::beam) {
    BeamConfig bc = config.beam;
    bc.seed = inst_seed;
    result = beam_search(policy, config.evaluator, inst, bc);
  } else {
    MctsConfig mc = config.mcts;
    mc.seed = inst_seed;
    try {
      result = mcts_search(policy, config.evaluator, inst, mc);
    } catch (const no_valid_candidates&) {
      ran_dry = true;  // sampled proposals exhausted: the instance fails
    }
  }
  double seconds = config.collect_timing ? elapsed_seconds(t0) : 0.0;
  if (ran_dry || result.all_paths.empty()) {
    // Keep one failure row so summaries rebuild from rows alone.
    json row = make_row(method, inst, "", false, seconds);
    row["selected"] = true;
    rows.push_back(row);
    return;
  }
  std::string selected_render =
      result.selected.has_value() ? render_path(*result.selected) : std::string();
  bool flagged = false;
  for (const ExploredPath& ep : result.all_paths) {
    std::string text = render_path(ep.path);
    json row = make_row(method, inst, text, ep.verdict.success, seconds);
    bool is_selected =
        !flagged && result.selected.has_value() && text == selected_render;
    row["selected"] = is_selected;
    flagged = flagged || is_selected;
    rows.push_back(row);
  }
  if (result.selected.has_value() && !flagged) {
    // The chosen path was not among the recorded ones (cannot normally
    // happen); keep the summary consistent anyway.
    json row = make_row(method, inst, selected_render, result.solved, seconds);
    row["selected"] = true;
    rows.push_back(row);
  }
}

}  // namespace

EvalOutcome evaluate(const Policy& policy, const std::vector<PuzzleInstance>& instances,
                     const EvalConfig& config) {
  if (instances.empty()) throw std::invalid_argument("evaluate: no instances");
  Task task = instances.front().task;
  for (const PuzzleInstance& inst : instances) {
    if (inst.task != task) throw std::invalid_argument("evaluate: mixed tasks in one run");
  }
  validate_eval_config(config, task);
  std::string digest = fnv1a_hex(eval_config_to_json(config, task).dump());

  EvalOutcome out;
  for (const PuzzleInstance& inst : instances) {
    switch (config.method) {
      case EvalMethod::greedy:
        decode_rows(policy, inst, config, 1, 0.0, 1.0, out.rows);
        break;
      case EvalMethod::pass_at_1: {
        int n = config.n_samples > 0 ? config.n_samples : default_pass_samples(task);
        decode_rows(policy, inst, config, n, config.temperature, config.top_p, out.rows);
        break;
      }
      case EvalMethod::beam:
      case EvalMethod::mcts:
        search_rows(policy, inst, config, out.rows);
        break;
    }
  }
  out.entry = entry_from_rows(out.rows, digest);
  return out;
}

EvalEntry entry_from_rows(const std::vector<json>& rows, const std::string& digest) {
  if (rows.empty()) throw std::invalid_argument("entry_from_rows: no rows");
  EvalEntry e;
  e.method = rows.front().at("method").get<std::string>();
  e.config_digest = digest;
  bool guided = e.method == "beam" || e.method == "mcts";

  // Group rows per instance in first-seen order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<const json*>> groups;
  for (const json& row : rows) {
    std::string key = instance_from_json(row.at("instance")).key();
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.push_back(&row);
  }
  e.n_instances = static_cast<int>(order.size());

  if (guided) {
    int successes = 0;
    for (const std::string& key : order) {
      const auto& group = groups[key];
      e.wall_clock += group.front()->at("seconds").get<double>();
      for (const json* row : group) {
        if (row->value("selected", false) && row->at("success").get<bool>()) {
          ++successes;
          break;
        }
      }
    }
    e.success_rate = static_cast<double>(successes) / static_cast<double>(e.n_instances);
    return e;
  }

  int successes = 0;
  for (const json& row : rows) {
    if (row.at("success").get<bool>()) ++successes;
    e.wall_clock += row.at("seconds").get<double>();
  }
  e.success_rate = static_cast<double>(successes) / static_cast<double>(rows.size());
  return e;
}

std::string render_report(const std::vector<EvalEntry>& entries) {
  if (entries.empty()) throw std::invalid_argument("render_report: no entries");
  std::vector<EvalEntry> sorted = entries;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const EvalEntry& a, const EvalEntry& b) { return a.method < b.method; });

  std::vector<std::array<std::string, 5>> cells;
  cells.push_back({"method", "success", "n", "seconds", "config"});
  char buf[64];
  for (const EvalEntry& e : sorted) {
    std::array<std::string, 5> row;
    row[0] = e.method;
    std::snprintf(buf, sizeof(buf), "%.1f%%", e.success_rate * 100.0);
    row[1] = buf;
    row[2] = std::to_string(e.n_instances);
    std::snprintf(buf, sizeof(buf), "%.2f", e.wall_clock);
    row[3] = buf;
    row[4] = e.config_digest;
    cells.push_back(row);
  }

  std::array<std::size_t, 5> width{};
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (c > 0) os << "  ";
      bool right = c == 1 || c == 2 || c == 3;
      const std::string& cell = cells[r][c];
      std::size_t pad = width[c] - cell.size();
      if (right) os << std::string(pad, ' ') << cell;
      else if (c + 1 == cells[r].size()) os << cell;  // no trailing spaces
      else os << cell << std::string(pad, ' ');
    }
    os << "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c > 0 ? 2 : 0);
      os << std::string(total, '-') << "\n";
    }
  }
  return os.str();
}

SelectedCheckpoint select_checkpoint_by_eval(const std::vector<std::string>& checkpoint_files,
                                             const std::vector<PuzzleInstance>& valid_instances,
                                             const EvalConfig& config) {
  if (valid_instances.empty()) {
    throw std::invalid_argument("select_checkpoint_by_eval: no validation instances");
  }
  validate_eval_config(config, valid_instances.front().task);
  return select_checkpoint(checkpoint_files, [&](const Policy& p) {
    return evaluate(p, valid_instances, config).entry.success_rate;
  });
}

}  // namespace pathforge
