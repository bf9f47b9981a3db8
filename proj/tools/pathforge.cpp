// pathforge: one binary driving the full experiment loop on arithmetic
// reasoning puzzles. Subcommands generate solvable instances, harvest
// reasoning paths from classic searches or a trained policy, curate the
// resulting datasets, fine-tune policies, and evaluate checkpoints.
//
// Conventions shared by every subcommand:
//   - flags are validated before any side effect;
//   - outputs that already exist are kept (rerunning is a no-op) unless
//     --force is passed;
//   - all randomness flows from --seed, with PATHFORGE_SEED as the default;
//   - exit codes: 0 success, 2 usage error, 3 data error, 4 runtime error.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "CLI11.hpp"

#include "pathforge/checkpoint.hpp"
#include "pathforge/classic_search.hpp"
#include "pathforge/dataset.hpp"
#include "pathforge/evaluate.hpp"
#include "pathforge/generator.hpp"
#include "pathforge/io.hpp"
#include "pathforge/path_text.hpp"
#include "pathforge/rng.hpp"
#include "pathforge/search_harness.hpp"
#include "pathforge/tabular_policy.hpp"
#include "pathforge/trainer.hpp"
#include "pathforge/transformer_policy.hpp"

namespace fs = std::filesystem;

using namespace pathforge;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

// ---------------------------------------------------------------------------
// Shared helpers

// True when the output already exists and --force was not passed; announces
// the skip so reruns of a finished pipeline stay quiet no-ops.
bool keep_existing(const std::string& path, bool force) {
  if (force || !fs::exists(path)) return false;
  std::cout << path << " exists, skipping (pass --force to regenerate)\n";
  return true;
}

void ensure_parent_dir(const std::string& path) {
  fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw data_error("cannot open " + path);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw data_error(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  ensure_parent_dir(path);
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw std::runtime_error("cannot write " + path);
}

// Runs fn(0..n-1) on a small thread pool. Callers write results into
// index-addressed slots, so the output is identical for any worker count;
// the first exception wins and is rethrown after the pool drains.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::size_t use = std::min<std::size_t>(std::max(workers, 1), n);
  if (use <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto body = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(use);
  for (std::size_t t = 0; t < use; ++t) pool.emplace_back(body);
  for (std::thread& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

uint64_t instance_seed(uint64_t seed, const PuzzleInstance& inst) {
  return mix_seed(seed, fnv1a64(inst.key()));
}

std::vector<PuzzleInstance> load_instances(const std::string& path) {
  std::vector<PuzzleInstance> instances = read_instances_jsonl(path);
  if (instances.empty()) throw data_error(path + ": no instances");
  for (const PuzzleInstance& inst : instances) {
    if (inst.task != instances[0].task) throw data_error(path + ": mixes tasks");
  }
  return instances;
}

// ---------------------------------------------------------------------------
// gen-instances

struct GenInstancesArgs {
  std::string task = "countdown";
  int count = 0;
  std::string out;
  uint64_t seed = 0;
  int input_lo = 1, input_hi = 99;
  int target_lo = 10, target_hi = 100;
  std::vector<int> exclude_targets;
  std::string ranked_csv;
  std::string out_dir;
  bool force = false;
};

int run_gen_instances(const GenInstancesArgs& a) {
  bool generated_mode = a.count > 0 || !a.out.empty();
  bool ranked_mode = !a.ranked_csv.empty() || !a.out_dir.empty();
  if (generated_mode == ranked_mode) {
    throw std::invalid_argument(
        "gen-instances: pass either --count/--out (generate) or "
        "--ranked-csv/--out-dir (split a ranked case list), not both");
  }

  if (ranked_mode) {
    if (a.ranked_csv.empty() || a.out_dir.empty()) {
      throw std::invalid_argument("gen-instances: --ranked-csv and --out-dir go together");
    }
    if (a.task != "game24") {
      throw std::invalid_argument("gen-instances: ranked case lists exist only for game24");
    }
    std::vector<PuzzleInstance> ranked = load_game24_ranked_csv(a.ranked_csv);
    Game24Splits splits = split_game24_ranked(ranked, a.seed);
    fs::create_directories(a.out_dir);
    const std::pair<const char*, const std::vector<PuzzleInstance>*> parts[] = {
        {"train", &splits.train}, {"valid", &splits.valid}, {"test", &splits.test}};
    for (const auto& [name, part] : parts) {
      std::string path = (fs::path(a.out_dir) / (std::string(name) + ".jsonl")).string();
      if (keep_existing(path, a.force)) continue;
      write_instances_jsonl(path, *part);
      std::cout << "wrote " << part->size() << " " << name << " instances to " << path << "\n";
    }
    return 0;
  }

  if (a.count < 1) throw std::invalid_argument("gen-instances: --count must be >= 1");
  if (a.out.empty()) throw std::invalid_argument("gen-instances: --out is required");
  if (keep_existing(a.out, a.force)) return 0;

  GeneratorConfig gc;
  auto task = task_from_name(a.task);
  if (!task) throw std::invalid_argument("gen-instances: unknown task " + a.task);
  gc.task = *task;
  gc.count = a.count;
  gc.input_lo = a.input_lo;
  gc.input_hi = a.input_hi;
  gc.target_lo = a.target_lo;
  gc.target_hi = a.target_hi;
  gc.exclude_targets = a.exclude_targets;
  std::vector<PuzzleInstance> instances = generate_instances(gc, a.seed);
  ensure_parent_dir(a.out);
  write_instances_jsonl(a.out, instances);
  std::cout << "wrote " << instances.size() << " instances to " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataArgs {
  std::string instances;
  std::string out;
  std::string reasoner;
  std::string split = "train";
  std::string checkpoint;
  uint64_t seed = 0;
  int workers = 1;
  bool force = false;
  // Classic search budgets (defaults from the calibrated library config).
  int beam_width = ClassicSearchConfig{}.beam_width;
  long max_expansions = ClassicSearchConfig{}.max_expansions;
  std::string heuristic = "target-distance";
  // Policy sampling (cot) and step proposal (beam / mcts).
  int n_samples = 8;
  double temperature = 0.7;
  double top_p = 0.8;
  int max_tokens = 256;
  std::string propose = "ranked";
  int retry_budget = 24;
  // Guided search shapes.
  int beam_size = 5;
  int depth = 4;
  int samples_per_eval = 3;
  int iterations = 100;
  double c_explore = 1.0;
  std::string evaluator = "oracle";
};

int run_gen_data(const GenDataArgs& a) {
  if (keep_existing(a.out, a.force)) return 0;
  std::vector<PuzzleInstance> instances = load_instances(a.instances);
  Task task = instances[0].task;
  Split split = *split_from_name(a.split);

  bool classic = a.reasoner == "bfs" || a.reasoner == "dfs";
  std::unique_ptr<Policy> policy;
  if (!classic) {
    if (a.checkpoint.empty()) {
      throw std::invalid_argument("gen-data: reasoner '" + a.reasoner + "' needs --checkpoint");
    }
    policy = load_checkpoint(a.checkpoint).policy;
  }

  // Per-reasoner configuration, validated before any instance runs.
  ClassicSearchConfig cc;
  DecodeConfig dc;
  EvalConfig ec;
  if (classic) {
    cc.strategy = a.reasoner == "bfs" ? Strategy::bfs : Strategy::dfs;
    cc.beam_width = a.beam_width;
    cc.max_expansions = a.max_expansions;
    cc.heuristic = a.heuristic == "none" ? Heuristic::none : Heuristic::target_distance;
    cc.integer_only = task == Task::countdown;
  } else if (a.reasoner == "cot") {
    dc.temperature = a.temperature;
    dc.top_p = a.top_p;
    dc.max_tokens = a.max_tokens;
    dc.n_samples = a.n_samples;
    validate_decode_config(dc);
  } else {
    ProposeConfig pc;
    pc.mode = a.propose == "sampled" ? ProposeConfig::Mode::sampled : ProposeConfig::Mode::ranked;
    pc.temperature = a.temperature;
    pc.top_p = a.top_p;
    pc.retry_budget = a.retry_budget;
    ec.method = a.reasoner == "beam" ? EvalMethod::beam : EvalMethod::mcts;
    ec.evaluator.mode = a.evaluator == "constant" ? EvalMode::constant : EvalMode::oracle;
    ec.beam.beam_size = a.beam_size;
    ec.beam.depth = a.depth;
    ec.beam.samples_per_eval = a.samples_per_eval;
    ec.beam.propose = pc;
    ec.mcts.iterations = a.iterations;
    ec.mcts.c_explore = a.c_explore;
    ec.mcts.depth = a.depth;
    ec.mcts.propose = pc;
    validate_eval_config(ec, task);
  }

  std::atomic<long> unparsable{0};
  std::atomic<long> ran_dry{0};
  std::vector<std::vector<ReasonerOutput>> slots(instances.size());

  parallel_for(instances.size(), a.workers, [&](std::size_t i) {
    const PuzzleInstance& inst = instances[i];
    if (classic) {
      SearchOutcome so = classic_solve(inst, cc);
      for (ExploredPath& ep : so.paths) {
        slots[i].push_back({inst, std::move(ep.path), ep.verdict, a.reasoner, split});
      }
      return;
    }
    if (a.reasoner == "cot") {
      DecodeConfig per = dc;
      per.seed = instance_seed(a.seed, inst);
      std::vector<int> x = policy->vocab().encode(inst.prompt());
      for (const std::vector<int>& ids : decode(*policy, x, per)) {
        std::string text = policy->vocab().decode(ids);
        ParseResult parsed = parse_path(text);
        if (auto* path = std::get_if<ReasoningPath>(&parsed)) {
          Verdict verdict = verify(inst, *path);
          slots[i].push_back({inst, std::move(*path), verdict, a.reasoner, split});
        } else {
          ++unparsable;  // not representable in the canonical grammar
        }
      }
      return;
    }
    GuidedResult result;
    try {
      if (ec.method == EvalMethod::beam) {
        BeamConfig bc = ec.beam;
        bc.seed = instance_seed(a.seed, inst);
        result = beam_search(*policy, ec.evaluator, inst, bc);
      } else {
        MctsConfig mc = ec.mcts;
        mc.seed = instance_seed(a.seed, inst);
        result = mcts_search(*policy, ec.evaluator, inst, mc);
      }
    } catch (const no_valid_candidates&) {
      ++ran_dry;  // sampled proposals exhausted the retry budget
      return;
    }
    for (ExploredPath& ep : result.all_paths) {
      slots[i].push_back({inst, std::move(ep.path), ep.verdict, a.reasoner, split});
    }
  });

  std::vector<ReasonerOutput> outputs;
  for (std::vector<ReasonerOutput>& s : slots) {
    outputs.insert(outputs.end(), std::make_move_iterator(s.begin()),
                   std::make_move_iterator(s.end()));
  }
  PathDataset dataset = collect(outputs);
  ensure_parent_dir(a.out);
  save_dataset(a.out, dataset);

  std::cout << "wrote " << dataset.size() << " records to " << a.out;
  if (unparsable > 0) std::cout << " (" << unparsable << " unparsable samples dropped)";
  if (ran_dry > 0) std::cout << " (" << ran_dry << " instances ran out of proposals)";
  std::cout << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// dedup

struct DedupArgs {
  std::vector<std::string> in;
  std::string out;
  bool force = false;
};

int run_dedup(const DedupArgs& a) {
  if (keep_existing(a.out, a.force)) return 0;
  PathDataset merged;
  for (const std::string& path : a.in) {
    PathDataset part = load_dataset(path);
    merged.insert(merged.end(), std::make_move_iterator(part.begin()),
                  std::make_move_iterator(part.end()));
  }
  std::size_t before = merged.size();
  PathDataset unique = dedup(merged);
  ensure_parent_dir(a.out);
  save_dataset(a.out, unique);
  std::cout << "merged " << a.in.size() << " files: " << before << " records -> "
            << unique.size() << " after dedup, wrote " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// pair

struct PairArgs {
  std::string in;
  std::string out;
  int pairs_per_success = 2;
  uint64_t seed = 0;
  bool force = false;
};

int run_pair(const PairArgs& a) {
  if (keep_existing(a.out, a.force)) return 0;
  PathDataset dataset = load_dataset(a.in);
  auto [d_plus, d_minus] = split_by_label(dataset);
  std::vector<PairedRecord> pairs = make_pairs(d_plus, d_minus, a.pairs_per_success, a.seed);
  ensure_parent_dir(a.out);
  save_pairs(a.out, pairs);
  std::cout << "wrote " << pairs.size() << " preference pairs to " << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// stats

struct StatsArgs {
  std::string in;
  std::string instances;
};

int run_stats(const StatsArgs& a) {
  PathDataset dataset = load_dataset(a.in);
  std::map<std::string, int> by_reasoner, by_split;
  std::set<std::string> keys;
  long correct = 0;
  for (const PathRecord& rec : dataset) {
    ++by_reasoner[rec.reasoner];
    ++by_split[split_name(rec.split)];
    keys.insert(rec.instance.key());
    correct += rec.label;
  }
  json out{{"records", dataset.size()},
           {"correct", correct},
           {"failed", static_cast<long>(dataset.size()) - correct},
           {"distinct_instances", keys.size()},
           {"by_reasoner", by_reasoner},
           {"by_split", by_split}};
  if (!a.instances.empty()) {
    std::vector<PuzzleInstance> instances = load_instances(a.instances);
    out["instances"] = instances.size();
    out["quality"] = quality(dataset, instances);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string config;
  std::string run_dir;
  uint64_t seed = 0;
  double lr = 0.0;
  double alpha = 0.0;
  int batch_size = 0;
  int epochs = 0;
  std::string objective;
  bool resume = false;
  bool force = false;
  // Which overrides were actually passed (CLI11 counts, filled in main).
  bool has_seed = false, has_lr = false, has_alpha = false;
  bool has_batch = false, has_epochs = false, has_objective = false;
};

std::unique_ptr<Policy> build_policy(const json& pj) {
  if (pj.contains("init_from")) {
    return load_checkpoint(pj.at("init_from").get<std::string>()).policy;
  }
  std::string kind = pj.value("kind", "tabular");
  if (kind == "tabular") {
    return std::make_unique<TabularPolicy>(pj.value("context_window", 8));
  }
  if (kind == "transformer") {
    TransformerConfig tc;
    tc.layers = pj.value("layers", tc.layers);
    tc.d_model = pj.value("d_model", tc.d_model);
    tc.n_heads = pj.value("n_heads", tc.n_heads);
    tc.d_mlp = pj.value("d_mlp", tc.d_mlp);
    tc.context = pj.value("context", tc.context);
    return std::make_unique<TransformerPolicy>(tc, pj.value("init_seed", uint64_t{0}));
  }
  throw std::invalid_argument("train: unknown policy kind '" + kind + "'");
}

// A run is complete when the last logged step matches the planned total and
// the final checkpoint is still on disk.
bool run_complete(const std::string& run_dir) {
  fs::path cfg = fs::path(run_dir) / "config.json";
  fs::path log = fs::path(run_dir) / "log.jsonl";
  if (!fs::exists(cfg) || !fs::exists(log)) return false;
  json c = read_json_file(cfg.string());
  if (!c.contains("total_steps")) return false;
  int total = c["total_steps"].get<int>();
  std::vector<json> rows = read_jsonl(log.string());
  if (rows.empty() || rows.back().value("step", -1) != total) return false;
  char name[32];
  std::snprintf(name, sizeof name, "step_%06d.ckpt", total);
  return fs::exists(fs::path(run_dir) / "checkpoints" / name);
}

int run_train(const TrainArgs& a) {
  json cfg = read_json_file(a.config);
  if (!cfg.is_object()) throw data_error(a.config + ": config must be a JSON object");

  TrainConfig tc = train_config_from_json(cfg.value("trainer", json::object()));
  // Precedence: command line > config file > PATHFORGE_SEED > defaults.
  if (a.has_seed) {
    tc.seed = a.seed;
  } else if (!cfg.value("trainer", json::object()).contains("seed")) {
    if (const char* env = std::getenv("PATHFORGE_SEED")) tc.seed = std::stoull(env);
  }
  if (a.has_lr) tc.peak_lr = a.lr;
  if (a.has_alpha) tc.objective.alpha = a.alpha;
  if (a.has_batch) tc.batch_size = a.batch_size;
  if (a.has_epochs) tc.epochs = a.epochs;
  if (a.has_objective) tc.objective.kind = objective_kind_from_name(a.objective);
  validate_train_config(tc);

  std::string run_dir = !a.run_dir.empty() ? a.run_dir : cfg.value("run_dir", "");
  if (run_dir.empty()) {
    throw std::invalid_argument("train: pass --run-dir or set run_dir in the config");
  }

  if (!a.force && !a.resume && fs::exists(fs::path(run_dir) / "config.json")) {
    if (run_complete(run_dir)) {
      std::cout << run_dir << " already holds a finished run, skipping "
                << "(pass --force to retrain or --resume to verify)\n";
      return 0;
    }
    throw std::invalid_argument("train: " + run_dir +
                                " holds a partial run; pass --resume to continue it "
                                "or --force to start over");
  }

  json data = cfg.value("data", json::object());
  bool paired =
      tc.objective.kind == ObjectiveKind::simpo || tc.objective.kind == ObjectiveKind::cpo_simpo;

  std::unique_ptr<Policy> policy = build_policy(cfg.value("policy", json::object()));
  const Vocabulary& vocab = policy->vocab();

  Corpus pos, neg;
  if (paired) {
    if (!data.contains("pairs") || !data.contains("task")) {
      throw std::invalid_argument(
          "train: paired objectives need data.pairs and data.task in the config");
    }
    auto task = task_from_name(data.at("task").get<std::string>());
    if (!task) throw std::invalid_argument("train: unknown data.task");
    std::vector<PairedRecord> pairs = load_pairs(data.at("pairs").get<std::string>(), *task);
    if (pairs.empty()) throw data_error("train: no preference pairs in data.pairs");
    for (const PairedRecord& p : pairs) {
      std::vector<int> x = vocab.encode(p.instance.prompt());
      pos.push_back({x, vocab.encode_with_eos(p.chosen_text)});
      neg.push_back({std::move(x), vocab.encode_with_eos(p.rejected_text)});
    }
  } else {
    if (!data.contains("train")) {
      throw std::invalid_argument("train: unpaired objectives need data.train in the config");
    }
    auto want = split_from_name(data.value("split", "train"));
    if (!want) throw std::invalid_argument("train: unknown data.split");
    PathDataset dataset = load_dataset(data.at("train").get<std::string>());
    for (const PathRecord& rec : dataset) {
      if (rec.split != *want) continue;
      Corpus& side = rec.label == 1 ? pos : neg;
      side.push_back(
          {vocab.encode(rec.instance.prompt()), vocab.encode_with_eos(rec.path_text)});
    }
    if (objective_uses_pos(tc.objective) && pos.empty()) {
      throw data_error("train: no correct paths in the chosen split of data.train");
    }
    if (objective_uses_neg(tc.objective) && neg.empty()) {
      throw data_error("train: no failed paths in the chosen split of data.train");
    }
  }

  // The tabular policy only learns contexts it has rows for.
  if (auto* tab = dynamic_cast<TabularPolicy*>(policy.get())) {
    tab->ensure_contexts(pos);
    tab->ensure_contexts(neg);
  }

  TrainResult result;
  if (a.resume) {
    auto [resumed, res] = resume_train(pos, neg, tc, run_dir);
    policy = std::move(resumed);
    result = std::move(res);
  } else {
    json extra{{"config_file", a.config}, {"data", data}};
    result = train(*policy, pos, neg, tc, run_dir, extra);
  }

  std::cout << (a.resume ? "resumed" : "trained") << " " << policy->kind() << " policy ("
            << policy->param_count() << " parameters) for " << result.total_steps
            << " steps, final loss " << result.final_loss << "\n"
            << result.checkpoint_files.size() << " checkpoints under " << run_dir
            << "/checkpoints\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string checkpoint;
  std::string instances;
  std::string method;
  std::string out;
  uint64_t seed = 0;
  double temperature = 0.7;
  double top_p = 0.8;
  int max_tokens = 256;
  int n_samples = 0;
  std::string propose = "ranked";
  int retry_budget = 24;
  int beam_size = 5;
  int depth = 4;
  int samples_per_eval = 3;
  int iterations = 100;
  double c_explore = 1.0;
  std::string evaluator = "oracle";
  bool no_timing = false;
  int workers = 1;
  bool force = false;
};

EvalOutcome run_eval_parallel(const Policy& policy, const std::vector<PuzzleInstance>& instances,
                              const EvalConfig& config, int workers) {
  if (workers <= 1 || instances.size() <= 1) return evaluate(policy, instances, config);
  // Per-instance randomness is already seeded from the instance key, so
  // scoring instances one at a time and merging in order reproduces the
  // single-threaded rows exactly.
  std::string digest = fnv1a_hex(eval_config_to_json(config, instances[0].task).dump());
  std::vector<std::vector<json>> slots(instances.size());
  parallel_for(instances.size(), workers, [&](std::size_t i) {
    slots[i] = evaluate(policy, {instances[i]}, config).rows;
  });
  EvalOutcome out;
  for (std::vector<json>& s : slots) {
    out.rows.insert(out.rows.end(), std::make_move_iterator(s.begin()),
                    std::make_move_iterator(s.end()));
  }
  out.entry = entry_from_rows(out.rows, digest);
  return out;
}

int run_eval(const EvalArgs& a) {
  std::vector<PuzzleInstance> instances = load_instances(a.instances);
  Task task = instances[0].task;

  EvalConfig ec;
  ec.method = eval_method_from_name(a.method);
  ec.temperature = a.temperature;
  ec.top_p = a.top_p;
  ec.max_tokens = a.max_tokens;
  ec.n_samples = a.n_samples;
  ec.seed = a.seed;
  ec.collect_timing = !a.no_timing;
  ec.evaluator.mode = a.evaluator == "constant" ? EvalMode::constant : EvalMode::oracle;
  ProposeConfig pc;
  pc.mode = a.propose == "sampled" ? ProposeConfig::Mode::sampled : ProposeConfig::Mode::ranked;
  pc.temperature = a.temperature;
  pc.top_p = a.top_p;
  pc.retry_budget = a.retry_budget;
  ec.beam.beam_size = a.beam_size;
  ec.beam.depth = a.depth;
  ec.beam.samples_per_eval = a.samples_per_eval;
  ec.beam.propose = pc;
  ec.mcts.iterations = a.iterations;
  ec.mcts.c_explore = a.c_explore;
  ec.mcts.depth = a.depth;
  ec.mcts.propose = pc;
  validate_eval_config(ec, task);

  if (!a.out.empty() && !a.force && fs::exists(fs::path(a.out) / "entry.json")) {
    EvalEntry entry = eval_entry_from_json(read_json_file((fs::path(a.out) / "entry.json").string()));
    std::cout << render_report({entry}) << a.out
              << " exists, skipping (pass --force to re-evaluate)\n";
    return 0;
  }

  std::unique_ptr<Policy> policy = load_checkpoint(a.checkpoint).policy;
  EvalOutcome outcome = run_eval_parallel(*policy, instances, ec, a.workers);

  std::cout << render_report({outcome.entry});
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    write_jsonl((fs::path(a.out) / "rows.jsonl").string(), outcome.rows);
    write_text_file((fs::path(a.out) / "entry.json").string(),
                    eval_entry_to_json(outcome.entry).dump(2) + "\n");
    write_text_file((fs::path(a.out) / "config.json").string(),
                    eval_config_to_json(ec, task).dump(2) + "\n");
    std::cout << "wrote rows.jsonl, entry.json, config.json under " << a.out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// report

struct ReportArgs {
  std::vector<std::string> in;
  std::string out;
  bool force = false;
};

int run_report(const ReportArgs& a) {
  std::vector<EvalEntry> entries;
  for (const std::string& dir : a.in) {
    EvalEntry stored = eval_entry_from_json(read_json_file((fs::path(dir) / "entry.json").string()));
    // The rows are the source of truth; a summary that no longer matches
    // them means the directory was edited or mixed up.
    std::vector<json> rows = read_jsonl((fs::path(dir) / "rows.jsonl").string());
    EvalEntry rebuilt = entry_from_rows(rows, stored.config_digest);
    if (rebuilt.method != stored.method || rebuilt.success_rate != stored.success_rate ||
        rebuilt.n_instances != stored.n_instances || rebuilt.wall_clock != stored.wall_clock) {
      throw data_error(dir + ": entry.json does not match rows.jsonl");
    }
    entries.push_back(std::move(stored));
  }
  std::string table = render_report(entries);
  std::cout << table;
  if (!a.out.empty() && !keep_existing(a.out, a.force)) {
    write_text_file(a.out, table);
    std::cout << "wrote " << a.out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string config;
  std::string out_dir;
  bool force = false;
};

void set_dotted(json& root, const std::string& dotted, const json& value) {
  json* cur = &root;
  std::size_t start = 0;
  for (;;) {
    std::size_t dot = dotted.find('.', start);
    std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos
                                                                    : dot - start);
    if (key.empty()) {
      throw std::invalid_argument("sweep: empty segment in grid key '" + dotted + "'");
    }
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    cur = &(*cur)[key];
    if (!cur->is_object() && !cur->is_null()) {
      throw std::invalid_argument("sweep: grid key '" + dotted + "' descends into a non-object");
    }
    start = dot + 1;
  }
}

int run_sweep(const SweepArgs& a) {
  json base = read_json_file(a.config);
  if (!base.is_object() || !base.contains("grid") || !base["grid"].is_object() ||
      base["grid"].empty()) {
    throw std::invalid_argument(
        "sweep: config needs a nonempty \"grid\" object of {dotted.key: [values...]}");
  }
  json grid = base["grid"];
  base.erase("grid");

  std::vector<std::string> keys;
  std::vector<const json*> values;
  std::size_t combos = 1;
  for (auto& [key, vals] : grid.items()) {
    if (!vals.is_array() || vals.empty()) {
      throw std::invalid_argument("sweep: grid value list for '" + key + "' must be a nonempty array");
    }
    keys.push_back(key);
    values.push_back(&vals);
    combos *= vals.size();
  }

  fs::create_directories(a.out_dir);
  std::vector<std::size_t> odo(keys.size(), 0);
  int written = 0;
  for (std::size_t n = 0; n < combos; ++n) {
    json run = base;
    for (std::size_t k = 0; k < keys.size(); ++k) set_dotted(run, keys[k], (*values[k])[odo[k]]);
    char name[32];
    std::snprintf(name, sizeof name, "run_%03zu", n);
    run["run_dir"] = (fs::path(a.out_dir) / name).string();
    std::string path = (fs::path(a.out_dir) / (std::string(name) + ".json")).string();
    if (!keep_existing(path, a.force)) {
      write_text_file(path, run.dump(2) + "\n");
      ++written;
    }
    // Rightmost key advances fastest.
    for (std::size_t k = keys.size(); k-- > 0;) {
      if (++odo[k] < values[k]->size()) break;
      odo[k] = 0;
    }
  }
  std::cout << "expanded " << combos << " run configs into " << a.out_dir << " (" << written
            << " written)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "data generation, fine-tuning, and evaluation for arithmetic reasoning puzzles"};
  app.require_subcommand(1);

  GenInstancesArgs gi;
  auto* gen = app.add_subcommand("gen-instances",
                                 "generate solvable puzzle instances, or split a ranked "
                                 "game24 case list into train/valid/test");
  gen->add_option("--task", gi.task, "puzzle task")
      ->check(CLI::IsMember({"countdown", "game24"}));
  gen->add_option("--count", gi.count, "instances to generate");
  gen->add_option("--out", gi.out, "output instances JSONL");
  gen->add_option("--seed", gi.seed, "generation / split-shuffle seed")
      ->envname("PATHFORGE_SEED");
  gen->add_option("--input-lo", gi.input_lo, "smallest input value");
  gen->add_option("--input-hi", gi.input_hi, "largest input value");
  gen->add_option("--target-lo", gi.target_lo, "smallest target (countdown)");
  gen->add_option("--target-hi", gi.target_hi, "largest target (countdown)");
  gen->add_option("--exclude-target", gi.exclude_targets, "target values to skip (repeatable)");
  gen->add_option("--ranked-csv", gi.ranked_csv, "ranked game24 case list (CSV)");
  gen->add_option("--out-dir", gi.out_dir, "directory for train/valid/test JSONL splits");
  gen->add_flag("--force", gi.force, "overwrite existing outputs");

  GenDataArgs gd;
  auto* gdata = app.add_subcommand(
      "gen-data", "run one reasoner over an instance file and record every explored path");
  gdata->add_option("--instances", gd.instances, "instances JSONL")->required();
  gdata->add_option("--out", gd.out, "output dataset JSONL")->required();
  gdata->add_option("--reasoner", gd.reasoner, "path source")
      ->required()
      ->check(CLI::IsMember({"bfs", "dfs", "cot", "beam", "mcts"}));
  gdata->add_option("--split", gd.split, "split tag stamped on every record")
      ->check(CLI::IsMember({"train", "valid", "test"}));
  gdata->add_option("--checkpoint", gd.checkpoint, "policy checkpoint (cot / beam / mcts)");
  gdata->add_option("--seed", gd.seed, "sampling seed (mixed per instance)")
      ->envname("PATHFORGE_SEED");
  gdata->add_option("--workers", gd.workers, "parallel instance workers")
      ->check(CLI::Range(1, 256));
  gdata->add_option("--beam-width", gd.beam_width, "BFS frontier kept per level");
  gdata->add_option("--max-expansions", gd.max_expansions, "DFS node budget");
  gdata->add_option("--heuristic", gd.heuristic, "classic-search state ranking")
      ->check(CLI::IsMember({"none", "target-distance"}));
  gdata->add_option("--n-samples", gd.n_samples, "cot samples per instance");
  gdata->add_option("--temperature", gd.temperature, "sampling temperature (cot / proposals)");
  gdata->add_option("--top-p", gd.top_p, "nucleus mass (cot / proposals)");
  gdata->add_option("--max-tokens", gd.max_tokens, "cot decode length cap");
  gdata->add_option("--propose", gd.propose, "step proposal mode (beam / mcts)")
      ->check(CLI::IsMember({"ranked", "sampled"}));
  gdata->add_option("--retry-budget", gd.retry_budget, "sampled-proposal attempt budget");
  gdata->add_option("--beam-size", gd.beam_size, "beam width (beam)");
  gdata->add_option("--depth", gd.depth, "search depth (beam / mcts)");
  gdata->add_option("--samples-per-eval", gd.samples_per_eval, "step evaluations per state (beam)");
  gdata->add_option("--iterations", gd.iterations, "search iterations (mcts)");
  gdata->add_option("--c-explore", gd.c_explore, "UCT exploration constant (mcts)");
  gdata->add_option("--evaluator", gd.evaluator, "step scorer (beam / mcts)")
      ->check(CLI::IsMember({"oracle", "constant"}));
  gdata->add_flag("--force", gd.force, "overwrite an existing output");

  DedupArgs dd;
  auto* ddup = app.add_subcommand("dedup",
                                  "merge dataset files and drop exact duplicate paths "
                                  "(first occurrence wins)");
  ddup->add_option("--in", dd.in, "input dataset JSONL (repeatable)")->required();
  ddup->add_option("--out", dd.out, "merged output JSONL")->required();
  ddup->add_flag("--force", dd.force, "overwrite an existing output");

  PairArgs pr;
  auto* pair = app.add_subcommand(
      "pair", "build preference pairs from instances that have both correct and failed paths");
  pair->add_option("--in", pr.in, "input dataset JSONL")->required();
  pair->add_option("--out", pr.out, "output pairs JSONL")->required();
  pair->add_option("--pairs-per-success", pr.pairs_per_success,
                   "rejected partners sampled per correct path")
      ->check(CLI::NonNegativeNumber);
  pair->add_option("--seed", pr.seed, "partner sampling seed")->envname("PATHFORGE_SEED");
  pair->add_flag("--force", pr.force, "overwrite an existing output");

  StatsArgs st;
  auto* stats = app.add_subcommand("stats", "print dataset statistics as JSON");
  stats->add_option("--in", st.in, "dataset JSONL")->required();
  stats->add_option("--instances", st.instances,
                    "instance file for the solved-instance quality metric");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "fine-tune a policy per a JSON run config");
  train_cmd->add_option("--config", tr.config, "run config JSON")->required();
  train_cmd->add_option("--run-dir", tr.run_dir, "run directory (overrides config)");
  auto* opt_seed = train_cmd->add_option("--seed", tr.seed, "training seed (overrides config)");
  auto* opt_lr = train_cmd->add_option("--lr", tr.lr, "peak learning rate (overrides config)");
  auto* opt_alpha =
      train_cmd->add_option("--alpha", tr.alpha, "failure-term weight (overrides config)");
  auto* opt_batch =
      train_cmd->add_option("--batch-size", tr.batch_size, "batch size (overrides config)");
  auto* opt_epochs = train_cmd->add_option("--epochs", tr.epochs, "epochs (overrides config)");
  auto* opt_objective =
      train_cmd->add_option("--objective", tr.objective, "objective kind (overrides config)")
          ->check(CLI::IsMember({"nll", "ul", "uft", "ga", "simpo", "cpo_simpo"}));
  train_cmd->add_flag("--resume", tr.resume, "continue a partial run from its last checkpoint");
  train_cmd->add_flag("--force", tr.force, "restart even if the run directory exists");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "score a checkpoint on an instance file");
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "policy checkpoint")->required();
  eval_cmd->add_option("--instances", ev.instances, "instances JSONL")->required();
  eval_cmd->add_option("--method", ev.method, "inference method")
      ->required()
      ->check(CLI::IsMember({"greedy", "pass_at_1", "beam", "mcts"}));
  eval_cmd->add_option("--out", ev.out, "directory for rows.jsonl / entry.json / config.json");
  eval_cmd->add_option("--seed", ev.seed, "evaluation seed (mixed per instance)")
      ->envname("PATHFORGE_SEED");
  eval_cmd->add_option("--temperature", ev.temperature, "sampling temperature");
  eval_cmd->add_option("--top-p", ev.top_p, "nucleus mass");
  eval_cmd->add_option("--max-tokens", ev.max_tokens, "decode length cap");
  eval_cmd->add_option("--n-samples", ev.n_samples,
                       "pass_at_1 draws per instance (0 = task default)");
  eval_cmd->add_option("--propose", ev.propose, "step proposal mode (beam / mcts)")
      ->check(CLI::IsMember({"ranked", "sampled"}));
  eval_cmd->add_option("--retry-budget", ev.retry_budget, "sampled-proposal attempt budget");
  eval_cmd->add_option("--beam-size", ev.beam_size, "beam width (beam)");
  eval_cmd->add_option("--depth", ev.depth, "search depth (beam / mcts)");
  eval_cmd->add_option("--samples-per-eval", ev.samples_per_eval,
                       "step evaluations per state (beam)");
  eval_cmd->add_option("--iterations", ev.iterations, "search iterations (mcts)");
  eval_cmd->add_option("--c-explore", ev.c_explore, "UCT exploration constant (mcts)");
  eval_cmd->add_option("--evaluator", ev.evaluator, "step scorer (beam / mcts)")
      ->check(CLI::IsMember({"oracle", "constant"}));
  eval_cmd->add_flag("--no-timing", ev.no_timing,
                     "record 0.0 seconds everywhere for byte-stable outputs");
  eval_cmd->add_option("--workers", ev.workers, "parallel instance workers")
      ->check(CLI::Range(1, 256));
  eval_cmd->add_flag("--force", ev.force, "re-evaluate even if the output directory exists");

  ReportArgs rp;
  auto* report_cmd = app.add_subcommand(
      "report", "combine eval output directories into one table, checking entries against rows");
  report_cmd->add_option("--in", rp.in, "eval output directory (repeatable)")->required();
  report_cmd->add_option("--out", rp.out, "also write the table to this file");
  report_cmd->add_flag("--force", rp.force, "overwrite an existing output file");

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "expand a config with a {dotted.key: [values...]} grid into per-run configs");
  sweep_cmd->add_option("--config", sw.config, "base run config with a \"grid\" object")
      ->required();
  sweep_cmd->add_option("--out-dir", sw.out_dir, "directory for the expanded configs")
      ->required();
  sweep_cmd->add_flag("--force", sw.force, "overwrite existing run configs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);  // prints help or the parse diagnostic
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    tr.has_seed = opt_seed->count() > 0;
    tr.has_lr = opt_lr->count() > 0;
    tr.has_alpha = opt_alpha->count() > 0;
    tr.has_batch = opt_batch->count() > 0;
    tr.has_epochs = opt_epochs->count() > 0;
    tr.has_objective = opt_objective->count() > 0;

    if (gen->parsed()) return run_gen_instances(gi);
    if (gdata->parsed()) return run_gen_data(gd);
    if (ddup->parsed()) return run_dedup(dd);
    if (pair->parsed()) return run_pair(pr);
    if (stats->parsed()) return run_stats(st);
    if (train_cmd->parsed()) return run_train(tr);
    if (eval_cmd->parsed()) return run_eval(ev);
    if (report_cmd->parsed()) return run_report(rp);
    if (sweep_cmd->parsed()) return run_sweep(sw);
    std::cerr << "no subcommand selected\n";
    return kExitUsage;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const unknown_token& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const empty_instance_set& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const config_unsatisfiable& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
