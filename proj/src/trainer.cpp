#include "pathforge/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "pathforge/checkpoint.hpp"
#include "pathforge/io.hpp"

namespace pathforge {

namespace fs = std::filesystem;
using nlohmann::json;

std::string optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::sgd ? "sgd" : "adam";
}

OptimizerKind optimizer_from_name(const std::string& name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer: " + name);
}

void validate_train_config(const TrainConfig& config) {
  auto bad = [](const std::string& msg) { throw std::invalid_argument("train config: " + msg); };
  if (!std::isfinite(config.peak_lr) || config.peak_lr <= 0.0) bad("peak_lr must be positive");
  if (!std::isfinite(config.min_lr) || config.min_lr <= 0.0 || config.min_lr > config.peak_lr) {
    bad("min_lr must satisfy 0 < min_lr <= peak_lr");
  }
  if (!(config.warmup_fraction > 0.0) || !(config.warmup_fraction < 1.0)) {
    bad("warmup_fraction must lie in (0, 1)");
  }
  if (config.batch_size < 1) bad("batch_size must be >= 1");
  if (config.epochs < 1) bad("epochs must be >= 1");
  if (!(config.checkpoint_every_fraction > 0.0) || config.checkpoint_every_fraction > 1.0) {
    bad("checkpoint_every_fraction must lie in (0, 1]");
  }
  if (!std::isfinite(config.clip_norm) || config.clip_norm <= 0.0) {
    bad("clip_norm must be positive");
  }
  if (!(config.adam_beta1 >= 0.0) || config.adam_beta1 >= 1.0) bad("adam_beta1 must lie in [0, 1)");
  if (!(config.adam_beta2 >= 0.0) || config.adam_beta2 >= 1.0) bad("adam_beta2 must lie in [0, 1)");
  if (!std::isfinite(config.adam_eps) || config.adam_eps <= 0.0) bad("adam_eps must be positive");
  // Evaluability ranges for the objective, closed at the ends so reduction
  // identities (uft alpha = 0, ga alpha = 0, cpo_simpo lambda = 0) stay
  // trainable; validate_objective holds the stricter experiment gate.
  const ObjectiveSpec& o = config.objective;
  if (!(o.alpha >= 0.0) || !(o.alpha <= 1.0)) bad("objective alpha must lie in [0, 1]");
  if (!std::isfinite(o.beta) || o.beta <= 0.0) bad("objective beta must be positive");
  if (!std::isfinite(o.gamma)) bad("objective gamma must be finite");
  if (!std::isfinite(o.lambda) || o.lambda < 0.0) bad("objective lambda must be >= 0");
  if (!(o.eps_clamp > 0.0) || o.eps_clamp > 1e-3) bad("objective eps_clamp must lie in (0, 1e-3]");
}

json train_config_to_json(const TrainConfig& config) {
  return json{{"objective", objective_to_json(config.objective)},
              {"peak_lr", config.peak_lr},
              {"min_lr", config.min_lr},
              {"warmup_fraction", config.warmup_fraction},
              {"batch_size", config.batch_size},
              {"epochs", config.epochs},
              {"seed", config.seed},
              {"checkpoint_every_fraction", config.checkpoint_every_fraction},
              {"clip_gradients", config.clip_gradients},
              {"clip_norm", config.clip_norm},
              {"optimizer", optimizer_name(config.optimizer)},
              {"adam_beta1", config.adam_beta1},
              {"adam_beta2", config.adam_beta2},
              {"adam_eps", config.adam_eps}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  if (!j.is_object()) throw std::invalid_argument("train config must be a JSON object");
  c.objective = objective_from_json(j.at("objective"));
  c.peak_lr = j.value("peak_lr", c.peak_lr);
  c.min_lr = j.value("min_lr", c.min_lr);
  c.warmup_fraction = j.value("warmup_fraction", c.warmup_fraction);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.seed = j.value("seed", c.seed);
  c.checkpoint_every_fraction = j.value("checkpoint_every_fraction", c.checkpoint_every_fraction);
  c.clip_gradients = j.value("clip_gradients", c.clip_gradients);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.optimizer = optimizer_from_name(j.value("optimizer", optimizer_name(c.optimizer)));
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  return c;
}

int total_train_steps(const TrainConfig& config, std::size_t pos_size, std::size_t neg_size) {
  std::size_t primary = objective_uses_pos(config.objective) ? pos_size : neg_size;
  if (primary == 0) throw std::invalid_argument("total_train_steps: primary corpus is empty");
  long long n = static_cast<long long>(config.epochs) * static_cast<long long>(primary);
  long long total = (n + config.batch_size - 1) / config.batch_size;
  if (total > std::numeric_limits<int>::max()) {
    throw std::invalid_argument("total_train_steps: run too long");
  }
  return static_cast<int>(total);
}

int warmup_steps(int total_steps, const TrainConfig& config) {
  long long w = std::llround(config.warmup_fraction * static_cast<double>(total_steps));
  return static_cast<int>(std::max(1LL, w));
}

double lr_at(int step, int total_steps, const TrainConfig& config) {
  if (total_steps < 1) throw out_of_range_step("lr_at: total_steps must be >= 1");
  if (step < 0 || step > total_steps) {
    throw out_of_range_step("lr_at: step " + std::to_string(step) + " outside [0, " +
                            std::to_string(total_steps) + "]");
  }
  // The final step pins min_lr exactly and wins over the warmup endpoint on
  // degenerate one-segment schedules.
  if (step == total_steps) return config.min_lr;
  int w = warmup_steps(total_steps, config);
  if (step < w) return config.peak_lr * (static_cast<double>(step) / static_cast<double>(w));
  if (step == w) return config.peak_lr;
  double u = static_cast<double>(step - w) / static_cast<double>(total_steps - w);
  return config.min_lr +
         0.5 * (config.peak_lr - config.min_lr) * (1.0 + std::cos(u * 3.14159265358979323846));
}

EpochSampler::EpochSampler(std::size_t n, uint64_t seed) : rng_(seed), n_(n) {
  if (n == 0) throw std::invalid_argument("EpochSampler over an empty corpus");
  reshuffle();
}

void EpochSampler::reshuffle() {
  order_.resize(n_);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  rng_.shuffle(order_);
  cursor_ = 0;
}

std::size_t EpochSampler::next() {
  if (cursor_ >= order_.size()) reshuffle();
  return order_[cursor_++];
}

json EpochSampler::state() const {
  Rng copy = rng_;  // engine() is non-const; serialize a copy
  std::ostringstream os;
  os << copy.engine();
  return json{{"rng", os.str()}, {"order", order_}, {"cursor", cursor_}};
}

void EpochSampler::restore(const json& j) {
  std::istringstream is(j.at("rng").get<std::string>());
  is >> rng_.engine();
  if (!is) throw data_error("sampler state: unreadable rng stream");
  order_ = j.at("order").get<std::vector<std::size_t>>();
  if (order_.size() != n_) {
    throw data_error("sampler state: pass size " + std::to_string(order_.size()) +
                     " does not match corpus size " + std::to_string(n_));
  }
  cursor_ = j.at("cursor").get<std::size_t>();
  if (cursor_ > order_.size()) throw data_error("sampler state: cursor out of range");
}

namespace {

bool paired_objective(const ObjectiveSpec& spec) {
  return spec.kind == ObjectiveKind::simpo || spec.kind == ObjectiveKind::cpo_simpo;
}

struct OptState {
  long long t = 0;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
};

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& a, Eigen::Index expected) {
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != expected) {
    throw data_error("optimizer state: moment vector size mismatch");
  }
  Eigen::VectorXd v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v[i] = a[static_cast<std::size_t>(i)].get<double>();
  return v;
}

// Everything the loop needs to continue from an arbitrary completed step.
struct LoopState {
  int step = 0;  // completed steps
  int total = 0;
  std::unique_ptr<EpochSampler> pos_sampler;
  std::unique_ptr<EpochSampler> neg_sampler;
  OptState opt;
};

json loop_state_to_json(const LoopState& st, const TrainConfig& config) {
  json opt{{"kind", optimizer_name(config.optimizer)}};
  if (config.optimizer == OptimizerKind::adam) {
    opt["t"] = st.opt.t;
    opt["m"] = vector_to_json(st.opt.m);
    opt["v"] = vector_to_json(st.opt.v);
  }
  return json{{"step", st.step},
              {"total_steps", st.total},
              {"pos_sampler", st.pos_sampler ? st.pos_sampler->state() : json()},
              {"neg_sampler", st.neg_sampler ? st.neg_sampler->state() : json()},
              {"optimizer", std::move(opt)}};
}

LoopState fresh_loop_state(const TrainConfig& config, std::size_t pos_size, std::size_t neg_size) {
  LoopState st;
  st.total = total_train_steps(config, pos_size, neg_size);
  if (paired_objective(config.objective)) {
    st.pos_sampler = std::make_unique<EpochSampler>(pos_size, mix_seed(config.seed, 1));
  } else {
    if (objective_uses_pos(config.objective)) {
      st.pos_sampler = std::make_unique<EpochSampler>(pos_size, mix_seed(config.seed, 1));
    }
    if (objective_uses_neg(config.objective)) {
      st.neg_sampler = std::make_unique<EpochSampler>(neg_size, mix_seed(config.seed, 2));
    }
  }
  return st;
}

LoopState restore_loop_state(const json& ts, const TrainConfig& config, std::size_t pos_size,
                             std::size_t neg_size, Eigen::Index param_count) {
  LoopState st = fresh_loop_state(config, pos_size, neg_size);
  st.step = ts.at("step").get<int>();
  int stored_total = ts.at("total_steps").get<int>();
  if (stored_total != st.total) {
    throw data_error("resume: checkpoint was written for a run of " +
                     std::to_string(stored_total) + " steps, current config gives " +
                     std::to_string(st.total) + " (datasets or config differ)");
  }
  if (st.pos_sampler) st.pos_sampler->restore(ts.at("pos_sampler"));
  if (st.neg_sampler) st.neg_sampler->restore(ts.at("neg_sampler"));
  const json& opt = ts.at("optimizer");
  if (opt.at("kind").get<std::string>() != optimizer_name(config.optimizer)) {
    throw data_error("resume: optimizer kind differs from the checkpointed run");
  }
  if (config.optimizer == OptimizerKind::adam) {
    st.opt.t = opt.at("t").get<long long>();
    st.opt.m = vector_from_json(opt.at("m"), param_count);
    st.opt.v = vector_from_json(opt.at("v"), param_count);
  }
  return st;
}

void apply_update(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr,
                  const TrainConfig& config, OptState& opt) {
  if (config.optimizer == OptimizerKind::sgd) {
    params.noalias() -= lr * grad;
    return;
  }
  if (opt.m.size() != params.size()) {
    opt.m = Eigen::VectorXd::Zero(params.size());
    opt.v = Eigen::VectorXd::Zero(params.size());
    opt.t = 0;
  }
  opt.t += 1;
  opt.m = config.adam_beta1 * opt.m + (1.0 - config.adam_beta1) * grad;
  opt.v = config.adam_beta2 * opt.v + (1.0 - config.adam_beta2) * grad.cwiseProduct(grad);
  double corr1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(opt.t));
  double corr2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(opt.t));
  params.array() -=
      lr * (opt.m.array() / corr1) / ((opt.v.array() / corr2).sqrt() + config.adam_eps);
}

void validate_datasets(const ObjectiveSpec& spec, const Corpus& pos, const Corpus& neg) {
  if (paired_objective(spec)) {
    if (pos.empty() || pos.size() != neg.size()) {
      throw std::invalid_argument(
          "paired objective needs aligned correct/failure sets of equal nonzero size");
    }
    for (std::size_t i = 0; i < pos.size(); ++i) {
      if (pos[i].first != neg[i].first) {
        throw std::invalid_argument("paired objective: prompts differ at pair " +
                                    std::to_string(i));
      }
    }
    return;
  }
  if (objective_uses_pos(spec) && pos.empty()) {
    throw std::invalid_argument("objective requires a nonempty correct-path set");
  }
  if (objective_uses_neg(spec) && neg.empty()) {
    throw std::invalid_argument("objective requires a nonempty failure-path set");
  }
}

std::string checkpoint_path(const std::string& run_dir, int step) {
  char name[32];
  std::snprintf(name, sizeof(name), "step_%06d.ckpt", step);
  return (fs::path(run_dir) / "checkpoints" / name).string();
}

// (step, path) pairs for every checkpoints/step_*.ckpt, ascending by step.
std::vector<std::pair<int, std::string>> list_checkpoints(const std::string& run_dir) {
  std::vector<std::pair<int, std::string>> out;
  fs::path dir = fs::path(run_dir) / "checkpoints";
  if (!fs::exists(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name.size() <= 10 || name.rfind("step_", 0) != 0 ||
        name.substr(name.size() - 5) != ".ckpt") {
      continue;
    }
    std::string digits = name.substr(5, name.size() - 10);
    if (digits.empty() ||
        digits.find_first_not_of("0123456789") != std::string::npos) {
      continue;
    }
    out.emplace_back(std::stoi(digits), entry.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int checkpoint_interval(int total, const TrainConfig& config) {
  long long k = std::llround(config.checkpoint_every_fraction * static_cast<double>(total));
  return static_cast<int>(std::max(1LL, std::min<long long>(k, total)));
}

void persist_failed_batch(const std::string& run_dir, int step, double value,
                          const Corpus& bpos, const Corpus& bneg, const TrainConfig& config,
                          const std::string& what) {
  auto dump_side = [](const Corpus& c) {
    json a = json::array();
    for (const auto& [x, y] : c) a.push_back(json{{"x", x}, {"y", y}});
    return a;
  };
  json doc{{"step", step},
           {"error", what},
           {"objective", objective_to_json(config.objective)},
           {"loss", std::isfinite(value) ? json(value) : json()},
           {"pos_batch", dump_side(bpos)},
           {"neg_batch", dump_side(bneg)}};
  std::ofstream out(fs::path(run_dir) / "failed_batch.json");
  out << doc.dump(2) << "\n";
}

double last_logged_loss(const std::string& run_dir) {
  fs::path log = fs::path(run_dir) / "log.jsonl";
  if (!fs::exists(log)) return 0.0;
  std::vector<json> rows = read_jsonl(log.string());
  if (rows.empty()) return 0.0;
  return rows.back().value("loss", 0.0);
}

// Core loop shared by train and resume_train: runs steps st.step+1 .. total,
// appending to log.jsonl and checkpointing on the interval grid.
TrainResult run_loop(Policy& policy, const Corpus& pos, const Corpus& neg,
                     const TrainConfig& config, const std::string& run_dir, LoopState& st) {
  fs::create_directories(fs::path(run_dir) / "checkpoints");
  TrainResult result;
  result.total_steps = st.total;
  int interval = checkpoint_interval(st.total, config);
  bool paired = paired_objective(config.objective);
  std::ofstream log(fs::path(run_dir) / "log.jsonl", std::ios::app);
  for (int k = st.step + 1; k <= st.total; ++k) {
    Corpus bpos;
    Corpus bneg;
    if (paired) {
      bpos.reserve(static_cast<std::size_t>(config.batch_size));
      bneg.reserve(static_cast<std::size_t>(config.batch_size));
      for (int i = 0; i < config.batch_size; ++i) {
        std::size_t idx = st.pos_sampler->next();
        bpos.push_back(pos[idx]);
        bneg.push_back(neg[idx]);
      }
    } else {
      if (st.pos_sampler) {
        bpos.reserve(static_cast<std::size_t>(config.batch_size));
        for (int i = 0; i < config.batch_size; ++i) bpos.push_back(pos[st.pos_sampler->next()]);
      }
      if (st.neg_sampler) {
        bneg.reserve(static_cast<std::size_t>(config.batch_size));
        for (int i = 0; i < config.batch_size; ++i) bneg.push_back(neg[st.neg_sampler->next()]);
      }
    }
    double lr = lr_at(k, st.total, config);
    ObjectiveResult res;
    try {
      res = objective_with_gradient(policy, config.objective, bpos, bneg);
    } catch (const objective_error& e) {
      persist_failed_batch(run_dir, k, std::numeric_limits<double>::quiet_NaN(), bpos, bneg,
                           config, e.what());
      throw nonfinite_loss("step " + std::to_string(k) + ": " + e.what() +
                           " (batch persisted to failed_batch.json)");
    }
    if (!std::isfinite(res.value)) {
      persist_failed_batch(run_dir, k, res.value, bpos, bneg, config, "nonfinite loss");
      throw nonfinite_loss("step " + std::to_string(k) +
                           ": nonfinite loss (batch persisted to failed_batch.json)");
    }
    double grad_norm = res.gradient.norm();
    if (config.clip_gradients && grad_norm > config.clip_norm) {
      res.gradient *= config.clip_norm / grad_norm;
    }
    apply_update(policy.params(), res.gradient, lr, config, st.opt);
    if (!policy.params().allFinite()) {
      persist_failed_batch(run_dir, k, res.value, bpos, bneg, config,
                           "parameters nonfinite after update");
      throw nonfinite_loss("step " + std::to_string(k) +
                           ": parameters became nonfinite (batch persisted to failed_batch.json)");
    }
    st.step = k;
    log << json{{"step", k}, {"loss", res.value}, {"lr", lr}, {"grad_norm", grad_norm}}.dump()
        << "\n";
    log.flush();
    result.final_loss = res.value;
    if (k % interval == 0 || k == st.total) {
      std::string file = checkpoint_path(run_dir, k);
      save_checkpoint(file, policy, loop_state_to_json(st, config));
      result.checkpoint_files.push_back(file);
    }
  }
  return result;
}

void write_run_config(const std::string& run_dir, const Policy& policy, const TrainConfig& config,
                      int total, const json& extra_config) {
  json doc = extra_config.is_object() ? extra_config : json::object();
  doc["trainer"] = train_config_to_json(config);
  doc["policy"] = json{{"kind", policy.kind()}, {"hyperparams", policy.hyperparams()}};
  doc["total_steps"] = total;
  std::ofstream out(fs::path(run_dir) / "config.json");
  out << doc.dump(2) << "\n";
}

}  // namespace

TrainResult train(Policy& policy, const Corpus& d_plus, const Corpus& d_minus,
                  const TrainConfig& config, const std::string& run_dir,
                  const json& extra_config) {
  validate_train_config(config);
  validate_datasets(config.objective, d_plus, d_minus);
  fs::create_directories(fs::path(run_dir) / "checkpoints");
  // A fresh run owns the directory: clear artifacts a previous run left so
  // resume never mixes trajectories.
  for (const auto& [step, file] : list_checkpoints(run_dir)) fs::remove(file);
  fs::remove(fs::path(run_dir) / "log.jsonl");
  fs::remove(fs::path(run_dir) / "failed_batch.json");
  LoopState st = fresh_loop_state(config, d_plus.size(), d_minus.size());
  write_run_config(run_dir, policy, config, st.total, extra_config);
  return run_loop(policy, d_plus, d_minus, config, run_dir, st);
}

std::pair<std::unique_ptr<Policy>, TrainResult> resume_train(const Corpus& d_plus,
                                                             const Corpus& d_minus,
                                                             const TrainConfig& config,
                                                             const std::string& run_dir) {
  validate_train_config(config);
  validate_datasets(config.objective, d_plus, d_minus);
  auto checkpoints = list_checkpoints(run_dir);
  if (checkpoints.empty()) {
    throw data_error("resume: no checkpoints under " + run_dir);
  }
  const auto& [last_step, last_file] = checkpoints.back();
  LoadedCheckpoint loaded = load_checkpoint(last_file);
  if (!loaded.trainer_state.is_object() || !loaded.trainer_state.contains("step")) {
    throw data_error("resume: checkpoint lacks trainer state: " + last_file);
  }
  LoopState st = restore_loop_state(loaded.trainer_state, config, d_plus.size(), d_minus.size(),
                                    loaded.policy->params().size());
  if (st.step != last_step) {
    throw data_error("resume: checkpoint step " + std::to_string(st.step) +
                     " disagrees with its filename " + last_file);
  }
  // Drop log lines past the checkpoint so the appended continuation reads as
  // one uninterrupted run.
  fs::path log = fs::path(run_dir) / "log.jsonl";
  if (fs::exists(log)) {
    std::vector<json> rows = read_jsonl(log.string());
    std::vector<json> kept;
    for (const auto& row : rows) {
      if (row.value("step", 0) <= st.step) kept.push_back(row);
    }
    write_jsonl(log.string(), kept);
  }
  TrainResult result = run_loop(*loaded.policy, d_plus, d_minus, config, run_dir, st);
  result.checkpoint_files.clear();
  for (const auto& [step, file] : list_checkpoints(run_dir)) {
    result.checkpoint_files.push_back(file);
  }
  if (st.step == last_step) {
    // Nothing left to run; report the recorded final loss.
    result.final_loss = last_logged_loss(run_dir);
  }
  return {std::move(loaded.policy), std::move(result)};
}

SelectedCheckpoint select_checkpoint(const std::vector<std::string>& checkpoint_files,
                                     const std::function<double(const Policy&)>& score) {
  if (checkpoint_files.empty()) {
    throw std::invalid_argument("select_checkpoint needs at least one checkpoint");
  }
  SelectedCheckpoint best;
  bool have = false;
  for (const std::string& file : checkpoint_files) {
    LoadedCheckpoint loaded = load_checkpoint(file);
    int step = 0;
    if (loaded.trainer_state.is_object()) step = loaded.trainer_state.value("step", 0);
    double s = score(*loaded.policy);
    if (!have || s > best.score || (s == best.score && step > best.step)) {
      best.file = file;
      best.step = step;
      best.score = s;
      best.policy = std::move(loaded.policy);
      have = true;
    }
  }
  return best;
}

}  // namespace pathforge
