#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nlohmann/json.hpp"
#include "pathforge/objectives.hpp"
#include "pathforge/policy.hpp"
#include "pathforge/rng.hpp"

namespace pathforge {

class out_of_range_step : public std::out_of_range {
 public:
  explicit out_of_range_step(const std::string& what) : std::out_of_range(what) {}
};

// Thrown when a batch produces a nonfinite loss, gradient, or parameter
// update; the offending batch is persisted to failed_batch.json first.
class nonfinite_loss : public std::runtime_error {
 public:
  explicit nonfinite_loss(const std::string& what) : std::runtime_error(what) {}
};

enum class OptimizerKind { sgd, adam };

std::string optimizer_name(OptimizerKind kind);
OptimizerKind optimizer_from_name(const std::string& name);

struct TrainConfig {
  ObjectiveSpec objective;
  double peak_lr = 0.1;
  double min_lr = 7e-8;
  double warmup_fraction = 0.10;
  int batch_size = 128;
  int epochs = 1;
  uint64_t seed = 0;
  double checkpoint_every_fraction = 0.05;
  bool clip_gradients = true;
  double clip_norm = 1.0;
  OptimizerKind optimizer = OptimizerKind::sgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

// Numeric sanity for a training run. The objective's hyperparameters are
// checked for evaluability (alpha in [0,1], beta > 0, ...), deliberately
// looser than validate_objective's experiment ranges so the documented
// degenerate spellings (uft with alpha = 0 reducing to nll, cpo_simpo with
// lambda = 0 reducing to simpo) remain trainable for equivalence checks.
void validate_train_config(const TrainConfig& config);

nlohmann::json train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

// ceil(epochs * primary corpus size / batch_size). The primary corpus is the
// correct-path set for every objective except pure unlikelihood, which only
// consumes failures.
int total_train_steps(const TrainConfig& config, std::size_t pos_size, std::size_t neg_size);

// Steps in the linear warmup prefix: round(warmup_fraction * total_steps),
// at least 1.
int warmup_steps(int total_steps, const TrainConfig& config);

// Piecewise schedule: linear 0 -> peak_lr over the warmup prefix, then
// cosine peak_lr -> min_lr over the remainder. Endpoints are bitwise exact:
// lr_at(0) == 0.0, lr_at(warmup_steps) == peak_lr, lr_at(total) == min_lr
// (the final step wins if the two coincide on a degenerate schedule).
double lr_at(int step, int total_steps, const TrainConfig& config);

// Epoch-cycling index stream: one full shuffled pass over [0, n), reshuffled
// on exhaustion. State round-trips through JSON so a resumed run continues
// the exact draw sequence.
class EpochSampler {
 public:
  EpochSampler(std::size_t n, uint64_t seed);

  std::size_t next();

  nlohmann::json state() const;
  void restore(const nlohmann::json& j);

 private:
  void reshuffle();

  Rng rng_;
  std::size_t n_ = 0;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
};

struct TrainResult {
  std::vector<std::string> checkpoint_files;  // ascending step order
  int total_steps = 0;
  double final_loss = 0.0;
};

// Runs the optimization loop in run_dir: writes config.json (trainer config,
// policy description, and any extra_config for provenance), appends one
// {step, loss, lr, grad_norm} line per step to log.jsonl, and saves
// checkpoints/step_NNNNNN.ckpt every checkpoint interval and at the final
// step, trainer state embedded. Deterministic given config.seed. Step k
// (1-based) updates with lr_at(k, total, config); gradients are reduced in
// batch order, so runs are bitwise reproducible.
TrainResult train(Policy& policy, const Corpus& d_plus, const Corpus& d_minus,
                  const TrainConfig& config, const std::string& run_dir,
                  const nlohmann::json& extra_config = nlohmann::json::object());

// Continues an interrupted run from the newest checkpoint in run_dir,
// reproducing the uninterrupted trajectory bitwise (samplers, optimizer
// moments, and parameters all round-trip). log.jsonl is truncated back to
// the checkpoint before appending.
std::pair<std::unique_ptr<Policy>, TrainResult> resume_train(const Corpus& d_plus,
                                                             const Corpus& d_minus,
                                                             const TrainConfig& config,
                                                             const std::string& run_dir);

struct SelectedCheckpoint {
  std::string file;
  int step = 0;
  double score = 0.0;
  std::unique_ptr<Policy> policy;
};

// Loads every checkpoint, scores it, and returns the best scorer; ties break
// toward the later step. score must be a pure function of the policy.
SelectedCheckpoint select_checkpoint(const std::vector<std::string>& checkpoint_files,
                                     const std::function<double(const Policy&)>& score);

}  // namespace pathforge
