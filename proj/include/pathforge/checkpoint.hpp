#pragma once

#include <memory>
#include <string>

#include "pathforge/policy.hpp"

namespace pathforge {

struct LoadedCheckpoint {
  std::unique_ptr<Policy> policy;
  nlohmann::json trainer_state;
};

// Self-describing policy container: a magic line, a JSON header (kind,
// hyperparameters, vocabulary, layout, trainer state), a NUL separator, then
// the flat parameter vector as raw little-endian doubles. Parameters round
// trip bit for bit, including values produced mid-training.
void save_checkpoint(const std::string& path, const Policy& policy,
                     const nlohmann::json& trainer_state = nlohmann::json::object());

LoadedCheckpoint load_checkpoint(const std::string& path);

// Fresh policy of the given kind ("tabular" or "transformer") configured from
// its serialized hyperparameters, parameters unset.
std::unique_ptr<Policy> make_policy(const std::string& kind, const nlohmann::json& hyperparams);

}  // namespace pathforge
