#include "pathforge/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "pathforge/io.hpp"
#include "pathforge/tabular_policy.hpp"
#include "pathforge/transformer_policy.hpp"

namespace pathforge {

namespace {
constexpr char kMagic[] = "PFCKPT1\n";
constexpr size_t kMagicLen = sizeof(kMagic) - 1;
}  // namespace

std::unique_ptr<Policy> make_policy(const std::string& kind, const nlohmann::json& hyperparams) {
  if (kind == "tabular") return TabularPolicy::from_hyperparams(hyperparams);
  if (kind == "transformer") return TransformerPolicy::from_hyperparams(hyperparams);
  throw data_error("unknown policy kind: " + kind);
}

void save_checkpoint(const std::string& path, const Policy& policy,
                     const nlohmann::json& trainer_state) {
  nlohmann::json layout = nlohmann::json::array();
  for (const ParamBlock& b : policy.layout()) {
    layout.push_back({{"name", b.name}, {"offset", b.offset}, {"size", b.size}});
  }
  nlohmann::json header{{"kind", policy.kind()},
                        {"hyperparams", policy.hyperparams()},
                        {"vocab", policy.vocab().to_json()},
                        {"layout", layout},
                        {"param_count", policy.param_count()},
                        {"trainer_state", trainer_state}};
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot open checkpoint for writing: " + path);
  out.write(kMagic, static_cast<std::streamsize>(kMagicLen));
  std::string header_text = header.dump();
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  out.put('\0');
  const Eigen::VectorXd& p = policy.params();
  out.write(reinterpret_cast<const char*>(p.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(p.size())));
  if (!out) throw data_error("failed writing checkpoint: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open checkpoint: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < kMagicLen || bytes.compare(0, kMagicLen, kMagic) != 0) {
    throw data_error("not a checkpoint file: " + path);
  }
  size_t nul = bytes.find('\0', kMagicLen);
  if (nul == std::string::npos) throw data_error("checkpoint header is unterminated: " + path);
  nlohmann::json header =
      nlohmann::json::parse(bytes.begin() + static_cast<long>(kMagicLen),
                            bytes.begin() + static_cast<long>(nul), nullptr, false);
  if (header.is_discarded()) throw data_error("checkpoint header is not valid JSON: " + path);

  LoadedCheckpoint loaded;
  loaded.policy = make_policy(header.at("kind").get<std::string>(), header.at("hyperparams"));
  // The vocabulary is part of the format; from_json rejects a mismatch.
  Vocabulary::from_json(header.at("vocab"));
  loaded.trainer_state = header.value("trainer_state", nlohmann::json::object());

  size_t n = header.at("param_count").get<size_t>();
  if (loaded.policy->params().size() != static_cast<Eigen::Index>(n)) {
    throw data_error("checkpoint parameter count does not match its hyperparameters");
  }
  size_t payload = bytes.size() - nul - 1;
  if (payload != n * sizeof(double)) {
    throw data_error("checkpoint payload is " + std::to_string(payload) + " bytes, expected " +
                     std::to_string(n * sizeof(double)));
  }
  std::memcpy(loaded.policy->params().data(), bytes.data() + nul + 1, payload);
  return loaded;
}

}  // namespace pathforge
