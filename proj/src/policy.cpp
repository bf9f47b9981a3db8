#include "pathforge/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pathforge {

// Both helpers go through std::exp rather than Eigen's vectorized
// exponential: the latter clamps very negative inputs to the smallest normal
// instead of underflowing, which would leave stray mass on tokens whose
// logits encode "never".
Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  double m = logits.maxCoeff();
  Eigen::VectorXd shifted = logits.array() - m;
  double lse = std::log(shifted.unaryExpr([](double z) { return std::exp(z); }).sum());
  return shifted.array() - lse;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).unaryExpr([](double z) { return std::exp(z); });
  return e / e.sum();
}

void Policy::check_tokens(const std::vector<int>& seq) const {
  int v = vocab().size();
  for (int t : seq) {
    if (t < 0 || t >= v) throw unknown_token("token id out of range: " + std::to_string(t));
  }
}

LogprobResult Policy::logprob(const std::vector<int>& x, const std::vector<int>& y) const {
  check_tokens(x);
  check_tokens(y);
  if (y.empty() || y.back() != vocab().eos_id()) {
    throw policy_error("logprob target must end with <eos>");
  }
  LogprobResult res;
  std::unique_ptr<PolicyStream> stream = open_stream();
  for (int t : x) stream->push(t);
  for (int t : y) {
    Eigen::VectorXd lp = log_softmax(stream->logits());
    res.per_token.push_back(lp[t]);
    res.total += lp[t];
    stream->push(t);
  }
  return res;
}

void validate_decode_config(const DecodeConfig& config) {
  if (config.temperature < 0.0) throw policy_error("temperature must be non-negative");
  if (!(config.top_p > 0.0 && config.top_p <= 1.0)) throw policy_error("top_p must be in (0,1]");
  if (config.max_tokens <= 0) throw policy_error("max_tokens must be positive");
  if (config.n_samples <= 0) throw policy_error("n_samples must be positive");
}

namespace {

int argmax_lowest_id(const Eigen::VectorXd& logits) {
  int best = 0;
  for (int i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

}  // namespace

// Temperature scaling, nucleus truncation, renormalization, then one draw.
int sample_from_logits(const Eigen::VectorXd& logits, double temperature, double top_p,
                       Rng& rng) {
  Eigen::VectorXd probs = softmax(logits / temperature);
  std::vector<int> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  // Descending probability; equal-probability ties resolved by token id so
  // the nucleus is identical across platforms.
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return probs[a] > probs[b]; });
  size_t keep = order.size();
  double mass = 0.0;
  for (size_t i = 0; i < order.size(); ++i) {
    mass += probs[order[i]];
    if (mass >= top_p - 1e-15) {
      keep = i + 1;
      break;
    }
  }
  double r = rng.uniform01() * mass;
  double cum = 0.0;
  for (size_t i = 0; i < keep; ++i) {
    cum += probs[order[i]];
    if (r < cum) return order[i];
  }
  return order[keep - 1];
}

namespace {

std::vector<int> decode_one(const Policy& policy, const std::vector<int>& x,
                            const DecodeConfig& config, Rng& rng) {
  std::unique_ptr<PolicyStream> stream = policy.open_stream();
  for (int t : x) stream->push(t);
  std::vector<int> out;
  int eos = policy.vocab().eos_id();
  while (static_cast<int>(out.size()) < config.max_tokens) {
    Eigen::VectorXd logits = stream->logits();
    int tok = config.temperature == 0.0
                  ? argmax_lowest_id(logits)
                  : sample_from_logits(logits, config.temperature, config.top_p, rng);
    out.push_back(tok);
    if (tok == eos) break;
    stream->push(tok);
  }
  return out;
}

}  // namespace

std::vector<std::vector<int>> decode(const Policy& policy, const std::vector<int>& x,
                                     const DecodeConfig& config) {
  validate_decode_config(config);
  std::vector<std::vector<int>> samples;
  samples.reserve(config.n_samples);
  if (config.temperature == 0.0) {
    Rng rng(config.seed);
    std::vector<int> one = decode_one(policy, x, config, rng);
    for (int i = 0; i < config.n_samples; ++i) samples.push_back(one);
    return samples;
  }
  for (int i = 0; i < config.n_samples; ++i) {
    // Independent stream per sample so sample i is stable no matter how many
    // samples are requested.
    Rng rng(mix_seed(config.seed, static_cast<uint64_t>(i)));
    samples.push_back(decode_one(policy, x, config, rng));
  }
  return samples;
}

}  // namespace pathforge
