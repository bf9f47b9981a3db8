#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "pathforge/rng.hpp"
#include "pathforge/vocab.hpp"

namespace pathforge {

class policy_error : public std::runtime_error {
 public:
  explicit policy_error(const std::string& what) : std::runtime_error(what) {}
};

// Named slice of the flat parameter vector.
struct ParamBlock {
  std::string name;
  int offset = 0;
  int size = 0;
};

// Incremental next-token distribution over a growing context. A fresh stream
// has <bos> already consumed, so logits() immediately gives the distribution
// of the first real token. Streams are cheap to clone mid-prefix, which is
// what beam search and nucleus sampling lean on.
class PolicyStream {
 public:
  virtual ~PolicyStream() = default;
  virtual Eigen::VectorXd logits() const = 0;
  virtual void push(int token) = 0;
  virtual std::unique_ptr<PolicyStream> clone() const = 0;
};

struct LogprobResult {
  std::vector<double> per_token;
  double total = 0.0;
};

// Autoregressive token policy with a flat parameter vector. Parameters are
// immutable during evaluation and decoding; gradient accumulation and updates
// assume a single writer.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual const Vocabulary& vocab() const = 0;
  virtual Eigen::VectorXd& params() = 0;
  virtual const Eigen::VectorXd& params() const = 0;
  virtual const std::vector<ParamBlock>& layout() const = 0;
  virtual std::string kind() const = 0;
  virtual nlohmann::json hyperparams() const = 0;
  virtual std::unique_ptr<Policy> clone() const = 0;
  virtual std::unique_ptr<PolicyStream> open_stream() const = 0;

  // Adds weight * d(log pi(y|x))/d(theta) into grad. grad must have the same
  // length as params().
  virtual void accumulate_logprob_gradient(const std::vector<int>& x, const std::vector<int>& y,
                                           double weight, Eigen::VectorXd& grad) const = 0;

  // Causal log-probability of y given x. y must end with <eos>.
  LogprobResult logprob(const std::vector<int>& x, const std::vector<int>& y) const;

  int param_count() const { return static_cast<int>(params().size()); }

 protected:
  void check_tokens(const std::vector<int>& seq) const;
};

struct DecodeConfig {
  double temperature = 0.7;
  double top_p = 0.8;
  int max_tokens = 256;
  int n_samples = 1;
  uint64_t seed = 0;
};

void validate_decode_config(const DecodeConfig& config);

// Draws n_samples continuations of x. Each returned sequence ends with <eos>
// unless it was truncated at max_tokens. temperature 0 is deterministic
// argmax (ties broken toward the lowest token id); otherwise logits are
// temperature-scaled, truncated to the smallest prefix of the sorted
// distribution with mass >= top_p, renormalized, and sampled. Deterministic
// given the seed.
std::vector<std::vector<int>> decode(const Policy& policy, const std::vector<int>& x,
                                     const DecodeConfig& config);

// log softmax(z) computed stably; result[i] = z[i] - max - log(sum exp(z - max)).
Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

// One draw from temperature-scaled, nucleus-truncated, renormalized logits
// (the same transform decode applies per token). temperature must be > 0.
int sample_from_logits(const Eigen::VectorXd& logits, double temperature, double top_p, Rng& rng);

}  // namespace pathforge
