#pragma once

#include "pathforge/policy.hpp"

namespace pathforge {

// Dimensions of the causal transformer policy. The default is the project's
// standard configuration (~120k parameters); tests shrink every knob to keep
// finite-difference sweeps cheap.
struct TransformerConfig {
  int layers = 2;
  int d_model = 64;
  int n_heads = 4;
  int d_mlp = 256;
  int context = 256;
};

// Pre-LN causal transformer over the fixed vocabulary: learned token and
// position embeddings, multi-head self-attention, ReLU MLP, untied output
// head. Gradients come from handwritten backpropagation through a cached
// full-sequence forward pass; incremental decoding uses per-layer key/value
// caches.
class TransformerPolicy : public Policy {
 public:
  TransformerPolicy(const TransformerConfig& config, uint64_t init_seed);

  const TransformerConfig& config() const { return cfg_; }

  const Vocabulary& vocab() const override { return vocab_; }
  Eigen::VectorXd& params() override { return params_; }
  const Eigen::VectorXd& params() const override { return params_; }
  const std::vector<ParamBlock>& layout() const override { return layout_; }
  std::string kind() const override { return "transformer"; }
  nlohmann::json hyperparams() const override;
  std::unique_ptr<Policy> clone() const override;
  std::unique_ptr<PolicyStream> open_stream() const override;
  void accumulate_logprob_gradient(const std::vector<int>& x, const std::vector<int>& y,
                                   double weight, Eigen::VectorXd& grad) const override;

  // Next-token logits at every position of a raw sequence (row t conditions
  // on tokens 0..t). Used by tests to cross-check the streaming path.
  Eigen::MatrixXd full_logits(const std::vector<int>& seq) const;

  static std::unique_ptr<TransformerPolicy> from_hyperparams(const nlohmann::json& h);

 private:
  friend class TransformerStream;
  struct Cache;

  void build_layout();
  void init_params(uint64_t seed);
  void forward(const std::vector<int>& seq, Cache& cache) const;

  TransformerConfig cfg_;
  Vocabulary vocab_;
  Eigen::VectorXd params_;
  std::vector<ParamBlock> layout_;

  // Flat-vector offsets of each parameter block.
  struct LayerOffsets {
    int ln1g, ln1b, wq, bq, wk, bk, wv, bv, wo, bo, ln2g, ln2b, w1, b1, w2, b2;
  };
  std::vector<LayerOffsets> loff_;
  int tok_emb_ = 0, pos_emb_ = 0, lnfg_ = 0, lnfb_ = 0, headw_ = 0, headb_ = 0;
};

}  // namespace pathforge
