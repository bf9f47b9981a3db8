#pragma once

#include <map>
#include <utility>

#include "pathforge/policy.hpp"

namespace pathforge {

// Exact softmax policy over a table of context rows. A context is the last K
// tokens of the full prefix (<bos> + x + generated so far). Contexts are
// registered explicitly; unregistered contexts fall back to a shared default
// row (row 0), so the parameter vector has a fixed size between
// registrations and every context has a well-defined distribution.
//
// With K at least as long as every prefix in a finite corpus, count fitting
// reproduces the empirical conditional frequencies, which makes this the
// reference implementation for closed-form checks.
class TabularPolicy : public Policy {
 public:
  explicit TabularPolicy(int context_window = 8);

  int context_window() const { return k_; }
  int row_count() const { return static_cast<int>(row_keys_.size()); }

  // Row index for a full prefix (uses the last K tokens); 0 when unseen.
  int row_of_prefix(const std::vector<int>& prefix) const;

  // Registers every context visited when scoring y after x, for each corpus
  // entry. Grows the table; new rows start at zero logits (uniform).
  void ensure_contexts(
      const std::vector<std::pair<std::vector<int>, std::vector<int>>>& corpus);

  // Maximum-likelihood fit: logits = ln(count) for observed continuations,
  // an effective minus-infinity for unobserved ones, on top of
  // ensure_contexts of the same corpus. The default row stays uniform.
  void fit_counts(
      const std::vector<std::pair<std::vector<int>, std::vector<int>>>& corpus);

  const Vocabulary& vocab() const override { return vocab_; }
  Eigen::VectorXd& params() override { return params_; }
  const Eigen::VectorXd& params() const override { return params_; }
  const std::vector<ParamBlock>& layout() const override { return layout_; }
  std::string kind() const override { return "tabular"; }
  nlohmann::json hyperparams() const override;
  std::unique_ptr<Policy> clone() const override;
  std::unique_ptr<PolicyStream> open_stream() const override;
  void accumulate_logprob_gradient(const std::vector<int>& x, const std::vector<int>& y,
                                   double weight, Eigen::VectorXd& grad) const override;

  static std::unique_ptr<TabularPolicy> from_hyperparams(const nlohmann::json& h);

 private:
  friend class TabularStream;

  std::vector<int> context_key(const std::vector<int>& prefix) const;
  void register_context(const std::vector<int>& key);
  void rebuild_layout();

  Vocabulary vocab_;
  int k_;
  std::map<std::vector<int>, int> row_index_;
  std::vector<std::vector<int>> row_keys_;
  Eigen::VectorXd params_;
  std::vector<ParamBlock> layout_;
};

}  // namespace pathforge
