#include "pathforge/tabular_policy.hpp"

#include <cmath>

namespace pathforge {

namespace {
// Logit standing in for ln(0) in count-fitted rows. After the softmax shift
// the exponential underflows to exactly zero, so unobserved continuations
// carry no probability mass.
constexpr double kNegInfLogit = -1e9;
}  // namespace

class TabularStream : public PolicyStream {
 public:
  TabularStream(const TabularPolicy& policy, std::vector<int> prefix)
      : policy_(policy), prefix_(std::move(prefix)) {}

  Eigen::VectorXd logits() const override {
    int row = policy_.row_of_prefix(prefix_);
    int v = policy_.vocab().size();
    return policy_.params().segment(static_cast<Eigen::Index>(row) * v, v);
  }

  void push(int token) override {
    prefix_.push_back(token);
    // Only the last K tokens matter; keep the buffer bounded.
    size_t cap = static_cast<size_t>(policy_.context_window());
    if (prefix_.size() > cap) prefix_.erase(prefix_.begin(), prefix_.end() - cap);
  }

  std::unique_ptr<PolicyStream> clone() const override {
    return std::make_unique<TabularStream>(policy_, prefix_);
  }

 private:
  const TabularPolicy& policy_;
  std::vector<int> prefix_;
};

TabularPolicy::TabularPolicy(int context_window) : k_(context_window) {
  if (context_window <= 0) throw policy_error("context_window must be positive");
  // Row 0 is the fallback for unregistered contexts. The empty key can never
  // collide with a real context because every prefix contains <bos>.
  register_context({});
}

std::vector<int> TabularPolicy::context_key(const std::vector<int>& prefix) const {
  size_t n = prefix.size();
  size_t take = std::min(n, static_cast<size_t>(k_));
  return std::vector<int>(prefix.end() - static_cast<long>(take), prefix.end());
}

int TabularPolicy::row_of_prefix(const std::vector<int>& prefix) const {
  auto it = row_index_.find(context_key(prefix));
  return it == row_index_.end() ? 0 : it->second;
}

void TabularPolicy::register_context(const std::vector<int>& key) {
  if (row_index_.count(key)) return;
  int row = row_count();
  row_index_[key] = row;
  row_keys_.push_back(key);
  params_.conservativeResize(static_cast<Eigen::Index>(row_count()) * vocab_.size());
  params_.tail(vocab_.size()).setZero();
  rebuild_layout();
}

void TabularPolicy::rebuild_layout() {
  layout_ = {ParamBlock{"logits_table", 0, static_cast<int>(params_.size())}};
}

void TabularPolicy::ensure_contexts(
    const std::vector<std::pair<std::vector<int>, std::vector<int>>>& corpus) {
  for (const auto& [x, y] : corpus) {
    check_tokens(x);
    check_tokens(y);
    std::vector<int> prefix = {vocab_.bos_id()};
    prefix.insert(prefix.end(), x.begin(), x.end());
    for (int t : y) {
      register_context(context_key(prefix));
      prefix.push_back(t);
    }
  }
}

void TabularPolicy::fit_counts(
    const std::vector<std::pair<std::vector<int>, std::vector<int>>>& corpus) {
  ensure_contexts(corpus);
  int v = vocab_.size();
  std::map<std::pair<int, int>, long> counts;
  for (const auto& [x, y] : corpus) {
    std::vector<int> prefix = {vocab_.bos_id()};
    prefix.insert(prefix.end(), x.begin(), x.end());
    for (int t : y) {
      ++counts[{row_of_prefix(prefix), t}];
      prefix.push_back(t);
    }
  }
  for (int row = 1; row < row_count(); ++row) {
    for (int t = 0; t < v; ++t) {
      auto it = counts.find({row, t});
      params_[static_cast<Eigen::Index>(row) * v + t] =
          it == counts.end() ? kNegInfLogit : std::log(static_cast<double>(it->second));
    }
  }
}

nlohmann::json TabularPolicy::hyperparams() const {
  return nlohmann::json{{"context_window", k_}, {"row_keys", row_keys_}};
}

std::unique_ptr<Policy> TabularPolicy::clone() const {
  return std::make_unique<TabularPolicy>(*this);
}

std::unique_ptr<PolicyStream> TabularPolicy::open_stream() const {
  return std::make_unique<TabularStream>(*this, std::vector<int>{vocab_.bos_id()});
}

void TabularPolicy::accumulate_logprob_gradient(const std::vector<int>& x,
                                                const std::vector<int>& y, double weight,
                                                Eigen::VectorXd& grad) const {
  check_tokens(x);
  check_tokens(y);
  if (grad.size() != params_.size()) throw policy_error("gradient size mismatch");
  int v = vocab_.size();
  std::vector<int> prefix = {vocab_.bos_id()};
  prefix.insert(prefix.end(), x.begin(), x.end());
  for (int t : y) {
    int row = row_of_prefix(prefix);
    Eigen::VectorXd p = softmax(params_.segment(static_cast<Eigen::Index>(row) * v, v));
    grad.segment(static_cast<Eigen::Index>(row) * v, v) -= weight * p;
    grad[static_cast<Eigen::Index>(row) * v + t] += weight;
    prefix.push_back(t);
  }
}

std::unique_ptr<TabularPolicy> TabularPolicy::from_hyperparams(const nlohmann::json& h) {
  auto policy = std::make_unique<TabularPolicy>(h.at("context_window").get<int>());
  for (const auto& key : h.at("row_keys").get<std::vector<std::vector<int>>>()) {
    policy->register_context(key);
  }
  return policy;
}

}  // namespace pathforge
