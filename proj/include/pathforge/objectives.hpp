#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pathforge/policy.hpp"

namespace pathforge {

class objective_error : public std::runtime_error {
 public:
  explicit objective_error(const std::string& what) : std::runtime_error(what) {}
};

enum class ObjectiveKind { nll, ul, uft, ga, simpo, cpo_simpo };

const char* objective_kind_name(ObjectiveKind kind);
ObjectiveKind objective_kind_from_name(const std::string& name);

// Scalar objective configuration. alpha weighs the failure-path term in the
// combined objectives (uft, ga); beta/gamma parameterize the preference
// margin; lambda is the likelihood coefficient of cpo_simpo; eps_clamp
// bounds 1 - pi away from zero inside the unlikelihood term.
struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::nll;
  double alpha = 0.1;
  double beta = 0.1;
  double gamma = 0.5;
  double lambda = 1.0;
  double eps_clamp = 1e-12;
};

// Enforces the configuration contract (used for training runs; the scalar
// loss functions themselves accept the full closed ranges so reduction
// identities can be exercised).
void validate_objective(const ObjectiveSpec& spec);

nlohmann::json objective_to_json(const ObjectiveSpec& spec);
ObjectiveSpec objective_from_json(const nlohmann::json& j);

// Which side(s) of the data an objective actually consumes. uft/ga with
// alpha = 0 ignore the failure side entirely.
bool objective_uses_pos(const ObjectiveSpec& spec);
bool objective_uses_neg(const ObjectiveSpec& spec);

// ---- scalar losses over per-sequence total log-probabilities ----

// mean of -total.
double nll_loss(const std::vector<double>& totals_pos);

// -log(max(1 - exp(total), eps_clamp)), the sequence-level unlikelihood
// term, with the stable log-one-minus-exp split at -ln 2.
double ul_term(double total, double eps_clamp);

// d(ul_term)/d(total): pi / (1 - pi), or 0 in the clamped region.
double ul_weight(double total, double eps_clamp);

double ul_loss(const std::vector<double>& totals_neg, double eps_clamp);

// (1 - alpha) * nll + alpha * ul. alpha = 0 returns nll_loss(totals_pos)
// bitwise; alpha = 1 returns ul_loss(totals_neg) bitwise.
double uft_loss(const std::vector<double>& totals_pos, const std::vector<double>& totals_neg,
                double alpha, double eps_clamp);

// mean of total (the raw ascent term; combined objectives weigh it by alpha).
double ga_term(const std::vector<double>& totals_neg);

struct PairedTotals {
  double pos_total = 0.0;
  int pos_len = 0;
  double neg_total = 0.0;
  int neg_len = 0;
};

// mean of softplus(gamma - beta * (pos_total/pos_len - neg_total/neg_len)).
double simpo_loss(const std::vector<PairedTotals>& pairs, double beta, double gamma);

// simpo plus lambda * mean(-pos_total). lambda = 0 returns simpo_loss bitwise.
double cpo_simpo_loss(const std::vector<PairedTotals>& pairs, double beta, double gamma,
                      double lambda);

// ---- policy-level evaluation ----

using Corpus = std::vector<std::pair<std::vector<int>, std::vector<int>>>;

struct ObjectiveResult {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

// Scalar objective on (x, y) batches. For nll only pos is read; for ul only
// neg; uft and ga read both; simpo and cpo_simpo treat pos[i] and neg[i] as a
// pair over the same prompt. Throws objective_error on missing batches or
// broken pairing.
double objective_value(const Policy& policy, const ObjectiveSpec& spec, const Corpus& pos,
                       const Corpus& neg);

// Value plus d(value)/d(params). Every objective here is a function of the
// per-sequence totals, so the gradient is the weighted sum of per-sequence
// log-probability gradients with analytic weights d(value)/d(total).
ObjectiveResult objective_with_gradient(const Policy& policy, const ObjectiveSpec& spec,
                                        const Corpus& pos, const Corpus& neg);

}  // namespace pathforge
