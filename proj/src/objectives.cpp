#include "pathforge/objectives.hpp"

#include <cmath>
#include <numbers>

namespace pathforge {

namespace {

constexpr double kLn2 = std::numbers::ln2;

void require(bool cond, const char* msg) {
  if (!cond) throw objective_error(msg);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

const char* objective_kind_name(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::nll: return "nll";
    case ObjectiveKind::ul: return "ul";
    case ObjectiveKind::uft: return "uft";
    case ObjectiveKind::ga: return "ga";
    case ObjectiveKind::simpo: return "simpo";
    case ObjectiveKind::cpo_simpo: return "cpo_simpo";
  }
  throw objective_error("unhandled objective kind");
}

ObjectiveKind objective_kind_from_name(const std::string& name) {
  for (ObjectiveKind k : {ObjectiveKind::nll, ObjectiveKind::ul, ObjectiveKind::uft,
                          ObjectiveKind::ga, ObjectiveKind::simpo, ObjectiveKind::cpo_simpo}) {
    if (name == objective_kind_name(k)) return k;
  }
  throw objective_error("unknown objective kind: " + name);
}

void validate_objective(const ObjectiveSpec& spec) {
  if (spec.kind == ObjectiveKind::uft) {
    require(spec.alpha > 0.0 && spec.alpha < 1.0, "uft requires alpha in (0,1)");
  }
  require(spec.alpha >= 0.0 && spec.alpha <= 1.0, "alpha must lie in [0,1]");
  require(spec.beta > 0.0, "beta must be positive");
  require(spec.lambda >= 0.0, "lambda must be non-negative");
  require(spec.eps_clamp > 0.0 && spec.eps_clamp < 1e-3, "eps_clamp must be a small positive value");
}

nlohmann::json objective_to_json(const ObjectiveSpec& spec) {
  return nlohmann::json{{"kind", objective_kind_name(spec.kind)}, {"alpha", spec.alpha},
                        {"beta", spec.beta},                      {"gamma", spec.gamma},
                        {"lambda", spec.lambda},                  {"eps_clamp", spec.eps_clamp}};
}

ObjectiveSpec objective_from_json(const nlohmann::json& j) {
  ObjectiveSpec spec;
  spec.kind = objective_kind_from_name(j.at("kind").get<std::string>());
  spec.alpha = j.value("alpha", spec.alpha);
  spec.beta = j.value("beta", spec.beta);
  spec.gamma = j.value("gamma", spec.gamma);
  spec.lambda = j.value("lambda", spec.lambda);
  spec.eps_clamp = j.value("eps_clamp", spec.eps_clamp);
  return spec;
}

double nll_loss(const std::vector<double>& totals_pos) {
  require(!totals_pos.empty(), "empty_batch: nll needs at least one sequence");
  return -mean_of(totals_pos);
}

double ul_term(double total, double eps_clamp) {
  // 1 - exp(total) without cancellation; total <= 0 so this is in [0, 1].
  double one_minus = -std::expm1(total);
  if (one_minus < eps_clamp) return -std::log(eps_clamp);
  // Split recommended for log(1 - e^t): log1p form for strongly negative t,
  // expm1 form near zero.
  return total < -kLn2 ? -std::log1p(-std::exp(total)) : -std::log(one_minus);
}

double ul_weight(double total, double eps_clamp) {
  double one_minus = -std::expm1(total);
  if (one_minus < eps_clamp) return 0.0;  // clamped region is flat
  return std::exp(total) / one_minus;
}

double ul_loss(const std::vector<double>& totals_neg, double eps_clamp) {
  require(!totals_neg.empty(), "empty_batch: ul needs at least one sequence");
  double s = 0.0;
  for (double t : totals_neg) s += ul_term(t, eps_clamp);
  return s / static_cast<double>(totals_neg.size());
}

double uft_loss(const std::vector<double>& totals_pos, const std::vector<double>& totals_neg,
                double alpha, double eps_clamp) {
  // Exact reductions at the endpoints keep the identities bitwise.
  if (alpha == 0.0) return nll_loss(totals_pos);
  if (alpha == 1.0) return ul_loss(totals_neg, eps_clamp);
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in [0,1]");
  return (1.0 - alpha) * nll_loss(totals_pos) + alpha * ul_loss(totals_neg, eps_clamp);
}

double ga_term(const std::vector<double>& totals_neg) {
  require(!totals_neg.empty(), "empty_batch: ga needs at least one sequence");
  return mean_of(totals_neg);
}

double simpo_loss(const std::vector<PairedTotals>& pairs, double beta, double gamma) {
  require(!pairs.empty(), "empty_batch: simpo needs at least one pair");
  double s = 0.0;
  for (const PairedTotals& p : pairs) {
    require(p.pos_len > 0 && p.neg_len > 0, "paired sequences must have positive length");
    double u = beta * (p.pos_total / p.pos_len - p.neg_total / p.neg_len) - gamma;
    s += softplus(-u);  // -log sigmoid(u)
  }
  return s / static_cast<double>(pairs.size());
}

double cpo_simpo_loss(const std::vector<PairedTotals>& pairs, double beta, double gamma,
                      double lambda) {
  if (lambda == 0.0) return simpo_loss(pairs, beta, gamma);
  double nll = 0.0;
  for (const PairedTotals& p : pairs) nll += -p.pos_total;
  return simpo_loss(pairs, beta, gamma) + lambda * nll / static_cast<double>(pairs.size());
}

namespace {

// Per-sequence weights d(value)/d(total); the policy gradient is then the
// weighted sum of log-probability gradients.
struct Weights {
  double value = 0.0;
  std::vector<double> pos, neg;
};

Weights eval_weights(const ObjectiveSpec& spec, const std::vector<double>& tp,
                     const std::vector<int>& lp, const std::vector<double>& tn,
                     const std::vector<int>& ln) {
  Weights w;
  const size_t np = tp.size(), nn = tn.size();
  switch (spec.kind) {
    case ObjectiveKind::nll: {
      w.value = nll_loss(tp);
      w.pos.assign(np, -1.0 / static_cast<double>(np));
      break;
    }
    case ObjectiveKind::ul: {
      w.value = ul_loss(tn, spec.eps_clamp);
      w.neg.resize(nn);
      for (size_t i = 0; i < nn; ++i) {
        w.neg[i] = ul_weight(tn[i], spec.eps_clamp) / static_cast<double>(nn);
      }
      break;
    }
    case ObjectiveKind::uft: {
      if (spec.alpha == 0.0) {
        // Bitwise identical to nll on the same batch.
        w.value = nll_loss(tp);
        w.pos.assign(np, -1.0 / static_cast<double>(np));
        break;
      }
      require(nn > 0, "empty_required_batch: uft with alpha > 0 needs failure sequences");
      double a = spec.alpha;
      w.value = uft_loss(tp, tn, a, spec.eps_clamp);
      if (a < 1.0) w.pos.assign(np, -(1.0 - a) / static_cast<double>(np));
      w.neg.resize(nn);
      for (size_t i = 0; i < nn; ++i) {
        w.neg[i] = a * ul_weight(tn[i], spec.eps_clamp) / static_cast<double>(nn);
      }
      break;
    }
    case ObjectiveKind::ga: {
      if (spec.alpha == 0.0) {
        w.value = nll_loss(tp);
        w.pos.assign(np, -1.0 / static_cast<double>(np));
        break;
      }
      require(nn > 0, "empty_required_batch: ga with alpha > 0 needs failure sequences");
      double a = spec.alpha;
      if (a < 1.0) {
        w.value = (1.0 - a) * nll_loss(tp) + a * ga_term(tn);
        w.pos.assign(np, -(1.0 - a) / static_cast<double>(np));
      } else {
        w.value = ga_term(tn);
      }
      w.neg.assign(nn, a / static_cast<double>(nn));
      break;
    }
    case ObjectiveKind::simpo:
    case ObjectiveKind::cpo_simpo: {
      require(np == nn, "unpaired_input_for_paired_loss: batch sizes differ");
      require(np > 0, "empty_batch: paired loss needs at least one pair");
      double n = static_cast<double>(np);
      w.pos.assign(np, 0.0);
      w.neg.assign(nn, 0.0);
      double s = 0.0;
      for (size_t i = 0; i < np; ++i) {
        require(lp[i] > 0 && ln[i] > 0, "paired sequences must have positive length");
        double u = spec.beta * (tp[i] / lp[i] - tn[i] / ln[i]) - spec.gamma;
        s += softplus(-u);
        double du = -sigmoid(-u) / n;  // d(mean softplus(-u))/du_i
        w.pos[i] = du * spec.beta / lp[i];
        w.neg[i] = -du * spec.beta / ln[i];
      }
      w.value = s / n;
      if (spec.kind == ObjectiveKind::cpo_simpo && spec.lambda != 0.0) {
        double nll = 0.0;
        for (size_t i = 0; i < np; ++i) {
          nll += -tp[i];
          w.pos[i] += -spec.lambda / n;
        }
        w.value += spec.lambda * nll / n;
      }
      break;
    }
  }
  return w;
}

}  // namespace

bool objective_uses_pos(const ObjectiveSpec& spec) {
  return spec.kind != ObjectiveKind::ul;
}

bool objective_uses_neg(const ObjectiveSpec& spec) {
  switch (spec.kind) {
    case ObjectiveKind::nll: return false;
    case ObjectiveKind::ul:
    case ObjectiveKind::simpo:
    case ObjectiveKind::cpo_simpo: return true;
    case ObjectiveKind::uft:
    case ObjectiveKind::ga: return spec.alpha > 0.0;
  }
  return false;
}

namespace {

ObjectiveResult eval_objective(const Policy& policy, const ObjectiveSpec& spec, const Corpus& pos,
                               const Corpus& neg, bool want_gradient) {
  bool paired = spec.kind == ObjectiveKind::simpo || spec.kind == ObjectiveKind::cpo_simpo;
  if (paired) {
    require(pos.size() == neg.size(), "unpaired_input_for_paired_loss: batch sizes differ");
    for (size_t i = 0; i < pos.size(); ++i) {
      require(pos[i].first == neg[i].first,
              "unpaired_input_for_paired_loss: pair prompts differ");
    }
  }
  std::vector<double> tp, tn;
  std::vector<int> lp, ln;
  if (objective_uses_pos(spec)) {
    require(!pos.empty(), "empty_required_batch: objective needs correct sequences");
    for (const auto& [x, y] : pos) {
      tp.push_back(policy.logprob(x, y).total);
      lp.push_back(static_cast<int>(y.size()));
    }
  }
  if (objective_uses_neg(spec)) {
    require(!neg.empty(), "empty_required_batch: objective needs failure sequences");
    for (const auto& [x, y] : neg) {
      tn.push_back(policy.logprob(x, y).total);
      ln.push_back(static_cast<int>(y.size()));
    }
  }
  Weights w = eval_weights(spec, tp, lp, tn, ln);
  ObjectiveResult res;
  res.value = w.value;
  if (want_gradient) {
    res.gradient = Eigen::VectorXd::Zero(policy.params().size());
    for (size_t i = 0; i < w.pos.size(); ++i) {
      if (w.pos[i] != 0.0) {
        policy.accumulate_logprob_gradient(pos[i].first, pos[i].second, w.pos[i], res.gradient);
      }
    }
    for (size_t i = 0; i < w.neg.size(); ++i) {
      if (w.neg[i] != 0.0) {
        policy.accumulate_logprob_gradient(neg[i].first, neg[i].second, w.neg[i], res.gradient);
      }
    }
    if (!res.gradient.allFinite()) throw objective_error("nonfinite_gradient");
  }
  return res;
}

}  // namespace

double objective_value(const Policy& policy, const ObjectiveSpec& spec, const Corpus& pos,
                       const Corpus& neg) {
  return eval_objective(policy, spec, pos, neg, false).value;
}

ObjectiveResult objective_with_gradient(const Policy& policy, const ObjectiveSpec& spec,
                                        const Corpus& pos, const Corpus& neg) {
  return eval_objective(policy, spec, pos, neg, true);
}

}  // namespace pathforge
