#include <cmath>

#include "doctest.h"
#include "pathforge/objectives.hpp"
#include "pathforge/tabular_policy.hpp"
#include "pathforge/transformer_policy.hpp"

using namespace pathforge;

namespace {

// Worst relative disagreement between the analytic objective gradient and
// central finite differences over every parameter.
double fd_objective_error(Policy& policy, const ObjectiveSpec& spec, const Corpus& pos,
                          const Corpus& neg) {
  Eigen::VectorXd analytic = objective_with_gradient(policy, spec, pos, neg).gradient;
  const double step = 1e-5;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < policy.params().size(); ++i) {
    double saved = policy.params()[i];
    policy.params()[i] = saved + step;
    double up = objective_value(policy, spec, pos, neg);
    policy.params()[i] = saved - step;
    double down = objective_value(policy, spec, pos, neg);
    policy.params()[i] = saved;
    double fd = (up - down) / (2.0 * step);
    double denom = std::max(1e-6, std::abs(fd) + std::abs(analytic[i]));
    worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
  }
  return worst;
}

Corpus small_pos(const Vocabulary& v) {
  return {{v.encode("1+1"), v.encode_with_eos("2")}, {v.encode("2*2"), v.encode_with_eos("4")}};
}

Corpus small_neg(const Vocabulary& v) {
  return {{v.encode("1+1"), v.encode_with_eos("3")}, {v.encode("2*2"), v.encode_with_eos("5")}};
}

}  // namespace

TEST_CASE("negative log-likelihood loss basics") {
  CHECK(nll_loss({-2.0}) == 2.0);
  CHECK(nll_loss({-1.0, -3.0}) == 2.0);
  CHECK_THROWS_AS(nll_loss({}), objective_error);
}

TEST_CASE("unlikelihood term values and clamping") {
  const double eps = 1e-12;
  // pi = 0.5 sits exactly at the branch split.
  CHECK(ul_term(std::log(0.5), eps) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // Vanishing probability: loss ~ pi itself.
  CHECK(ul_term(-50.0, eps) == doctest::Approx(std::exp(-50.0)).epsilon(1e-10));
  // Inside the clamp: 1 - exp(-1e-13) ~ 1e-13 < eps, so the loss saturates
  // at -ln(eps).
  CHECK(ul_term(-1e-13, eps) == doctest::Approx(-std::log(eps)).epsilon(1e-12));
  CHECK(ul_term(-1e-13, eps) == doctest::Approx(27.631021).epsilon(1e-6));
  CHECK(ul_weight(-1e-13, eps) == 0.0);
  // Just outside the clamp the exact formula applies: 1 - exp(-1e-9) ~ 1e-9.
  CHECK(ul_term(-1e-9, eps) == doctest::Approx(-std::log(1e-9)).epsilon(1e-6));

  // Strictly increasing in the sequence probability.
  double prev = ul_term(-8.0, eps);
  for (double t = -7.5; t < -0.05; t += 0.5) {
    double cur = ul_term(t, eps);
    CHECK(cur > prev);
    prev = cur;
  }

  CHECK(ul_loss({std::log(0.5), std::log(0.5)}, eps) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(ul_loss({}, eps), objective_error);
}

TEST_CASE("combined and preference losses hit their frozen values") {
  CHECK(ga_term({std::log(0.5)}) == doctest::Approx(-0.693147).epsilon(1e-6));

  // Equal length-normalized log-probabilities: margin is exactly -gamma.
  std::vector<PairedTotals> pairs = {{-2.0, 2, -3.0, 3}};
  double expected = std::log1p(std::exp(0.5));  // -log sigmoid(-0.5)
  CHECK(simpo_loss(pairs, 0.1, 0.5) == doctest::Approx(0.974077).epsilon(1e-6));
  CHECK(simpo_loss(pairs, 0.1, 0.5) == doctest::Approx(expected).epsilon(1e-12));

  // lambda = 0 reduces to simpo bitwise; lambda = 1 adds mean(-pos_total).
  CHECK(cpo_simpo_loss(pairs, 0.1, 0.5, 0.0) == simpo_loss(pairs, 0.1, 0.5));
  CHECK(cpo_simpo_loss(pairs, 0.1, 0.5, 1.0) ==
        doctest::Approx(expected + 2.0).epsilon(1e-12));

  CHECK_THROWS_AS(simpo_loss({}, 0.1, 0.5), objective_error);
}

TEST_CASE("uft reductions are bitwise") {
  std::vector<double> tp = {-1.25, -0.5, -3.75};
  std::vector<double> tn = {-0.9, -2.0};
  CHECK(uft_loss(tp, tn, 0.0, 1e-12) == nll_loss(tp));
  CHECK(uft_loss(tp, {}, 0.0, 1e-12) == nll_loss(tp));  // neg unused at alpha 0
  CHECK(uft_loss(tp, tn, 1.0, 1e-12) == ul_loss(tn, 1e-12));
  double mid = uft_loss(tp, tn, 0.3, 1e-12);
  CHECK(mid == doctest::Approx(0.7 * nll_loss(tp) + 0.3 * ul_loss(tn, 1e-12)).epsilon(1e-15));
}

TEST_CASE("objective validation and serialization") {
  ObjectiveSpec spec;
  spec.kind = ObjectiveKind::uft;
  spec.alpha = 0.1;
  validate_objective(spec);
  spec.alpha = 0.0;
  CHECK_THROWS_AS(validate_objective(spec), objective_error);
  spec.alpha = 1.0;
  CHECK_THROWS_AS(validate_objective(spec), objective_error);

  spec.alpha = 0.05;
  spec.beta = 0.2;
  spec.gamma = -0.1;
  spec.lambda = 2.0;
  ObjectiveSpec back = objective_from_json(objective_to_json(spec));
  CHECK(back.kind == spec.kind);
  CHECK(back.alpha == spec.alpha);
  CHECK(back.beta == spec.beta);
  CHECK(back.gamma == spec.gamma);
  CHECK(back.lambda == spec.lambda);
  CHECK(back.eps_clamp == spec.eps_clamp);

  CHECK(objective_kind_from_name("cpo_simpo") == ObjectiveKind::cpo_simpo);
  CHECK_THROWS_AS(objective_kind_from_name("dpo"), objective_error);
}

TEST_CASE("policy-level value matches hand-computed uniform-policy batches") {
  TabularPolicy p(8);
  const Vocabulary& v = p.vocab();
  Corpus pos = small_pos(v);
  Corpus neg = small_neg(v);
  double lt = -2.0 * std::log(27.0);  // every target is 2 tokens, uniform rows

  ObjectiveSpec spec;
  spec.kind = ObjectiveKind::nll;
  CHECK(objective_value(p, spec, pos, {}) == doctest::Approx(-lt).epsilon(1e-12));

  spec.kind = ObjectiveKind::ul;
  CHECK(objective_value(p, spec, {}, neg) == doctest::Approx(ul_term(lt, 1e-12)).epsilon(1e-12));

  spec.kind = ObjectiveKind::uft;
  spec.alpha = 0.25;
  CHECK(objective_value(p, spec, pos, neg) ==
        doctest::Approx(0.75 * -lt + 0.25 * ul_term(lt, 1e-12)).epsilon(1e-12));

  spec.kind = ObjectiveKind::ga;
  spec.alpha = 0.25;
  CHECK(objective_value(p, spec, pos, neg) ==
        doctest::Approx(0.75 * -lt + 0.25 * lt).epsilon(1e-12));

  spec.kind = ObjectiveKind::simpo;
  double u = -spec.gamma;  // length-normalized totals cancel
  CHECK(objective_value(p, spec, pos, neg) ==
        doctest::Approx(std::log1p(std::exp(-u))).epsilon(1e-12));
}

TEST_CASE("objective gradients agree with finite differences on both policies") {
  std::vector<ObjectiveKind> kinds = {ObjectiveKind::nll,   ObjectiveKind::ul,
                                      ObjectiveKind::uft,   ObjectiveKind::ga,
                                      ObjectiveKind::simpo, ObjectiveKind::cpo_simpo};

  SUBCASE("tabular") {
    TabularPolicy p(6);
    const Vocabulary& v = p.vocab();
    Corpus pos = small_pos(v);
    Corpus neg = small_neg(v);
    Corpus all = pos;
    all.insert(all.end(), neg.begin(), neg.end());
    p.ensure_contexts(all);
    Rng rng(23);
    for (Eigen::Index i = 0; i < p.params().size(); ++i) p.params()[i] = rng.uniform01() - 0.5;
    for (ObjectiveKind kind : kinds) {
      ObjectiveSpec spec;
      spec.kind = kind;
      spec.alpha = 0.3;
      CAPTURE(objective_kind_name(kind));
      CHECK(fd_objective_error(p, spec, pos, neg) < 1e-5);
    }
  }

  SUBCASE("transformer") {
    TransformerConfig cfg;
    cfg.layers = 1;
    cfg.d_model = 8;
    cfg.n_heads = 2;
    cfg.d_mlp = 16;
    cfg.context = 16;
    TransformerPolicy p(cfg, 31);
    REQUIRE(p.param_count() <= 2000);
    const Vocabulary& v = p.vocab();
    Corpus pos = small_pos(v);
    Corpus neg = small_neg(v);
    for (ObjectiveKind kind : kinds) {
      ObjectiveSpec spec;
      spec.kind = kind;
      spec.alpha = 0.3;
      CAPTURE(objective_kind_name(kind));
      CHECK(fd_objective_error(p, spec, pos, neg) < 1e-4);
    }
  }
}

TEST_CASE("unlikelihood gradient carries the adaptive penalty weight") {
  TabularPolicy p(6);
  const Vocabulary& v = p.vocab();
  std::vector<int> x = v.encode("3*3");
  std::vector<int> y = v.encode_with_eos("9");
  p.ensure_contexts({{x, y}});
  Rng rng(5);
  for (Eigen::Index i = 0; i < p.params().size(); ++i) p.params()[i] = rng.uniform01() - 0.5;

  double total = p.logprob(x, y).total;
  double pi = std::exp(total);
  Eigen::VectorXd dlogpi = Eigen::VectorXd::Zero(p.params().size());
  p.accumulate_logprob_gradient(x, y, 1.0, dlogpi);

  ObjectiveSpec spec;
  spec.kind = ObjectiveKind::ul;
  Eigen::VectorXd g = objective_with_gradient(p, spec, {}, {{x, y}}).gradient;
  // d(-log(1-pi))/dtheta = (pi/(1-pi)) dlogpi/dtheta
  Eigen::VectorXd expected = (pi / (1.0 - pi)) * dlogpi;
  CHECK((g - expected).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("combined objective settles at the predicted stationary point") {
  // The same sequence placed in both batches realizes the equal-frequency
  // premise exactly; gradient descent should drive its modeled probability
  // to 1 - alpha.
  for (double alpha : {0.1, 0.01}) {
    CAPTURE(alpha);
    TabularPolicy p(8);
    const Vocabulary& v = p.vocab();
    std::vector<int> x;
    std::vector<int> y = v.encode_with_eos("12");
    p.ensure_contexts({{x, y}});
    Corpus both = {{x, y}};

    ObjectiveSpec spec;
    spec.kind = ObjectiveKind::uft;
    spec.alpha = alpha;
    const double lr = 1.0;
    for (int step = 0; step < 4000; ++step) {
      ObjectiveResult res = objective_with_gradient(p, spec, both, both);
      p.params() -= lr * res.gradient;
    }
    double pi = std::exp(p.logprob(x, y).total);
    CHECK(std::abs(pi - (1.0 - alpha)) <= 0.01);
  }
}

TEST_CASE("objective batch requirements are enforced") {
  TabularPolicy p(6);
  const Vocabulary& v = p.vocab();
  Corpus pos = small_pos(v);
  Corpus neg = small_neg(v);

  ObjectiveSpec spec;
  spec.kind = ObjectiveKind::nll;
  CHECK_THROWS_AS(objective_value(p, spec, {}, neg), objective_error);
  spec.kind = ObjectiveKind::ul;
  CHECK_THROWS_AS(objective_value(p, spec, pos, {}), objective_error);
  spec.kind = ObjectiveKind::uft;
  spec.alpha = 0.5;
  CHECK_THROWS_AS(objective_value(p, spec, pos, {}), objective_error);

  spec.kind = ObjectiveKind::simpo;
  Corpus short_neg = {neg[0]};
  CHECK_THROWS_AS(objective_value(p, spec, pos, short_neg), objective_error);
  // Pairs must share their prompt.
  Corpus swapped = {neg[1], neg[0]};
  CHECK_THROWS_AS(objective_value(p, spec, pos, swapped), objective_error);
}
