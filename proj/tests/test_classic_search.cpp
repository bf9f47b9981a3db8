#include "doctest.h"
#include "pathforge/classic_search.hpp"
#include "pathforge/generator.hpp"
#include "pathforge/oracle.hpp"
#include "pathforge/path_text.hpp"
#include "pathforge/rng.hpp"

using namespace pathforge;

namespace {

PuzzleInstance countdown(std::array<int, 4> inputs, int target) {
  PuzzleInstance inst;
  inst.task = Task::countdown;
  inst.inputs = inputs;
  inst.target = target;
  return inst;
}

}  // namespace

TEST_CASE("target_distance ranks by closest value") {
  CHECK(target_distance_of({Rational(21), Rational(115)}, 94) == doctest::Approx(21.0));
  CHECK(target_distance_of({Rational(94)}, 94) == doctest::Approx(0.0));
}

TEST_CASE("full-width BFS agrees with the exhaustive solver") {
  // With an uncapped frontier, no heuristic, and the same step space as the
  // oracle, BFS succeeds exactly when a solution exists.
  Rng rng(13);
  ClassicSearchConfig cfg;
  cfg.strategy = Strategy::bfs;
  cfg.beam_width = 1000000;
  cfg.heuristic = Heuristic::none;
  cfg.integer_only = false;
  int solvable = 0, unsolvable = 0;
  for (int trial = 0; trial < 100; ++trial) {
    PuzzleInstance inst;
    inst.task = Task::game24;
    for (int i = 0; i < 4; ++i) inst.inputs[i] = static_cast<int>(rng.uniform_int(1, 13));
    inst.target = 24;
    bool oracle_solvable = !enumerate_solutions(inst, false).empty();
    SearchOutcome out = classic_solve(inst, cfg);
    CHECK(out.solved == oracle_solvable);
    (oracle_solvable ? solvable : unsolvable) += 1;
  }
  // The sample must exercise both directions of the equivalence.
  CHECK(solvable > 0);
  CHECK(unsolvable > 0);
}

TEST_CASE("every emitted path carries its own verified verdict") {
  Rng rng(29);
  GeneratorConfig gen;
  gen.task = Task::countdown;
  gen.count = 30;
  for (const PuzzleInstance& inst : generate_instances(gen, 31)) {
    for (Strategy strategy : {Strategy::bfs, Strategy::dfs}) {
      ClassicSearchConfig cfg;
      cfg.strategy = strategy;
      SearchOutcome out = classic_solve(inst, cfg);
      bool any_success = false;
      for (const ExploredPath& ep : out.paths) {
        Verdict again = verify(inst, ep.path);
        CHECK(again.success == ep.verdict.success);
        CHECK(verdict_reason_name(again.reason) == verdict_reason_name(ep.verdict.reason));
        any_success = any_success || ep.verdict.success;
        // Stored paths must round-trip through the grammar.
        std::string text = render_path(ep.path);
        if (!text.empty()) {
          ParseResult parsed = parse_path(text);
          REQUIRE(std::holds_alternative<ReasoningPath>(parsed));
          CHECK(render_path(std::get<ReasoningPath>(parsed)) == text);
        }
      }
      CHECK(out.solved == any_success);
    }
  }
}

TEST_CASE("DFS stops at the first success") {
  PuzzleInstance inst = countdown({25, 5, 5, 33}, 27);
  ClassicSearchConfig cfg;
  cfg.strategy = Strategy::dfs;
  cfg.max_expansions = 10000;
  SearchOutcome out = classic_solve(inst, cfg);
  REQUIRE(out.solved);
  int successes = 0;
  for (const ExploredPath& ep : out.paths) successes += ep.verdict.success ? 1 : 0;
  CHECK(successes == 1);
  CHECK(out.paths.back().verdict.success);  // nothing emitted after the hit
}

TEST_CASE("DFS abandoned branches are recorded as failed partial paths") {
  PuzzleInstance inst = countdown({3, 7, 11, 19}, 97);
  ClassicSearchConfig cfg;
  cfg.strategy = Strategy::dfs;
  cfg.max_expansions = 2;  // starve the search
  SearchOutcome out = classic_solve(inst, cfg);
  CHECK(!out.solved);
  REQUIRE(!out.paths.empty());
  bool saw_partial = false;
  for (const ExploredPath& ep : out.paths) {
    CHECK(!ep.verdict.success);
    if (!ep.path.answer) {
      saw_partial = true;
      CHECK(!ep.path.steps.empty());
    }
  }
  CHECK(saw_partial);
}

TEST_CASE("BFS emits at most beam_width leaves, all at full depth") {
  PuzzleInstance inst = countdown({25, 5, 5, 33}, 27);
  ClassicSearchConfig cfg;
  cfg.strategy = Strategy::bfs;
  cfg.beam_width = 4;
  SearchOutcome out = classic_solve(inst, cfg);
  CHECK(out.paths.size() <= 4);
  for (const ExploredPath& ep : out.paths) {
    CHECK(ep.path.steps.size() == 3);
    CHECK(ep.path.answer != nullptr);
  }
}

TEST_CASE("classic searches are deterministic") {
  GeneratorConfig gen;
  gen.task = Task::countdown;
  gen.count = 10;
  for (const PuzzleInstance& inst : generate_instances(gen, 41)) {
    for (Strategy strategy : {Strategy::bfs, Strategy::dfs}) {
      ClassicSearchConfig cfg;
      cfg.strategy = strategy;
      SearchOutcome a = classic_solve(inst, cfg);
      SearchOutcome b = classic_solve(inst, cfg);
      REQUIRE(a.paths.size() == b.paths.size());
      for (size_t i = 0; i < a.paths.size(); ++i) {
        CHECK(render_path(a.paths[i].path) == render_path(b.paths[i].path));
      }
    }
  }
}

TEST_CASE("config validation") {
  PuzzleInstance inst = countdown({1, 2, 3, 4}, 10);
  ClassicSearchConfig cfg;
  cfg.beam_width = 0;
  cfg.strategy = Strategy::bfs;
  CHECK_THROWS_AS(classic_solve(inst, cfg), std::invalid_argument);
  cfg.beam_width = 1;
  cfg.max_expansions = 0;
  cfg.strategy = Strategy::dfs;
  CHECK_THROWS_AS(classic_solve(inst, cfg), std::invalid_argument);
}
