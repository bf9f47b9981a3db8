#include <cstdio>
#include <set>

#include "doctest.h"
#include "pathforge/dataset.hpp"
#include "pathforge/expand.hpp"
#include "pathforge/oracle.hpp"
#include "pathforge/path_text.hpp"

using namespace pathforge;

namespace {

PuzzleInstance countdown_inst(std::array<int, 4> inputs, int target) {
  PuzzleInstance inst;
  inst.task = Task::countdown;
  inst.inputs = inputs;
  inst.target = target;
  return inst;
}

void walk_leaves(const std::vector<ValueNode>& values, std::vector<ReasoningStep>& steps,
                 std::vector<ReasoningPath>& out, size_t cap) {
  if (out.size() >= cap) return;
  if (values.size() == 1) {
    out.push_back(finish_path(steps, values.front()));
    return;
  }
  for (StepCandidate& cand : expand_state(values, true)) {
    steps.push_back(cand.step);
    walk_leaves(cand.next, steps, out, cap);
    steps.pop_back();
    if (out.size() >= cap) return;
  }
}

// The first `want` full chains that fail verification, plus every success.
std::vector<ReasoningPath> failing_paths(const PuzzleInstance& inst, size_t want) {
  std::vector<ReasoningPath> leaves;
  std::vector<ReasoningStep> steps;
  walk_leaves(value_nodes_of(inst), steps, leaves, 4000);
  std::vector<ReasoningPath> out;
  for (const ReasoningPath& p : leaves) {
    if (out.size() >= want) break;
    if (!verify(inst, p).success) out.push_back(p);
  }
  REQUIRE(out.size() == want);
  return out;
}

ReasoningPath success_path(const PuzzleInstance& inst, size_t index = 0) {
  std::vector<ReasoningPath> sols = enumerate_solutions(inst, true);
  REQUIRE(sols.size() > index);
  return sols[index];
}

ReasonerOutput output_of(const PuzzleInstance& inst, const ReasoningPath& path,
                         const std::string& reasoner, Split split = Split::train) {
  return ReasonerOutput{inst, path, verify(inst, path), reasoner, split};
}

bool records_equal(const PathRecord& a, const PathRecord& b) {
  return a.instance.key() == b.instance.key() && a.path_text == b.path_text &&
         a.label == b.label && a.reasoner == b.reasoner && a.split == b.split;
}

}  // namespace

TEST_CASE("collect merges streams into sorted canonical records") {
  std::array<PuzzleInstance, 3> instances = {
      countdown_inst({2, 3, 5, 7}, 11),
      countdown_inst({2, 3, 5, 7}, 19),
      countdown_inst({2, 3, 5, 7}, 26),
  };

  // 2 reasoners x 3 instances x 2 paths, fed reasoner-major so sorting has
  // work to do.
  std::vector<ReasonerOutput> outputs;
  for (const std::string reasoner : {"rap", "bfs"}) {
    for (const PuzzleInstance& inst : instances) {
      for (const ReasoningPath& p : failing_paths(inst, 2)) {
        outputs.push_back(output_of(inst, p, reasoner));
      }
    }
  }
  PathDataset dataset = collect(outputs);
  REQUIRE(dataset.size() == 12);

  for (size_t i = 1; i < dataset.size(); ++i) {
    const PathRecord& prev = dataset[i - 1];
    const PathRecord& cur = dataset[i];
    bool ordered = prev.instance.key() < cur.instance.key() ||
                   (prev.instance.key() == cur.instance.key() &&
                    prev.reasoner <= cur.reasoner);
    CHECK(ordered);
  }
  // Within one instance the bfs stream sorts ahead of rap.
  CHECK(dataset[0].reasoner == "bfs");
  CHECK(dataset[2].reasoner == "rap");

  for (const PathRecord& rec : dataset) {
    CHECK(rec.label == 0);
    ParseResult parsed = parse_path(rec.path_text);
    REQUIRE(std::holds_alternative<ReasoningPath>(parsed));
    CHECK(render_path(std::get<ReasoningPath>(parsed)) == rec.path_text);
  }
}

TEST_CASE("collect drops mislabeled outputs and rejects split leaks") {
  PuzzleInstance inst = countdown_inst({2, 3, 5, 7}, 19);
  ReasoningPath good = success_path(inst);
  std::vector<ReasoningPath> bad = failing_paths(inst, 1);

  std::vector<ReasonerOutput> outputs;
  outputs.push_back(output_of(inst, good, "tot"));
  outputs.push_back(output_of(inst, bad[0], "tot"));
  // Claim the failing path succeeded: contradicts re-verification.
  ReasonerOutput lying = output_of(inst, bad[0], "dfs");
  lying.verdict.success = true;
  outputs.push_back(lying);

  PathDataset dataset = collect(outputs);
  REQUIRE(dataset.size() == 2);
  CHECK(dataset[0].label + dataset[1].label == 1);
  for (const PathRecord& rec : dataset) CHECK(rec.reasoner == "tot");

  outputs.clear();
  outputs.push_back(output_of(inst, good, "tot", Split::train));
  outputs.push_back(output_of(inst, bad[0], "dfs", Split::test));
  CHECK_THROWS_AS(collect(outputs), split_violation);
}

TEST_CASE("dedup keeps first occurrences and is idempotent") {
  PuzzleInstance inst = countdown_inst({2, 3, 5, 7}, 19);
  std::vector<ReasoningPath> fails = failing_paths(inst, 2);

  std::vector<ReasonerOutput> outputs;
  outputs.push_back(output_of(inst, fails[0], "bfs"));
  outputs.push_back(output_of(inst, fails[0], "dfs"));  // same text, later reasoner
  outputs.push_back(output_of(inst, fails[1], "bfs"));
  outputs.push_back(output_of(inst, fails[0], "bfs"));  // byte-identical duplicate
  PathDataset dataset = collect(outputs);
  REQUIRE(dataset.size() == 4);

  PathDataset once = dedup(dataset);
  REQUIRE(once.size() == 2);
  // Different reasoner, identical text: merged, first (bfs) wins. Different
  // text from the same reasoner survives.
  CHECK(once[0].reasoner == "bfs");
  CHECK(once[1].reasoner == "bfs");
  CHECK(once[0].path_text != once[1].path_text);

  PathDataset twice = dedup(once);
  REQUIRE(twice.size() == once.size());
  for (size_t i = 0; i < once.size(); ++i) CHECK(records_equal(once[i], twice[i]));
}

TEST_CASE("dedup handles large mostly-duplicate datasets") {
  PuzzleInstance inst = countdown_inst({2, 3, 5, 7}, 26);
  std::vector<ReasoningPath> fails = failing_paths(inst, 50);
  PathDataset dataset;
  for (int round = 0; round < 400; ++round) {
    for (const ReasoningPath& p : fails) {
      PathRecord rec;
      rec.instance = inst;
      rec.path_text = render_path(p);
      rec.label = 0;
      rec.reasoner = "dfs";
      dataset.push_back(rec);
    }
  }
  REQUIRE(dataset.size() == 20000);
  PathDataset unique = dedup(dataset);
  CHECK(unique.size() == 50);
  CHECK(unique.front().path_text == render_path(fails.front()));
  CHECK(unique.back().path_text == render_path(fails.back()));
}

TEST_CASE("split_by_label partitions the dataset") {
  PuzzleInstance solvable = countdown_inst({2, 3, 5, 7}, 19);
  PuzzleInstance unsolvable = countdown_inst({2, 3, 5, 7}, 26);

  std::vector<ReasonerOutput> outputs;
  outputs.push_back(output_of(solvable, success_path(solvable), "tot"));
  for (const ReasoningPath& p : failing_paths(solvable, 3)) {
    outputs.push_back(output_of(solvable, p, "tot"));
  }
  for (const ReasoningPath& p : failing_paths(unsolvable, 2)) {
    outputs.push_back(output_of(unsolvable, p, "bfs"));
  }
  PathDataset dataset = collect(outputs);
  auto [plus, minus] = split_by_label(dataset);
  CHECK(plus.size() + minus.size() == dataset.size());
  CHECK(plus.size() == 1);
  for (const PathRecord& rec : plus) CHECK(rec.label == 1);
  for (const PathRecord& rec : minus) CHECK(rec.label == 0);

  // All-correct dataset: the failed side is empty.
  PathDataset all_correct;
  all_correct.push_back(plus.front());
  auto [p2, m2] = split_by_label(all_correct);
  CHECK(p2.size() == 1);
  CHECK(m2.empty());
}

TEST_CASE("make_pairs samples failures per success") {
  PuzzleInstance rich = countdown_inst({2, 3, 5, 7}, 19);
  PuzzleInstance poor = countdown_inst({2, 3, 5, 7}, 11);
  PuzzleInstance lonely = countdown_inst({2, 3, 5, 7}, 21);  // success, no failures

  std::vector<ReasonerOutput> outputs;
  outputs.push_back(output_of(rich, success_path(rich), "tot"));
  for (const ReasoningPath& p : failing_paths(rich, 5)) {
    outputs.push_back(output_of(rich, p, "tot"));
  }
  outputs.push_back(output_of(poor, success_path(poor), "rap"));
  for (const ReasoningPath& p : failing_paths(poor, 2)) {
    outputs.push_back(output_of(poor, p, "rap"));
  }
  outputs.push_back(output_of(lonely, success_path(lonely), "dfs"));
  PathDataset dataset = collect(outputs);
  auto [plus, minus] = split_by_label(dataset);
  REQUIRE(plus.size() == 3);
  REQUIRE(minus.size() == 7);

  SUBCASE("enough failures: distinct partners, short side: replacement") {
    std::vector<PairedRecord> pairs = make_pairs(plus, minus, 2, 7);
    // rich and poor each contribute 2 pairs; lonely has no failures.
    REQUIRE(pairs.size() == 4);
    std::set<std::string> rich_rejected;
    for (const PairedRecord& p : pairs) {
      CHECK(verify(p.instance, std::get<ReasoningPath>(parse_path(p.chosen_text))).success);
      CHECK(!verify(p.instance, std::get<ReasoningPath>(parse_path(p.rejected_text))).success);
      if (p.instance.key() == rich.key()) rich_rejected.insert(p.rejected_text);
    }
    // 5 failures and E = 2: sampling without replacement gives distinct texts.
    CHECK(rich_rejected.size() == 2);

    std::vector<PairedRecord> wide = make_pairs(plus, minus, 5, 7);
    // Every success gets exactly 5 pairs, with replacement where needed.
    REQUIRE(wide.size() == 10);
  }

  SUBCASE("E = 0 yields nothing, negative E throws") {
    CHECK(make_pairs(plus, minus, 0, 1).empty());
    CHECK_THROWS_AS(make_pairs(plus, minus, -1, 1), std::invalid_argument);
  }

  SUBCASE("deterministic per seed") {
    std::vector<PairedRecord> a = make_pairs(plus, minus, 3, 99);
    std::vector<PairedRecord> b = make_pairs(plus, minus, 3, 99);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].chosen_text == b[i].chosen_text);
      CHECK(a[i].rejected_text == b[i].rejected_text);
    }
  }
}

TEST_CASE("quality is the fraction of instances with a correct record") {
  std::vector<PuzzleInstance> instances = {
      countdown_inst({2, 3, 5, 7}, 11), countdown_inst({2, 3, 5, 7}, 19),
      countdown_inst({2, 3, 5, 7}, 26), countdown_inst({2, 3, 5, 7}, 38)};

  std::vector<ReasonerOutput> outputs;
  outputs.push_back(output_of(instances[0], success_path(instances[0]), "tot"));
  outputs.push_back(output_of(instances[1], success_path(instances[1]), "tot"));
  outputs.push_back(output_of(instances[1], success_path(instances[1], 0), "rap"));
  for (const ReasoningPath& p : failing_paths(instances[2], 2)) {
    outputs.push_back(output_of(instances[2], p, "bfs"));
  }
  PathDataset dataset = collect(outputs);

  CHECK(quality(dataset, instances) == 0.5);
  CHECK(quality(dedup(dataset), instances) == 0.5);

  PathDataset none;
  CHECK(quality(none, instances) == 0.0);
  CHECK_THROWS_AS(quality(dataset, {}), empty_instance_set);
}

TEST_CASE("dataset files round-trip and re-verify on load") {
  const std::string file = "dataset_test_tmp.jsonl";
  std::remove(file.c_str());

  PuzzleInstance inst = countdown_inst({2, 3, 5, 7}, 19);
  std::vector<ReasonerOutput> outputs;
  outputs.push_back(output_of(inst, success_path(inst), "tot", Split::valid));
  for (const ReasoningPath& p : failing_paths(inst, 2)) {
    outputs.push_back(output_of(inst, p, "dfs", Split::valid));
  }
  PathDataset dataset = collect(outputs);
  save_dataset(file, dataset);
  PathDataset loaded = load_dataset(file);
  REQUIRE(loaded.size() == dataset.size());
  for (size_t i = 0; i < dataset.size(); ++i) CHECK(records_equal(dataset[i], loaded[i]));

  SUBCASE("flipped label fails to load") {
    std::vector<json> rows;
    for (const PathRecord& rec : dataset) rows.push_back(record_to_json(rec));
    rows[0]["label"] = 1 - rows[0]["label"].get<int>();
    write_jsonl(file, rows);
    CHECK_THROWS_AS(load_dataset(file), data_error);
  }

  SUBCASE("non-canonical path text fails to load") {
    std::vector<json> rows;
    for (const PathRecord& rec : dataset) rows.push_back(record_to_json(rec));
    std::string text = rows[1]["path"].get<std::string>();
    rows[1]["path"] = "  " + text;  // parses fine, but not canonical
    write_jsonl(file, rows);
    CHECK_THROWS_AS(load_dataset(file), data_error);
  }

  SUBCASE("missing field and unknown split fail to load") {
    std::vector<json> rows;
    for (const PathRecord& rec : dataset) rows.push_back(record_to_json(rec));
    rows[0].erase("reasoner");
    write_jsonl(file, rows);
    CHECK_THROWS_AS(load_dataset(file), data_error);

    rows.clear();
    for (const PathRecord& rec : dataset) rows.push_back(record_to_json(rec));
    rows[0]["split"] = "holdout";
    write_jsonl(file, rows);
    CHECK_THROWS_AS(load_dataset(file), data_error);
  }

  std::remove(file.c_str());
}

TEST_CASE("pair files round-trip and re-verify both sides") {
  const std::string file = "pairs_test_tmp.jsonl";
  std::remove(file.c_str());

  PuzzleInstance inst = countdown_inst({2, 3, 5, 7}, 19);
  std::vector<ReasonerOutput> outputs;
  outputs.push_back(output_of(inst, success_path(inst), "tot"));
  for (const ReasoningPath& p : failing_paths(inst, 3)) {
    outputs.push_back(output_of(inst, p, "tot"));
  }
  PathDataset dataset = collect(outputs);
  auto [plus, minus] = split_by_label(dataset);
  std::vector<PairedRecord> pairs = make_pairs(plus, minus, 2, 5);
  REQUIRE(pairs.size() == 2);

  save_pairs(file, pairs);
  std::vector<PairedRecord> loaded = load_pairs(file, Task::countdown);
  REQUIRE(loaded.size() == pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    CHECK(loaded[i].instance.key() == pairs[i].instance.key());
    CHECK(loaded[i].chosen_text == pairs[i].chosen_text);
    CHECK(loaded[i].rejected_text == pairs[i].rejected_text);
  }

  SUBCASE("swapped sides fail to load") {
    std::vector<json> rows;
    for (const PairedRecord& rec : pairs) {
      PairedRecord swapped = rec;
      std::swap(swapped.chosen_text, swapped.rejected_text);
      rows.push_back(paired_to_json(swapped));
    }
    write_jsonl(file, rows);
    CHECK_THROWS_AS(load_pairs(file, Task::countdown), data_error);
  }

  std::remove(file.c_str());
}
