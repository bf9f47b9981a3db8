#include "pathforge/dataset.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

#include "pathforge/path_text.hpp"
#include "pathforge/rng.hpp"

namespace pathforge {

std::string split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "train";
}

std::optional<Split> split_from_name(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "valid") return Split::valid;
  if (name == "test") return Split::test;
  return std::nullopt;
}

namespace {

// path_text never contains the unit separator, so this is collision-free.
std::string dedup_key(const PathRecord& rec) {
  return rec.instance.key() + '\x1f' + rec.path_text;
}

}  // namespace

PathDataset collect(const std::vector<ReasonerOutput>& outputs) {
  std::map<std::string, Split> split_of;
  struct Tagged {
    PathRecord record;
    std::string key;
    size_t arrival;
  };
  std::vector<Tagged> tagged;
  tagged.reserve(outputs.size());

  for (size_t i = 0; i < outputs.size(); ++i) {
    const ReasonerOutput& out = outputs[i];
    std::string key = out.instance.key();
    auto [it, inserted] = split_of.emplace(key, out.split);
    if (!inserted && it->second != out.split) {
      throw split_violation("instance " + key + " tagged both " + split_name(it->second) +
                            " and " + split_name(out.split));
    }
    Verdict checked = verify(out.instance, out.path);
    if (checked.success != out.verdict.success) {
      continue;  // mislabeled: the supplied verdict contradicts re-verification
    }
    PathRecord rec;
    rec.instance = out.instance;
    rec.path_text = render_path(out.path);
    rec.label = checked.success ? 1 : 0;
    rec.reasoner = out.reasoner;
    rec.split = out.split;
    tagged.push_back(Tagged{std::move(rec), std::move(key), i});
  }

  std::stable_sort(tagged.begin(), tagged.end(), [](const Tagged& a, const Tagged& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.record.reasoner != b.record.reasoner) return a.record.reasoner < b.record.reasoner;
    return a.arrival < b.arrival;
  });

  PathDataset dataset;
  dataset.reserve(tagged.size());
  for (Tagged& t : tagged) dataset.push_back(std::move(t.record));
  return dataset;
}

PathDataset dedup(const PathDataset& dataset) {
  PathDataset out;
  out.reserve(dataset.size());
  std::unordered_set<std::string> seen;
  seen.reserve(dataset.size() * 2);
  for (const PathRecord& rec : dataset) {
    if (seen.insert(dedup_key(rec)).second) out.push_back(rec);
  }
  return out;
}

std::pair<PathDataset, PathDataset> split_by_label(const PathDataset& dataset) {
  PathDataset plus;
  PathDataset minus;
  for (const PathRecord& rec : dataset) {
    (rec.label == 1 ? plus : minus).push_back(rec);
  }
  return {std::move(plus), std::move(minus)};
}

std::vector<PairedRecord> make_pairs(const PathDataset& d_plus, const PathDataset& d_minus,
                                     int pairs_per_success, uint64_t seed) {
  if (pairs_per_success < 0) {
    throw std::invalid_argument("pairs_per_success must be non-negative");
  }
  std::vector<PairedRecord> out;
  if (pairs_per_success == 0) return out;

  std::map<std::string, std::vector<const PathRecord*>> failures;
  for (const PathRecord& rec : d_minus) {
    if (rec.label == 0) failures[rec.instance.key()].push_back(&rec);
  }

  const size_t per_success = static_cast<size_t>(pairs_per_success);
  Rng rng(seed);
  for (const PathRecord& pos : d_plus) {
    if (pos.label != 1) continue;
    auto it = failures.find(pos.instance.key());
    if (it == failures.end()) continue;
    const std::vector<const PathRecord*>& negs = it->second;

    std::vector<size_t> picks;
    picks.reserve(per_success);
    if (negs.size() >= per_success) {
      // Without replacement: partial Fisher-Yates over the index pool.
      std::vector<size_t> idx(negs.size());
      std::iota(idx.begin(), idx.end(), size_t{0});
      for (size_t i = 0; i < per_success; ++i) {
        size_t j = static_cast<size_t>(
            rng.uniform_int(static_cast<int64_t>(i), static_cast<int64_t>(idx.size()) - 1));
        std::swap(idx[i], idx[j]);
        picks.push_back(idx[i]);
      }
    } else {
      for (size_t i = 0; i < per_success; ++i) {
        picks.push_back(static_cast<size_t>(
            rng.uniform_int(0, static_cast<int64_t>(negs.size()) - 1)));
      }
    }
    for (size_t p : picks) {
      out.push_back(PairedRecord{pos.instance, pos.path_text, negs[p]->path_text});
    }
  }
  return out;
}

double quality(const PathDataset& dataset, const std::vector<PuzzleInstance>& instances) {
  if (instances.empty()) {
    throw empty_instance_set("quality requires a nonempty instance set");
  }
  std::set<std::string> solved;
  for (const PathRecord& rec : dataset) {
    if (rec.label == 1) solved.insert(rec.instance.key());
  }
  size_t covered = 0;
  for (const PuzzleInstance& inst : instances) {
    covered += solved.count(inst.key());
  }
  return static_cast<double>(covered) / static_cast<double>(instances.size());
}

json record_to_json(const PathRecord& rec) {
  return json{{"task", task_name(rec.instance.task)},
              {"inputs", rec.instance.inputs},
              {"target", rec.instance.target},
              {"path", rec.path_text},
              {"label", rec.label},
              {"reasoner", rec.reasoner},
              {"split", split_name(rec.split)}};
}

namespace {

// Parses path text that must be canonical, returning the verified verdict.
Verdict parse_and_verify(const PuzzleInstance& inst, const std::string& text,
                         const char* what) {
  ParseResult parsed = parse_path(text);
  const ReasoningPath* path = std::get_if<ReasoningPath>(&parsed);
  if (!path) {
    throw data_error(std::string(what) + " does not parse: " +
                     std::get<ParseError>(parsed).reason);
  }
  if (render_path(*path) != text) {
    throw data_error(std::string(what) + " is not in canonical form");
  }
  return verify(inst, *path);
}

}  // namespace

PathRecord record_from_json(const json& j) {
  if (!j.is_object()) throw data_error("record must be a JSON object");
  for (const char* field : {"task", "inputs", "target", "path", "label", "reasoner", "split"}) {
    if (!j.contains(field)) throw data_error(std::string("record missing field ") + field);
  }
  PathRecord rec;
  rec.instance = instance_from_json(
      json{{"task", j.at("task")}, {"inputs", j.at("inputs")}, {"target", j.at("target")}});
  if (!j.at("path").is_string()) throw data_error("path must be a string");
  rec.path_text = j.at("path").get<std::string>();
  if (!j.at("label").is_number_integer()) throw data_error("label must be 0 or 1");
  rec.label = j.at("label").get<int>();
  if (rec.label != 0 && rec.label != 1) throw data_error("label must be 0 or 1");
  if (!j.at("reasoner").is_string()) throw data_error("reasoner must be a string");
  rec.reasoner = j.at("reasoner").get<std::string>();
  if (!j.at("split").is_string()) throw data_error("split must be a string");
  std::optional<Split> split = split_from_name(j.at("split").get<std::string>());
  if (!split) throw data_error("unknown split " + j.at("split").get<std::string>());
  rec.split = *split;

  Verdict verdict = parse_and_verify(rec.instance, rec.path_text, "path");
  if ((rec.label == 1) != verdict.success) {
    throw data_error("label " + std::to_string(rec.label) +
                     " contradicts verification of the stored path");
  }
  return rec;
}

json paired_to_json(const PairedRecord& rec) {
  return json{{"inputs", rec.instance.inputs},
              {"target", rec.instance.target},
              {"chosen", rec.chosen_text},
              {"rejected", rec.rejected_text}};
}

PairedRecord paired_from_json(const json& j, Task task) {
  if (!j.is_object()) throw data_error("pair must be a JSON object");
  for (const char* field : {"inputs", "target", "chosen", "rejected"}) {
    if (!j.contains(field)) throw data_error(std::string("pair missing field ") + field);
  }
  PairedRecord rec;
  rec.instance = instance_from_json(json{
      {"task", task_name(task)}, {"inputs", j.at("inputs")}, {"target", j.at("target")}});
  if (!j.at("chosen").is_string() || !j.at("rejected").is_string()) {
    throw data_error("chosen and rejected must be strings");
  }
  rec.chosen_text = j.at("chosen").get<std::string>();
  rec.rejected_text = j.at("rejected").get<std::string>();
  if (!parse_and_verify(rec.instance, rec.chosen_text, "chosen").success) {
    throw data_error("chosen path does not verify");
  }
  if (parse_and_verify(rec.instance, rec.rejected_text, "rejected").success) {
    throw data_error("rejected path verifies as correct");
  }
  return rec;
}

void save_dataset(const std::string& path, const PathDataset& dataset) {
  std::vector<json> rows;
  rows.reserve(dataset.size());
  for (const PathRecord& rec : dataset) rows.push_back(record_to_json(rec));
  write_jsonl(path, rows);
}

PathDataset load_dataset(const std::string& path) {
  std::vector<json> rows = read_jsonl(path);
  PathDataset dataset;
  dataset.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    try {
      dataset.push_back(record_from_json(rows[i]));
    } catch (const data_error& e) {
      throw data_error(path + " line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return dataset;
}

void save_pairs(const std::string& path, const std::vector<PairedRecord>& pairs) {
  std::vector<json> rows;
  rows.reserve(pairs.size());
  for (const PairedRecord& rec : pairs) rows.push_back(paired_to_json(rec));
  write_jsonl(path, rows);
}

std::vector<PairedRecord> load_pairs(const std::string& path, Task task) {
  std::vector<json> rows = read_jsonl(path);
  std::vector<PairedRecord> pairs;
  pairs.reserve(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    try {
      pairs.push_back(paired_from_json(rows[i], task));
    } catch (const data_error& e) {
      throw data_error(path + " line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return pairs;
}

}  // namespace pathforge
