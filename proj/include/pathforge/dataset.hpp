#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pathforge/io.hpp"
#include "pathforge/puzzle.hpp"

namespace pathforge {

enum class Split { train, valid, test };

std::string split_name(Split s);
std::optional<Split> split_from_name(std::string_view name);

// An instance key was seen under two different split tags (data leakage).
class split_violation : public data_error {
 public:
  explicit split_violation(const std::string& what) : data_error(what) {}
};

class empty_instance_set : public std::invalid_argument {
 public:
  explicit empty_instance_set(const std::string& what) : std::invalid_argument(what) {}
};

// One labeled reasoning path. path_text is always the canonical rendering
// and label is 1 exactly when the path verifies against the instance; both
// are enforced at ingest and again when loading from disk.
struct PathRecord {
  PuzzleInstance instance;
  std::string path_text;
  int label = 0;
  std::string reasoner;
  Split split = Split::train;
};

using PathDataset = std::vector<PathRecord>;

// A preference pair on one instance: chosen verifies, rejected does not.
struct PairedRecord {
  PuzzleInstance instance;
  std::string chosen_text;
  std::string rejected_text;
};

// What a reasoner hands the collector for each explored path.
struct ReasonerOutput {
  PuzzleInstance instance;
  ReasoningPath path;
  Verdict verdict;
  std::string reasoner;
  Split split = Split::train;
};

// Merges reasoner outputs into a dataset: canonical rendering, recomputed
// labels (outputs whose supplied verdict contradicts re-verification are
// dropped), records ordered by (instance key, reasoner, arrival index).
// Throws split_violation when one instance carries two split tags.
PathDataset collect(const std::vector<ReasonerOutput>& outputs);

// Keeps the first record for each (instance key, path_text); idempotent and
// order-preserving.
PathDataset dedup(const PathDataset& dataset);

// Partition by label: (correct, failed). Order within each side preserved.
std::pair<PathDataset, PathDataset> split_by_label(const PathDataset& dataset);

// Preference pairs for instances that have both labels: every correct record
// gets pairs_per_success rejected partners drawn uniformly from the same
// instance's failures, without replacement when enough exist, with
// replacement otherwise. Deterministic per seed.
std::vector<PairedRecord> make_pairs(const PathDataset& d_plus, const PathDataset& d_minus,
                                     int pairs_per_success, uint64_t seed);

// Fraction of the given instances that have at least one correct record.
double quality(const PathDataset& dataset, const std::vector<PuzzleInstance>& instances);

json record_to_json(const PathRecord& rec);
// Validates types, canonical form, and the label against re-verification.
PathRecord record_from_json(const json& j);

json paired_to_json(const PairedRecord& rec);
// The file format stores no task tag, so the caller supplies it. Both sides
// are re-verified: chosen must succeed, rejected must fail.
PairedRecord paired_from_json(const json& j, Task task);

void save_dataset(const std::string& path, const PathDataset& dataset);
PathDataset load_dataset(const std::string& path);

void save_pairs(const std::string& path, const std::vector<PairedRecord>& pairs);
std::vector<PairedRecord> load_pairs(const std::string& path, Task task);

}  // namespace pathforge
