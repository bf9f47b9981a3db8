#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pathforge/puzzle.hpp"

namespace pathforge {

using json = nlohmann::json;

// File or record content that fails validation. The CLI maps this family to
// its data-error exit code.
class data_error : public std::runtime_error {
public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

json instance_to_json(const PuzzleInstance& inst);
PuzzleInstance instance_from_json(const json& j);

// JSON-lines helpers. Readers validate per line and throw data_error with
// the offending line number.
void write_jsonl(const std::string& path, const std::vector<json>& rows);
std::vector<json> read_jsonl(const std::string& path);

void write_instances_jsonl(const std::string& path, const std::vector<PuzzleInstance>& v);
std::vector<PuzzleInstance> read_instances_jsonl(const std::string& path);

// 64-bit FNV-1a over a string. Used to derive per-instance seeds from an
// instance key so results are independent of instance order.
uint64_t fnv1a64(const std::string& text);

// The same hash rendered as 16 hex chars, for config digests in evaluation
// reports.
std::string fnv1a_hex(const std::string& text);

}  // namespace pathforge
