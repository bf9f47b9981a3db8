#include "pathforge/io.hpp"

#include <fstream>

namespace pathforge {

json instance_to_json(const PuzzleInstance& inst) {
  return json{{"task", task_name(inst.task)},
              {"inputs", inst.inputs},
              {"target", inst.target}};
}

PuzzleInstance instance_from_json(const json& j) {
  PuzzleInstance inst;
  auto task = task_from_name(j.at("task").get<std::string>());
  if (!task) throw data_error("unknown task: " + j.at("task").get<std::string>());
  inst.task = *task;
  auto inputs = j.at("inputs");
  if (!inputs.is_array() || inputs.size() != 4) {
    throw data_error("'inputs' must be an array of 4 integers");
  }
  for (size_t i = 0; i < 4; ++i) inst.inputs[i] = inputs[i].get<int>();
  inst.target = j.at("target").get<int>();
  if (auto reason = inst.invalid_reason()) throw data_error("invalid instance: " + *reason);
  return inst;
}

void write_jsonl(const std::string& path, const std::vector<json>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot open for writing: " + path);
  for (const json& row : rows) out << row.dump() << '\n';
  if (!out) throw data_error("write failed: " + path);
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open: " + path);
  std::vector<json> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw data_error(path + ":" + std::to_string(line_no) + ": invalid JSON");
    }
    rows.push_back(std::move(j));
  }
  return rows;
}

void write_instances_jsonl(const std::string& path, const std::vector<PuzzleInstance>& v) {
  std::vector<json> rows;
  rows.reserve(v.size());
  for (const auto& inst : v) rows.push_back(instance_to_json(inst));
  write_jsonl(path, rows);
}

std::vector<PuzzleInstance> read_instances_jsonl(const std::string& path) {
  std::vector<PuzzleInstance> out;
  int line_no = 0;
  for (const json& row : read_jsonl(path)) {
    ++line_no;
    try {
      out.push_back(instance_from_json(row));
    } catch (const json::exception& e) {
      throw data_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const data_error& e) {
      throw data_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

uint64_t fnv1a64(const std::string& text) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fnv1a_hex(const std::string& text) {
  uint64_t h = fnv1a64(text);
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace pathforge
