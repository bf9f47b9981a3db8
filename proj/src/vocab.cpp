#include "pathforge/vocab.hpp"

#include <algorithm>
#include <cstring>

namespace pathforge {

Vocabulary::Vocabulary() {
  auto add = [&](const std::string& name, const std::string& surface) {
    names_.push_back(name);
    surfaces_.push_back(surface);
  };
  add("<bos>", "");
  add("<eos>", "");
  for (char d = '0'; d <= '9'; ++d) add(std::string(1, d), std::string(1, d));
  for (const char* s : {"+", "-", "*", "/", "(", ")", ":", "=", " ", "\n"}) add(s, s);
  for (const char* s : {"left", "Answer", "Input", "Target", "Steps"}) add(s, s);

  std::memset(char_ids_, 0xff, sizeof(char_ids_));
  for (int id = 0; id < size(); ++id) {
    const std::string& sf = surfaces_[id];
    if (sf.size() == 1) {
      char_ids_[static_cast<unsigned char>(sf[0])] = id;
    } else if (sf.size() > 1) {
      keyword_ids_.push_back(id);
    }
  }
  std::stable_sort(keyword_ids_.begin(), keyword_ids_.end(), [&](int a, int b) {
    return surfaces_[a].size() > surfaces_[b].size();
  });
}

const std::string& Vocabulary::name(int id) const {
  if (id < 0 || id >= size()) throw unknown_token("token id out of range: " + std::to_string(id));
  return names_[id];
}

const std::string& Vocabulary::surface(int id) const {
  if (id < 0 || id >= size()) throw unknown_token("token id out of range: " + std::to_string(id));
  return surfaces_[id];
}

int Vocabulary::id_of(const std::string& name) const {
  for (int id = 0; id < size(); ++id) {
    if (names_[id] == name) return id;
  }
  return -1;
}

std::vector<int> Vocabulary::encode(const std::string& text) const {
  std::vector<int> ids;
  size_t pos = 0;
  while (pos < text.size()) {
    int matched = -1;
    for (int kid : keyword_ids_) {
      const std::string& kw = surfaces_[kid];
      if (text.compare(pos, kw.size(), kw) == 0) {
        matched = kid;
        pos += kw.size();
        break;
      }
    }
    if (matched < 0) {
      int cid = char_ids_[static_cast<unsigned char>(text[pos])];
      if (cid < 0) {
        throw unknown_token("unencodable symbol '" + std::string(1, text[pos]) +
                            "' at offset " + std::to_string(pos));
      }
      matched = cid;
      ++pos;
    }
    ids.push_back(matched);
  }
  return ids;
}

std::vector<int> Vocabulary::encode_with_eos(const std::string& text) const {
  std::vector<int> ids = encode(text);
  ids.push_back(eos_id());
  return ids;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) out += surface(id);
  return out;
}

nlohmann::json Vocabulary::to_json() const {
  return nlohmann::json{{"tokens", names_}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  Vocabulary v;
  std::vector<std::string> names = j.at("tokens").get<std::vector<std::string>>();
  // The vocabulary is a fixed artifact of this project; a checkpoint written
  // with a different token table cannot be interpreted.
  if (names != v.names_) throw unknown_token("vocabulary mismatch in serialized form");
  return v;
}

}  // namespace pathforge
