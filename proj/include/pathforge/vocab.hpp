#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"

namespace pathforge {

// Raised when text contains a symbol outside the vocabulary, or when a token
// id is out of range.
class unknown_token : public std::runtime_error {
 public:
  explicit unknown_token(const std::string& what) : std::runtime_error(what) {}
};

// Fixed hybrid character/keyword vocabulary for reasoning-path text.
//
// Single-character tokens cover digits, arithmetic operators, parentheses,
// ':', '=', space and newline; the grammar keywords ("left", "Answer",
// "Input", "Target", "Steps") are single tokens. Two special tokens <bos>
// and <eos> have empty surface text and never appear in encoded output.
//
// Encoding is longest-match: keywords are matched before single characters.
// No keyword is a prefix of another and no letter exists as a standalone
// token, so encode(decode(ids)) == ids for every sequence of surface tokens.
class Vocabulary {
 public:
  Vocabulary();

  int size() const { return static_cast<int>(names_.size()); }
  int bos_id() const { return 0; }
  int eos_id() const { return 1; }

  // Display name of a token ("<bos>", "left", "7", ...).
  const std::string& name(int id) const;
  // Text the token contributes when decoded (empty for <bos>/<eos>).
  const std::string& surface(int id) const;
  // Id of the token with this display name, or -1 if absent.
  int id_of(const std::string& name) const;

  // Text -> surface token ids. Throws unknown_token on unencodable symbols.
  std::vector<int> encode(const std::string& text) const;
  // Token ids -> concatenated surface text. <bos>/<eos> contribute nothing.
  std::vector<int> encode_with_eos(const std::string& text) const;
  std::string decode(const std::vector<int>& ids) const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

  bool operator==(const Vocabulary& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::vector<std::string> surfaces_;
  // Keyword ids sorted by surface length descending, probed before chars.
  std::vector<int> keyword_ids_;
  int char_ids_[256];
};

}  // namespace pathforge
