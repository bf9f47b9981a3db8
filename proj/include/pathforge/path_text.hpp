#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "pathforge/puzzle.hpp"

namespace pathforge {

// Line-oriented grammar for reasoning paths:
//
//   step   := RAT op RAT '=' RAT '(' 'left' ':' RAT* ')'
//   answer := 'Answer' ':' expr '=' RAT
//   path   := step ('\n' step)* ('\n' answer)? | answer
//
// Canonical rendering puts one space around every operator and between list
// items, and no trailing newline. The parser accepts arbitrary runs of
// spaces (including none) between tokens and tolerates a trailing newline.

struct ParseError {
  int line = 0;  // 1-based line index of the offending line
  std::string reason;
};

using ParseResult = std::variant<ReasoningPath, ParseError>;

ParseResult parse_path(std::string_view text);

std::string render_step(const ReasoningStep& step);
std::string render_answer_expr(const AnswerExpr& expr);
std::string render_path(const ReasoningPath& path);

// "v1 v2 v3" with single spaces.
std::string render_value_list(const std::vector<Rational>& values);

}  // namespace pathforge
