#include "pathforge/path_text.hpp"

#include <cctype>

namespace pathforge {
namespace {

// Single-line token cursor. Tokens are self-delimiting; runs of spaces
// (including none, where unambiguous) are skipped between them.
class Cursor {
public:
  explicit Cursor(std::string_view line) : line_(line) {}

  void skip_spaces() {
    while (pos_ < line_.size() && line_[pos_] == ' ') ++pos_;
  }

  bool at_end() {
    skip_spaces();
    return pos_ >= line_.size();
  }

  bool match_char(char c) {
    skip_spaces();
    if (pos_ < line_.size() && line_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  bool match_word(std::string_view word) {
    skip_spaces();
    if (line_.substr(pos_, word.size()) == word) {
      pos_ += word.size();
      return true;
    }
    return false;
  }

  char peek() {
    skip_spaces();
    return pos_ < line_.size() ? line_[pos_] : '\0';
  }

  // Reads "p", "-p", or "p/q" (fraction slash binds only with no spaces).
  std::optional<Rational> read_rational() {
    skip_spaces();
    size_t start = pos_;
    if (pos_ < line_.size() && line_[pos_] == '-') ++pos_;
    size_t digits = pos_;
    while (pos_ < line_.size() && std::isdigit(static_cast<unsigned char>(line_[pos_]))) ++pos_;
    if (pos_ == digits) {
      pos_ = start;
      return std::nullopt;
    }
    if (pos_ + 1 < line_.size() && line_[pos_] == '/' &&
        std::isdigit(static_cast<unsigned char>(line_[pos_ + 1]))) {
      ++pos_;
      while (pos_ < line_.size() && std::isdigit(static_cast<unsigned char>(line_[pos_]))) ++pos_;
    }
    auto r = Rational::parse(line_.substr(start, pos_ - start));
    if (!r) pos_ = start;
    return r;
  }

  // Reads a positive integer literal (an answer-expression leaf).
  std::optional<Rational> read_int_leaf() {
    skip_spaces();
    size_t start = pos_;
    while (pos_ < line_.size() && std::isdigit(static_cast<unsigned char>(line_[pos_]))) ++pos_;
    if (pos_ == start) return std::nullopt;
    auto r = Rational::parse(line_.substr(start, pos_ - start));
    if (!r) pos_ = start;
    return r;
  }

  std::optional<BinOp> read_op() {
    skip_spaces();
    if (pos_ >= line_.size()) return std::nullopt;
    auto op = op_from_symbol(line_[pos_]);
    if (op) ++pos_;
    return op;
  }

private:
  std::string_view line_;
  size_t pos_ = 0;
};

struct LineError {
  std::string reason;
};

using StepOrError = std::variant<ReasoningStep, LineError>;

StepOrError parse_step_line(std::string_view line) {
  Cursor c(line);
  ReasoningStep step;
  auto a = c.read_rational();
  if (!a) return LineError{"expected a number"};
  step.a = *a;
  auto op = c.read_op();
  if (!op) return LineError{"expected an operator"};
  step.op = *op;
  auto b = c.read_rational();
  if (!b) return LineError{"expected a second operand"};
  step.b = *b;
  if (!c.match_char('=')) return LineError{"expected '='"};
  auto r = c.read_rational();
  if (!r) return LineError{"expected a result"};
  step.result = *r;
  if (!c.match_char('(')) return LineError{"expected '(left: ...)'"};
  if (!c.match_word("left")) return LineError{"expected 'left'"};
  if (!c.match_char(':')) return LineError{"expected ':' after 'left'"};
  while (!c.match_char(')')) {
    auto v = c.read_rational();
    if (!v) return LineError{"bad number in remaining list"};
    step.remaining.push_back(*v);
  }
  if (!c.at_end()) return LineError{"trailing characters after step"};
  return step;
}

// expr := term (('+'|'-') term)* ; term := factor (('*'|'/') factor)* ;
// factor := INT | '(' expr ')'
AnswerExprPtr parse_expr(Cursor& c, std::string& err);

AnswerExprPtr parse_factor(Cursor& c, std::string& err) {
  if (c.match_char('(')) {
    AnswerExprPtr inner = parse_expr(c, err);
    if (!inner) return nullptr;
    if (!c.match_char(')')) {
      err = "expected ')'";
      return nullptr;
    }
    return inner;
  }
  auto v = c.read_int_leaf();
  if (!v) {
    err = "expected a number or '('";
    return nullptr;
  }
  return AnswerExpr::leaf(*v);
}

AnswerExprPtr parse_term(Cursor& c, std::string& err) {
  AnswerExprPtr node = parse_factor(c, err);
  if (!node) return nullptr;
  while (true) {
    char next = c.peek();
    if (next != '*' && next != '/') return node;
    BinOp op = *op_from_symbol(next);
    c.match_char(next);
    AnswerExprPtr rhs = parse_factor(c, err);
    if (!rhs) return nullptr;
    node = AnswerExpr::node(op, node, rhs);
  }
}

AnswerExprPtr parse_expr(Cursor& c, std::string& err) {
  AnswerExprPtr node = parse_term(c, err);
  if (!node) return nullptr;
  while (true) {
    char next = c.peek();
    if (next != '+' && next != '-') return node;
    BinOp op = *op_from_symbol(next);
    c.match_char(next);
    AnswerExprPtr rhs = parse_term(c, err);
    if (!rhs) return nullptr;
    node = AnswerExpr::node(op, node, rhs);
  }
}

struct AnswerParts {
  AnswerExprPtr expr;
  Rational value;
};

std::variant<AnswerParts, LineError> parse_answer_line(std::string_view line) {
  Cursor c(line);
  if (!c.match_word("Answer")) return LineError{"expected 'Answer'"};
  if (!c.match_char(':')) return LineError{"expected ':' after 'Answer'"};
  std::string err;
  AnswerExprPtr expr = parse_expr(c, err);
  if (!expr) return LineError{err};
  if (!c.match_char('=')) return LineError{"expected '=' after answer expression"};
  auto value = c.read_rational();
  if (!value) return LineError{"expected the answer value"};
  if (!c.at_end()) return LineError{"trailing characters after answer"};
  return AnswerParts{expr, *value};
}

bool looks_like_answer(std::string_view line) {
  size_t i = 0;
  while (i < line.size() && line[i] == ' ') ++i;
  return line.substr(i, 6) == "Answer";
}

}  // namespace

ParseResult parse_path(std::string_view text) {
  // One trailing newline is tolerated; everything else must be step or
  // answer lines.
  if (!text.empty() && text.back() == '\n') text.remove_suffix(1);
  if (text.empty()) return ParseError{1, "empty path"};

  ReasoningPath path;
  bool saw_answer = false;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view line =
        nl == std::string_view::npos ? text.substr(pos) : text.substr(pos, nl - pos);
    ++line_no;
    if (saw_answer) return ParseError{line_no, "content after the answer line"};
    if (line.find_first_not_of(' ') == std::string_view::npos) {
      return ParseError{line_no, "blank line"};
    }
    if (looks_like_answer(line)) {
      auto parsed = parse_answer_line(line);
      if (const LineError* e = std::get_if<LineError>(&parsed)) {
        return ParseError{line_no, e->reason};
      }
      auto& parts = std::get<AnswerParts>(parsed);
      path.answer = parts.expr;
      path.answer_value = parts.value;
      saw_answer = true;
    } else {
      auto parsed = parse_step_line(line);
      if (const LineError* e = std::get_if<LineError>(&parsed)) {
        return ParseError{line_no, e->reason};
      }
      path.steps.push_back(std::move(std::get<ReasoningStep>(parsed)));
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return path;
}

std::string render_value_list(const std::vector<Rational>& values) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ' ';
    out += values[i].str();
  }
  return out;
}

std::string render_step(const ReasoningStep& step) {
  std::string out = step.a.str();
  out += ' ';
  out += op_symbol(step.op);
  out += ' ';
  out += step.b.str();
  out += " = ";
  out += step.result.str();
  out += " (left: ";
  out += render_value_list(step.remaining);
  out += ')';
  return out;
}

namespace {

std::string render_operand(const AnswerExpr& e) {
  if (e.is_leaf()) return e.value.str();
  return "(" + render_answer_expr(e) + ")";
}

}  // namespace

std::string render_answer_expr(const AnswerExpr& expr) {
  if (expr.is_leaf()) return expr.value.str();
  std::string out = render_operand(*expr.left);
  out += ' ';
  out += op_symbol(expr.op);
  out += ' ';
  out += render_operand(*expr.right);
  return out;
}

std::string render_path(const ReasoningPath& path) {
  std::string out;
  for (size_t i = 0; i < path.steps.size(); ++i) {
    if (i > 0) out += '\n';
    out += render_step(path.steps[i]);
  }
  if (path.answer) {
    if (!path.steps.empty()) out += '\n';
    out += "Answer: ";
    out += render_answer_expr(*path.answer);
    out += " = ";
    out += path.answer_value.str();
  }
  return out;
}

}  // namespace pathforge
