#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pathforge/rational.hpp"

namespace pathforge {

enum class Task { game24, countdown };

std::string task_name(Task t);
std::optional<Task> task_from_name(std::string_view name);

enum class BinOp { add, sub, mul, div };

char op_symbol(BinOp op);
std::optional<BinOp> op_from_symbol(char c);

// Exact a <op> b; throws division_by_zero.
Rational apply_op(BinOp op, const Rational& a, const Rational& b);

// One four-number arithmetic puzzle. `inputs` is a multiset; the stored order
// is only presentation order for prompts and serialization.
struct PuzzleInstance {
  Task task = Task::countdown;
  std::array<int, 4> inputs{};
  int target = 0;

  // Canonical identity: task, sorted inputs, target. Two instances with the
  // same key are the same puzzle regardless of input order.
  std::string key() const;

  // Conditioning text a policy sees: "Input: a b c d Target: t\nSteps:\n".
  std::string prompt() const;

  // Returns a reason when the instance violates task bounds, else nullopt.
  std::optional<std::string> invalid_reason() const;
};

// One line of reasoning: "a op b = result (left: ...)". `remaining` is the
// multiset after the step, in the order it was written.
struct ReasoningStep {
  Rational a;
  BinOp op = BinOp::add;
  Rational b;
  Rational result;
  std::vector<Rational> remaining;
};

// Arithmetic expression over the instance inputs (the answer line).
struct AnswerExpr;
using AnswerExprPtr = std::shared_ptr<const AnswerExpr>;

struct AnswerExpr {
  // Leaf when left == nullptr; then `value` holds the literal.
  Rational value;
  BinOp op = BinOp::add;
  AnswerExprPtr left;
  AnswerExprPtr right;

  static AnswerExprPtr leaf(Rational v);
  static AnswerExprPtr node(BinOp op, AnswerExprPtr l, AnswerExprPtr r);
  bool is_leaf() const { return left == nullptr; }
};

// Evaluates the expression exactly; throws division_by_zero / rational_overflow.
Rational eval_expr(const AnswerExpr& e);
// Multiset of leaf literals, in-order.
std::vector<Rational> expr_leaves(const AnswerExpr& e);

// A full reasoning trace. `answer` may be null for abandoned branches that
// never reached an answer line; `answer_value` is the value declared after
// the '=' on the answer line.
struct ReasoningPath {
  std::vector<ReasoningStep> steps;
  AnswerExprPtr answer;
  Rational answer_value;
};

enum class VerdictReason {
  ok,
  parse_error,
  bad_step_arithmetic,
  remaining_mismatch,
  number_reuse,
  answer_inputs_mismatch,
  answer_value_mismatch,
  target_miss,
};

std::string verdict_reason_name(VerdictReason r);

struct Verdict {
  bool success = false;
  VerdictReason reason = VerdictReason::ok;
  std::string detail;
};

// --- multiset helpers (vectors of rationals, order = presentation) ---

bool multiset_equal(const std::vector<Rational>& a, const std::vector<Rational>& b);
// Removes the first occurrence of x; false when absent.
bool multiset_remove_one(std::vector<Rational>& v, const Rational& x);

enum class StepError { none, operand_not_available, division_by_zero, result_mismatch };

struct ApplyResult {
  StepError error = StepError::none;
  std::vector<Rational> remaining;  // valid only when error == none
  bool ok() const { return error == StepError::none; }
};

// Applies one step to a working multiset: removes the operands (first
// occurrences, preserving order), appends the result. Rejects steps whose
// declared result is not the exact value of a <op> b.
ApplyResult apply_step(const std::vector<Rational>& remaining, const ReasoningStep& step);

// Process-based check of a whole path against an instance. Success iff every
// step is valid starting from the instance inputs, the final remaining
// multiset is exactly {target}, and the answer expression uses each input
// exactly once and evaluates exactly to the target.
Verdict verify(const PuzzleInstance& inst, const ReasoningPath& path);

// Parses then verifies; unparseable text yields a parse_error verdict.
Verdict verify_text(const PuzzleInstance& inst, std::string_view path_text);

}  // namespace pathforge
