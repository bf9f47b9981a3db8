#include "pathforge/puzzle.hpp"

#include <algorithm>
#include <sstream>

#include "pathforge/path_text.hpp"

namespace pathforge {

std::string task_name(Task t) {
  return t == Task::game24 ? "game24" : "countdown";
}

std::optional<Task> task_from_name(std::string_view name) {
  if (name == "game24") return Task::game24;
  if (name == "countdown") return Task::countdown;
  return std::nullopt;
}

char op_symbol(BinOp op) {
  switch (op) {
    case BinOp::add: return '+';
    case BinOp::sub: return '-';
    case BinOp::mul: return '*';
    case BinOp::div: return '/';
  }
  return '?';
}

std::optional<BinOp> op_from_symbol(char c) {
  switch (c) {
    case '+': return BinOp::add;
    case '-': return BinOp::sub;
    case '*': return BinOp::mul;
    case '/': return BinOp::div;
  }
  return std::nullopt;
}

Rational apply_op(BinOp op, const Rational& a, const Rational& b) {
  switch (op) {
    case BinOp::add: return a + b;
    case BinOp::sub: return a - b;
    case BinOp::mul: return a * b;
    case BinOp::div: return a / b;
  }
  throw std::logic_error("bad op");
}

std::string PuzzleInstance::key() const {
  std::array<int, 4> sorted = inputs;
  std::sort(sorted.begin(), sorted.end());
  std::ostringstream os;
  os << task_name(task);
  for (int v : sorted) os << ' ' << v;
  os << " -> " << target;
  return os.str();
}

std::string PuzzleInstance::prompt() const {
  std::ostringstream os;
  os << "Input:";
  for (int v : inputs) os << ' ' << v;
  os << " Target: " << target << "\nSteps:\n";
  return os.str();
}

std::optional<std::string> PuzzleInstance::invalid_reason() const {
  for (int v : inputs) {
    if (v < 1) return "inputs must be positive";
    if (task == Task::game24 && v > 13) return "game24 inputs must be in [1, 13]";
  }
  if (task == Task::game24 && target != 24) return "game24 target must be 24";
  if (target < 1) return "target must be positive";
  return std::nullopt;
}

AnswerExprPtr AnswerExpr::leaf(Rational v) {
  auto e = std::make_shared<AnswerExpr>();
  e->value = v;
  return e;
}

AnswerExprPtr AnswerExpr::node(BinOp op, AnswerExprPtr l, AnswerExprPtr r) {
  auto e = std::make_shared<AnswerExpr>();
  e->op = op;
  e->left = std::move(l);
  e->right = std::move(r);
  return e;
}

Rational eval_expr(const AnswerExpr& e) {
  if (e.is_leaf()) return e.value;
  return apply_op(e.op, eval_expr(*e.left), eval_expr(*e.right));
}

static void collect_leaves(const AnswerExpr& e, std::vector<Rational>& out) {
  if (e.is_leaf()) {
    out.push_back(e.value);
    return;
  }
  collect_leaves(*e.left, out);
  collect_leaves(*e.right, out);
}

std::vector<Rational> expr_leaves(const AnswerExpr& e) {
  std::vector<Rational> out;
  collect_leaves(e, out);
  return out;
}

std::string verdict_reason_name(VerdictReason r) {
  switch (r) {
    case VerdictReason::ok: return "ok";
    case VerdictReason::parse_error: return "parse_error";
    case VerdictReason::bad_step_arithmetic: return "bad_step_arithmetic";
    case VerdictReason::remaining_mismatch: return "remaining_mismatch";
    case VerdictReason::number_reuse: return "number_reuse";
    case VerdictReason::answer_inputs_mismatch: return "answer_inputs_mismatch";
    case VerdictReason::answer_value_mismatch: return "answer_value_mismatch";
    case VerdictReason::target_miss: return "target_miss";
  }
  return "?";
}

bool multiset_equal(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  if (a.size() != b.size()) return false;
  std::vector<Rational> sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  for (size_t i = 0; i < sa.size(); ++i) {
    if (sa[i] != sb[i]) return false;
  }
  return true;
}

bool multiset_remove_one(std::vector<Rational>& v, const Rational& x) {
  for (auto it = v.begin(); it != v.end(); ++it) {
    if (*it == x) {
      v.erase(it);
      return true;
    }
  }
  return false;
}

ApplyResult apply_step(const std::vector<Rational>& remaining, const ReasoningStep& step) {
  ApplyResult res;
  std::vector<Rational> work = remaining;
  if (!multiset_remove_one(work, step.a) || !multiset_remove_one(work, step.b)) {
    res.error = StepError::operand_not_available;
    return res;
  }
  Rational value;
  try {
    value = apply_op(step.op, step.a, step.b);
  } catch (const division_by_zero&) {
    res.error = StepError::division_by_zero;
    return res;
  } catch (const rational_overflow&) {
    res.error = StepError::result_mismatch;
    return res;
  }
  if (value != step.result) {
    res.error = StepError::result_mismatch;
    return res;
  }
  work.push_back(value);
  res.remaining = std::move(work);
  return res;
}

static Verdict fail(VerdictReason reason, std::string detail) {
  return Verdict{false, reason, std::move(detail)};
}

Verdict verify(const PuzzleInstance& inst, const ReasoningPath& path) {
  std::vector<Rational> inputs;
  inputs.reserve(4);
  for (int v : inst.inputs) inputs.push_back(Rational(v));
  const Rational target = Rational(inst.target);

  // Replay the step chain against the instance inputs.
  std::vector<Rational> cur = inputs;
  for (size_t k = 0; k < path.steps.size(); ++k) {
    const ReasoningStep& step = path.steps[k];
    ApplyResult applied = apply_step(cur, step);
    switch (applied.error) {
      case StepError::operand_not_available:
        return fail(VerdictReason::number_reuse,
                    "step " + std::to_string(k + 1) + " uses unavailable operand");
      case StepError::division_by_zero:
      case StepError::result_mismatch:
        return fail(VerdictReason::bad_step_arithmetic,
                    "step " + std::to_string(k + 1) + " arithmetic is wrong");
      case StepError::none:
        break;
    }
    if (!multiset_equal(applied.remaining, step.remaining)) {
      return fail(VerdictReason::remaining_mismatch,
                  "step " + std::to_string(k + 1) + " remaining list is wrong");
    }
    cur = step.remaining;
  }

  // Answer checks run before the final-state check so that a wrong or
  // incomplete answer is reported for what it is even on short paths.
  if (!path.answer) {
    return fail(VerdictReason::target_miss, "no answer line");
  }
  std::vector<Rational> leaves = expr_leaves(*path.answer);
  if (!multiset_equal(leaves, inputs)) {
    return fail(VerdictReason::answer_inputs_mismatch,
                "answer must use each input exactly once");
  }
  Rational value;
  try {
    value = eval_expr(*path.answer);
  } catch (const division_by_zero&) {
    return fail(VerdictReason::answer_value_mismatch, "answer divides by zero");
  } catch (const rational_overflow&) {
    return fail(VerdictReason::answer_value_mismatch, "answer value overflows");
  }
  if (value != path.answer_value) {
    return fail(VerdictReason::answer_value_mismatch,
                "answer expression evaluates to " + value.str() + ", not " +
                    path.answer_value.str());
  }
  if (value != target) {
    return fail(VerdictReason::target_miss,
                "answer value " + value.str() + " misses target " + target.str());
  }
  if (cur.size() != 1 || cur[0] != target) {
    return fail(VerdictReason::target_miss, "steps do not reduce the inputs to the target");
  }
  return Verdict{true, VerdictReason::ok, ""};
}

Verdict verify_text(const PuzzleInstance& inst, std::string_view path_text) {
  ParseResult parsed = parse_path(path_text);
  if (const ParseError* err = std::get_if<ParseError>(&parsed)) {
    return fail(VerdictReason::parse_error,
                "line " + std::to_string(err->line) + ": " + err->reason);
  }
  return verify(inst, std::get<ReasoningPath>(parsed));
}

}  // namespace pathforge
