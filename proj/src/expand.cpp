#include "pathforge/expand.hpp"

namespace pathforge {

std::vector<ValueNode> value_nodes_of(const PuzzleInstance& inst) {
  std::vector<ValueNode> nodes;
  nodes.reserve(4);
  for (int v : inst.inputs) {
    nodes.push_back(ValueNode{Rational(v), AnswerExpr::leaf(Rational(v))});
  }
  return nodes;
}

std::vector<StepCandidate> expand_state(const std::vector<ValueNode>& state, bool integer_only) {
  std::vector<StepCandidate> out;
  auto consider = [&](size_t i, size_t j, bool swapped, BinOp op) {
    const ValueNode& lhs = swapped ? state[j] : state[i];
    const ValueNode& rhs = swapped ? state[i] : state[j];
    Rational v;
    try {
      v = apply_op(op, lhs.value, rhs.value);
    } catch (const division_by_zero&) {
      return;
    } catch (const rational_overflow&) {
      return;
    }
    if (integer_only && !(v.is_integer() && v.is_positive())) return;

    StepCandidate cand;
    cand.step.a = lhs.value;
    cand.step.b = rhs.value;
    cand.step.op = op;
    cand.step.result = v;
    for (size_t k = 0; k < state.size(); ++k) {
      if (k != i && k != j) {
        cand.step.remaining.push_back(state[k].value);
        cand.next.push_back(state[k]);
      }
    }
    cand.step.remaining.push_back(v);
    cand.next.push_back(ValueNode{v, AnswerExpr::node(op, lhs.expr, rhs.expr)});
    out.push_back(std::move(cand));
  };

  for (size_t i = 0; i < state.size(); ++i) {
    for (size_t j = i + 1; j < state.size(); ++j) {
      for (BinOp op : {BinOp::add, BinOp::sub, BinOp::mul, BinOp::div}) {
        consider(i, j, false, op);
        if ((op == BinOp::sub || op == BinOp::div) && state[i].value != state[j].value) {
          consider(i, j, true, op);
        }
      }
    }
  }
  return out;
}

ReasoningPath finish_path(const std::vector<ReasoningStep>& steps, const ValueNode& last) {
  ReasoningPath path;
  path.steps = steps;
  path.answer = last.expr;
  path.answer_value = last.value;
  return path;
}

}  // namespace pathforge
