#pragma once

#include <vector>

#include "pathforge/puzzle.hpp"

namespace pathforge {

// A live value in a partial solution plus the expression that produced it,
// so a finished path can state its answer without re-deriving anything.
struct ValueNode {
  Rational value;
  AnswerExprPtr expr;
};

std::vector<ValueNode> value_nodes_of(const PuzzleInstance& inst);

// One legal next step from a state, with the successor state spelled out.
struct StepCandidate {
  ReasoningStep step;
  std::vector<ValueNode> next;
};

// All legal steps from `state` in a fixed deterministic order: index pairs
// (i < j), operators + - * /, swapped operand order for - and / when the
// operands differ. Division by zero is skipped. With integer_only set, only
// steps with positive integer results are produced.
std::vector<StepCandidate> expand_state(const std::vector<ValueNode>& state, bool integer_only);

// Answer assembled from a finished state (single value left).
ReasoningPath finish_path(const std::vector<ReasoningStep>& steps, const ValueNode& last);

}  // namespace pathforge
