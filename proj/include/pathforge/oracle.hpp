#pragma once

#include <vector>

#include "pathforge/puzzle.hpp"

namespace pathforge {

// Exhaustive solver over all operand pairs, all four operators (both operand
// orders for '-' and '/'), and all step orderings. Returns every distinct
// valid path; each one verifies successfully against the instance. With
// integer_only set, intermediate results are restricted to positive integers.
std::vector<ReasoningPath> enumerate_solutions(const PuzzleInstance& inst, bool integer_only);

// True when the target is exactly producible from the remaining values.
// integer_only restricts intermediates to positive integers, matching the
// space the classic searches explore.
bool reachable(const std::vector<Rational>& remaining, const Rational& target,
               bool integer_only = false);

}  // namespace pathforge
