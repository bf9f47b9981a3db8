#include "pathforge/oracle.hpp"

#include <set>
#include <string>

#include "pathforge/expand.hpp"
#include "pathforge/path_text.hpp"

namespace pathforge {
namespace {

void enumerate_rec(const std::vector<ValueNode>& state, const Rational& target,
                   bool integer_only, std::vector<ReasoningStep>& steps,
                   std::set<std::string>& seen, std::vector<ReasoningPath>& out) {
  if (state.size() == 1) {
    if (state[0].value != target) return;
    ReasoningPath path = finish_path(steps, state[0]);
    std::string text = render_path(path);
    // Equal operands make some swapped-order steps coincide; keep one copy.
    if (seen.insert(text).second) out.push_back(std::move(path));
    return;
  }
  for (const StepCandidate& cand : expand_state(state, integer_only)) {
    steps.push_back(cand.step);
    enumerate_rec(cand.next, target, integer_only, steps, seen, out);
    steps.pop_back();
  }
}

bool reachable_rec(const std::vector<Rational>& values, const Rational& target,
                   bool integer_only) {
  if (values.size() == 1) return values[0] == target;
  for (size_t i = 0; i < values.size(); ++i) {
    for (size_t j = i + 1; j < values.size(); ++j) {
      for (BinOp op : {BinOp::add, BinOp::sub, BinOp::mul, BinOp::div}) {
        for (int swapped = 0; swapped < 2; ++swapped) {
          if (swapped && op != BinOp::sub && op != BinOp::div) continue;
          if (swapped && values[i] == values[j]) continue;
          const Rational& a = swapped ? values[j] : values[i];
          const Rational& b = swapped ? values[i] : values[j];
          Rational v;
          try {
            v = apply_op(op, a, b);
          } catch (const division_by_zero&) {
            continue;
          } catch (const rational_overflow&) {
            continue;
          }
          if (integer_only && !(v.is_integer() && v.is_positive())) continue;
          std::vector<Rational> next;
          next.reserve(values.size() - 1);
          for (size_t k = 0; k < values.size(); ++k) {
            if (k != i && k != j) next.push_back(values[k]);
          }
          next.push_back(v);
          if (reachable_rec(next, target, integer_only)) return true;
        }
      }
    }
  }
  return false;
}

}  // namespace

std::vector<ReasoningPath> enumerate_solutions(const PuzzleInstance& inst, bool integer_only) {
  std::vector<ValueNode> state = value_nodes_of(inst);
  std::vector<ReasoningStep> steps;
  std::set<std::string> seen;
  std::vector<ReasoningPath> out;
  enumerate_rec(state, Rational(inst.target), integer_only, steps, seen, out);
  return out;
}

bool reachable(const std::vector<Rational>& remaining, const Rational& target,
               bool integer_only) {
  if (remaining.empty()) return false;
  return reachable_rec(remaining, target, integer_only);
}

}  // namespace pathforge
