#pragma once

#include <cstdint>
#include <vector>

#include "kfair/model.hpp"

namespace kfair {

/// LP in standard inequality form:  max c'x  s.t.  A x <= b,  x >= 0.
struct LpProblem {
  std::vector<Vector> rows;  // A, one entry per constraint
  Vector rhs;                // b
  Vector objective;          // c
};

enum class LpStatus {
  Optimal,
  Infeasible,
  Unbounded,
  Stalled,  // pivot cap hit; caller treats the node as unresolved
};

struct LpResult {
  LpStatus status = LpStatus::Stalled;
  double objective = 0.0;
  Vector x;
  std::uint64_t iterations = 0;
};

/// Two-phase dense-tableau simplex. Entering variable: most negative reduced
/// cost with lowest-label tie-break; after a pivot cap proportional to the
/// problem size the rule degrades to Bland's (lowest eligible label), which
/// cannot cycle. Pivot eligibility threshold 1e-9.
LpResult solve_lp(const LpProblem& lp);

}  // namespace kfair
