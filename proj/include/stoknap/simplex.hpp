#pragma once

#include <cstddef>
#include <vector>

namespace stoknap {

struct SimplexResult {
  double objective = 0.0;
  std::vector<double> values;
  size_t iterations = 0;
};

// Maximizes c.v subject to A v <= b, v >= 0, for b >= 0 (the origin is
// feasible, so a single phase from the slack basis suffices). Dantzig
// pricing with a Bland fallback against cycling; deterministic pivots.
// Throws std::runtime_error on unbounded or non-converging problems.
SimplexResult simplex_maximize(const std::vector<std::vector<double>>& A,
                               const std::vector<double>& b, const std::vector<double>& c,
                               double tol = 1e-10);

}  // namespace stoknap
