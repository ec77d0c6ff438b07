#include "stoknap/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace stoknap {

SimplexResult simplex_maximize(const std::vector<std::vector<double>>& A,
                               const std::vector<double>& b, const std::vector<double>& c,
                               double tol) {
  const size_t m = A.size();
  const size_t n = c.size();
  for (size_t r = 0; r < m; ++r) {
    if (A[r].size() != n) throw std::invalid_argument("simplex: row size mismatch");
    if (b[r] < 0.0) throw std::invalid_argument("simplex: negative rhs");
  }

  // tableau: m rows of [structural | slack | rhs], plus objective row
  const size_t width = n + m + 1;
  std::vector<std::vector<double>> tab(m + 1, std::vector<double>(width, 0.0));
  for (size_t r = 0; r < m; ++r) {
    for (size_t j = 0; j < n; ++j) tab[r][j] = A[r][j];
    tab[r][n + r] = 1.0;
    tab[r][width - 1] = b[r];
  }
  for (size_t j = 0; j < n; ++j) tab[m][j] = c[j];

  std::vector<size_t> basis(m);
  for (size_t r = 0; r < m; ++r) basis[r] = n + r;

  const size_t max_iter = 50 * (m + n) + 10000;
  size_t degenerate_streak = 0;
  SimplexResult result;

  for (result.iterations = 0; result.iterations < max_iter; ++result.iterations) {
    const bool bland = degenerate_streak > 2 * (m + n);

    // entering column
    size_t enter = width;  // sentinel
    double best = tol;
    for (size_t j = 0; j + 1 < width; ++j) {
      const double rc = tab[m][j];
      if (rc > tol) {
        if (bland) {
          enter = j;
          break;
        }
        if (rc > best) {
          best = rc;
          enter = j;
        }
      }
    }
    if (enter == width) break;  // optimal

    // ratio test; ties broken by smallest basis variable (Bland-compatible)
    size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (size_t r = 0; r < m; ++r) {
      const double a = tab[r][enter];
      if (a > tol) {
        const double ratio = tab[r][width - 1] / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && (leave == m || basis[r] < basis[leave]))) {
          best_ratio = ratio;
          leave = r;
        }
      }
    }
    if (leave == m) throw std::runtime_error("simplex: unbounded problem");
    degenerate_streak = best_ratio < 1e-12 ? degenerate_streak + 1 : 0;

    // pivot
    const double pivot = tab[leave][enter];
    for (size_t j = 0; j < width; ++j) tab[leave][j] /= pivot;
    for (size_t r = 0; r <= m; ++r) {
      if (r == leave) continue;
      const double factor = tab[r][enter];
      if (factor == 0.0) continue;
      for (size_t j = 0; j < width; ++j) tab[r][j] -= factor * tab[leave][j];
    }
    basis[leave] = enter;
  }

  if (result.iterations >= max_iter)
    throw std::runtime_error("simplex: iteration limit reached");

  result.values.assign(n, 0.0);
  for (size_t r = 0; r < m; ++r) {
    if (basis[r] < n) result.values[basis[r]] = tab[r][width - 1];
  }
  // the objective row accumulates -z in its rhs cell
  result.objective = -tab[m][width - 1];
  return result;
}

}  // namespace stoknap
