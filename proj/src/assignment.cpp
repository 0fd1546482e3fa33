#include "skelanon/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace skelanon
{

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, kForbidden)
{
}

Matching solve_assignment(const CostMatrix& m)
{
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  Matching result;
  if (rows == 0 || cols == 0) {
    return result;
  }

  // Infeasible and padding cells share one penalty larger than any total of
  // feasible costs, so the optimum of the padded square problem has maximum
  // feasible cardinality first and minimum feasible cost second.
  double total = 0.0;
  bool any_feasible = false;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = m(r, c);
      if (std::isnan(v) || v < 0.0) {
        throw std::invalid_argument("solve_assignment: costs must be finite and >= 0");
      }
      if (v != CostMatrix::kForbidden) {
        total += v;
        any_feasible = true;
      }
    }
  }
  if (!any_feasible) {
    return result;
  }
  const double penalty = total + 1.0;

  const std::size_t n = std::max(rows, cols);
  auto cost = [&](std::size_t r, std::size_t c) {
    if (r >= rows || c >= cols || !m.feasible(r, c)) {
      return penalty;
    }
    return m(r, c);
  };

  // Shortest augmenting path with potentials, 1-based with a virtual column 0.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> col_owner(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    col_owner[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = col_owner[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) {
          continue;
        }
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[col_owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      col_owner[j0] = col_owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t r = col_owner[j] - 1;
    const std::size_t c = j - 1;
    if (r < rows && c < cols && m.feasible(r, c)) {
      result.emplace_back(r, c);
    }
  }
  std::sort(result.begin(), result.end());
  return result;
}

double matching_cost(const CostMatrix& m, const Matching& matching)
{
  double s = 0.0;
  for (const auto& [r, c] : matching) {
    s += m(r, c);
  }
  return s;
}

}  // namespace skelanon
