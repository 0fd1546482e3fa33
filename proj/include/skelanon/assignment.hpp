///////////////////////////////////////////////////////////////////////////////
// assignment.hpp: minimum-cost bipartite matching (Hungarian algorithm)
//
// Infeasible pairs are marked FORBIDDEN and never matched. The solver first
// maximizes the number of matched pairs, then minimizes their total cost.
///////////////////////////////////////////////////////////////////////////////

#pragma once

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace skelanon
{

class CostMatrix
{
public:
  static constexpr double kForbidden = std::numeric_limits<double>::infinity();

  CostMatrix() = default;
  /// All entries start FORBIDDEN.
  CostMatrix(std::size_t rows, std::size_t cols);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  [[nodiscard]] bool feasible(std::size_t r, std::size_t c) const
  {
    return (*this)(r, c) != kForbidden;
  }

private:
  std::size_t rows_{0};
  std::size_t cols_{0};
  std::vector<double> data_;
};

using Matching = std::vector<std::pair<std::size_t, std::size_t>>;

/// Returns (row, col) pairs sorted by row. Throws std::invalid_argument on a
/// negative or NaN cost.
Matching solve_assignment(const CostMatrix& m);

/// Sum of the costs of the matched pairs.
double matching_cost(const CostMatrix& m, const Matching& matching);

}  // namespace skelanon
