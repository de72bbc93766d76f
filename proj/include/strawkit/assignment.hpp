#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace strawkit {

inline constexpr std::size_t kUnassigned = SIZE_MAX;

struct Assignment {
  std::vector<std::size_t> row_to_col;  // kUnassigned for rows left without a column
  double cost = 0.0;
};

/// Minimum-cost assignment on a rectangular matrix of finite costs (Hungarian
/// method with row/column potentials). min(rows, cols) pairs are assigned; rows are
/// inserted in ascending order and ties resolve to the lowest column index.
/// Re-entrant: no shared state.
Assignment hungarian(const Eigen::MatrixXd& cost);

/// Sparse variant for thresholded problems: each row may take one of its listed
/// columns at the listed cost or stay unassigned at `unassigned_cost`. Equivalent to
/// the Hungarian method on the square matrix padded with `unassigned_cost`, but only
/// explores listed entries. All costs must be non-negative.
struct SparseEntry {
  std::size_t col;
  double cost;
};
Assignment sparse_assignment(std::size_t cols, const std::vector<std::vector<SparseEntry>>& rows,
                             double unassigned_cost);

}  // namespace strawkit
