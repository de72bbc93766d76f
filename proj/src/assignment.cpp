#include "strawkit/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include "strawkit/error.hpp"

namespace strawkit {

Assignment hungarian(const Eigen::MatrixXd& cost) {
  const auto rows = static_cast<std::size_t>(cost.rows());
  const auto cols = static_cast<std::size_t>(cost.cols());
  Assignment out;
  out.row_to_col.assign(rows, kUnassigned);
  if (rows == 0 || cols == 0) return out;
  if (!cost.allFinite()) throw Error(ErrorCode::InvalidArgument, "assignment costs must be finite");

  const bool transposed = rows > cols;
  const std::size_t n = transposed ? cols : rows;  // n <= m
  const std::size_t m = transposed ? rows : cols;
  auto a = [&](std::size_t i, std::size_t j) {  // 1-based
    return transposed ? cost(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(i - 1))
                      : cost(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1));
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    const std::size_t i = p[j];
    if (transposed) out.row_to_col[j - 1] = i - 1;
    else out.row_to_col[i - 1] = j - 1;
  }
  for (std::size_t r = 0; r < rows; ++r)
    if (out.row_to_col[r] != kUnassigned)
      out.cost += cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(out.row_to_col[r]));
  return out;
}

Assignment sparse_assignment(std::size_t cols, const std::vector<std::vector<SparseEntry>>& rows,
                             double unassigned_cost) {
  const std::size_t n = rows.size();
  const std::size_t total_cols = cols + n;  // column cols + i is row i's private "unassigned" slot
  constexpr std::size_t kNone = SIZE_MAX;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  auto entries = [&](std::size_t i, auto&& fn) {
    for (const auto& e : rows[i]) fn(e.col, e.cost);
    fn(cols + i, unassigned_cost);
  };
  for (const auto& r : rows)
    for (const auto& e : r)
      if (e.col >= cols || !(e.cost >= 0.0) || !std::isfinite(e.cost))
        throw Error(ErrorCode::InvalidArgument, "sparse assignment entry out of range or negative");

  std::vector<double> u(n, 0.0), v(total_cols, 0.0);
  std::vector<std::size_t> row_match(n, kNone), col_match(total_cols, kNone);
  std::vector<double> dist(total_cols, kInf);
  std::vector<std::size_t> from_row(total_cols, kNone);
  std::vector<char> done(total_cols, 0);
  std::vector<std::size_t> touched, scanned;

  using Item = std::pair<double, std::size_t>;
  for (std::size_t s = 0; s < n; ++s) {
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    auto relax = [&](std::size_t c, double d, std::size_t r) {
      if (d < dist[c]) {
        if (dist[c] == kInf) touched.push_back(c);
        dist[c] = d;
        from_row[c] = r;
        pq.push({d, c});
      }
    };
    entries(s, [&](std::size_t c, double w) { relax(c, w - u[s] - v[c], s); });
    std::size_t end = kNone;
    double reach = 0.0;
    while (!pq.empty()) {
      const auto [d, c] = pq.top();
      pq.pop();
      if (done[c] || d > dist[c]) continue;
      done[c] = 1;
      scanned.push_back(c);
      if (col_match[c] == kNone) {
        end = c;
        reach = d;
        break;
      }
      const std::size_t r = col_match[c];
      entries(r, [&](std::size_t c2, double w) {
        if (!done[c2]) relax(c2, d + w - u[r] - v[c2], r);
      });
    }
    // The private slot of row s is always free, so a path always exists.
    for (std::size_t c : scanned) {
      v[c] += dist[c] - reach;
      if (col_match[c] != kNone) u[col_match[c]] += reach - dist[c];
    }
    u[s] += reach;
    for (std::size_t c = end;;) {
      const std::size_t r = from_row[c];
      const std::size_t prev = row_match[r];
      row_match[r] = c;
      col_match[c] = r;
      if (r == s) break;
      c = prev;
    }
    for (std::size_t c : touched) {
      dist[c] = kInf;
      from_row[c] = kNone;
      done[c] = 0;
    }
    touched.clear();
    scanned.clear();
  }

  Assignment out;
  out.row_to_col.assign(n, kUnassigned);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = row_match[i];
    if (c < cols) {
      out.row_to_col[i] = c;
      for (const auto& e : rows[i])
        if (e.col == c) {
          out.cost += e.cost;
          break;
        }
    } else {
      out.cost += unassigned_cost;
    }
  }
  return out;
}

}  // namespace strawkit
