#include "fmlab/core/assignment.hpp"

#include <limits>

#include "fmlab/core/errors.hpp"

namespace fmlab {

std::vector<int> solve_assignment(const Mat& cost) {
  if (cost.rows() != cost.cols()) {
    throw DimensionError("solve_assignment: cost matrix must be square, got " +
                         std::to_string(cost.rows()) + "x" + std::to_string(cost.cols()));
  }
  if (!cost.allFinite()) throw NumericError("solve_assignment: non-finite cost entry");
  const int n = static_cast<int>(cost.rows());
  if (n == 0) return {};
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is a virtual source.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
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
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> perm(n, -1);
  for (int j = 1; j <= n; ++j) perm[match[j] - 1] = j - 1;
  return perm;
}

double assignment_cost(const Mat& cost, const std::vector<int>& perm) {
  double s = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) s += cost(static_cast<Eigen::Index>(i), perm[i]);
  return s;
}

}  // namespace fmlab
