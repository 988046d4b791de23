#include "fmlab/coupling.hpp"

#include <numeric>

#include "fmlab/core/assignment.hpp"
#include "fmlab/core/errors.hpp"

namespace fmlab {

CouplingMethod parse_coupling(const std::string& name) {
  if (name == "independent") return CouplingMethod::independent;
  if (name == "minibatch_ot" || name == "ot") return CouplingMethod::minibatch_ot;
  throw ConfigError("unknown coupling '" + name + "' (expected independent or minibatch_ot)");
}

std::string to_string(CouplingMethod m) {
  return m == CouplingMethod::independent ? "independent" : "minibatch_ot";
}

Mat squared_distance_matrix(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) throw DimensionError("distance matrix: dimension mismatch");
  Mat d(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) d(i, j) = (a.row(i) - b.row(j)).squaredNorm();
  return d;
}

CouplingBatch couple(const Mat& x0, const Mat& x1, CouplingMethod method, int max_exact) {
  if (x0.rows() != x1.rows())
    throw DimensionError("couple: batch sizes differ (" + std::to_string(x0.rows()) + " vs " +
                         std::to_string(x1.rows()) + ")");
  if (x0.cols() != x1.cols()) throw DimensionError("couple: sample dimensions differ");
  const auto n = static_cast<int>(x0.rows());
  CouplingBatch out;
  out.method = method;
  out.x0 = x0;
  if (method == CouplingMethod::independent) {
    out.permutation.resize(n);
    std::iota(out.permutation.begin(), out.permutation.end(), 0);
    out.x1 = x1;
  } else {
    if (n > max_exact)
      throw ConfigError("couple: batch of " + std::to_string(n) +
                        " exceeds the exact assignment limit " + std::to_string(max_exact));
    out.permutation = solve_assignment(squared_distance_matrix(x0, x1));
    out.x1.resize(n, x1.cols());
    for (int i = 0; i < n; ++i) out.x1.row(i) = x1.row(out.permutation[i]);
  }
  out.cost = (out.x1 - out.x0).squaredNorm();
  return out;
}

}  // namespace fmlab
