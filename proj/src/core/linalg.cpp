#include "fmlab/core/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "fmlab/core/errors.hpp"

namespace fmlab {

double asymmetry(const Mat& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

void require_symmetric(const Mat& m, double tol) {
  if (m.rows() != m.cols()) {
    throw DimensionError("expected a square matrix, got " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()));
  }
  if (m.size() == 0) return;
  const double a = asymmetry(m);
  if (!(a <= tol)) {
    throw AsymmetryError("matrix is not symmetric: max |M - M^T| = " + std::to_string(a), a);
  }
}

Vec sym_eigenvalues(const Mat& input) {
  require_symmetric(input);
  const Eigen::Index n = input.rows();
  if (n == 0) return Vec();
  // Work on the exact symmetric part.
  Mat a = 0.5 * (input + input.transpose());
  const double scale = std::max(1.0, a.norm());
  const double threshold = 1e-12 * scale;
  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  for (int sweep = 0; sweep < 100 && off_norm() > threshold; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Vec eig = a.diagonal();
  std::sort(eig.data(), eig.data() + n);
  return eig;
}

double sym_eig_max(const Mat& m) {
  if (m.size() == 0) throw DimensionError("sym_eig_max: empty matrix");
  return sym_eigenvalues(m).maxCoeff();
}

double sym_eig_min(const Mat& m) {
  if (m.size() == 0) throw DimensionError("sym_eig_min: empty matrix");
  return sym_eigenvalues(m).minCoeff();
}

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  return std::sqrt(std::max(0.0, sym_eig_max(m.transpose() * m)));
}

bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace fmlab
