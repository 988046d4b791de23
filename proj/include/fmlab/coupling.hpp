#pragma once

#include <string>
#include <vector>

#include "fmlab/core/types.hpp"

namespace fmlab {

enum class CouplingMethod { independent, minibatch_ot };

CouplingMethod parse_coupling(const std::string& name);
std::string to_string(CouplingMethod m);

inline constexpr int kMaxExactCoupling = 512;

struct CouplingBatch {
  Mat x0;
  Mat x1;  // row i is paired with x0 row i
  CouplingMethod method = CouplingMethod::independent;
  // Sum of squared Euclidean distances over the pairs.
  double cost = 0.0;
  // x1 row i is input row permutation[i].
  std::vector<int> permutation;

  Eigen::Index size() const { return x0.rows(); }
};

Mat squared_distance_matrix(const Mat& a, const Mat& b);

// independent keeps the index pairing; minibatch_ot permutes x1 by the exact
// minimum-cost assignment under squared Euclidean distance.
CouplingBatch couple(const Mat& x0, const Mat& x1, CouplingMethod method,
                     int max_exact = kMaxExactCoupling);

}  // namespace fmlab
