#pragma once

#include <Eigen/Dense>

namespace fmlab {

// Batches of states are stored row-wise: one sample per row.
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

}  // namespace fmlab
