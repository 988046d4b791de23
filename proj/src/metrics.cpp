#include "fmlab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "fmlab/core/assignment.hpp"
#include "fmlab/core/errors.hpp"

namespace fmlab {

double wasserstein2(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("wasserstein2: point sets must have equal size and dimension");
  if (a.rows() == 0) throw ConfigError("wasserstein2: empty point sets");
  if (a.rows() > kMaxExactCoupling)
    throw ConfigError("wasserstein2: at most " + std::to_string(kMaxExactCoupling) + " points");
  const Mat cost = squared_distance_matrix(a, b);
  const auto perm = solve_assignment(cost);
  return std::sqrt(std::max(0.0, assignment_cost(cost, perm) / static_cast<double>(a.rows())));
}

Straightness straightness_deviation(const std::vector<Mat>& states, Eigen::Index sample) {
  if (states.size() < 3) throw ConfigError("straightness_deviation needs at least 3 recorded points");
  const RowVec start = states.front().row(sample);
  const RowVec end = states.back().row(sample);
  const RowVec chord = end - start;
  const double len = chord.norm();
  Straightness out;
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < states.size(); ++k) {
    const RowVec rel = states[k].row(sample) - start;
    double dist;
    if (len == 0.0) {
      dist = rel.norm();
    } else {
      const RowVec unit = chord / len;
      dist = (rel - rel.dot(unit) * unit).norm();
    }
    worst = std::max(worst, dist);
  }
  if (len == 0.0) {
    out.value = worst;
    out.degenerate_chord = true;
  } else {
    out.value = worst / len;
  }
  return out;
}

Straightness straightness_deviation(const Trajectory& traj, Eigen::Index sample) {
  return straightness_deviation(traj.states, sample);
}

double mean_straightness(const Trajectory& traj) {
  if (traj.states.empty()) throw ConfigError("mean_straightness: empty trajectory");
  const Eigen::Index n = traj.states.front().rows();
  if (n == 0) throw ConfigError("mean_straightness: empty batch");
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) s += straightness_deviation(traj.states, i).value;
  return s / static_cast<double>(n);
}

Reconstruction reconstruction_mse(const CouplingBatch& batch, const FlowModel& model,
                                  const SolverConfig& solver) {
  if (batch.x0.rows() == 0) throw ConfigError("reconstruction_mse: empty batch");
  if (batch.x0.rows() != batch.x1.rows() || batch.x0.cols() != batch.x1.cols())
    throw DimensionError("reconstruction_mse: x0 and x1 shapes differ");
  const Generation gen = generate(model, batch.x0, solver);
  Reconstruction out;
  out.mse = (batch.x1 - gen.samples).squaredNorm() / static_cast<double>(batch.x0.rows());
  out.mean_nfe = gen.mean_nfe;
  return out;
}

}  // namespace fmlab
