#pragma once

#include "fmlab/core/types.hpp"
#include "fmlab/coupling.hpp"
#include "fmlab/flow_model.hpp"
#include "fmlab/ode.hpp"

namespace fmlab {

// Exact 2-Wasserstein distance between equal-size empirical measures:
// sqrt of the minimal mean squared distance over all matchings.
double wasserstein2(const Mat& a, const Mat& b);

struct Straightness {
  double value = 0.0;
  bool degenerate_chord = false;  // start == end: unnormalized distance to the point
};

// Max distance of interior states to the chord from first to last state,
// divided by the chord length. Uses sample row `sample` of each state.
Straightness straightness_deviation(const std::vector<Mat>& states, Eigen::Index sample = 0);
Straightness straightness_deviation(const Trajectory& traj, Eigen::Index sample = 0);

// Mean straightness over all samples of a recorded batch trajectory.
double mean_straightness(const Trajectory& traj);

struct Reconstruction {
  double mse = 0.0;
  double mean_nfe = 0.0;
};

// mean ||x1 - phi(x0)||^2 for the paired batch.
Reconstruction reconstruction_mse(const CouplingBatch& batch, const FlowModel& model,
                                  const SolverConfig& solver);

}  // namespace fmlab
