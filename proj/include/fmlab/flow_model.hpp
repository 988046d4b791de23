#pragma once

#include "fmlab/fields.hpp"
#include "fmlab/ode.hpp"

namespace fmlab {

// Pretrained flow on [0, 1], optionally followed by a residual ControlSynth
// stage on [1, 1 + horizon_T] whose input is the handoff state phi_1(x0).
struct FlowModel {
  const MlpField* base = nullptr;
  const ControlSynthField* residual = nullptr;
  double horizon_T = 0.0;
};

struct Generation {
  Mat samples;
  Mat handoff;  // state at t = 1
  double mean_nfe = 0.0;
};

Generation generate(const FlowModel& model, const Mat& x0, const SolverConfig& cfg);

}  // namespace fmlab
