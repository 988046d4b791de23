#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fmlab/core/autodiff.hpp"
#include "fmlab/coupling.hpp"
#include "fmlab/datasets.hpp"
#include "fmlab/fields.hpp"
#include "fmlab/ode.hpp"
#include "fmlab/optim.hpp"

namespace fmlab {

struct MleConfig {
  int steps = 200;
  int batch_size = 256;
  double learning_rate = 5e-6;
  double grad_clip = 1.0;
  AdamConfig adam;
  SolverConfig solver = SolverConfig::euler(16);
  // One entry: scalar covariance. d entries: diagonal covariance.
  std::vector<double> sigma = {1.0};
  double horizon_T = 0.5;
  double lambda_omega = 0.0;
  double eps_A = 1e-6;
  CouplingMethod coupling = CouplingMethod::minibatch_ot;
  // Draw a freshly coupled batch every step; otherwise reuse the first one.
  bool repair_per_batch = true;
  std::uint64_t seed = 0;
};

void validate(const MleConfig& cfg);

// Reconstruction error eps = x1 - final. Scalar sigma: mean ||eps||^2.
// Diagonal sigma: mean 0.5 * sum_i eps_i^2 / sigma_i.
ad::Var mle_loss(ad::Tape& tape, ad::Var final_state, const Mat& x1,
                 const std::vector<double>& sigma);
double mle_loss_value(const Mat& final_state, const Mat& x1, const std::vector<double>& sigma);

// Signed row score sum_k (A_kk + sum_{l != k} |A_kl|) / (sum_l |A_kl| + eps_A),
// summed over the matrices. Nonpositive when every Gershgorin disc lies in
// the closed left half-plane.
double dominance_penalty(const std::vector<Mat>& matrices, double eps_A);
ad::Var dominance_penalty(ad::Tape& tape, ad::Var a, double eps_A);

struct FinetuneRecord {
  int step = 0;
  double loss = 0.0;     // total objective
  double mle = 0.0;      // reconstruction part
  double omega = 0.0;    // dominance score (residual mode)
  double grad_norm = 0.0;
  long nfe = 0;          // field evaluations per sample in this step
};

struct FinetuneResult {
  std::vector<FinetuneRecord> curve;
  bool diverged = false;
  std::string message;
};

// Updates every parameter of the pretrained field by gradients of the
// reconstruction loss through the unrolled solve on [0, 1].
FinetuneResult finetune(MlpField& field, const DatasetSpec& target, const MleConfig& cfg);

// Trains only the residual field on [1, 1 + T]; the pretrained field is
// read-only and provides the handoff state phi_1(x0), which is also the
// residual's input u. Objective: mle + lambda_omega * relu(omega(A0)).
FinetuneResult finetune_residual(const MlpField& pretrained, ControlSynthField& residual,
                                 const DatasetSpec& target, const MleConfig& cfg);

void write_finetune_csv(std::ostream& os, const std::vector<FinetuneRecord>& curve);

}  // namespace fmlab
