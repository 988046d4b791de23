#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fmlab/core/autodiff.hpp"
#include "fmlab/coupling.hpp"
#include "fmlab/datasets.hpp"
#include "fmlab/fields.hpp"
#include "fmlab/optim.hpp"

namespace fmlab {

struct TrainConfig {
  int batch_size = 256;
  int steps = 2000;
  double learning_rate = 1e-4;
  double grad_clip = 1.0;
  AdamConfig adam;
  CouplingMethod coupling = CouplingMethod::minibatch_ot;
  std::uint64_t seed = 0;
  int checkpoint_interval = 0;  // 0 keeps only the final checkpoint
};

void validate(const TrainConfig& cfg);

struct TrainRecord {
  int step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;  // before clipping
};

// Straight conditional path: mean_i ||v(t_i, (1 - t_i) x0_i + t_i x1_i) - (x1_i - x0_i)||^2.
ad::Var cfm_loss(ad::Tape& tape, VectorField& field, const CouplingBatch& batch, const Vec& t);
double cfm_loss_value(const VectorField& field, const CouplingBatch& batch, const Vec& t);

struct PretrainResult {
  std::vector<TrainRecord> curve;
  std::vector<nlohmann::json> checkpoints;  // last one is tagged "pretrained"
  bool diverged = false;
  std::string message;
};

// Simulation-free training from the standard Gaussian source to `target`.
// On a non-finite loss the field is restored to the last good parameters
// and training stops.
PretrainResult pretrain(MlpField& field, const DatasetSpec& target, const TrainConfig& cfg);

void write_loss_csv(std::ostream& os, const std::vector<TrainRecord>& curve);

}  // namespace fmlab
