#include "fmlab/train_cfm.hpp"

#include <cmath>
#include <ostream>

#include "fmlab/checkpoint.hpp"
#include "fmlab/core/errors.hpp"
#include "fmlab/io.hpp"

namespace fmlab {

namespace {

Mat interpolate(const CouplingBatch& batch, const Vec& t) {
  return (batch.x0.array().colwise() * (1.0 - t.array())).matrix() +
         (batch.x1.array().colwise() * t.array()).matrix();
}

void check_inputs(const CouplingBatch& batch, const Vec& t) {
  if (batch.size() == 0) throw ConfigError("cfm_loss: empty batch");
  if (t.size() != batch.size()) throw DimensionError("cfm_loss: one time per pair is required");
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (cfg.batch_size < 1) throw ConfigError("train batch_size must be >= 1");
  if (cfg.steps < 0) throw ConfigError("train steps must be >= 0");
  if (!(cfg.learning_rate >= 0.0)) throw ConfigError("train learning rate must be >= 0");
  if (!(cfg.grad_clip > 0.0)) throw ConfigError("train grad_clip must be > 0");
  if (cfg.checkpoint_interval < 0) throw ConfigError("checkpoint_interval must be >= 0");
}

ad::Var cfm_loss(ad::Tape& tape, VectorField& field, const CouplingBatch& batch, const Vec& t) {
  check_inputs(batch, t);
  ad::Var xt = tape.constant(interpolate(batch, t));
  ad::Var target = tape.constant(batch.x1 - batch.x0);
  return ad::mean_row_sq_norm(field.eval(tape, t, xt) - target);
}

double cfm_loss_value(const VectorField& field, const CouplingBatch& batch, const Vec& t) {
  check_inputs(batch, t);
  const Mat r = field.eval(t, interpolate(batch, t)) - (batch.x1 - batch.x0);
  return r.squaredNorm() / static_cast<double>(batch.size());
}

PretrainResult pretrain(MlpField& field, const DatasetSpec& target, const TrainConfig& cfg) {
  validate(cfg);
  DatasetSpec spec = target;
  spec.sample_count = cfg.batch_size;
  validate(spec);
  Rng rng(cfg.seed);
  Adam opt(cfg.learning_rate, cfg.adam);
  PretrainResult result;
  ParamStore last_good = field.params();
  for (int step = 1; step <= cfg.steps; ++step) {
    const Mat x0 = sample_source(cfg.batch_size, field.dim(), rng);
    const Mat x1 = sample(spec, rng);
    const CouplingBatch batch = couple(x0, x1, cfg.coupling);
    Vec t(cfg.batch_size);
    for (int i = 0; i < cfg.batch_size; ++i) t(i) = rng.uniform();

    field.params().zero_grad();
    double loss = NAN;
    try {
      ad::Tape tape;
      ad::Var l = cfm_loss(tape, field, batch, t);
      loss = l.scalar();
      if (std::isfinite(loss)) tape.backward(l);
    } catch (const NumericError&) {
      loss = NAN;
    }
    if (!std::isfinite(loss) || !std::isfinite(field.params().grad_norm())) {
      field.params() = last_good;
      result.diverged = true;
      result.message = "non-finite loss at step " + std::to_string(step) +
                       "; restored parameters from step " + std::to_string(step - 1);
      break;
    }
    const double norm = field.params().clip_grad_norm(cfg.grad_clip);
    opt.step(field.params());
    result.curve.push_back({step, loss, norm});
    if (!field.params().all_finite()) {
      field.params() = last_good;
      result.diverged = true;
      result.message = "non-finite parameters after step " + std::to_string(step);
      break;
    }
    last_good = field.params();
    if (cfg.checkpoint_interval > 0 && step % cfg.checkpoint_interval == 0 && step < cfg.steps)
      result.checkpoints.push_back(
          save_checkpoint(field, {cfg.seed, step, "step_" + std::to_string(step)}));
  }
  const long final_step = result.curve.empty() ? 0 : result.curve.back().step;
  result.checkpoints.push_back(save_checkpoint(field, {cfg.seed, final_step, "pretrained"}));
  return result;
}

void write_loss_csv(std::ostream& os, const std::vector<TrainRecord>& curve) {
  os << "step,loss,grad_norm\n";
  for (const auto& r : curve)
    os << r.step << ',' << format_double(r.loss) << ',' << format_double(r.grad_norm) << '\n';
}

}  // namespace fmlab
