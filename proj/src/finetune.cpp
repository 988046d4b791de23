#include "fmlab/finetune.hpp"

#include <cmath>
#include <ostream>

#include "fmlab/core/errors.hpp"
#include "fmlab/io.hpp"

namespace fmlab {

namespace {

void check_sigma(const std::vector<double>& sigma, Eigen::Index dim) {
  if (sigma.empty()) throw ConfigError("sigma must have one entry or one per dimension");
  if (sigma.size() != 1 && static_cast<Eigen::Index>(sigma.size()) != dim)
    throw DimensionError("sigma has " + std::to_string(sigma.size()) + " entries for dimension " +
                         std::to_string(dim));
  for (double s : sigma)
    if (!(s > 0.0)) throw ConfigError("sigma entries must be > 0");
}

RowVec inv_sqrt_sigma(const std::vector<double>& sigma) {
  RowVec w(static_cast<Eigen::Index>(sigma.size()));
  for (std::size_t i = 0; i < sigma.size(); ++i) w(static_cast<Eigen::Index>(i)) = 1.0 / std::sqrt(sigma[i]);
  return w;
}

// Batch source for both fine-tuning modes.
class PairSource {
 public:
  PairSource(const DatasetSpec& target, const MleConfig& cfg, int dim)
      : spec_(target), cfg_(cfg), dim_(dim), rng_(cfg.seed) {
    spec_.sample_count = cfg.batch_size;
    validate(spec_);
  }

  const CouplingBatch& next() {
    if (cfg_.repair_per_batch || !have_) {
      const Mat x0 = sample_source(cfg_.batch_size, dim_, rng_);
      const Mat x1 = sample(spec_, rng_);
      batch_ = couple(x0, x1, cfg_.coupling);
      have_ = true;
    }
    return batch_;
  }

 private:
  DatasetSpec spec_;
  const MleConfig& cfg_;
  int dim_;
  Rng rng_;
  CouplingBatch batch_;
  bool have_ = false;
};

}  // namespace

void validate(const MleConfig& cfg) {
  if (cfg.steps < 0) throw ConfigError("finetune steps must be >= 0");
  if (cfg.batch_size < 1) throw ConfigError("finetune batch_size must be >= 1");
  if (!(cfg.learning_rate >= 0.0)) throw ConfigError("finetune learning rate must be >= 0");
  if (!(cfg.grad_clip > 0.0)) throw ConfigError("finetune grad_clip must be > 0");
  if (!cfg.solver.fixed_step())
    throw UnsupportedError("fine-tuning needs a fixed-step solver (euler or rk4)");
  validate(cfg.solver);
  if (!(cfg.horizon_T >= 0.0)) throw ConfigError("horizon T must be >= 0");
  if (!(cfg.lambda_omega >= 0.0)) throw ConfigError("lambda_omega must be >= 0");
  if (!(cfg.eps_A > 0.0)) throw ConfigError("eps_A must be > 0");
  if (cfg.sigma.empty()) throw ConfigError("sigma must not be empty");
  for (double s : cfg.sigma)
    if (!(s > 0.0)) throw ConfigError("sigma entries must be > 0");
}

ad::Var mle_loss(ad::Tape& tape, ad::Var final_state, const Mat& x1,
                 const std::vector<double>& sigma) {
  if (final_state.rows() != x1.rows() || final_state.cols() != x1.cols())
    throw DimensionError("mle_loss: reconstruction and target shapes differ");
  if (x1.rows() == 0) throw ConfigError("mle_loss: empty batch");
  check_sigma(sigma, x1.cols());
  ad::Var eps = tape.constant(x1) - final_state;
  if (sigma.size() == 1) return ad::mean_row_sq_norm(eps);
  return 0.5 * ad::mean_row_sq_norm(ad::scale_columns(eps, inv_sqrt_sigma(sigma)));
}

double mle_loss_value(const Mat& final_state, const Mat& x1, const std::vector<double>& sigma) {
  if (final_state.rows() != x1.rows() || final_state.cols() != x1.cols())
    throw DimensionError("mle_loss: reconstruction and target shapes differ");
  if (x1.rows() == 0) throw ConfigError("mle_loss: empty batch");
  check_sigma(sigma, x1.cols());
  const Mat eps = x1 - final_state;
  const double n = static_cast<double>(x1.rows());
  if (sigma.size() == 1) return eps.squaredNorm() / n;
  double s = 0.0;
  for (Eigen::Index i = 0; i < eps.rows(); ++i)
    for (Eigen::Index k = 0; k < eps.cols(); ++k)
      s += eps(i, k) * eps(i, k) / sigma[static_cast<std::size_t>(k)];
  return 0.5 * s / n;
}

double dominance_penalty(const std::vector<Mat>& matrices, double eps_A) {
  if (!(eps_A > 0.0)) throw ConfigError("eps_A must be > 0");
  double omega = 0.0;
  for (const Mat& a : matrices) {
    if (a.rows() != a.cols())
      throw DimensionError("dominance_penalty: matrix is " + std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()) + ", expected square");
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
      const double row_abs = a.row(k).cwiseAbs().sum();
      const double off = row_abs - std::abs(a(k, k));
      omega += (a(k, k) + off) / (row_abs + eps_A);
    }
  }
  return omega;
}

ad::Var dominance_penalty(ad::Tape& tape, ad::Var a, double eps_A) {
  if (a.rows() != a.cols()) throw DimensionError("dominance_penalty: matrix must be square");
  if (!(eps_A > 0.0)) throw ConfigError("eps_A must be > 0");
  const Mat eye = Mat::Identity(a.rows(), a.cols());
  const Mat off = Mat::Ones(a.rows(), a.cols()) - eye;
  ad::Var abs_a = ad::abs(a);
  ad::Var numer = ad::row_sums(ad::mask(a, eye) + ad::mask(abs_a, off));
  ad::Var denom = ad::add_scalar(ad::row_sums(abs_a), eps_A);
  (void)tape;
  return ad::sum(ad::cwise_div(numer, denom));
}

FinetuneResult finetune(MlpField& field, const DatasetSpec& target, const MleConfig& cfg) {
  validate(cfg);
  check_sigma(cfg.sigma, field.dim());
  PairSource pairs(target, cfg, field.dim());
  Adam opt(cfg.learning_rate, cfg.adam);
  FinetuneResult result;
  ParamStore last_good = field.params();
  for (int step = 1; step <= cfg.steps; ++step) {
    const CouplingBatch& batch = pairs.next();
    field.params().zero_grad();
    double loss = NAN;
    long nfe = 0;
    try {
      ad::Tape tape;
      TapedSolve solve = integrate_with_tape(tape, field, tape.constant(batch.x0), 0.0, 1.0, cfg.solver);
      ad::Var l = mle_loss(tape, solve.final_state, batch.x1, cfg.sigma);
      loss = l.scalar();
      nfe = solve.trajectory.nfe;
      if (std::isfinite(loss)) tape.backward(l);
    } catch (const NumericError&) {
      loss = NAN;
    }
    if (!std::isfinite(loss) || !std::isfinite(field.params().grad_norm())) {
      field.params() = last_good;
      result.diverged = true;
      result.message = "non-finite loss at step " + std::to_string(step);
      break;
    }
    const double norm = field.params().clip_grad_norm(cfg.grad_clip);
    opt.step(field.params());
    if (!field.params().all_finite()) {
      field.params() = last_good;
      result.diverged = true;
      result.message = "non-finite parameters after step " + std::to_string(step);
      break;
    }
    last_good = field.params();
    result.curve.push_back({step, loss, loss, 0.0, norm, nfe});
  }
  return result;
}

FinetuneResult finetune_residual(const MlpField& pretrained, ControlSynthField& residual,
                                 const DatasetSpec& target, const MleConfig& cfg) {
  validate(cfg);
  if (!(cfg.horizon_T > 0.0)) throw ConfigError("residual fine-tuning needs horizon T > 0");
  if (residual.dim() != pretrained.dim() || residual.input_dim() != pretrained.dim())
    throw DimensionError("residual field dimensions must match the pretrained field");
  check_sigma(cfg.sigma, pretrained.dim());
  PairSource pairs(target, cfg, pretrained.dim());
  Adam opt(cfg.learning_rate, cfg.adam);
  FinetuneResult result;
  ParamStore last_good = residual.params();
  for (int step = 1; step <= cfg.steps; ++step) {
    const CouplingBatch& batch = pairs.next();
    const BatchSolve handoff = integrate_batch(pretrained, batch.x0, 0.0, 1.0, cfg.solver);
    residual.params().zero_grad();
    double loss = NAN, mle = NAN, omega = NAN;
    long nfe = static_cast<long>(handoff.mean_nfe);
    try {
      ad::Tape tape;
      ConditionedField stage(residual, handoff.final_state);
      TapedSolve solve = integrate_with_tape(tape, stage, tape.constant(handoff.final_state), 1.0,
                                             1.0 + cfg.horizon_T, cfg.solver);
      ad::Var l_mle = mle_loss(tape, solve.final_state, batch.x1, cfg.sigma);
      ad::Var w = dominance_penalty(tape, tape.param(residual.params(), "A0"), cfg.eps_A);
      ad::Var total = l_mle + cfg.lambda_omega * ad::relu(w);
      loss = total.scalar();
      mle = l_mle.scalar();
      omega = w.scalar();
      nfe += solve.trajectory.nfe;
      if (std::isfinite(loss)) tape.backward(total);
    } catch (const NumericError&) {
      loss = NAN;
    }
    if (!std::isfinite(loss) || !std::isfinite(residual.params().grad_norm())) {
      residual.params() = last_good;
      result.diverged = true;
      result.message = "non-finite loss at step " + std::to_string(step);
      break;
    }
    const double norm = residual.params().clip_grad_norm(cfg.grad_clip);
    opt.step(residual.params());
    if (!residual.params().all_finite()) {
      residual.params() = last_good;
      result.diverged = true;
      result.message = "non-finite parameters after step " + std::to_string(step);
      break;
    }
    last_good = residual.params();
    result.curve.push_back({step, loss, mle, omega, norm, nfe});
  }
  return result;
}

void write_finetune_csv(std::ostream& os, const std::vector<FinetuneRecord>& curve) {
  os << "step,loss,grad_norm,mle,omega,nfe\n";
  for (const auto& r : curve)
    os << r.step << ',' << format_double(r.loss) << ',' << format_double(r.grad_norm) << ','
       << format_double(r.mle) << ',' << format_double(r.omega) << ',' << r.nfe << '\n';
}

}  // namespace fmlab
