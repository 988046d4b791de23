#include "fmlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "fmlab/core/errors.hpp"
#include "fmlab/core/linalg.hpp"

namespace fmlab {

namespace {

std::string layer_w(int l) { return "w" + std::to_string(l); }
std::string layer_b(int l) { return "b" + std::to_string(l); }

}  // namespace

Mat VectorField::eval(double t, const Mat& x) const {
  return eval(Vec::Constant(x.rows(), t), x);
}

ad::Var VectorField::eval(ad::Tape& tape, double t, ad::Var x) {
  return eval(tape, Vec::Constant(x.rows(), t), x);
}

void VectorField::check_finite(const Mat& out, const Vec& t, const Mat& x) const {
  if (out.allFinite()) return;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    if (out.row(i).allFinite()) continue;
    std::ostringstream msg;
    msg << "field '" << kind() << "' produced a non-finite value at t=" << t(i) << ", x=["
        << x.row(i) << "]";
    throw NumericError(msg.str());
  }
}

// ---------------------------------------------------------------- MlpField

MlpField::MlpField(const MlpConfig& config) : config_(config) {
  if (config.dim < 1) throw ConfigError("mlp: dim must be >= 1");
  if (config.time_features < 0 || config.time_features % 2 != 0)
    throw ConfigError("mlp: time_features must be a non-negative even number");
  for (int h : config.hidden)
    if (h < 1) throw ConfigError("mlp: hidden widths must be >= 1");
}

MlpField::MlpField(const MlpConfig& config, Rng& rng) : MlpField(config) {
  int fan_in = input_width();
  std::vector<int> outs = config.hidden;
  outs.push_back(config.dim);
  for (int l = 0; l < static_cast<int>(outs.size()); ++l) {
    const double limit = std::sqrt(6.0 / (fan_in + outs[l]));
    params_.add(layer_w(l), rng.uniform_matrix(fan_in, outs[l], -limit, limit));
    params_.add(layer_b(l), Mat::Zero(1, outs[l]));
    fan_in = outs[l];
  }
}

MlpField MlpField::zeros(const MlpConfig& config) {
  MlpField f(config);
  int fan_in = f.input_width();
  std::vector<int> outs = config.hidden;
  outs.push_back(config.dim);
  for (int l = 0; l < static_cast<int>(outs.size()); ++l) {
    f.params_.add(layer_w(l), Mat::Zero(fan_in, outs[l]));
    f.params_.add(layer_b(l), Mat::Zero(1, outs[l]));
    fan_in = outs[l];
  }
  return f;
}

Mat MlpField::time_embedding(const Vec& t) const {
  const int half = config_.time_features / 2;
  Mat emb(t.size(), 1 + config_.time_features);
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    emb(i, 0) = t(i);
    for (int k = 1; k <= half; ++k) {
      const double a = k * std::numbers::pi * t(i);
      emb(i, 2 * k - 1) = std::sin(a);
      emb(i, 2 * k) = std::cos(a);
    }
  }
  return emb;
}

Mat MlpField::eval(const Vec& t, const Mat& x) const {
  if (x.cols() != config_.dim || t.size() != x.rows())
    throw DimensionError("mlp eval: expected n x " + std::to_string(config_.dim) +
                         " states with n times");
  Mat h(x.rows(), input_width());
  h << x, time_embedding(t);
  const int layers = layer_count();
  for (int l = 0; l < layers; ++l) {
    Mat z = h * params_.value(layer_w(l));
    z.rowwise() += params_.value(layer_b(l)).row(0);
    h = (l + 1 < layers) ? Mat(z.array().tanh()) : z;
  }
  check_finite(h, t, x);
  return h;
}

ad::Var MlpField::eval(ad::Tape& tape, const Vec& t, ad::Var x) {
  if (x.cols() != config_.dim || t.size() != x.rows())
    throw DimensionError("mlp eval: expected n x " + std::to_string(config_.dim) +
                         " states with n times");
  ad::Var h = ad::concat_cols(x, tape.constant(time_embedding(t)));
  const int layers = layer_count();
  for (int l = 0; l < layers; ++l) {
    ad::Var z = ad::add_row(ad::matmul(h, tape.param(params_, layer_w(l))),
                            tape.param(params_, layer_b(l)));
    h = (l + 1 < layers) ? ad::tanh(z) : z;
  }
  check_finite(h.value(), t, x.value());
  return h;
}

// -------------------------------------------------------------- Activation

Activation Activation::parse(const std::string& name, double slope) {
  if (name == "tanh") return {ActivationKind::tanh, slope};
  if (name == "leaky_relu") {
    if (!(slope > 0.0)) throw ConfigError("leaky_relu slope must be > 0");
    return {ActivationKind::leaky_relu, slope};
  }
  throw ConfigError("unknown activation '" + name + "' (expected tanh or leaky_relu)");
}

std::string Activation::name() const {
  return kind == ActivationKind::tanh ? "tanh" : "leaky_relu";
}

double Activation::apply(double s) const {
  if (kind == ActivationKind::tanh) return std::tanh(s);
  return s > 0.0 ? s : slope * s;
}

double Activation::integral(double s) const {
  if (kind == ActivationKind::tanh) {
    const double a = std::abs(s);
    // log cosh(s) = |s| + log(1 + exp(-2|s|)) - log 2
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
  }
  return s > 0.0 ? 0.5 * s * s : 0.5 * slope * s * s;
}

double Activation::lipschitz() const {
  return kind == ActivationKind::tanh ? 1.0 : std::max(1.0, slope);
}

Mat Activation::apply(const Mat& m) const {
  return m.unaryExpr([this](double s) { return apply(s); });
}

ad::Var Activation::apply(ad::Var v) const {
  return kind == ActivationKind::tanh ? ad::tanh(v) : ad::leaky_relu(v, slope);
}

// ------------------------------------------------------- ControlSynthField

ControlSynthField::ControlSynthField(ControlSynthConfig config) : config_(std::move(config)) {
  if (config_.dim < 1) throw ConfigError("control_synth: dim must be >= 1");
  if (config_.input_dim < 0) config_.input_dim = config_.dim;
  if (config_.activations.empty())
    config_.activations.assign(config_.widths.size(), Activation{});
  if (config_.activations.size() != config_.widths.size())
    throw ConfigError("control_synth: one activation per nonlinear block is required");
  for (int k : config_.widths)
    if (k < 1) throw ConfigError("control_synth: block widths must be >= 1");
  for (const auto& a : config_.activations)
    if (a.kind == ActivationKind::leaky_relu && !(a.slope > 0.0))
      throw ConfigError("control_synth: leaky_relu slope must be > 0");
}

ControlSynthField ControlSynthField::zeros(const ControlSynthConfig& config) {
  ControlSynthField f(config);
  const int d = f.dim();
  f.params_.add("A0", Mat::Zero(d, d));
  for (int j = 0; j < f.block_count(); ++j) {
    f.params_.add(a_name(j), Mat::Zero(d, f.width(j)));
    f.params_.add(w_name(j), Mat::Zero(f.width(j), d));
  }
  f.params_.add("G", Mat::Zero(d, f.input_dim()));
  f.params_.add("c", Mat::Zero(d, 1));
  return f;
}

ControlSynthField ControlSynthField::identity_init(const ControlSynthConfig& config, Rng& rng,
                                                   double decay) {
  ControlSynthField f = zeros(config);
  if (f.input_dim() != f.dim())
    throw ConfigError("control_synth identity_init needs input_dim == dim");
  const int d = f.dim();
  f.params_.set_value("A0", -decay * Mat::Identity(d, d));
  f.params_.set_value("G", decay * Mat::Identity(d, d));
  for (int j = 0; j < f.block_count(); ++j) {
    // Gaussian draws have full rank with probability one.
    f.params_.set_value(w_name(j), rng.normal_matrix(f.width(j), d) / std::sqrt(double(d)));
  }
  return f;
}

const Mat& ControlSynthField::A(int j) const { return params_.value(a_name(j)); }
const Mat& ControlSynthField::W(int j) const { return params_.value(w_name(j)); }

Mat ControlSynthField::eval(const Mat& x, const Mat& u) const {
  if (x.cols() != dim() || u.cols() != input_dim() || u.rows() != x.rows())
    throw DimensionError("control_synth eval: expected x n x " + std::to_string(dim()) +
                         " and u n x " + std::to_string(input_dim()));
  Mat out = x * A0().transpose() + u * G().transpose();
  out.rowwise() += c().col(0).transpose();
  for (int j = 0; j < block_count(); ++j)
    out += activation(j).apply(Mat(x * W(j).transpose())) * A(j).transpose();
  if (!out.allFinite()) throw NumericError("field 'control_synth' produced a non-finite value");
  return out;
}

ad::Var ControlSynthField::eval(ad::Tape& tape, ad::Var x, const Mat& u) {
  if (x.cols() != dim() || u.cols() != input_dim() || u.rows() != x.rows())
    throw DimensionError("control_synth eval: expected x n x " + std::to_string(dim()) +
                         " and u n x " + std::to_string(input_dim()));
  ad::Var out = ad::matmul(x, ad::transpose(tape.param(params_, "A0")));
  out = out + ad::matmul(tape.constant(u), ad::transpose(tape.param(params_, "G")));
  out = ad::add_row(out, ad::transpose(tape.param(params_, "c")));
  for (int j = 0; j < block_count(); ++j) {
    ad::Var pre = ad::matmul(x, ad::transpose(tape.param(params_, w_name(j))));
    out = out + ad::matmul(activation(j).apply(pre), ad::transpose(tape.param(params_, a_name(j))));
  }
  if (!out.value().allFinite())
    throw NumericError("field 'control_synth' produced a non-finite value");
  return out;
}

ConditionedField::ConditionedField(ControlSynthField& field, Mat input)
    : field_(&field), input_(std::move(input)) {
  if (input_.cols() != field.input_dim())
    throw DimensionError("conditioned field: input must have " +
                         std::to_string(field.input_dim()) + " columns");
}

const Mat& ConditionedField::input_for(Eigen::Index rows) const {
  if (input_.rows() != rows)
    throw DimensionError("conditioned field: " + std::to_string(input_.rows()) +
                         " input rows for " + std::to_string(rows) + " states");
  return input_;
}

Mat ConditionedField::eval(const Vec& /*t*/, const Mat& x) const {
  return field_->eval(x, input_for(x.rows()));
}

ad::Var ConditionedField::eval(ad::Tape& tape, const Vec& /*t*/, ad::Var x) {
  return field_->eval(tape, x, input_for(x.rows()));
}

// ----------------------------------------------------------- AnalyticField

AnalyticField::AnalyticField(AnalyticKind kind, int dim) : kind_(kind), dim_(dim) {
  if (dim < 1) throw ConfigError("analytic field: dim must be >= 1");
}

std::shared_ptr<AnalyticField> AnalyticField::constant(const Vec& c) {
  std::shared_ptr<AnalyticField> f(new AnalyticField(AnalyticKind::constant, int(c.size())));
  f->params_.add("c", Mat(c.transpose()), false);
  return f;
}

std::shared_ptr<AnalyticField> AnalyticField::linear(const Mat& a, bool trainable) {
  if (a.rows() != a.cols()) throw DimensionError("analytic linear field needs a square matrix");
  std::shared_ptr<AnalyticField> f(new AnalyticField(AnalyticKind::linear, int(a.rows())));
  f->params_.add("A", a, trainable);
  return f;
}

std::shared_ptr<AnalyticField> AnalyticField::decay(int dim) {
  return linear(-Mat::Identity(dim, dim));
}

std::shared_ptr<AnalyticField> AnalyticField::perturbed(std::shared_ptr<const AnalyticField> base,
                                                        double delta, PerturbationKind kind,
                                                        const Vec& direction) {
  if (!base) throw ConfigError("perturbed field needs a base field");
  if (!(delta >= 0.0)) throw ConfigError("perturbation size delta must be >= 0");
  std::shared_ptr<AnalyticField> f(new AnalyticField(AnalyticKind::perturbed, base->dim()));
  f->base_ = std::move(base);
  f->delta_ = delta;
  f->perturbation_ = kind;
  if (kind == PerturbationKind::offset) {
    Vec dir = direction.size() == 0 ? Vec::Unit(f->dim_, 0) : direction;
    if (dir.size() != f->dim_ || !(dir.norm() > 0.0))
      throw ConfigError("offset perturbation needs a nonzero direction of matching size");
    f->direction_ = dir / dir.norm();
  }
  return f;
}

std::string AnalyticField::kind() const {
  switch (kind_) {
    case AnalyticKind::constant: return "analytic_constant";
    case AnalyticKind::linear: return "analytic_linear";
    case AnalyticKind::perturbed: return "analytic_perturbed";
  }
  return "analytic";
}

Mat AnalyticField::perturbation(const Vec& t, const Mat& x) const {
  Mat p(x.rows(), dim_);
  if (perturbation_ == PerturbationKind::offset) {
    p = direction_.transpose().replicate(x.rows(), 1);
  } else {
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim_));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (int i = 0; i < dim_; ++i) {
        const double s = x(r, (i + 1) % dim_);
        p(r, i) = scale * (i % 2 == 0 ? std::sin(3.0 * s + t(r)) : std::cos(2.0 * s - t(r)));
      }
    }
  }
  return delta_ * p;
}

Mat AnalyticField::eval(const Vec& t, const Mat& x) const {
  if (x.cols() != dim_ || t.size() != x.rows())
    throw DimensionError("analytic eval: dimension mismatch");
  Mat out;
  switch (kind_) {
    case AnalyticKind::constant:
      out = params_.value("c").replicate(x.rows(), 1);
      break;
    case AnalyticKind::linear:
      out = x * params_.value("A").transpose();
      break;
    case AnalyticKind::perturbed:
      out = base_->eval(t, x) + perturbation(t, x);
      break;
  }
  check_finite(out, t, x);
  return out;
}

ad::Var AnalyticField::eval(ad::Tape& tape, const Vec& t, ad::Var x) {
  if (x.cols() != dim_ || t.size() != x.rows())
    throw DimensionError("analytic eval: dimension mismatch");
  switch (kind_) {
    case AnalyticKind::constant: {
      ad::Var ones = tape.constant(Mat::Ones(x.rows(), 1));
      return ad::matmul(ones, tape.param(params_, "c"));
    }
    case AnalyticKind::linear:
      return ad::matmul(x, ad::transpose(tape.param(params_, "A")));
    case AnalyticKind::perturbed:
      if (perturbation_ != PerturbationKind::offset)
        throw UnsupportedError("oscillating perturbed fields are not differentiable on the tape");
      return std::const_pointer_cast<AnalyticField>(base_)->eval(tape, t, x) +
             tape.constant(perturbation(t, x.value()));
  }
  throw Error("unreachable");
}

double AnalyticField::lipschitz_constant() const {
  switch (kind_) {
    case AnalyticKind::constant: return 0.0;
    case AnalyticKind::linear: return spectral_norm(params_.value("A"));
    case AnalyticKind::perturbed: {
      const double lp = perturbation_ == PerturbationKind::offset
                            ? 0.0
                            : 3.0 / std::sqrt(static_cast<double>(dim_));
      return base_->lipschitz_constant() + delta_ * lp;
    }
  }
  return 0.0;
}

double AnalyticField::second_derivative_bound(const Mat& x0, double horizon) const {
  switch (kind_) {
    case AnalyticKind::constant: return 0.0;
    case AnalyticKind::linear: {
      // |x''| = |A^2 x(t)| <= ||A^2|| |x(t)|, |x(t)| <= exp(mu t) |x0| with
      // mu the largest eigenvalue of the symmetric part of A.
      const Mat& a = params_.value("A");
      const double mu = sym_eig_max(0.5 * (a + a.transpose()));
      const double growth = std::max(1.0, std::exp(mu * horizon));
      double rmax = 0.0;
      for (Eigen::Index i = 0; i < x0.rows(); ++i) rmax = std::max(rmax, x0.row(i).norm());
      return spectral_norm(a * a) * rmax * growth;
    }
    case AnalyticKind::perturbed:
      throw UnsupportedError("second-derivative bound is defined for the exact (truth) field");
  }
  return 0.0;
}

Mat AnalyticField::exact_flow(double t0, double t1, const Mat& x0) const {
  switch (kind_) {
    case AnalyticKind::constant:
      return x0 + (t1 - t0) * params_.value("c").replicate(x0.rows(), 1);
    case AnalyticKind::linear: {
      const Mat e = ((t1 - t0) * params_.value("A")).exp();
      return x0 * e.transpose();
    }
    case AnalyticKind::perturbed:
      throw UnsupportedError("perturbed fields have no closed-form flow");
  }
  return x0;
}

double lipschitz_estimate(const VectorField& field, const DomainBox& box, int probes, Rng& rng) {
  if (probes < 2) throw ConfigError("lipschitz_estimate: probes must be >= 2");
  const int d = field.dim();
  if (box.lo.size() != d || box.hi.size() != d)
    throw DimensionError("lipschitz_estimate: box dimension mismatch");
  for (int i = 0; i < d; ++i)
    if (!(box.hi(i) > box.lo(i)))
      throw ConfigError("lipschitz_estimate: degenerate box along axis " + std::to_string(i));
  if (box.t_hi < box.t_lo) throw ConfigError("lipschitz_estimate: inverted time range");
  Mat pts(2 * probes, d);
  Vec times(2 * probes);
  for (int p = 0; p < probes; ++p) {
    const double t = rng.uniform(box.t_lo, box.t_hi);
    for (int k = 0; k < 2; ++k) {
      for (int i = 0; i < d; ++i) pts(2 * p + k, i) = rng.uniform(box.lo(i), box.hi(i));
      times(2 * p + k) = t;
    }
  }
  const Mat v = field.eval(times, pts);
  double best = 0.0;
  for (int p = 0; p < probes; ++p) {
    const double dx = (pts.row(2 * p) - pts.row(2 * p + 1)).norm();
    if (dx <= 0.0) continue;
    best = std::max(best, (v.row(2 * p) - v.row(2 * p + 1)).norm() / dx);
  }
  return best;
}

}  // namespace fmlab
