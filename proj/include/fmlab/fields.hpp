#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fmlab/core/autodiff.hpp"
#include "fmlab/core/param_store.hpp"
#include "fmlab/core/rng.hpp"
#include "fmlab/core/types.hpp"

namespace fmlab {

// Time-dependent vector field v_t(x). States are batched row-wise and t
// carries one time per row.
class VectorField {
 public:
  virtual ~VectorField() = default;

  virtual int dim() const = 0;
  virtual std::string kind() const = 0;

  virtual Mat eval(const Vec& t, const Mat& x) const = 0;
  virtual ad::Var eval(ad::Tape& tape, const Vec& t, ad::Var x) = 0;

  Mat eval(double t, const Mat& x) const;
  ad::Var eval(ad::Tape& tape, double t, ad::Var x);

  virtual ParamStore& params() = 0;
  virtual const ParamStore& params() const = 0;

 protected:
  // Throws NumericError naming the field when out has non-finite entries.
  void check_finite(const Mat& out, const Vec& t, const Mat& x) const;
};

struct MlpConfig {
  int dim = 2;
  std::vector<int> hidden = {64, 64};
  // Even count of sinusoidal time features; the raw time is appended too.
  int time_features = 8;
};

// tanh MLP on [x, t, sin(k pi t), cos(k pi t) for k = 1..time_features/2].
class MlpField : public VectorField {
 public:
  // Glorot-uniform weights, zero biases.
  MlpField(const MlpConfig& config, Rng& rng);
  static MlpField zeros(const MlpConfig& config);

  int dim() const override { return config_.dim; }
  std::string kind() const override { return "mlp"; }
  const MlpConfig& config() const { return config_; }
  int input_width() const { return config_.dim + 1 + config_.time_features; }
  int layer_count() const { return static_cast<int>(config_.hidden.size()) + 1; }

  Mat eval(const Vec& t, const Mat& x) const override;
  ad::Var eval(ad::Tape& tape, const Vec& t, ad::Var x) override;
  using VectorField::eval;

  ParamStore& params() override { return params_; }
  const ParamStore& params() const override { return params_; }

  Mat time_embedding(const Vec& t) const;

 private:
  explicit MlpField(const MlpConfig& config);

  MlpConfig config_;
  ParamStore params_;
};

enum class ActivationKind { tanh, leaky_relu };

// Activation menu for the ControlSynth field. Both entries are continuous,
// strictly increasing and satisfy s * f(s) > 0 for s != 0.
struct Activation {
  ActivationKind kind = ActivationKind::tanh;
  double slope = 0.2;  // leaky_relu negative-side slope, > 0

  static Activation parse(const std::string& name, double slope = 0.2);
  std::string name() const;
  double apply(double s) const;
  // Integral of f from 0 to s (log cosh for tanh).
  double integral(double s) const;
  double lipschitz() const;
  Mat apply(const Mat& m) const;
  ad::Var apply(ad::Var v) const;
};

struct ControlSynthConfig {
  int dim = 2;
  std::vector<int> widths = {16};        // k_j for j = 1..M
  std::vector<Activation> activations;   // one per block; tanh when empty
  int input_dim = -1;                    // defaults to dim
};

// x' = A0 x + sum_j A_j f_j(W_j x) + G u + c. Parameters use the
// mathematical orientation: A0 d x d, A_j d x k_j, W_j k_j x d, G d x m,
// c d x 1.
class ControlSynthField {
 public:
  // All-zero parameters: the field vanishes identically.
  static ControlSynthField zeros(const ControlSynthConfig& config);
  // A0 = -decay I, G = decay I, c = 0, A_j = 0 and random W_j. With u equal
  // to the initial state this starts at an equilibrium, so the residual
  // stage is the identity map before training.
  static ControlSynthField identity_init(const ControlSynthConfig& config, Rng& rng,
                                         double decay = 1.0);

  int dim() const { return config_.dim; }
  int input_dim() const { return config_.input_dim; }
  int block_count() const { return static_cast<int>(config_.widths.size()); }
  int width(int j) const { return config_.widths.at(j); }
  const Activation& activation(int j) const { return config_.activations.at(j); }
  const ControlSynthConfig& config() const { return config_; }

  const Mat& A0() const { return params_.value("A0"); }
  const Mat& A(int j) const;
  const Mat& W(int j) const;
  const Mat& G() const { return params_.value("G"); }
  const Mat& c() const { return params_.value("c"); }

  // x: n x d, u: n x m (one input row per state row).
  Mat eval(const Mat& x, const Mat& u) const;
  ad::Var eval(ad::Tape& tape, ad::Var x, const Mat& u);

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  static std::string a_name(int j) { return "A" + std::to_string(j + 1); }
  static std::string w_name(int j) { return "W" + std::to_string(j + 1); }

 private:
  explicit ControlSynthField(ControlSynthConfig config);

  ControlSynthConfig config_;
  ParamStore params_;
};

// ControlSynth field with its input u(t) held fixed per sample (the handoff
// state for residual fine-tuning).
class ConditionedField : public VectorField {
 public:
  ConditionedField(ControlSynthField& field, Mat input);

  int dim() const override { return field_->dim(); }
  std::string kind() const override { return "control_synth"; }
  Mat eval(const Vec& t, const Mat& x) const override;
  ad::Var eval(ad::Tape& tape, const Vec& t, ad::Var x) override;
  using VectorField::eval;
  ParamStore& params() override { return field_->params(); }
  const ParamStore& params() const override { return field_->params(); }
  const Mat& input() const { return input_; }

 private:
  const Mat& input_for(Eigen::Index rows) const;

  ControlSynthField* field_;
  Mat input_;
};

enum class AnalyticKind { constant, linear, perturbed };
enum class PerturbationKind { offset, oscillating };

// Closed-form fields with known Lipschitz constant and exact flows.
class AnalyticField : public VectorField {
 public:
  static std::shared_ptr<AnalyticField> constant(const Vec& c);
  // Parameter "A"; trainable when requested (used for tape tests).
  static std::shared_ptr<AnalyticField> linear(const Mat& a, bool trainable = false);
  static std::shared_ptr<AnalyticField> decay(int dim);
  // base + delta * p(t, x) with ||p||_2 <= 1 everywhere. offset uses the
  // unit vector `direction`; oscillating uses
  // p = (sin(3 x_2 + t), cos(2 x_1 - t), ...)/sqrt(d).
  static std::shared_ptr<AnalyticField> perturbed(std::shared_ptr<const AnalyticField> base,
                                                  double delta, PerturbationKind kind,
                                                  const Vec& direction = Vec());

  int dim() const override { return dim_; }
  std::string kind() const override;
  AnalyticKind analytic_kind() const { return kind_; }

  Mat eval(const Vec& t, const Mat& x) const override;
  ad::Var eval(ad::Tape& tape, const Vec& t, ad::Var x) override;
  using VectorField::eval;
  ParamStore& params() override { return params_; }
  const ParamStore& params() const override { return params_; }

  // Lipschitz constant in x (Euclidean norm).
  double lipschitz_constant() const;
  // Upper bound on ||d^2/dt^2 psi_t(x0)|| over t in [0, horizon] for the
  // exact flow from every row of x0. Not available for perturbed fields.
  double second_derivative_bound(const Mat& x0, double horizon) const;
  bool has_exact_flow() const { return kind_ != AnalyticKind::perturbed; }
  Mat exact_flow(double t0, double t1, const Mat& x0) const;
  double delta() const { return delta_; }
  const AnalyticField* base() const { return base_.get(); }

 private:
  AnalyticField(AnalyticKind kind, int dim);
  Mat perturbation(const Vec& t, const Mat& x) const;

  AnalyticKind kind_;
  int dim_;
  ParamStore params_;
  std::shared_ptr<const AnalyticField> base_;
  double delta_ = 0.0;
  PerturbationKind perturbation_ = PerturbationKind::offset;
  Vec direction_;
};

struct DomainBox {
  Vec lo;
  Vec hi;
  double t_lo = 0.0;
  double t_hi = 1.0;
};

// Largest ||v(t,x) - v(t,y)|| / ||x - y|| over `probes` random pairs drawn
// uniformly from the box (shared t per pair). A lower bound on the true
// Lipschitz constant.
double lipschitz_estimate(const VectorField& field, const DomainBox& box, int probes, Rng& rng);

}  // namespace fmlab
