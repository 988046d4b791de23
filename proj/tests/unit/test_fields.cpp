#include <gtest/gtest.h>

#include <cmath>

#include "fmlab/checkpoint.hpp"
#include "fmlab/core/errors.hpp"
#include "fmlab/core/grad_check.hpp"
#include "fmlab/fields.hpp"

using namespace fmlab;

TEST(Fields, ConstantAnalyticField) {
  Vec c(2);
  c << 1, 0;
  auto f = AnalyticField::constant(c);
  Mat x(3, 2);
  x << 5, 6, -1, 2, 0, 0;
  const Mat v = f->eval(0.7, x);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(v(i, 0), 1.0);
    EXPECT_EQ(v(i, 1), 0.0);
  }
}

TEST(Fields, ControlSynthLinearCase) {
  ControlSynthConfig cfg;
  cfg.dim = 2;
  cfg.widths = {};
  ControlSynthField f = ControlSynthField::zeros(cfg);
  f.params().set_value("A0", -Mat::Identity(2, 2));
  Mat x(1, 2);
  x << 2, 0;
  const Mat v = f.eval(x, Mat::Zero(1, 2));
  EXPECT_EQ(v(0, 0), -2.0);
  EXPECT_EQ(v(0, 1), 0.0);
}

TEST(Fields, ZeroMlpOutputsZero) {
  MlpField f = MlpField::zeros(MlpConfig{});
  Rng rng(1);
  const Mat x = rng.normal_matrix(5, 2);
  Vec t(5);
  t << 0, 0.25, 0.5, 0.9, 1.3;
  EXPECT_EQ(f.eval(t, x).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Fields, MlpShapes) {
  Rng rng(2);
  MlpField f(MlpConfig{}, rng);
  EXPECT_EQ(f.input_width(), 2 + 1 + 8);
  EXPECT_EQ(f.params().value("w0").rows(), 11);
  EXPECT_EQ(f.params().value("w0").cols(), 64);
  EXPECT_EQ(f.params().value("w2").cols(), 2);
  EXPECT_EQ(f.eval(0.3, rng.normal_matrix(4, 2)).cols(), 2);
  EXPECT_THROW(f.eval(0.3, rng.normal_matrix(4, 3)), DimensionError);
}

TEST(Fields, TapeEvalMatchesPlainEval) {
  Rng rng(3);
  MlpField f(MlpConfig{2, {8, 8}, 4}, rng);
  const Mat x = rng.normal_matrix(6, 2);
  const Vec t = rng.uniform_matrix(6, 1, 0, 1);
  ad::Tape tape;
  const Mat taped = f.eval(tape, t, tape.constant(x)).value();
  EXPECT_LE((taped - f.eval(t, x)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Fields, MlpGradientsPassGradCheck) {
  Rng rng(4);
  MlpField f(MlpConfig{2, {5, 4}, 4}, rng);
  const Mat x = rng.normal_matrix(3, 2);
  const Vec t = rng.uniform_matrix(3, 1, 0, 1);
  const Mat w = rng.normal_matrix(3, 2);
  auto obj = [&](ad::Tape& tape) {
    return ad::sum(ad::cwise_mul(f.eval(tape, t, tape.constant(x)), tape.constant(w)));
  };
  EXPECT_LE(grad_check(obj, f.params()).max_rel_error, 1e-4);
}

TEST(Fields, ControlSynthGradientsPassGradCheck) {
  for (const char* act : {"tanh", "leaky_relu"}) {
    Rng rng(5);
    ControlSynthConfig cfg;
    cfg.dim = 2;
    cfg.widths = {3, 2};
    cfg.activations = {Activation::parse(act), Activation::parse("tanh")};
    ControlSynthField f = ControlSynthField::identity_init(cfg, rng, 0.7);
    for (auto& e : f.params().entries()) e.value += 0.3 * rng.normal_matrix(e.value.rows(), e.value.cols());
    const Mat x = rng.normal_matrix(4, 2);
    const Mat u = rng.normal_matrix(4, 2);
    const Mat w = rng.normal_matrix(4, 2);
    auto obj = [&](ad::Tape& tape) {
      return ad::sum(ad::cwise_mul(f.eval(tape, tape.constant(x), u), tape.constant(w)));
    };
    EXPECT_LE(grad_check(obj, f.params()).max_rel_error, 1e-4) << act;
    ad::Tape tape;
    EXPECT_LE((f.eval(tape, tape.constant(x), u).value() - f.eval(x, u)).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(Fields, IdentityInitHasHandoffEquilibrium) {
  Rng rng(6);
  ControlSynthConfig cfg;
  ControlSynthField f = ControlSynthField::identity_init(cfg, rng, 1.0);
  const Mat x = rng.normal_matrix(5, 2);
  EXPECT_LE(f.eval(x, x).cwiseAbs().maxCoeff(), 1e-15);
  // W_1 has full row rank min(k, d).
  Eigen::JacobiSVD<Mat> svd(f.W(0));
  EXPECT_GT(svd.singularValues().minCoeff(), 1e-6);
}

TEST(Fields, ActivationMenuSatisfiesSignAndMonotonicity) {
  for (const Activation& a : {Activation::parse("tanh"), Activation::parse("leaky_relu", 0.2),
                              Activation::parse("leaky_relu", 1.5)}) {
    double prev = -INFINITY;
    for (int e = -30; e <= 10; ++e) {
      for (double sign : {-1.0, 1.0}) {
        const double s = sign * std::pow(10.0, e / 10.0);
        EXPECT_GT(s * a.apply(s), 0.0) << a.name() << " at " << s;
      }
    }
    for (double s = -10; s <= 10; s += 1e-3) {
      const double v = a.apply(s);
      EXPECT_GT(v, prev) << a.name();
      prev = v;
    }
  }
  EXPECT_THROW(Activation::parse("relu"), ConfigError);
  EXPECT_THROW(Activation::parse("leaky_relu", 0.0), ConfigError);
}

TEST(Fields, ActivationIntegrals) {
  const Activation t = Activation::parse("tanh");
  EXPECT_NEAR(t.integral(1.0), std::log(std::cosh(1.0)), 1e-15);
  EXPECT_NEAR(t.integral(-40.0), 40.0 - std::log(2.0), 1e-12);
  const Activation l = Activation::parse("leaky_relu", 0.2);
  EXPECT_DOUBLE_EQ(l.integral(2.0), 2.0);
  EXPECT_DOUBLE_EQ(l.integral(-2.0), 0.4);
  EXPECT_EQ(l.lipschitz(), 1.0);
  EXPECT_EQ(Activation::parse("leaky_relu", 1.5).lipschitz(), 1.5);
}

TEST(Fields, LipschitzEstimates) {
  Rng rng(7);
  DomainBox box{Vec::Constant(2, -1.0), Vec::Constant(2, 1.0), 0.0, 1.0};
  Mat a = Mat::Zero(2, 2);
  a(0, 0) = 2;
  a(1, 1) = 3;
  const double est = lipschitz_estimate(*AnalyticField::linear(a), box, 10000, rng);
  EXPECT_LE(est, 3.0 + 1e-12);
  EXPECT_GE(est, 2.9);
  EXPECT_EQ(lipschitz_estimate(*AnalyticField::constant(Vec::Ones(2)), box, 100, rng), 0.0);
  EXPECT_NEAR(lipschitz_estimate(*AnalyticField::decay(2), box, 100, rng), 1.0, 1e-12);
  DomainBox flat = box;
  flat.hi(1) = -1.0;
  EXPECT_THROW(lipschitz_estimate(*AnalyticField::decay(2), flat, 100, rng), ConfigError);
}

TEST(Fields, PerturbationStaysWithinDelta) {
  Mat a(2, 2);
  a << -0.5, 1, -1, -0.5;
  auto base = AnalyticField::linear(a);
  Vec dir(2);
  dir << 0.6, 0.8;
  for (auto kind : {PerturbationKind::offset, PerturbationKind::oscillating}) {
    auto p = AnalyticField::perturbed(base, 0.1, kind, dir);
    Rng rng(8);
    const Mat x = rng.uniform_matrix(100000, 2, -5, 5);
    const Vec t = rng.uniform_matrix(100000, 1, 0, 1);
    const double sup = (p->eval(t, x) - base->eval(t, x)).rowwise().norm().maxCoeff();
    EXPECT_LE(sup, 0.1 + 1e-15);
    EXPECT_GT(sup, 0.05);
  }
}

TEST(Fields, AnalyticFlowsAndBounds) {
  Mat a(2, 2);
  a << -0.5, 1, -1, -0.5;
  auto f = AnalyticField::linear(a);
  Rng rng(9);
  const Mat x0 = rng.normal_matrix(4, 2);
  // Exact flow satisfies the ODE: compare against a centered difference.
  const double h = 1e-5;
  const Mat d = (f->exact_flow(0, 0.5 + h, x0) - f->exact_flow(0, 0.5 - h, x0)) / (2 * h);
  EXPECT_LE((d - f->eval(0.5, f->exact_flow(0, 0.5, x0))).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(f->lipschitz_constant(), std::sqrt(1.25), 1e-12);
  // Second-derivative bound dominates sampled |x''| = |A^2 x(t)|.
  const double m = f->second_derivative_bound(x0, 1.0);
  for (double t = 0; t <= 1.0; t += 0.01) {
    const Mat xt = f->exact_flow(0, t, x0);
    EXPECT_LE(((a * a) * xt.transpose()).colwise().norm().maxCoeff(), m + 1e-12);
  }
}

TEST(Checkpoint, MlpRoundTrip) {
  Rng rng(10);
  MlpField f(MlpConfig{2, {6}, 2}, rng);
  const nlohmann::json ck = save_checkpoint(f, {7, 12, "pretrained"});
  EXPECT_EQ(ck.at("format_version").get<int>(), kCheckpointFormatVersion);
  EXPECT_EQ(ck.at("field_kind").get<std::string>(), "mlp");
  EXPECT_EQ(ck.at("rng_seed").get<std::uint64_t>(), 7u);
  EXPECT_EQ(ck.at("training_step").get<long>(), 12);
  CheckpointMeta meta;
  MlpField g = load_mlp(nlohmann::json::parse(ck.dump()), &meta);
  EXPECT_EQ(meta.tag, "pretrained");
  for (const auto& e : f.params().entries()) EXPECT_EQ(e.value, g.params().value(e.name)) << e.name;
  EXPECT_EQ(checkpoint_hash(ck), f.params().content_hash());
  EXPECT_THROW(load_control_synth(ck), ConfigError);
}

TEST(Checkpoint, ControlSynthRoundTrip) {
  Rng rng(11);
  ControlSynthConfig cfg;
  cfg.widths = {4};
  cfg.activations = {Activation::parse("leaky_relu", 0.3)};
  ControlSynthField f = ControlSynthField::identity_init(cfg, rng);
  const nlohmann::json ck = save_checkpoint(f, {1, 2, "residual"});
  ControlSynthField g = load_control_synth(nlohmann::json::parse(ck.dump()));
  EXPECT_EQ(g.activation(0).name(), f.activation(0).name());
  EXPECT_EQ(g.activation(0).slope, 0.3);
  for (const auto& e : f.params().entries()) EXPECT_EQ(e.value, g.params().value(e.name)) << e.name;
}

TEST(Checkpoint, MissingFileNamesPath) {
  try {
    load_checkpoint_file("/nonexistent/ck.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/ck.json"), std::string::npos);
  }
}
