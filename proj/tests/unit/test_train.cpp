#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "fmlab/checkpoint.hpp"
#include "fmlab/core/errors.hpp"
#include "fmlab/train_cfm.hpp"

using namespace fmlab;

namespace {

CouplingBatch one_pair(double x0, double x1) {
  CouplingBatch b;
  b.x0 = Mat::Constant(1, 1, x0);
  b.x1 = Mat::Constant(1, 1, x1);
  return b;
}

double smoothed(const std::vector<TrainRecord>& curve, int step, int window) {
  double s = 0;
  for (int k = step - window + 1; k <= step; ++k) s += curve.at(k - 1).loss;
  return s / window;
}

}  // namespace

TEST(CfmLoss, ExactTargetGivesZero) {
  Vec c(1);
  c << 2.0;
  Vec t(1);
  t << 0.5;
  EXPECT_EQ(cfm_loss_value(*AnalyticField::constant(c), one_pair(0, 2), t), 0.0);
  Vec z(1);
  z << 0.0;
  EXPECT_DOUBLE_EQ(cfm_loss_value(*AnalyticField::constant(z), one_pair(0, 2), t), 4.0);
  ad::Tape tape;
  auto f = AnalyticField::constant(z);
  EXPECT_DOUBLE_EQ(cfm_loss(tape, *f, one_pair(0, 2), t).scalar(), 4.0);
}

TEST(CfmLoss, ZeroMlpOnCoincidentPairs) {
  MlpField f = MlpField::zeros(MlpConfig{2, {8}, 4});
  Rng rng(1);
  CouplingBatch b;
  b.x0 = rng.normal_matrix(10, 2);
  b.x1 = b.x0;
  Vec t = Vec::LinSpaced(10, 0, 1);
  EXPECT_EQ(cfm_loss_value(f, b, t), 0.0);
}

TEST(CfmLoss, EndpointReductions) {
  Rng rng(2);
  MlpField f(MlpConfig{2, {16}, 4}, rng);
  CouplingBatch b;
  b.x0 = rng.normal_matrix(12, 2);
  b.x1 = rng.normal_matrix(12, 2);
  const Mat target = b.x1 - b.x0;
  const Vec t0 = Vec::Zero(12), t1 = Vec::Ones(12);
  EXPECT_NEAR(cfm_loss_value(f, b, t0), (f.eval(0.0, b.x0) - target).squaredNorm() / 12, 1e-12);
  EXPECT_NEAR(cfm_loss_value(f, b, t1), (f.eval(1.0, b.x1) - target).squaredNorm() / 12, 1e-12);
  ad::Tape tape;
  EXPECT_NEAR(cfm_loss(tape, f, b, t1).scalar(), cfm_loss_value(f, b, t1), 1e-12);
}

TEST(CfmLoss, RejectsBadBatches) {
  Vec z(1);
  z << 0.0;
  auto f = AnalyticField::constant(z);
  CouplingBatch empty;
  empty.x0 = Mat(0, 1);
  empty.x1 = Mat(0, 1);
  EXPECT_THROW(cfm_loss_value(*f, empty, Vec(0)), ConfigError);
  EXPECT_THROW(cfm_loss_value(*f, one_pair(0, 1), Vec::Zero(2)), DimensionError);
}

TEST(Pretrain, GradientClipping) {
  Rng rng(3);
  MlpField f(MlpConfig{2, {16}, 4}, rng);
  CouplingBatch b;
  b.x0 = rng.normal_matrix(32, 2);
  b.x1 = 50.0 * rng.normal_matrix(32, 2);
  const Vec t = Vec::Constant(32, 0.3);
  for (double clip : {1e-3, 0.5, 1e6}) {
    f.params().zero_grad();
    ad::Tape tape;
    tape.backward(cfm_loss(tape, f, b, t));
    const double before = f.params().grad_norm();
    const double reported = f.params().clip_grad_norm(clip);
    EXPECT_DOUBLE_EQ(reported, before);
    EXPECT_LE(f.params().grad_norm(), clip + 1e-9);
    if (before <= clip) EXPECT_DOUBLE_EQ(f.params().grad_norm(), before);
  }
}

TEST(Pretrain, ZeroLearningRateKeepsParameters) {
  Rng rng(4);
  MlpField f(MlpConfig{2, {16, 16}, 4}, rng);
  const std::string before = checkpoint_hash(save_checkpoint(f, {}));
  TrainConfig cfg;
  cfg.steps = 20;
  cfg.batch_size = 32;
  cfg.learning_rate = 0.0;
  DatasetSpec data{"two_moons", 0.1, 32};
  const PretrainResult r = pretrain(f, data, cfg);
  EXPECT_EQ(r.curve.size(), 20u);
  EXPECT_EQ(checkpoint_hash(save_checkpoint(f, {})), before);
}

TEST(Pretrain, DeterministicCheckpoints) {
  TrainConfig cfg;
  cfg.steps = 30;
  cfg.batch_size = 64;
  cfg.learning_rate = 1e-3;
  cfg.checkpoint_interval = 10;
  cfg.seed = 11;
  DatasetSpec data{"eight_gaussians", 0.1, 64};
  std::vector<std::string> hashes;
  for (int run = 0; run < 2; ++run) {
    Rng rng(5);
    MlpField f(MlpConfig{2, {16, 16}, 4}, rng);
    const PretrainResult r = pretrain(f, data, cfg);
    ASSERT_EQ(r.checkpoints.size(), 3u);
    EXPECT_EQ(r.checkpoints.back().at("tag"), "pretrained");
    EXPECT_EQ(r.checkpoints.front().at("training_step"), 10);
    std::string all;
    for (const auto& c : r.checkpoints) all += c.dump();
    hashes.push_back(all);
  }
  EXPECT_EQ(hashes[0], hashes[1]);
}

TEST(Pretrain, ShiftedGaussianLearnsMeanVelocity) {
  Rng rng(6);
  MlpField f(MlpConfig{2, {32, 32}, 4}, rng);
  TrainConfig cfg;
  cfg.steps = 600;
  cfg.batch_size = 128;
  cfg.learning_rate = 3e-3;
  cfg.seed = 6;
  DatasetSpec data{"gaussian", 1.0, 128, 2.0, 0.0};
  const PretrainResult r = pretrain(f, data, cfg);
  ASSERT_FALSE(r.diverged) << r.message;
  Rng probe(7);
  const Mat x0 = sample_source(1000, 2, probe);
  const Mat x1 = sample(DatasetSpec{"gaussian", 1.0, 1000, 2.0, 0.0}, probe);
  const Mat xt = 0.5 * (x0 + x1);
  const Eigen::RowVectorXd mean = f.eval(0.5, xt).colwise().mean();
  EXPECT_NEAR(mean(0), 2.0, 0.2);
  EXPECT_NEAR(mean(1), 0.0, 0.2);
}

TEST(Pretrain, TwoMoonsLossHalves) {
  Rng rng(8);
  MlpField f(MlpConfig{2, {64, 64}, 8}, rng);
  TrainConfig cfg;
  cfg.steps = 200;
  cfg.batch_size = 256;
  cfg.learning_rate = 3e-3;
  cfg.seed = 8;
  const PretrainResult r = pretrain(f, DatasetSpec{"two_moons", 0.1, 256}, cfg);
  ASSERT_EQ(r.curve.size(), 200u);
  EXPECT_LE(smoothed(r.curve, 200, 10), 0.5 * smoothed(r.curve, 10, 10));
}

TEST(Pretrain, LossCsvHeader) {
  std::ostringstream os;
  write_loss_csv(os, {{1, 0.5, 2.0}});
  EXPECT_EQ(os.str(), "step,loss,grad_norm\n1,0.5,2\n");
}

TEST(Pretrain, RejectsInvalidConfig) {
  Rng rng(9);
  MlpField f(MlpConfig{2, {4}, 2}, rng);
  TrainConfig cfg;
  cfg.grad_clip = 0.0;
  EXPECT_THROW(pretrain(f, DatasetSpec{}, cfg), ConfigError);
  cfg = TrainConfig{};
  cfg.learning_rate = -1.0;
  EXPECT_THROW(pretrain(f, DatasetSpec{}, cfg), ConfigError);
}
