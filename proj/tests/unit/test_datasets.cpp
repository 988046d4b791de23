#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fmlab/core/errors.hpp"
#include "fmlab/datasets.hpp"

using namespace fmlab;

namespace {
DatasetSpec spec(const std::string& name, int n, double noise = -1.0) {
  DatasetSpec s;
  s.name = name;
  s.sample_count = n;
  s.noise_scale = noise < 0 ? default_noise_scale(name) : noise;
  return s;
}
}  // namespace

TEST(Datasets, GaussianMoments) {
  Rng rng(1);
  const Mat x = sample(spec("gaussian", 10000, 1.0), rng);
  for (int c = 0; c < 2; ++c) {
    const double mean = x.col(c).mean();
    EXPECT_NEAR(mean, 0.0, 0.05);
    EXPECT_NEAR((x.col(c).array() - mean).square().mean(), 1.0, 0.05);
  }
}

TEST(Datasets, EightGaussiansWithoutNoiseSitOnCenters) {
  Rng rng(2);
  const LabeledBatch b = sample_labeled(spec("eight_gaussians", 2000, 0.0), rng);
  for (Eigen::Index i = 0; i < b.points.rows(); ++i) {
    const double a = b.labels[static_cast<std::size_t>(i)] * std::numbers::pi / 4.0;
    EXPECT_DOUBLE_EQ(b.points(i, 0), 2.0 * std::cos(a));
    EXPECT_DOUBLE_EQ(b.points(i, 1), 2.0 * std::sin(a));
  }
}

TEST(Datasets, TwoMoonsClassBalance) {
  Rng rng(3);
  const LabeledBatch b = sample_labeled(spec("two_moons", 10000), rng);
  int ones = 0;
  for (int l : b.labels) ones += l;
  EXPECT_NEAR(ones / 10000.0, 0.5, 0.02);
}

TEST(Datasets, DeterministicGivenSeed) {
  for (const auto& name : dataset_names()) {
    Rng a(9), b(9);
    EXPECT_EQ(sample(spec(name, 100), a), sample(spec(name, 100), b)) << name;
  }
}

TEST(Datasets, BoundedSupportAtDefaultScales) {
  for (const auto& name : dataset_names()) {
    if (name == "gaussian") continue;  // unbounded by definition
    Rng rng(4);
    const Mat x = sample(spec(name, 100000), rng);
    EXPECT_LE(x.cwiseAbs().maxCoeff(), 4.0) << name;
  }
}

TEST(Datasets, CheckerboardOnlyDarkCells) {
  Rng rng(5);
  const Mat x = sample(spec("checkerboard", 5000), rng);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int col = static_cast<int>(std::floor(x(i, 0) + 2.0));
    const int row = static_cast<int>(std::floor(x(i, 1) + 2.0));
    EXPECT_EQ((col + row) % 2, 0) << x.row(i);
  }
}

TEST(Datasets, CenterShiftsSamples) {
  DatasetSpec s = spec("gaussian", 4000, 0.5);
  s.center_x = 2.0;
  Rng rng(6);
  const Mat x = sample(s, rng);
  EXPECT_NEAR(x.col(0).mean(), 2.0, 0.05);
  EXPECT_NEAR(x.col(1).mean(), 0.0, 0.05);
}

TEST(Datasets, RejectsInvalidSpecs) {
  Rng rng(0);
  EXPECT_THROW(sample(spec("bananas", 10, 0.1), rng), ConfigError);
  EXPECT_THROW(sample(spec("gaussian", 0, 1.0), rng), ConfigError);
  DatasetSpec negative = spec("gaussian", 10, 1.0);
  negative.noise_scale = -0.1;
  EXPECT_THROW(sample(negative, rng), ConfigError);
}

TEST(Datasets, SourceIsStandardNormal) {
  Rng a(7), b(7);
  EXPECT_EQ(sample_source(5, 3, a), b.normal_matrix(5, 3));
}

TEST(Datasets, CsvHeader) {
  Mat p(2, 2);
  p << 0.5, -1, 2, 3.25;
  std::ostringstream os;
  write_points_csv(os, p);
  EXPECT_EQ(os.str(), "x,y\n0.5,-1\n2,3.25\n");
}
