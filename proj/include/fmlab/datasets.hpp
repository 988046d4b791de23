#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fmlab/core/rng.hpp"
#include "fmlab/core/types.hpp"

namespace fmlab {

// Synthetic 2-D densities. Fixed geometry:
//   gaussian        N(center, noise_scale^2 I)
//   two_moons       scikit-learn style moons, recentred and scaled by 1.5,
//                   with N(0, noise_scale^2) jitter before scaling
//   eight_gaussians 8 centres on the radius-2 circle at angles k*pi/4
//   checkerboard    the 8 dark cells of a 4x4 board on [-2, 2]^2
//   spiral          two interleaved arms, radius up to ~3.1
struct DatasetSpec {
  std::string name = "gaussian";
  double noise_scale = 1.0;
  int sample_count = 256;
  // Translation applied to every sample (used for shifted-gaussian tasks).
  double center_x = 0.0;
  double center_y = 0.0;
};

struct LabeledBatch {
  Mat points;               // sample_count x 2
  std::vector<int> labels;  // mixture component / moon / arm index
};

const std::vector<std::string>& dataset_names();
double default_noise_scale(const std::string& name);
void validate(const DatasetSpec& spec);

LabeledBatch sample_labeled(const DatasetSpec& spec, Rng& rng);
Mat sample(const DatasetSpec& spec, Rng& rng);
// Source distribution: standard Gaussian.
Mat sample_source(int count, int dim, Rng& rng);

void write_points_csv(std::ostream& os, const Mat& points);

}  // namespace fmlab
