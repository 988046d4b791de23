#include "fmlab/datasets.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include "fmlab/core/errors.hpp"
#include "fmlab/io.hpp"

namespace fmlab {

namespace {

constexpr double kPi = std::numbers::pi;

void moon_point(int label, double noise, Rng& rng, double& x, double& y) {
  const double a = kPi * rng.uniform();
  if (label == 0) {
    x = std::cos(a);
    y = std::sin(a);
  } else {
    x = 1.0 - std::cos(a);
    y = 0.5 - std::sin(a);
  }
  x += noise * rng.normal();
  y += noise * rng.normal();
  x = 1.5 * (x - 0.5);
  y = 1.5 * (y - 0.25);
}

}  // namespace

const std::vector<std::string>& dataset_names() {
  static const std::vector<std::string> names = {"gaussian", "two_moons", "eight_gaussians",
                                                 "checkerboard", "spiral"};
  return names;
}

double default_noise_scale(const std::string& name) {
  if (name == "gaussian") return 1.0;
  if (name == "two_moons") return 0.1;
  if (name == "eight_gaussians") return 0.1;
  if (name == "checkerboard") return 0.0;
  if (name == "spiral") return 0.1;
  throw ConfigError("unknown dataset '" + name + "'");
}

void validate(const DatasetSpec& spec) {
  bool known = false;
  for (const auto& n : dataset_names()) known = known || n == spec.name;
  if (!known) throw ConfigError("unknown dataset '" + spec.name + "'");
  if (!(spec.noise_scale >= 0.0)) throw ConfigError("dataset noise_scale must be >= 0");
  if (spec.sample_count < 1) throw ConfigError("dataset sample_count must be >= 1");
}

LabeledBatch sample_labeled(const DatasetSpec& spec, Rng& rng) {
  validate(spec);
  const int n = spec.sample_count;
  const double s = spec.noise_scale;
  LabeledBatch out{Mat(n, 2), std::vector<int>(n, 0)};
  for (int i = 0; i < n; ++i) {
    double x = 0.0, y = 0.0;
    int label = 0;
    if (spec.name == "gaussian") {
      x = s * rng.normal();
      y = s * rng.normal();
    } else if (spec.name == "two_moons") {
      label = static_cast<int>(rng.uniform_index(2));
      moon_point(label, s, rng, x, y);
    } else if (spec.name == "eight_gaussians") {
      label = static_cast<int>(rng.uniform_index(8));
      const double a = label * kPi / 4.0;
      x = 2.0 * std::cos(a) + s * rng.normal();
      y = 2.0 * std::sin(a) + s * rng.normal();
    } else if (spec.name == "checkerboard") {
      // Column c in 0..3 of width 1 starting at -2; dark cells alternate.
      const double u = rng.uniform(-2.0, 2.0);
      const int col = std::min(3, static_cast<int>(std::floor(u + 2.0)));
      const int row = 2 * static_cast<int>(rng.uniform_index(2)) + (col % 2 == 0 ? 0 : 1);
      x = u + s * rng.normal();
      y = -2.0 + row + rng.uniform() + s * rng.normal();
      label = 4 * row + col;
    } else {  // spiral
      label = static_cast<int>(rng.uniform_index(2));
      const double t = std::sqrt(rng.uniform()) * 3.0 * kPi;
      const double sign = label == 0 ? 1.0 : -1.0;
      x = sign * (-std::cos(t) * t) / 3.0 + s * rng.normal();
      y = sign * (std::sin(t) * t) / 3.0 + s * rng.normal();
    }
    out.points(i, 0) = x + spec.center_x;
    out.points(i, 1) = y + spec.center_y;
    out.labels[i] = label;
  }
  return out;
}

Mat sample(const DatasetSpec& spec, Rng& rng) { return sample_labeled(spec, rng).points; }

Mat sample_source(int count, int dim, Rng& rng) {
  if (count < 1 || dim < 1) throw ConfigError("sample_source: count and dim must be >= 1");
  return rng.normal_matrix(count, dim);
}

void write_points_csv(std::ostream& os, const Mat& points) {
  if (points.cols() != 2) throw DimensionError("points CSV expects 2 columns");
  os << "x,y\n";
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    os << format_double(points(i, 0)) << ',' << format_double(points(i, 1)) << '\n';
}

}  // namespace fmlab
