#pragma once

#include <cstdint>
#include <random>

#include "fmlab/core/types.hpp"

namespace fmlab {

// Seeded stream with platform-independent transforms. The engine is
// std::mt19937_64, whose output sequence is fixed by the standard; the
// uniform and normal transforms are written out here because the std
// distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  // Number of raw 64-bit draws consumed so far.
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();
  Mat normal_matrix(Eigen::Index rows, Eigen::Index cols);
  Mat uniform_matrix(Eigen::Index rows, Eigen::Index cols, double lo, double hi);

  // Independent child stream; does not advance this stream.
  Rng fork(std::uint64_t stream) const;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fmlab
