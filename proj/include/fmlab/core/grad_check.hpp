#pragma once

#include <functional>
#include <string>

#include "fmlab/core/autodiff.hpp"
#include "fmlab/core/param_store.hpp"

namespace fmlab {

using Objective = std::function<ad::Var(ad::Tape&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  Eigen::Index worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Compares tape gradients of every trainable coordinate of params against
// central differences with step h. Relative error is
// |analytic - numeric| / max(1, |numeric|). Throws NumericError naming the
// perturbed coordinate when f is not finite.
GradCheckResult grad_check(const Objective& f, ParamStore& params, double h = 1e-5);

}  // namespace fmlab
