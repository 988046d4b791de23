#include "fmlab/core/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "fmlab/core/errors.hpp"

namespace fmlab {

namespace {

double evaluate(const Objective& f) {
  ad::Tape tape;
  return f(tape).scalar();
}

}  // namespace

GradCheckResult grad_check(const Objective& f, ParamStore& params, double h) {
  if (!(h > 0.0)) throw ConfigError("grad_check: step h must be positive");
  params.zero_grad();
  {
    ad::Tape tape;
    ad::Var loss = f(tape);
    if (!std::isfinite(loss.scalar())) throw NumericError("grad_check: objective is not finite at p");
    tape.backward(loss);
  }
  GradCheckResult result;
  for (auto& e : params.entries()) {
    if (!e.trainable) continue;
    for (Eigen::Index k = 0; k < e.value.size(); ++k) {
      double& coord = e.value.data()[k];
      const double saved = coord;
      coord = saved + h;
      const double fp = evaluate(f);
      coord = saved - h;
      const double fm = evaluate(f);
      coord = saved;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw NumericError("grad_check: objective not finite when perturbing '" + e.name +
                           "'[" + std::to_string(k) + "] by " +
                           (std::isfinite(fp) ? "-h" : "+h"));
      }
      const double numeric = (fp - fm) / (2.0 * h);
      const double analytic = e.grad.data()[k];
      const double rel = std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
      if (rel > result.max_rel_error || result.worst_index < 0) {
        if (rel >= result.max_rel_error) {
          result.max_rel_error = rel;
          result.worst_param = e.name;
          result.worst_index = k;
          result.analytic = analytic;
          result.numeric = numeric;
        }
      }
    }
  }
  return result;
}

}  // namespace fmlab
