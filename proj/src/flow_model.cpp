#include "fmlab/flow_model.hpp"

#include "fmlab/core/errors.hpp"

namespace fmlab {

Generation generate(const FlowModel& model, const Mat& x0, const SolverConfig& cfg) {
  if (!model.base) throw ConfigError("generate: no pretrained field");
  Generation out;
  const BatchSolve first = integrate_batch(*model.base, x0, 0.0, 1.0, cfg);
  out.handoff = first.final_state;
  out.mean_nfe = first.mean_nfe;
  if (model.residual && model.horizon_T > 0.0) {
    ControlSynthField residual = *model.residual;
    ConditionedField stage(residual, out.handoff);
    if (cfg.fixed_step() || x0.rows() <= 1) {
      const BatchSolve second = integrate_batch(stage, out.handoff, 1.0, 1.0 + model.horizon_T, cfg);
      out.samples = second.final_state;
      out.mean_nfe += second.mean_nfe;
    } else {
      // Per-sample adaptive solves need the matching input row.
      out.samples.resize(x0.rows(), x0.cols());
      double total = 0.0;
      for (Eigen::Index i = 0; i < x0.rows(); ++i) {
        ConditionedField row_stage(residual, out.handoff.row(i));
        const BatchSolve s =
            integrate_batch(row_stage, out.handoff.row(i), 1.0, 1.0 + model.horizon_T, cfg);
        out.samples.row(i) = s.final_state;
        total += s.mean_nfe;
      }
      out.mean_nfe += total / static_cast<double>(x0.rows());
    }
  } else {
    out.samples = out.handoff;
  }
  return out;
}

}  // namespace fmlab
