#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fmlab/core/autodiff.hpp"
#include "fmlab/fields.hpp"

namespace fmlab {

enum class SolverMethod { euler, rk4, dopri5 };

SolverMethod parse_solver_method(const std::string& name);
std::string to_string(SolverMethod m);

struct SolverConfig {
  SolverMethod method = SolverMethod::dopri5;
  int step_count = 100;  // fixed-step methods
  double rtol = 1e-5;
  double atol = 1e-5;
  double h_init = 1e-2;
  double h_min = 1e-10;
  double h_max = 1.0;
  bool record_trajectory = true;
  long max_attempts = 1000000;

  static SolverConfig euler(int steps);
  static SolverConfig rk4(int steps);
  static SolverConfig dopri5(double rtol, double atol);
  bool fixed_step() const { return method != SolverMethod::dopri5; }
};

void validate(const SolverConfig& cfg);

// States are batches (rows = samples) that share one time grid. nfe counts
// field evaluations along the grid, i.e. per sample.
struct Trajectory {
  std::vector<double> times;
  std::vector<Mat> states;
  long nfe = 0;
  long accepted_steps = 0;
  long rejected_steps = 0;

  const Mat& final_state() const { return states.back(); }
  long attempts() const { return accepted_steps + rejected_steps; }
};

Trajectory integrate(const VectorField& field, const Mat& x0, double t_a, double t_b,
                     const SolverConfig& cfg);

struct TapedSolve {
  Trajectory trajectory;
  ad::Var final_state;
};

// Unrolled fixed-step solve recorded on the tape, so the final state is
// differentiable w.r.t. x0 and the field parameters.
TapedSolve integrate_with_tape(ad::Tape& tape, VectorField& field, ad::Var x0, double t_a,
                               double t_b, const SolverConfig& cfg);

struct BatchSolve {
  Mat final_state;
  double mean_nfe = 0.0;
};

// Fixed-step methods solve the batch jointly. dopri5 solves every row on its
// own adaptive grid and reports the NFE averaged over rows.
BatchSolve integrate_batch(const VectorField& field, const Mat& x0, double t_a, double t_b,
                           const SolverConfig& cfg);

// CSV with header t,x1..xd; row `sample` of each recorded state.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, Eigen::Index sample = 0);
nlohmann::json trajectory_to_json(const Trajectory& traj, Eigen::Index sample = 0);

}  // namespace fmlab
