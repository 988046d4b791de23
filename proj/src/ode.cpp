#include "fmlab/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include "fmlab/core/errors.hpp"
#include "fmlab/io.hpp"

namespace fmlab {

namespace {

// Dormand-Prince 5(4) tableau (Hairer, Norsett & Wanner).
constexpr std::array<double, 7> kC = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {0, 0, 0, 0, 0, 0},
    {1.0 / 5, 0, 0, 0, 0, 0},
    {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
    {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// Difference between the 5th- and 4th-order weights.
constexpr std::array<double, 7> kE = {71.0 / 57600,  0.0,          -71.0 / 16695, 71.0 / 1920,
                                      -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 5.0;
constexpr double kBeta = 0.04;
constexpr double kAlpha = 0.2 - 0.75 * kBeta;

void check_interval(double t_a, double t_b, const Mat& x0) {
  if (!(t_b > t_a)) throw ConfigError("integrate: t_b must be greater than t_a");
  if (!x0.allFinite()) throw NumericError("integrate: non-finite initial state");
}

void record(Trajectory& traj, bool keep, double t, const Mat& x) {
  if (keep || traj.states.empty()) {
    traj.times.push_back(t);
    traj.states.push_back(x);
  } else if (traj.states.size() == 1) {
    traj.times.push_back(t);
    traj.states.push_back(x);
  } else {
    traj.times.back() = t;
    traj.states.back() = x;
  }
}

double grid_time(double t_a, double t_b, int i, int n) {
  if (i == n) return t_b;
  return t_a + (t_b - t_a) * (static_cast<double>(i) / n);
}

Trajectory integrate_fixed(const VectorField& f, const Mat& x0, double t_a, double t_b,
                           const SolverConfig& cfg) {
  Trajectory traj;
  const int n = cfg.step_count;
  Mat x = x0;
  record(traj, true, t_a, x);
  for (int i = 0; i < n; ++i) {
    const double t = grid_time(t_a, t_b, i, n);
    const double h = grid_time(t_a, t_b, i + 1, n) - t;
    if (cfg.method == SolverMethod::euler) {
      x = x + h * f.eval(t, x);
      traj.nfe += 1;
    } else {
      const Mat k1 = f.eval(t, x);
      const Mat k2 = f.eval(t + 0.5 * h, x + 0.5 * h * k1);
      const Mat k3 = f.eval(t + 0.5 * h, x + 0.5 * h * k2);
      const Mat k4 = f.eval(t + h, x + h * k3);
      x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      traj.nfe += 4;
    }
    ++traj.accepted_steps;
    record(traj, cfg.record_trajectory, grid_time(t_a, t_b, i + 1, n), x);
  }
  return traj;
}

double error_norm(const Mat& err, const Mat& x, const Mat& x_new, double atol, double rtol) {
  const Mat scale =
      (atol + rtol * x.cwiseAbs().cwiseMax(x_new.cwiseAbs()).array()).matrix();
  return std::sqrt(err.cwiseQuotient(scale).squaredNorm() / static_cast<double>(err.size()));
}

Trajectory integrate_dopri5(const VectorField& f, const Mat& x0, double t_a, double t_b,
                            const SolverConfig& cfg) {
  Trajectory traj;
  Mat x = x0;
  double t = t_a;
  double h = std::min(cfg.h_init, cfg.h_max);
  double err_old = 1e-4;
  record(traj, true, t, x);
  std::array<Mat, 7> k;
  k[0] = f.eval(t, x);
  traj.nfe = 1;
  while (t < t_b) {
    if (traj.attempts() >= cfg.max_attempts)
      throw StiffnessError("dopri5: attempt budget exhausted", t, h);
    const double remaining = t_b - t;
    const bool last = h >= remaining;
    const double step = last ? remaining : h;
    for (int s = 1; s < 7; ++s) {
      Mat stage = x;
      for (int r = 0; r < s; ++r)
        if (kA[s][r] != 0.0) stage += (step * kA[s][r]) * k[r];
      k[s] = f.eval(t + kC[s] * step, stage);
    }
    traj.nfe += 6;
    // Stage 7 is evaluated at the 5th-order solution (first-same-as-last).
    Mat x_new = x;
    for (int r = 0; r < 6; ++r)
      if (kA[6][r] != 0.0) x_new += (step * kA[6][r]) * k[r];
    Mat err = Mat::Zero(x.rows(), x.cols());
    for (int r = 0; r < 7; ++r)
      if (kE[r] != 0.0) err += (step * kE[r]) * k[r];
    const double en = error_norm(err, x, x_new, cfg.atol, cfg.rtol);
    if (!std::isfinite(en)) throw NumericError("dopri5: non-finite error estimate");
    if (en <= 1.0) {
      ++traj.accepted_steps;
      t = last ? t_b : t + step;
      x = std::move(x_new);
      k[0] = k[6];
      record(traj, cfg.record_trajectory, t, x);
      double fac = en == 0.0 ? kFacMax
                             : kSafety * std::pow(en, -kAlpha) * std::pow(err_old, kBeta);
      fac = std::clamp(fac, kFacMin, kFacMax);
      err_old = std::max(en, 1e-4);
      h = std::min(step * fac, cfg.h_max);
    } else {
      ++traj.rejected_steps;
      const double fac = std::clamp(kSafety * std::pow(en, -kAlpha), kFacMin, 1.0);
      h = step * fac;
      if (h < cfg.h_min)
        throw StiffnessError("dopri5: step size underflow at t=" + std::to_string(t) +
                                 " (h=" + std::to_string(h) + ")",
                             t, h);
    }
  }
  return traj;
}

}  // namespace

SolverMethod parse_solver_method(const std::string& name) {
  if (name == "euler") return SolverMethod::euler;
  if (name == "rk4") return SolverMethod::rk4;
  if (name == "dopri5") return SolverMethod::dopri5;
  throw ConfigError("unknown solver method '" + name + "' (expected euler, rk4 or dopri5)");
}

std::string to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::euler: return "euler";
    case SolverMethod::rk4: return "rk4";
    case SolverMethod::dopri5: return "dopri5";
  }
  return "?";
}

SolverConfig SolverConfig::euler(int steps) {
  SolverConfig c;
  c.method = SolverMethod::euler;
  c.step_count = steps;
  return c;
}

SolverConfig SolverConfig::rk4(int steps) {
  SolverConfig c;
  c.method = SolverMethod::rk4;
  c.step_count = steps;
  return c;
}

SolverConfig SolverConfig::dopri5(double rtol, double atol) {
  SolverConfig c;
  c.method = SolverMethod::dopri5;
  c.rtol = rtol;
  c.atol = atol;
  return c;
}

void validate(const SolverConfig& cfg) {
  if (cfg.fixed_step()) {
    if (cfg.step_count < 1) throw ConfigError("solver step_count must be >= 1");
    return;
  }
  if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0)) throw ConfigError("solver rtol and atol must be > 0");
  if (!(cfg.h_min > 0.0) || !(cfg.h_min <= cfg.h_init) || !(cfg.h_init <= cfg.h_max))
    throw ConfigError("solver steps must satisfy 0 < h_min <= h_init <= h_max");
}

Trajectory integrate(const VectorField& field, const Mat& x0, double t_a, double t_b,
                     const SolverConfig& cfg) {
  validate(cfg);
  check_interval(t_a, t_b, x0);
  if (x0.cols() != field.dim())
    throw DimensionError("integrate: state has " + std::to_string(x0.cols()) +
                         " columns, field dimension is " + std::to_string(field.dim()));
  return cfg.fixed_step() ? integrate_fixed(field, x0, t_a, t_b, cfg)
                          : integrate_dopri5(field, x0, t_a, t_b, cfg);
}

TapedSolve integrate_with_tape(ad::Tape& tape, VectorField& field, ad::Var x0, double t_a,
                               double t_b, const SolverConfig& cfg) {
  if (!cfg.fixed_step())
    throw UnsupportedError("integrate_with_tape: adaptive methods are not supported; use euler or rk4");
  validate(cfg);
  check_interval(t_a, t_b, x0.value());
  TapedSolve out;
  Trajectory& traj = out.trajectory;
  const int n = cfg.step_count;
  ad::Var x = x0;
  record(traj, true, t_a, x.value());
  for (int i = 0; i < n; ++i) {
    const double t = grid_time(t_a, t_b, i, n);
    const double h = grid_time(t_a, t_b, i + 1, n) - t;
    if (cfg.method == SolverMethod::euler) {
      x = x + h * field.eval(tape, t, x);
      traj.nfe += 1;
    } else {
      ad::Var k1 = field.eval(tape, t, x);
      ad::Var k2 = field.eval(tape, t + 0.5 * h, x + (0.5 * h) * k1);
      ad::Var k3 = field.eval(tape, t + 0.5 * h, x + (0.5 * h) * k2);
      ad::Var k4 = field.eval(tape, t + h, x + h * k3);
      x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      traj.nfe += 4;
    }
    ++traj.accepted_steps;
    record(traj, cfg.record_trajectory, grid_time(t_a, t_b, i + 1, n), x.value());
  }
  out.final_state = x;
  return out;
}

BatchSolve integrate_batch(const VectorField& field, const Mat& x0, double t_a, double t_b,
                           const SolverConfig& cfg) {
  SolverConfig quiet = cfg;
  quiet.record_trajectory = false;
  BatchSolve out;
  if (cfg.fixed_step() || x0.rows() <= 1) {
    Trajectory traj = integrate(field, x0, t_a, t_b, quiet);
    out.final_state = traj.final_state();
    out.mean_nfe = static_cast<double>(traj.nfe);
    return out;
  }
  out.final_state.resize(x0.rows(), x0.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < x0.rows(); ++i) {
    Trajectory traj = integrate(field, x0.row(i), t_a, t_b, quiet);
    out.final_state.row(i) = traj.final_state();
    total += static_cast<double>(traj.nfe);
  }
  out.mean_nfe = total / static_cast<double>(x0.rows());
  return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, Eigen::Index sample) {
  const Eigen::Index d = traj.states.empty() ? 0 : traj.states.front().cols();
  os << 't';
  for (Eigen::Index i = 0; i < d; ++i) os << ",x" << (i + 1);
  os << '\n';
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << format_double(traj.times[k]);
    for (Eigen::Index i = 0; i < d; ++i) os << ',' << format_double(traj.states[k](sample, i));
    os << '\n';
  }
}

nlohmann::json trajectory_to_json(const Trajectory& traj, Eigen::Index sample) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& s : traj.states) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index i = 0; i < s.cols(); ++i) row.push_back(s(sample, i));
    states.push_back(std::move(row));
  }
  return {{"times", traj.times},
          {"states", states},
          {"nfe", traj.nfe},
          {"accepted_steps", traj.accepted_steps},
          {"rejected_steps", traj.rejected_steps}};
}

}  // namespace fmlab
