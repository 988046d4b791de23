#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fmlab/core/types.hpp"
#include "fmlab/fields.hpp"
#include "fmlab/ode.hpp"

namespace fmlab {

// Euler error bound on a variable grid tau_0..tau_{N-1} with t_N = sum tau:
//   exp(L (t_N - tau_0)) * sum_j (delta tau_j + M tau_j^2 / 2) + exp(L t_N) eps0.
// Each local source is amplified by at most the steps that follow it; the
// initial error by every step.
double bound_variable_step(double L_u, double delta, double M, double eps0,
                           const std::vector<double>& taus);

// Uniform grid with N tau0 = 1:
//   exp(L) eps0 + (M tau0 + 2 delta) / (2 L) (exp(L) - 1).
double bound_uniform_step(double L_u, double delta, double M, double eps0, double tau0);

struct GronwallResult {
  std::vector<double> bound;      // V_1..V_N upper bounds
  std::vector<double> recursion;  // worst case of V_n <= lambda sum_{j<n} tau_j V_j + sum_{j<=n} xi_j
};

// taus holds tau_1..tau_N, xis holds xi_0..xi_N. bound[n-1] is
// exp(lambda t_{n-1}) sum_{j<=n} xi_j with t_{n-1} = tau_1 + ... + tau_{n-1}.
GronwallResult gronwall_discrete(double lambda, const std::vector<double>& taus,
                                 const std::vector<double>& xis);

struct ErrorBoundCase {
  std::string name;
  std::shared_ptr<const AnalyticField> truth;
  std::shared_ptr<const AnalyticField> learned;  // within delta of truth everywhere
  std::vector<double> taus;                      // sums to 1
  bool uniform = false;
  double eps0 = 0.0;
};

struct ErrorBoundReport {
  std::string name;
  double L_u = 0.0;
  double delta = 0.0;
  double M = 0.0;
  double eps0 = 0.0;
  std::vector<double> taus;
  bool uniform = false;
  double bound_variable = 0.0;
  double bound_uniform = 0.0;  // NaN on non-uniform grids
  double measured = 0.0;       // max over starting points of |eps_N|
  // Floating-point allowance: the bounds hold in exact arithmetic only.
  double roundoff = 0.0;
  bool pass = false;
};

std::vector<double> uniform_schedule(int steps);
// Steps growing by `ratio`, normalized to total length 1.
std::vector<double> geometric_schedule(int steps, double ratio);

// Euler along an explicit schedule starting at t = 0.
Mat euler_schedule(const VectorField& field, const Mat& x0, const std::vector<double>& taus);

// Roundoff allowance per step, in units of machine epsilon times the
// largest state magnitude.
inline constexpr double kRoundoffUnits = 16.0;

// Integrates the learned field with Euler from x0 + eps0 * e_1 and compares
// against the exact truth flow from x0 at t = 1.
ErrorBoundReport validate_bound(const ErrorBoundCase& c, const Mat& x0);

// Shipped analytic suite: 18 combos over three truths, delta in
// {0, 0.05, 0.1}, uniform and geometric schedules.
std::vector<ErrorBoundCase> analytic_suite();
std::vector<ErrorBoundReport> run_analytic_suite(std::uint64_t seed = 0);
Mat suite_start_points(std::uint64_t seed);

// Throws NumericError listing every failing case.
void require_all_pass(const std::vector<ErrorBoundReport>& reports);

// CSV: case,L_u,delta,M,eps0,bound4,bound5,measured,pass
void write_bound_csv(std::ostream& os, const std::vector<ErrorBoundReport>& reports);

// Finite-difference estimate of max ||d^2x/dt^2|| along uniform-step RK4
// trajectories. An estimate only; it may under-bound the true value.
double estimate_second_derivative(const VectorField& field, const Mat& x0, double t_a,
                                  double t_b, int steps);

}  // namespace fmlab
