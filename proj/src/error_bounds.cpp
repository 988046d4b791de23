#include "fmlab/error_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "fmlab/core/errors.hpp"
#include "fmlab/core/rng.hpp"
#include "fmlab/io.hpp"

namespace fmlab {

namespace {

void check_inputs(double L_u, double delta, double M, double eps0) {
  if (!(L_u > 0.0)) throw ConfigError("error bound needs L_u > 0");
  if (!(delta >= 0.0) || !(M >= 0.0) || !(eps0 >= 0.0))
    throw ConfigError("error bound inputs delta, M, eps0 must be >= 0");
}

}  // namespace

double bound_variable_step(double L_u, double delta, double M, double eps0,
                           const std::vector<double>& taus) {
  check_inputs(L_u, delta, M, eps0);
  if (taus.empty()) throw ConfigError("error bound needs at least one step");
  double t_n = 0.0, sources = 0.0;
  for (double tau : taus) {
    if (!(tau > 0.0)) throw ConfigError("step sizes must be > 0");
    t_n += tau;
    sources += delta * tau + 0.5 * M * tau * tau;
  }
  return std::exp(L_u * (t_n - taus.front())) * sources + std::exp(L_u * t_n) * eps0;
}

double bound_uniform_step(double L_u, double delta, double M, double eps0, double tau0) {
  check_inputs(L_u, delta, M, eps0);
  if (!(tau0 > 0.0)) throw ConfigError("step size must be > 0");
  return std::exp(L_u) * eps0 + 0.5 * (M * tau0 + 2.0 * delta) * std::expm1(L_u) / L_u;
}

GronwallResult gronwall_discrete(double lambda, const std::vector<double>& taus,
                                 const std::vector<double>& xis) {
  if (!(lambda >= 0.0)) throw ConfigError("gronwall: lambda must be >= 0");
  if (xis.size() != taus.size() + 1)
    throw DimensionError("gronwall: expected " + std::to_string(taus.size() + 1) +
                         " xi values, got " + std::to_string(xis.size()));
  for (double x : xis)
    if (!(x >= 0.0)) throw ConfigError("gronwall: xi values must be >= 0");
  for (double t : taus)
    if (!(t >= 0.0)) throw ConfigError("gronwall: tau values must be >= 0");
  GronwallResult out;
  const std::size_t n = taus.size();
  double running = xis[0];
  double t_prev = 0.0;      // t_{n-1}
  double weighted = 0.0;    // sum_{j<n} tau_j V_j
  for (std::size_t k = 1; k <= n; ++k) {
    running += xis[k];
    out.bound.push_back(std::exp(lambda * t_prev) * running);
    const double v = lambda * weighted + running;
    out.recursion.push_back(v);
    weighted += taus[k - 1] * v;
    t_prev += taus[k - 1];
  }
  return out;
}

std::vector<double> uniform_schedule(int steps) {
  if (steps < 1) throw ConfigError("schedule needs at least one step");
  return std::vector<double>(static_cast<std::size_t>(steps), 1.0 / steps);
}

std::vector<double> geometric_schedule(int steps, double ratio) {
  if (steps < 1) throw ConfigError("schedule needs at least one step");
  if (!(ratio > 0.0)) throw ConfigError("geometric ratio must be > 0");
  std::vector<double> taus(static_cast<std::size_t>(steps));
  double w = 1.0, total = 0.0;
  for (double& t : taus) {
    t = w;
    total += w;
    w *= ratio;
  }
  for (double& t : taus) t /= total;
  return taus;
}

Mat euler_schedule(const VectorField& field, const Mat& x0, const std::vector<double>& taus) {
  Mat x = x0;
  double t = 0.0;
  for (double tau : taus) {
    x += tau * field.eval(t, x);
    t += tau;
  }
  return x;
}

ErrorBoundReport validate_bound(const ErrorBoundCase& c, const Mat& x0) {
  if (!c.truth || !c.learned) throw ConfigError("bound case " + c.name + " lacks a field");
  if (!c.truth->has_exact_flow()) throw UnsupportedError("bound case truth needs an exact flow");
  ErrorBoundReport r;
  r.name = c.name;
  r.taus = c.taus;
  r.uniform = c.uniform;
  r.eps0 = c.eps0;
  // Any positive constant bounds a zero Lipschitz constant.
  r.L_u = std::max(c.truth->lipschitz_constant(), 1e-6);
  r.delta = c.learned->delta();
  double horizon = 0.0;
  for (double tau : c.taus) horizon += tau;
  r.M = c.truth->second_derivative_bound(x0, horizon);

  Mat start = x0;
  start.col(0).array() += c.eps0;
  const Mat approx = euler_schedule(*c.learned, start, c.taus);
  const Mat exact = c.truth->exact_flow(0.0, horizon, x0);
  r.measured = (approx - exact).rowwise().norm().maxCoeff();
  const double scale = std::max({1.0, approx.cwiseAbs().maxCoeff(), exact.cwiseAbs().maxCoeff()});
  r.roundoff = kRoundoffUnits * std::numeric_limits<double>::epsilon() *
               static_cast<double>(c.taus.size() + 1) * scale;

  r.bound_variable = bound_variable_step(r.L_u, r.delta, r.M, r.eps0, c.taus);
  r.pass = r.measured <= r.bound_variable + r.roundoff;
  if (c.uniform) {
    r.bound_uniform = bound_uniform_step(r.L_u, r.delta, r.M, r.eps0, c.taus.front());
    r.pass = r.pass && r.measured <= r.bound_uniform + r.roundoff;
  } else {
    r.bound_uniform = std::nan("");
  }
  return r;
}

std::vector<ErrorBoundCase> analytic_suite() {
  struct Truth {
    std::string name;
    std::shared_ptr<const AnalyticField> field;
    PerturbationKind perturbation;
  };
  Mat spiral(2, 2);
  spiral << -0.5, 1.0, -1.0, -0.5;
  Vec drift(2);
  drift << 1.0, -0.5;
  Vec dir(2);
  dir << 0.6, 0.8;
  const std::vector<Truth> truths = {
      {"decay", AnalyticField::decay(2), PerturbationKind::oscillating},
      {"spiral", AnalyticField::linear(spiral), PerturbationKind::oscillating},
      {"constant", AnalyticField::constant(drift), PerturbationKind::offset},
  };
  std::vector<ErrorBoundCase> cases;
  for (const auto& truth : truths) {
    for (double delta : {0.0, 0.05, 0.1}) {
      for (int sched = 0; sched < 2; ++sched) {
        ErrorBoundCase c;
        const bool uniform = sched == 0;
        std::ostringstream name;
        name << truth.name << "_delta" << delta << (uniform ? "_uniform20" : "_geometric20");
        c.truth = truth.field;
        c.learned = AnalyticField::perturbed(truth.field, delta, truth.perturbation, dir);
        c.taus = uniform ? uniform_schedule(20) : geometric_schedule(20, 1.15);
        c.uniform = uniform;
        // Geometric runs also carry an initial error.
        c.eps0 = uniform ? 0.0 : 0.05;
        if (c.eps0 > 0.0) name << "_eps0.05";
        c.name = name.str();
        cases.push_back(std::move(c));
      }
    }
  }
  return cases;
}

Mat suite_start_points(std::uint64_t seed) {
  Rng rng(seed);
  return rng.uniform_matrix(16, 2, -1.5, 1.5);
}

std::vector<ErrorBoundReport> run_analytic_suite(std::uint64_t seed) {
  const Mat x0 = suite_start_points(seed);
  std::vector<ErrorBoundReport> out;
  for (const auto& c : analytic_suite()) out.push_back(validate_bound(c, x0));
  return out;
}

void require_all_pass(const std::vector<ErrorBoundReport>& reports) {
  std::ostringstream msg;
  int failures = 0;
  for (const auto& r : reports) {
    if (r.pass) continue;
    ++failures;
    msg << "\n  " << r.name << ": measured " << format_double(r.measured) << " bound4 "
        << format_double(r.bound_variable) << " bound5 " << format_double(r.bound_uniform)
        << " L_u " << format_double(r.L_u) << " delta " << format_double(r.delta) << " M "
        << format_double(r.M) << " eps0 " << format_double(r.eps0);
  }
  if (failures > 0)
    throw NumericError(std::to_string(failures) + " error bound violation(s):" + msg.str());
}

void write_bound_csv(std::ostream& os, const std::vector<ErrorBoundReport>& reports) {
  os << "case,L_u,delta,M,eps0,bound4,bound5,measured,pass\n";
  for (const auto& r : reports) {
    os << r.name << ',' << format_double(r.L_u) << ',' << format_double(r.delta) << ','
       << format_double(r.M) << ',' << format_double(r.eps0) << ','
       << format_double(r.bound_variable) << ','
       << (r.uniform ? format_double(r.bound_uniform) : std::string("NA")) << ','
       << format_double(r.measured) << ',' << (r.pass ? "true" : "false") << '\n';
  }
}

double estimate_second_derivative(const VectorField& field, const Mat& x0, double t_a,
                                  double t_b, int steps) {
  if (steps < 2) throw ConfigError("curvature estimate needs at least 2 steps");
  SolverConfig cfg = SolverConfig::rk4(steps);
  const Trajectory traj = integrate(field, x0, t_a, t_b, cfg);
  const double h = (t_b - t_a) / steps;
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < traj.states.size(); ++k) {
    const Mat d2 = (traj.states[k + 1] - 2.0 * traj.states[k] + traj.states[k - 1]) / (h * h);
    worst = std::max(worst, d2.rowwise().norm().maxCoeff());
  }
  return worst;
}

}  // namespace fmlab
