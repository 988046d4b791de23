#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fmlab/core/errors.hpp"
#include "fmlab/core/rng.hpp"
#include "fmlab/error_bounds.hpp"
#include "oracles.hpp"

using namespace fmlab;

TEST(BoundVariable, Examples) {
  EXPECT_EQ(bound_variable_step(1.0, 0.0, 0.0, 0.0, {0.5, 0.5}), 0.0);
  EXPECT_NEAR(bound_variable_step(1.0, 0.0, 2.0, 0.0, {0.5, 0.5}), std::exp(0.5) * 0.5, 1e-15);
  EXPECT_NEAR(bound_variable_step(1.0, 0.0, 2.0, 0.0, {0.5, 0.5}), 0.8243606, 1e-7);
  EXPECT_NEAR(bound_variable_step(1.0, 0.0, 0.0, 1.0, {1.0}), 2.7182818, 1e-7);
}

TEST(BoundUniform, Examples) {
  EXPECT_NEAR(bound_uniform_step(1.0, 0.1, 0.0, 0.0, 0.1), 0.1 * (std::exp(1.0) - 1.0), 1e-15);
  EXPECT_NEAR(bound_uniform_step(1.0, 0.1, 0.0, 0.0, 0.1), 0.1718282, 1e-7);
  EXPECT_EQ(bound_uniform_step(1.0, 0.0, 0.0, 0.0, 0.1), 0.0);
  EXPECT_NEAR(bound_uniform_step(2.0, 0.0, 0.0, 1.0, 0.1), 7.3890561, 1e-7);
}

TEST(BoundVariable, RejectsInvalidInputs) {
  EXPECT_THROW(bound_variable_step(0.0, 0.0, 0.0, 0.0, {1.0}), ConfigError);
  EXPECT_THROW(bound_variable_step(1.0, -0.1, 0.0, 0.0, {1.0}), ConfigError);
  EXPECT_THROW(bound_variable_step(1.0, 0.0, 0.0, 0.0, {}), ConfigError);
  EXPECT_THROW(bound_uniform_step(1.0, 0.0, -1.0, 0.0, 0.1), ConfigError);
}

TEST(BoundVariable, MonotoneInEachSource) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const double L = rng.uniform(0.01, 3.0);
    std::vector<double> taus(1 + rng.uniform_index(10));
    for (double& t : taus) t = rng.uniform(0.01, 0.3);
    const double d = rng.uniform(0, 1), M = rng.uniform(0, 5), e = rng.uniform(0, 1);
    const double base = bound_variable_step(L, d, M, e, taus);
    const double bump = rng.uniform(1e-6, 1.0);
    EXPECT_GE(bound_variable_step(L, d + bump, M, e, taus), base);
    EXPECT_GE(bound_variable_step(L, d, M + bump, e, taus), base);
    EXPECT_GE(bound_variable_step(L, d, M, e + bump, taus), base);
  }
}

TEST(Gronwall, Examples) {
  const GronwallResult r = gronwall_discrete(1.0, {1.0, 1.0}, {1.0, 0.0, 0.0});
  ASSERT_EQ(r.bound.size(), 2u);
  EXPECT_NEAR(r.bound[1], std::exp(1.0), 1e-15);
  const GronwallResult z = gronwall_discrete(0.0, {0.3, 0.2, 0.5}, {1.0, 2.0, 0.5, 0.25});
  EXPECT_DOUBLE_EQ(z.bound[0], 3.0);
  EXPECT_DOUBLE_EQ(z.bound[1], 3.5);
  EXPECT_DOUBLE_EQ(z.bound[2], 3.75);
  EXPECT_THROW(gronwall_discrete(-1.0, {1.0}, {1.0, 1.0}), ConfigError);
  EXPECT_THROW(gronwall_discrete(1.0, {1.0}, {1.0, -1.0}), ConfigError);
  EXPECT_THROW(gronwall_discrete(1.0, {1.0, 1.0}, {1.0, 1.0}), DimensionError);
}

TEST(Gronwall, DominatesDirectRecursion) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_index(30));
    const double lambda = rng.uniform(0.0, 4.0);
    std::vector<double> taus(n), xis(n + 1);
    for (double& t : taus) t = rng.uniform(0.0, 0.5);
    for (double& x : xis) x = rng.uniform(0.0, 1.0);
    const GronwallResult r = gronwall_discrete(lambda, taus, xis);
    // Independent evaluation of the recursion.
    std::vector<double> v(n + 1);
    double xsum = xis[0];
    v[0] = xis[0];
    for (int k = 1; k <= n; ++k) {
      xsum += xis[k];
      double acc = 0;
      for (int j = 1; j < k; ++j) acc += taus[j - 1] * v[j];
      v[k] = lambda * acc + xsum;
    }
    for (int k = 1; k <= n; ++k) {
      EXPECT_NEAR(r.recursion[k - 1], v[k], 1e-12 * std::max(1.0, v[k]));
      EXPECT_GE(r.bound[k - 1], v[k] * (1 - 1e-12));
    }
  }
}

TEST(Schedules, SumToOne) {
  double s = 0;
  for (double t : uniform_schedule(20)) s += t;
  EXPECT_NEAR(s, 1.0, 1e-15);
  const auto g = geometric_schedule(20, 1.15);
  s = 0;
  for (double t : g) s += t;
  EXPECT_NEAR(s, 1.0, 1e-14);
  EXPECT_NEAR(g[1] / g[0], 1.15, 1e-12);
}

TEST(ValidateBound, AnalyticSuiteAllPass) {
  const auto reports = run_analytic_suite(0);
  EXPECT_GE(reports.size(), 12u);
  int uniform = 0, geometric = 0;
  for (const auto& r : reports) {
    EXPECT_TRUE(r.pass) << r.name << " measured " << r.measured << " bound " << r.bound_variable;
    EXPECT_LT(r.roundoff, 1e-12);
    EXPECT_LE(r.measured, r.bound_variable + r.roundoff);
    if (r.uniform) {
      ++uniform;
      EXPECT_LE(r.measured, r.bound_uniform + r.roundoff);
    } else {
      ++geometric;
      EXPECT_TRUE(std::isnan(r.bound_uniform));
    }
  }
  EXPECT_GT(uniform, 0);
  EXPECT_GT(geometric, 0);
  EXPECT_NO_THROW(require_all_pass(reports));
}

TEST(ValidateBound, ConstantTruthOneStep) {
  Vec c(2);
  c << 1.0, -0.5;
  Vec dir(2);
  dir << 0.6, 0.8;
  auto truth = AnalyticField::constant(c);
  ErrorBoundCase cs{"const", truth, AnalyticField::perturbed(truth, 0.1, PerturbationKind::offset, dir),
                    {1.0}, true, 0.0};
  const ErrorBoundReport r = validate_bound(cs, suite_start_points(0));
  EXPECT_NEAR(r.measured, 0.1, 1e-12);
  EXPECT_NEAR(r.bound_variable, 0.1, 1e-15);
  EXPECT_TRUE(r.pass);
}

TEST(ValidateBound, InitialErrorPassesThrough) {
  Vec c(2);
  c << 1.0, -0.5;
  auto truth = AnalyticField::constant(c);
  ErrorBoundCase cs{"eps0", truth, truth, uniform_schedule(4), true, 0.05};
  const ErrorBoundReport r = validate_bound(cs, suite_start_points(1));
  EXPECT_NEAR(r.measured, 0.05, 1e-12);
  EXPECT_TRUE(r.pass);
}

TEST(ValidateBound, ExactLinearTruthConvergesAtFirstOrder) {
  Mat a(2, 2);
  a << -0.5, 1, -1, -0.5;
  auto truth = AnalyticField::linear(a);
  std::vector<double> taus, errs;
  for (int n : {10, 20, 40, 80}) {
    ErrorBoundCase cs{"lin", truth, truth, uniform_schedule(n), true, 0.0};
    const ErrorBoundReport r = validate_bound(cs, suite_start_points(2));
    EXPECT_TRUE(r.pass);
    taus.push_back(1.0 / n);
    errs.push_back(r.measured);
  }
  EXPECT_LT(errs.back(), errs.front());
  EXPECT_NEAR(oracle::loglog_slope(taus, errs), 1.0, 0.1);
}

TEST(ValidateBound, ViolationIsHardFailure) {
  ErrorBoundReport bad;
  bad.name = "forged";
  bad.pass = false;
  EXPECT_THROW(require_all_pass({bad}), NumericError);
}

TEST(SecondDerivative, EstimateMatchesAnalyticBound) {
  auto f = AnalyticField::decay(2);
  Mat x0(1, 2);
  x0 << 1.0, -2.0;
  EXPECT_NEAR(estimate_second_derivative(*f, x0, 0.0, 1.0, 400), f->second_derivative_bound(x0, 1.0), 1e-2);
}

TEST(BoundCsv, Header) {
  std::ostringstream os;
  ErrorBoundReport r;
  r.name = "c";
  r.L_u = 1;
  r.delta = 0.1;
  r.M = 2;
  r.eps0 = 0;
  r.bound_variable = 3;
  r.bound_uniform = NAN;
  r.measured = 0.5;
  r.pass = true;
  write_bound_csv(os, {r});
  EXPECT_EQ(os.str(), "case,L_u,delta,M,eps0,bound4,bound5,measured,pass\nc,1,0.1,2,0,3,NA,0.5,true\n");
}
