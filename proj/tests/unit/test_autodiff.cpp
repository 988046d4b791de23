#include <gtest/gtest.h>

#include <functional>

#include "fmlab/core/autodiff.hpp"
#include "fmlab/core/errors.hpp"
#include "fmlab/core/grad_check.hpp"
#include "fmlab/core/rng.hpp"

using namespace fmlab;

namespace {

struct Fixture {
  ParamStore p;
  Mat weight;
  explicit Fixture(std::uint64_t seed) {
    Rng rng(seed);
    p.add("a", rng.normal_matrix(3, 4));
    p.add("b", rng.normal_matrix(3, 4));
    p.add("m", rng.normal_matrix(4, 2));
    p.add("row", rng.normal_matrix(1, 4));
    // Keep the divisor away from zero.
    p.add("pos", rng.uniform_matrix(3, 4, 0.5, 2.0));
    weight = rng.normal_matrix(3, 4);
  }
};

// Random linear functional so that every output entry contributes.
ad::Var project(ad::Tape& t, ad::Var v, std::uint64_t seed) {
  Rng rng(seed);
  return ad::sum(ad::cwise_mul(v, t.constant(rng.normal_matrix(v.rows(), v.cols()))));
}

void expect_gradients(const std::function<ad::Var(ad::Tape&, Fixture&)>& op, const char* label) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Fixture f(seed);
    auto objective = [&](ad::Tape& t) { return project(t, op(t, f), 100 + seed); };
    const GradCheckResult r = grad_check(objective, f.p);
    EXPECT_LE(r.max_rel_error, 1e-6) << label << " worst " << r.worst_param << "[" << r.worst_index << "]";
  }
}

ad::Var A(ad::Tape& t, Fixture& f) { return t.param(f.p, "a"); }
ad::Var B(ad::Tape& t, Fixture& f) { return t.param(f.p, "b"); }

}  // namespace

TEST(Autodiff, ElementwiseOps) {
  expect_gradients([](ad::Tape& t, Fixture& f) { return A(t, f) + B(t, f); }, "add");
  expect_gradients([](ad::Tape& t, Fixture& f) { return A(t, f) - B(t, f); }, "sub");
  expect_gradients([](ad::Tape& t, Fixture& f) { return -A(t, f); }, "neg");
  expect_gradients([](ad::Tape& t, Fixture& f) { return 2.5 * A(t, f); }, "scale");
  expect_gradients([](ad::Tape& t, Fixture& f) { return ad::cwise_mul(A(t, f), B(t, f)); }, "mul");
  expect_gradients(
      [](ad::Tape& t, Fixture& f) { return ad::cwise_div(A(t, f), t.param(f.p, "pos")); }, "div");
  expect_gradients([](ad::Tape& t, Fixture& f) { return ad::add_scalar(A(t, f), 3.0); }, "add_scalar");
  expect_gradients([](ad::Tape& t, Fixture& f) { return ad::tanh(A(t, f)); }, "tanh");
  expect_gradients([](ad::Tape& t, Fixture& f) { return ad::leaky_relu(A(t, f), 0.2); }, "leaky");
  expect_gradients([](ad::Tape& t, Fixture& f) { return ad::relu(A(t, f)); }, "relu");
  expect_gradients([](ad::Tape& t, Fixture& f) { return ad::abs(A(t, f)); }, "abs");
}

TEST(Autodiff, StructuralOps) {
  expect_gradients([](ad::Tape& t, Fixture& f) { return ad::matmul(A(t, f), t.param(f.p, "m")); }, "matmul");
  expect_gradients([](ad::Tape& t, Fixture& f) { return ad::transpose(A(t, f)); }, "transpose");
  expect_gradients([](ad::Tape& t, Fixture& f) { return ad::add_row(A(t, f), t.param(f.p, "row")); }, "add_row");
  RowVec w(4);
  w << 1.0, -2.0, 0.5, 3.0;
  expect_gradients([w](ad::Tape& t, Fixture& f) { return ad::scale_columns(A(t, f), w); }, "scale_columns");
  Mat mk = Mat::Zero(3, 4);
  mk(0, 1) = 1.0;
  mk(2, 3) = 1.0;
  expect_gradients([mk](ad::Tape& t, Fixture& f) { return ad::mask(A(t, f), mk); }, "mask");
  expect_gradients([](ad::Tape& t, Fixture& f) { return ad::concat_cols(A(t, f), B(t, f)); }, "concat");
  expect_gradients([](ad::Tape& t, Fixture& f) { return ad::slice_cols(A(t, f), 1, 2); }, "slice");
  expect_gradients([](ad::Tape& t, Fixture& f) { return ad::row_sums(A(t, f)); }, "row_sums");
}

TEST(Autodiff, Reductions) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Fixture f(seed);
    auto s1 = [&](ad::Tape& t) { return ad::sum(ad::cwise_mul(A(t, f), B(t, f))); };
    auto s2 = [&](ad::Tape& t) { return ad::sum_squares(A(t, f)); };
    auto s3 = [&](ad::Tape& t) { return ad::mean_row_sq_norm(A(t, f) - B(t, f)); };
    EXPECT_LE(grad_check(s1, f.p).max_rel_error, 1e-6);
    EXPECT_LE(grad_check(s2, f.p).max_rel_error, 1e-6);
    EXPECT_LE(grad_check(s3, f.p).max_rel_error, 1e-6);
  }
}

TEST(Autodiff, ReusedNodeAccumulates) {
  ParamStore p;
  p.add("x", Mat::Constant(1, 1, 3.0));
  ad::Tape t;
  ad::Var x = t.param(p, "x");
  ad::Var y = ad::sum(ad::cwise_mul(x, x) + x);  // x^2 + x
  t.backward(y);
  EXPECT_DOUBLE_EQ(p.grad("x")(0, 0), 7.0);
}

TEST(Autodiff, FrozenParametersReceiveNoGradient) {
  ParamStore p;
  p.add("x", Mat::Constant(1, 1, 3.0), false);
  p.add("y", Mat::Constant(1, 1, 2.0));
  ad::Tape t;
  ad::Var y = ad::sum(ad::cwise_mul(t.param(p, "x"), t.param(p, "y")));
  t.backward(y);
  EXPECT_TRUE(p.entries()[0].grad.size() == 0);
  EXPECT_DOUBLE_EQ(p.grad("y")(0, 0), 3.0);
}

TEST(Autodiff, ShapeMismatchThrows) {
  ad::Tape t;
  ad::Var a = t.constant(Mat::Ones(2, 2));
  ad::Var b = t.constant(Mat::Ones(2, 3));
  EXPECT_THROW(a + b, DimensionError);
  EXPECT_THROW(ad::matmul(b, a), DimensionError);
}
