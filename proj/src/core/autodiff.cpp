#include "fmlab/core/autodiff.hpp"

#include <cmath>
#include <string>

#include "fmlab/core/errors.hpp"

namespace fmlab::ad {

namespace {

Tape& tape_of(Var a, Var b) {
  if (!a.valid() || !b.valid() || a.tape() != b.tape())
    throw Error("autodiff: operands belong to different tapes");
  return *a.tape();
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw Error("autodiff: invalid variable");
  return *a.tape();
}

void require_same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string("autodiff ") + op + ": shape mismatch " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

}  // namespace

const Mat& Var::value() const { return tape_->value(id_); }
const Mat& Var::grad() const { return tape_->grad(id_); }

double Var::scalar() const {
  const Mat& v = value();
  if (v.size() != 1) throw DimensionError("autodiff: scalar() on non-scalar node");
  return v(0, 0);
}

Var Tape::constant(Mat value) { return push(std::move(value), false, nullptr); }

Var Tape::variable(Mat value) { return push(std::move(value), true, nullptr); }

Var Tape::param(ParamStore& store, std::string_view name) {
  const std::size_t idx = store.index_of(name);
  const auto& e = store.entries()[idx];
  if (!e.trainable) return constant(e.value);
  Var v = variable(e.value);
  bindings_.push_back({v.id(), &store, idx});
  return v;
}

Var Tape::push(Mat value, bool requires_grad, Backward backward) {
  nodes_.push_back(Node{std::move(value), Mat(), requires_grad, std::move(backward)});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(int id, const Mat& delta) {
  Node& n = nodes_[id];
  if (n.requires_grad) n.grad += delta;
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw Error("autodiff: loss is not on this tape");
  if (loss.value().size() != 1) throw DimensionError("autodiff: backward() needs a 1x1 loss");
  for (auto& n : nodes_)
    if (n.requires_grad) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
  if (!nodes_[loss.id()].requires_grad) return;
  nodes_[loss.id()].grad(0, 0) = 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.requires_grad && n.backward) n.backward(*this, id);
  }
  for (const auto& b : bindings_) {
    auto& e = b.store->entries()[b.index];
    if (e.trainable) e.grad += nodes_[b.id].grad;
  }
}

void Tape::clear() {
  nodes_.clear();
  bindings_.clear();
}

Var operator+(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a, b, "add");
  const int ia = a.id(), ib = b.id();
  return t.push(a.value() + b.value(), t.requires_grad(ia) || t.requires_grad(ib),
                [ia, ib](Tape& tp, int self) {
                  tp.accumulate(ia, tp.grad(self));
                  tp.accumulate(ib, tp.grad(self));
                });
}

Var operator-(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a, b, "sub");
  const int ia = a.id(), ib = b.id();
  return t.push(a.value() - b.value(), t.requires_grad(ia) || t.requires_grad(ib),
                [ia, ib](Tape& tp, int self) {
                  tp.accumulate(ia, tp.grad(self));
                  tp.accumulate(ib, -tp.grad(self));
                });
}

Var operator-(Var a) { return -1.0 * a; }

Var operator*(double s, Var a) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  return t.push(s * a.value(), t.requires_grad(ia),
                [ia, s](Tape& tp, int self) { tp.accumulate(ia, s * tp.grad(self)); });
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  if (a.cols() != b.rows()) {
    throw DimensionError("autodiff matmul: inner dimensions " + std::to_string(a.cols()) +
                         " and " + std::to_string(b.rows()));
  }
  const int ia = a.id(), ib = b.id();
  return t.push(a.value() * b.value(), t.requires_grad(ia) || t.requires_grad(ib),
                [ia, ib](Tape& tp, int self) {
                  const Mat& g = tp.grad(self);
                  if (tp.requires_grad(ia)) tp.accumulate(ia, g * tp.value(ib).transpose());
                  if (tp.requires_grad(ib)) tp.accumulate(ib, tp.value(ia).transpose() * g);
                });
}

Var transpose(Var a) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  return t.push(a.value().transpose(), t.requires_grad(ia), [ia](Tape& tp, int self) {
    tp.accumulate(ia, tp.grad(self).transpose());
  });
}

Var cwise_mul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a, b, "cwise_mul");
  const int ia = a.id(), ib = b.id();
  return t.push(a.value().cwiseProduct(b.value()),
                t.requires_grad(ia) || t.requires_grad(ib), [ia, ib](Tape& tp, int self) {
                  const Mat& g = tp.grad(self);
                  if (tp.requires_grad(ia)) tp.accumulate(ia, g.cwiseProduct(tp.value(ib)));
                  if (tp.requires_grad(ib)) tp.accumulate(ib, g.cwiseProduct(tp.value(ia)));
                });
}

Var cwise_div(Var a, Var b) {
  Tape& t = tape_of(a, b);
  require_same_shape(a, b, "cwise_div");
  const int ia = a.id(), ib = b.id();
  return t.push(a.value().cwiseQuotient(b.value()),
                t.requires_grad(ia) || t.requires_grad(ib), [ia, ib](Tape& tp, int self) {
                  const Mat& g = tp.grad(self);
                  const Mat& bv = tp.value(ib);
                  if (tp.requires_grad(ia)) tp.accumulate(ia, g.cwiseQuotient(bv));
                  if (tp.requires_grad(ib)) {
                    const Mat& y = tp.value(self);
                    tp.accumulate(ib, -g.cwiseProduct(y).cwiseQuotient(bv));
                  }
                });
}

Var add_scalar(Var a, double s) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  return t.push(a.value().array() + s, t.requires_grad(ia),
                [ia](Tape& tp, int self) { tp.accumulate(ia, tp.grad(self)); });
}

Var add_row(Var a, Var row) {
  Tape& t = tape_of(a, row);
  if (row.rows() != 1 || row.cols() != a.cols())
    throw DimensionError("autodiff add_row: row must be 1x" + std::to_string(a.cols()));
  const int ia = a.id(), ir = row.id();
  Mat out = a.value().rowwise() + row.value().row(0);
  return t.push(std::move(out), t.requires_grad(ia) || t.requires_grad(ir),
                [ia, ir](Tape& tp, int self) {
                  const Mat& g = tp.grad(self);
                  tp.accumulate(ia, g);
                  if (tp.requires_grad(ir)) tp.accumulate(ir, g.colwise().sum());
                });
}

Var scale_columns(Var a, const RowVec& weights) {
  Tape& t = tape_of(a);
  if (weights.size() != a.cols()) throw DimensionError("autodiff scale_columns: width mismatch");
  const int ia = a.id();
  Mat out = a.value().array().rowwise() * weights.array();
  return t.push(std::move(out), t.requires_grad(ia), [ia, weights](Tape& tp, int self) {
    tp.accumulate(ia, (tp.grad(self).array().rowwise() * weights.array()).matrix());
  });
}

Var mask(Var a, const Mat& m) {
  Tape& t = tape_of(a);
  if (m.rows() != a.rows() || m.cols() != a.cols())
    throw DimensionError("autodiff mask: shape mismatch");
  const int ia = a.id();
  return t.push(a.value().cwiseProduct(m), t.requires_grad(ia), [ia, m](Tape& tp, int self) {
    tp.accumulate(ia, tp.grad(self).cwiseProduct(m));
  });
}

Var concat_cols(Var a, Var b) {
  Tape& t = tape_of(a, b);
  if (a.rows() != b.rows()) throw DimensionError("autodiff concat_cols: row mismatch");
  const int ia = a.id(), ib = b.id();
  const Eigen::Index ca = a.cols(), cb = b.cols();
  Mat out(a.rows(), ca + cb);
  out << a.value(), b.value();
  return t.push(std::move(out), t.requires_grad(ia) || t.requires_grad(ib),
                [ia, ib, ca, cb](Tape& tp, int self) {
                  const Mat& g = tp.grad(self);
                  if (tp.requires_grad(ia)) tp.accumulate(ia, g.leftCols(ca));
                  if (tp.requires_grad(ib)) tp.accumulate(ib, g.rightCols(cb));
                });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  Tape& t = tape_of(a);
  if (start < 0 || count < 0 || start + count > a.cols())
    throw DimensionError("autodiff slice_cols: range out of bounds");
  const int ia = a.id();
  return t.push(a.value().middleCols(start, count), t.requires_grad(ia),
                [ia, start, count](Tape& tp, int self) {
                  Mat full = Mat::Zero(tp.value(ia).rows(), tp.value(ia).cols());
                  full.middleCols(start, count) = tp.grad(self);
                  tp.accumulate(ia, full);
                });
}

Var tanh(Var a) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  return t.push(a.value().array().tanh().matrix(), t.requires_grad(ia),
                [ia](Tape& tp, int self) {
                  const Mat& y = tp.value(self);
                  tp.accumulate(ia, (tp.grad(self).array() * (1.0 - y.array().square())).matrix());
                });
}

Var leaky_relu(Var a, double slope) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  Mat out = a.value().unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
  return t.push(std::move(out), t.requires_grad(ia), [ia, slope](Tape& tp, int self) {
    const Mat d = tp.value(ia).unaryExpr([slope](double v) { return v > 0.0 ? 1.0 : slope; });
    tp.accumulate(ia, tp.grad(self).cwiseProduct(d));
  });
}

Var relu(Var a) { return leaky_relu(a, 0.0); }

Var abs(Var a) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  return t.push(a.value().cwiseAbs(), t.requires_grad(ia), [ia](Tape& tp, int self) {
    const Mat s = tp.value(ia).unaryExpr(
        [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
    tp.accumulate(ia, tp.grad(self).cwiseProduct(s));
  });
}

Var row_sums(Var a) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  const Eigen::Index cols = a.cols();
  return t.push(a.value().rowwise().sum(), t.requires_grad(ia),
                [ia, cols](Tape& tp, int self) {
                  tp.accumulate(ia, tp.grad(self).replicate(1, cols));
                });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  Mat out(1, 1);
  out(0, 0) = a.value().sum();
  return t.push(std::move(out), t.requires_grad(ia), [ia](Tape& tp, int self) {
    const Mat& v = tp.value(ia);
    tp.accumulate(ia, Mat::Constant(v.rows(), v.cols(), tp.grad(self)(0, 0)));
  });
}

Var sum_squares(Var a) {
  Tape& t = tape_of(a);
  const int ia = a.id();
  Mat out(1, 1);
  out(0, 0) = a.value().squaredNorm();
  return t.push(std::move(out), t.requires_grad(ia), [ia](Tape& tp, int self) {
    tp.accumulate(ia, 2.0 * tp.grad(self)(0, 0) * tp.value(ia));
  });
}

Var mean_row_sq_norm(Var a) {
  if (a.rows() == 0) throw DimensionError("autodiff mean_row_sq_norm: empty batch");
  return (1.0 / static_cast<double>(a.rows())) * sum_squares(a);
}

}  // namespace fmlab::ad
