#pragma once

#include <functional>
#include <string_view>
#include <utility>
#include <vector>

#include "fmlab/core/param_store.hpp"
#include "fmlab/core/types.hpp"

namespace fmlab::ad {

class Tape;

// Handle to a matrix-valued node on a Tape.
class Var {
 public:
  Var() = default;

  const Mat& value() const;
  const Mat& grad() const;
  double scalar() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool valid() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode recording of matrix operations. Values are computed eagerly
// as nodes are pushed; backward() walks the nodes in reverse order.
class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Mat value);
  Var variable(Mat value);
  // Trainable entries become gradient leaves whose gradients are added to
  // the store on backward(); frozen entries are recorded as constants.
  Var param(ParamStore& store, std::string_view name);

  Var push(Mat value, bool requires_grad, Backward backward);

  // loss must be 1x1.
  void backward(Var loss);

  const Mat& value(int id) const { return nodes_[id].value; }
  const Mat& grad(int id) const { return nodes_[id].grad; }
  // Accumulates into the gradient of an input node, if it tracks one.
  void accumulate(int id, const Mat& delta);
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }
  void clear();

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool requires_grad = false;
    Backward backward;
  };
  struct Binding {
    int id;
    ParamStore* store;
    std::size_t index;
  };

  std::vector<Node> nodes_;
  std::vector<Binding> bindings_;
};

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator-(Var a);
Var operator*(double s, Var a);
Var matmul(Var a, Var b);
Var transpose(Var a);
Var cwise_mul(Var a, Var b);
Var cwise_div(Var a, Var b);
Var add_scalar(Var a, double s);
// a: n x m, row: 1 x m, added to every row.
Var add_row(Var a, Var row);
// Multiplies column j by constant weights(j).
Var scale_columns(Var a, const RowVec& weights);
Var mask(Var a, const Mat& m);
Var concat_cols(Var a, Var b);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
Var tanh(Var a);
Var leaky_relu(Var a, double slope);
Var relu(Var a);
Var abs(Var a);
Var row_sums(Var a);
Var sum(Var a);
Var sum_squares(Var a);
// Mean over rows of the squared row norm.
Var mean_row_sq_norm(Var a);

}  // namespace fmlab::ad
