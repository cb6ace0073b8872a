#pragma once

#include <cstddef>
#include <vector>

#include "qldpc/nn/tensor.hpp"

namespace qldpc::nn {

// Reverse-mode autodiff over eagerly evaluated tensor ops.
//
// Every op validates shapes, computes its value immediately and appends a
// node; backward() walks the nodes in exact reverse order and accumulates
// gradients. To bound memory, backward() releases the value and gradient
// buffers of interior nodes as soon as they have been processed — after a
// backward pass only leaf (input) values and gradients remain readable.
// A tape supports one backward pass; call reset() to start over.
//
// All computation is sequential and order-pinned, so identical inputs give
// bit-identical values and gradients.
class Tape {
 public:
  using Var = std::size_t;

  Var input(Tensor value);
  Var constant(Tensor value) { return input(std::move(value)); }

  const Tensor& value(Var v) const;
  // Valid after backward(); leaves unreached by the loss hold zeros.
  const Tensor& grad(Var v) const;

  // Same-shape elementwise.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  // Broadcasts: (m x n) + (1 x n), (m x n) scaled per-row by (m x 1).
  Var add_rowvec(Var a, Var row);
  Var mul_colvec(Var a, Var col);
  // k * a + c elementwise.
  Var affine(Var a, double k, double c);
  Var scale(Var a, double k) { return affine(a, k, 0.0); }

  Var matmul(Var a, Var b);

  Var concat_cols(Var a, Var b);
  Var slice_cols(Var a, std::size_t c0, std::size_t c1);

  Var relu(Var a);
  Var tanh_op(Var a);
  Var sigmoid(Var a);
  Var atanh_op(Var a);  // caller keeps inputs inside (-1, 1)
  Var log_op(Var a);
  // Gradient passes through strictly inside (lo, hi), zero where clamped.
  Var clamp(Var a, double lo, double hi);

  // out.row(e) = a.row(idx[e]); backward scatter-adds.
  Var gather_rows(Var a, std::vector<std::size_t> idx);
  // out.row(seg[e]) += a.row(e), groups output rows; rows are added in
  // ascending e, so the reduction order is pinned.
  Var segment_sum(Var a, std::vector<std::size_t> seg, std::size_t groups);
  // Softmax of the m x 1 column a within each segment (max-shifted).
  Var segment_softmax(Var a, std::vector<std::size_t> seg, std::size_t groups);
  // For each contiguous run [offsets[k], offsets[k+1]) of the m x 1 column,
  // out_e = product of the run excluding e. Runs of length one give the
  // empty product 1.
  Var leave_one_out_prod(Var a, std::vector<std::size_t> offsets);

  // (m x n), (m x n) -> m x 1 of row inner products.
  Var row_dot(Var a, Var b);
  Var sum(Var a);
  Var mean(Var a);
  Var softmax_rows(Var a);

  void backward(Var loss);

  std::size_t node_count() const { return nodes_.size(); }
  void reset();

 private:
  enum class Op {
    kInput,
    kAdd,
    kSub,
    kMul,
    kAddRow,
    kMulCol,
    kAffine,
    kMatmul,
    kConcatCols,
    kSliceCols,
    kRelu,
    kTanh,
    kSigmoid,
    kAtanh,
    kLog,
    kClamp,
    kGather,
    kSegSum,
    kSegSoftmax,
    kLooProd,
    kRowDot,
    kSum,
    kMean,
    kSoftmaxRows,
  };

  struct Node {
    Op op = Op::kInput;
    Var a = 0;
    Var b = 0;
    double x0 = 0.0;
    double x1 = 0.0;
    std::vector<std::size_t> idx;
    std::size_t groups = 0;
    Tensor val;
    Tensor grd;
    bool has_grad = false;
  };

  Var push(Node n);
  const Node& node(Var v) const;
  Tensor& grad_buf(Var v);
  void backward_node(std::size_t i);

  std::vector<Node> nodes_;
  bool ran_backward_ = false;
};

}  // namespace qldpc::nn
