#include "qldpc/nn/tape.hpp"

#include <cblas.h>

#include <cmath>
#include <stdexcept>
#include <string>

namespace qldpc::nn {

void ensure_blas_configured();  // blas_support.cpp

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string("nn: ") + op + " shape mismatch (" +
                              a.shape_str() + " vs " + b.shape_str() + ")");
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const std::string& detail) {
  throw std::invalid_argument(std::string("nn: ") + op + " bad shape " +
                              a.shape_str() + " (" + detail + ")");
}

}  // namespace

Tape::Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

const Tape::Node& Tape::node(Var v) const {
  if (v >= nodes_.size()) throw std::invalid_argument("nn: unknown tape var");
  return nodes_[v];
}

const Tensor& Tape::value(Var v) const { return node(v).val; }

const Tensor& Tape::grad(Var v) const {
  const Node& n = node(v);
  if (!ran_backward_) throw std::logic_error("nn: grad() before backward()");
  if (!n.has_grad) throw std::logic_error("nn: gradient buffer was released");
  return n.grd;
}

Tensor& Tape::grad_buf(Var v) {
  Node& n = nodes_[v];
  if (!n.has_grad) {
    n.grd = Tensor(n.val.rows, n.val.cols);
    n.has_grad = true;
  }
  return n.grd;
}

Tape::Var Tape::input(Tensor value) {
  Node n;
  n.op = Op::kInput;
  n.val = std::move(value);
  return push(std::move(n));
}

Tape::Var Tape::add(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (!va.same_shape(vb)) shape_error("add", va, vb);
  Node n;
  n.op = Op::kAdd;
  n.a = a;
  n.b = b;
  n.val = va;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.v[i] += vb.v[i];
  return push(std::move(n));
}

Tape::Var Tape::sub(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (!va.same_shape(vb)) shape_error("sub", va, vb);
  Node n;
  n.op = Op::kSub;
  n.a = a;
  n.b = b;
  n.val = va;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.v[i] -= vb.v[i];
  return push(std::move(n));
}

Tape::Var Tape::mul(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (!va.same_shape(vb)) shape_error("mul", va, vb);
  Node n;
  n.op = Op::kMul;
  n.a = a;
  n.b = b;
  n.val = va;
  for (std::size_t i = 0; i < n.val.size(); ++i) n.val.v[i] *= vb.v[i];
  return push(std::move(n));
}

Tape::Var Tape::add_rowvec(Var a, Var row) {
  const Tensor& va = value(a);
  const Tensor& vr = value(row);
  if (vr.rows != 1 || vr.cols != va.cols) shape_error("add_rowvec", va, vr);
  Node n;
  n.op = Op::kAddRow;
  n.a = a;
  n.b = row;
  n.val = va;
  for (std::size_t r = 0; r < va.rows; ++r) {
    double* out = n.val.row_ptr(r);
    for (std::size_t c = 0; c < va.cols; ++c) out[c] += vr.v[c];
  }
  return push(std::move(n));
}

Tape::Var Tape::mul_colvec(Var a, Var col) {
  const Tensor& va = value(a);
  const Tensor& vc = value(col);
  if (vc.cols != 1 || vc.rows != va.rows) shape_error("mul_colvec", va, vc);
  Node n;
  n.op = Op::kMulCol;
  n.a = a;
  n.b = col;
  n.val = va;
  for (std::size_t r = 0; r < va.rows; ++r) {
    double* out = n.val.row_ptr(r);
    for (std::size_t c = 0; c < va.cols; ++c) out[c] *= vc.v[r];
  }
  return push(std::move(n));
}

Tape::Var Tape::affine(Var a, double k, double c) {
  Node n;
  n.op = Op::kAffine;
  n.a = a;
  n.x0 = k;
  n.x1 = c;
  n.val = value(a);
  for (double& x : n.val.v) x = k * x + c;
  return push(std::move(n));
}

Tape::Var Tape::matmul(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (va.cols != vb.rows) shape_error("matmul", va, vb);
  ensure_blas_configured();
  Node n;
  n.op = Op::kMatmul;
  n.a = a;
  n.b = b;
  n.val = Tensor(va.rows, vb.cols);
  if (va.rows != 0 && vb.cols != 0 && va.cols != 0) {
    cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, (int)va.rows,
                (int)vb.cols, (int)va.cols, 1.0, va.v.data(), (int)va.cols,
                vb.v.data(), (int)vb.cols, 0.0, n.val.v.data(), (int)vb.cols);
  }
  return push(std::move(n));
}

Tape::Var Tape::concat_cols(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (va.rows != vb.rows) shape_error("concat_cols", va, vb);
  Node n;
  n.op = Op::kConcatCols;
  n.a = a;
  n.b = b;
  n.val = Tensor(va.rows, va.cols + vb.cols);
  for (std::size_t r = 0; r < va.rows; ++r) {
    double* out = n.val.row_ptr(r);
    const double* pa = va.row_ptr(r);
    const double* pb = vb.row_ptr(r);
    for (std::size_t c = 0; c < va.cols; ++c) out[c] = pa[c];
    for (std::size_t c = 0; c < vb.cols; ++c) out[va.cols + c] = pb[c];
  }
  return push(std::move(n));
}

Tape::Var Tape::slice_cols(Var a, std::size_t c0, std::size_t c1) {
  const Tensor& va = value(a);
  if (c0 > c1 || c1 > va.cols) {
    shape_error("slice_cols", va,
                "slice [" + std::to_string(c0) + ", " + std::to_string(c1) + ")");
  }
  Node n;
  n.op = Op::kSliceCols;
  n.a = a;
  n.x0 = (double)c0;
  n.x1 = (double)c1;
  n.val = Tensor(va.rows, c1 - c0);
  for (std::size_t r = 0; r < va.rows; ++r) {
    const double* src = va.row_ptr(r);
    double* out = n.val.row_ptr(r);
    for (std::size_t c = c0; c < c1; ++c) out[c - c0] = src[c];
  }
  return push(std::move(n));
}

Tape::Var Tape::relu(Var a) {
  Node n;
  n.op = Op::kRelu;
  n.a = a;
  n.val = value(a);
  for (double& x : n.val.v) x = x > 0.0 ? x : 0.0;
  return push(std::move(n));
}

Tape::Var Tape::tanh_op(Var a) {
  Node n;
  n.op = Op::kTanh;
  n.a = a;
  n.val = value(a);
  for (double& x : n.val.v) x = std::tanh(x);
  return push(std::move(n));
}

Tape::Var Tape::sigmoid(Var a) {
  Node n;
  n.op = Op::kSigmoid;
  n.a = a;
  n.val = value(a);
  for (double& x : n.val.v) x = 1.0 / (1.0 + std::exp(-x));
  return push(std::move(n));
}

Tape::Var Tape::atanh_op(Var a) {
  Node n;
  n.op = Op::kAtanh;
  n.a = a;
  n.val = value(a);
  for (double& x : n.val.v) x = std::atanh(x);
  return push(std::move(n));
}

Tape::Var Tape::log_op(Var a) {
  Node n;
  n.op = Op::kLog;
  n.a = a;
  n.val = value(a);
  for (double& x : n.val.v) x = std::log(x);
  return push(std::move(n));
}

Tape::Var Tape::clamp(Var a, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("nn: clamp needs lo < hi");
  Node n;
  n.op = Op::kClamp;
  n.a = a;
  n.x0 = lo;
  n.x1 = hi;
  n.val = value(a);
  for (double& x : n.val.v) x = x < lo ? lo : (x > hi ? hi : x);
  return push(std::move(n));
}

Tape::Var Tape::gather_rows(Var a, std::vector<std::size_t> idx) {
  const Tensor& va = value(a);
  for (std::size_t i : idx) {
    if (i >= va.rows) shape_error("gather_rows", va, "index " + std::to_string(i));
  }
  Node n;
  n.op = Op::kGather;
  n.a = a;
  n.val = Tensor(idx.size(), va.cols);
  for (std::size_t e = 0; e < idx.size(); ++e) {
    const double* src = va.row_ptr(idx[e]);
    double* out = n.val.row_ptr(e);
    for (std::size_t c = 0; c < va.cols; ++c) out[c] = src[c];
  }
  n.idx = std::move(idx);
  return push(std::move(n));
}

Tape::Var Tape::segment_sum(Var a, std::vector<std::size_t> seg, std::size_t groups) {
  const Tensor& va = value(a);
  if (seg.size() != va.rows) shape_error("segment_sum", va, "segment count " + std::to_string(seg.size()));
  for (std::size_t g : seg) {
    if (g >= groups) shape_error("segment_sum", va, "group " + std::to_string(g));
  }
  Node n;
  n.op = Op::kSegSum;
  n.a = a;
  n.groups = groups;
  n.val = Tensor(groups, va.cols);
  for (std::size_t e = 0; e < seg.size(); ++e) {
    const double* src = va.row_ptr(e);
    double* out = n.val.row_ptr(seg[e]);
    for (std::size_t c = 0; c < va.cols; ++c) out[c] += src[c];
  }
  n.idx = std::move(seg);
  return push(std::move(n));
}

Tape::Var Tape::segment_softmax(Var a, std::vector<std::size_t> seg, std::size_t groups) {
  const Tensor& va = value(a);
  if (va.cols != 1) shape_error("segment_softmax", va, "needs a column");
  if (seg.size() != va.rows) shape_error("segment_softmax", va, "segment count " + std::to_string(seg.size()));
  for (std::size_t g : seg) {
    if (g >= groups) shape_error("segment_softmax", va, "group " + std::to_string(g));
  }
  Node n;
  n.op = Op::kSegSoftmax;
  n.a = a;
  n.groups = groups;
  n.val = va;
  std::vector<double> gmax(groups, -1e300);
  for (std::size_t e = 0; e < seg.size(); ++e) {
    if (va.v[e] > gmax[seg[e]]) gmax[seg[e]] = va.v[e];
  }
  std::vector<double> gsum(groups, 0.0);
  for (std::size_t e = 0; e < seg.size(); ++e) {
    n.val.v[e] = std::exp(va.v[e] - gmax[seg[e]]);
    gsum[seg[e]] += n.val.v[e];
  }
  for (std::size_t e = 0; e < seg.size(); ++e) n.val.v[e] /= gsum[seg[e]];
  n.idx = std::move(seg);
  return push(std::move(n));
}

Tape::Var Tape::leave_one_out_prod(Var a, std::vector<std::size_t> offsets) {
  const Tensor& va = value(a);
  if (va.cols != 1) shape_error("leave_one_out_prod", va, "needs a column");
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != va.rows) {
    shape_error("leave_one_out_prod", va, "bad offsets");
  }
  for (std::size_t k = 0; k + 1 < offsets.size(); ++k) {
    if (offsets[k] > offsets[k + 1]) shape_error("leave_one_out_prod", va, "offsets not sorted");
  }
  Node n;
  n.op = Op::kLooProd;
  n.a = a;
  n.val = Tensor(va.rows, 1);
  // Per segment: prefix/suffix products, matching the usual BP check-node
  // association order (prefix of earlier entries times suffix of later).
  std::vector<double> prefix, suffix;
  for (std::size_t k = 0; k + 1 < offsets.size(); ++k) {
    std::size_t lo = offsets[k], hi = offsets[k + 1], d = hi - lo;
    if (d == 0) continue;
    prefix.assign(d + 1, 1.0);
    suffix.assign(d + 1, 1.0);
    for (std::size_t i = 0; i < d; ++i) prefix[i + 1] = prefix[i] * va.v[lo + i];
    for (std::size_t i = d; i-- > 0;) suffix[i] = suffix[i + 1] * va.v[lo + i];
    for (std::size_t i = 0; i < d; ++i) n.val.v[lo + i] = prefix[i] * suffix[i + 1];
  }
  n.idx = std::move(offsets);
  return push(std::move(n));
}

Tape::Var Tape::row_dot(Var a, Var b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (!va.same_shape(vb)) shape_error("row_dot", va, vb);
  Node n;
  n.op = Op::kRowDot;
  n.a = a;
  n.b = b;
  n.val = Tensor(va.rows, 1);
  for (std::size_t r = 0; r < va.rows; ++r) {
    const double* pa = va.row_ptr(r);
    const double* pb = vb.row_ptr(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < va.cols; ++c) acc += pa[c] * pb[c];
    n.val.v[r] = acc;
  }
  return push(std::move(n));
}

Tape::Var Tape::sum(Var a) {
  Node n;
  n.op = Op::kSum;
  n.a = a;
  double acc = 0.0;
  for (double x : value(a).v) acc += x;
  n.val = Tensor::scalar(acc);
  return push(std::move(n));
}

Tape::Var Tape::mean(Var a) {
  const Tensor& va = value(a);
  if (va.size() == 0) shape_error("mean", va, "empty");
  Node n;
  n.op = Op::kMean;
  n.a = a;
  double acc = 0.0;
  for (double x : va.v) acc += x;
  n.val = Tensor::scalar(acc / (double)va.size());
  return push(std::move(n));
}

Tape::Var Tape::softmax_rows(Var a) {
  const Tensor& va = value(a);
  if (va.cols == 0) shape_error("softmax_rows", va, "empty rows");
  Node n;
  n.op = Op::kSoftmaxRows;
  n.a = a;
  n.val = va;
  for (std::size_t r = 0; r < va.rows; ++r) {
    double* out = n.val.row_ptr(r);
    double m = out[0];
    for (std::size_t c = 1; c < va.cols; ++c) m = std::max(m, out[c]);
    double s = 0.0;
    for (std::size_t c = 0; c < va.cols; ++c) {
      out[c] = std::exp(out[c] - m);
      s += out[c];
    }
    for (std::size_t c = 0; c < va.cols; ++c) out[c] /= s;
  }
  return push(std::move(n));
}

void Tape::backward_node(std::size_t i) {
  Node& n = nodes_[i];
  const Tensor& g = n.grd;
  switch (n.op) {
    case Op::kInput:
      break;
    case Op::kAdd: {
      Tensor& ga = grad_buf(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) ga.v[j] += g.v[j];
      Tensor& gb = grad_buf(n.b);
      for (std::size_t j = 0; j < g.size(); ++j) gb.v[j] += g.v[j];
      break;
    }
    case Op::kSub: {
      Tensor& ga = grad_buf(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) ga.v[j] += g.v[j];
      Tensor& gb = grad_buf(n.b);
      for (std::size_t j = 0; j < g.size(); ++j) gb.v[j] -= g.v[j];
      break;
    }
    case Op::kMul: {
      const Tensor& va = nodes_[n.a].val;
      const Tensor& vb = nodes_[n.b].val;
      Tensor& ga = grad_buf(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) ga.v[j] += g.v[j] * vb.v[j];
      Tensor& gb = grad_buf(n.b);
      for (std::size_t j = 0; j < g.size(); ++j) gb.v[j] += g.v[j] * va.v[j];
      break;
    }
    case Op::kAddRow: {
      Tensor& ga = grad_buf(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) ga.v[j] += g.v[j];
      Tensor& gr = grad_buf(n.b);
      for (std::size_t r = 0; r < g.rows; ++r) {
        const double* row = g.row_ptr(r);
        for (std::size_t c = 0; c < g.cols; ++c) gr.v[c] += row[c];
      }
      break;
    }
    case Op::kMulCol: {
      const Tensor& va = nodes_[n.a].val;
      const Tensor& vc = nodes_[n.b].val;
      Tensor& ga = grad_buf(n.a);
      for (std::size_t r = 0; r < g.rows; ++r) {
        const double* gr = g.row_ptr(r);
        double* out = ga.row_ptr(r);
        for (std::size_t c = 0; c < g.cols; ++c) out[c] += gr[c] * vc.v[r];
      }
      Tensor& gc = grad_buf(n.b);
      for (std::size_t r = 0; r < g.rows; ++r) {
        const double* gr = g.row_ptr(r);
        const double* ar = va.row_ptr(r);
        double acc = 0.0;
        for (std::size_t c = 0; c < g.cols; ++c) acc += gr[c] * ar[c];
        gc.v[r] += acc;
      }
      break;
    }
    case Op::kAffine: {
      Tensor& ga = grad_buf(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) ga.v[j] += n.x0 * g.v[j];
      break;
    }
    case Op::kMatmul: {
      const Tensor& va = nodes_[n.a].val;
      const Tensor& vb = nodes_[n.b].val;
      Tensor& ga = grad_buf(n.a);
      Tensor& gb = grad_buf(n.b);
      if (g.rows != 0 && g.cols != 0 && va.cols != 0) {
        // dA += G * B^T
        cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, (int)va.rows,
                    (int)va.cols, (int)vb.cols, 1.0, g.v.data(), (int)g.cols,
                    vb.v.data(), (int)vb.cols, 1.0, ga.v.data(), (int)ga.cols);
        // dB += A^T * G
        cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, (int)vb.rows,
                    (int)vb.cols, (int)va.rows, 1.0, va.v.data(), (int)va.cols,
                    g.v.data(), (int)g.cols, 1.0, gb.v.data(), (int)gb.cols);
      }
      break;
    }
    case Op::kConcatCols: {
      const Tensor& va = nodes_[n.a].val;
      Tensor& ga = grad_buf(n.a);
      Tensor& gb = grad_buf(n.b);
      for (std::size_t r = 0; r < g.rows; ++r) {
        const double* gr = g.row_ptr(r);
        double* pa = ga.row_ptr(r);
        double* pb = gb.row_ptr(r);
        for (std::size_t c = 0; c < va.cols; ++c) pa[c] += gr[c];
        for (std::size_t c = 0; c < gb.cols; ++c) pb[c] += gr[va.cols + c];
      }
      break;
    }
    case Op::kSliceCols: {
      Tensor& ga = grad_buf(n.a);
      std::size_t c0 = (std::size_t)n.x0;
      for (std::size_t r = 0; r < g.rows; ++r) {
        const double* gr = g.row_ptr(r);
        double* pa = ga.row_ptr(r);
        for (std::size_t c = 0; c < g.cols; ++c) pa[c0 + c] += gr[c];
      }
      break;
    }
    case Op::kRelu: {
      const Tensor& va = nodes_[n.a].val;
      Tensor& ga = grad_buf(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (va.v[j] > 0.0) ga.v[j] += g.v[j];
      }
      break;
    }
    case Op::kTanh: {
      Tensor& ga = grad_buf(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) {
        double y = n.val.v[j];
        ga.v[j] += g.v[j] * (1.0 - y * y);
      }
      break;
    }
    case Op::kSigmoid: {
      Tensor& ga = grad_buf(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) {
        double y = n.val.v[j];
        ga.v[j] += g.v[j] * y * (1.0 - y);
      }
      break;
    }
    case Op::kAtanh: {
      const Tensor& va = nodes_[n.a].val;
      Tensor& ga = grad_buf(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) {
        double x = va.v[j];
        ga.v[j] += g.v[j] / (1.0 - x * x);
      }
      break;
    }
    case Op::kLog: {
      const Tensor& va = nodes_[n.a].val;
      Tensor& ga = grad_buf(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) ga.v[j] += g.v[j] / va.v[j];
      break;
    }
    case Op::kClamp: {
      const Tensor& va = nodes_[n.a].val;
      Tensor& ga = grad_buf(n.a);
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (va.v[j] > n.x0 && va.v[j] < n.x1) ga.v[j] += g.v[j];
      }
      break;
    }
    case Op::kGather: {
      Tensor& ga = grad_buf(n.a);
      for (std::size_t e = 0; e < n.idx.size(); ++e) {
        const double* gr = g.row_ptr(e);
        double* out = ga.row_ptr(n.idx[e]);
        for (std::size_t c = 0; c < g.cols; ++c) out[c] += gr[c];
      }
      break;
    }
    case Op::kSegSum: {
      Tensor& ga = grad_buf(n.a);
      for (std::size_t e = 0; e < n.idx.size(); ++e) {
        const double* gr = g.row_ptr(n.idx[e]);
        double* out = ga.row_ptr(e);
        for (std::size_t c = 0; c < g.cols; ++c) out[c] += gr[c];
      }
      break;
    }
    case Op::kSegSoftmax: {
      // d x_e = y_e (g_e - sum_{e' in seg} g_e' y_e')
      Tensor& ga = grad_buf(n.a);
      std::vector<double> dot(n.groups, 0.0);
      for (std::size_t e = 0; e < n.idx.size(); ++e) {
        dot[n.idx[e]] += g.v[e] * n.val.v[e];
      }
      for (std::size_t e = 0; e < n.idx.size(); ++e) {
        ga.v[e] += n.val.v[e] * (g.v[e] - dot[n.idx[e]]);
      }
      break;
    }
    case Op::kLooProd: {
      const Tensor& va = nodes_[n.a].val;
      Tensor& ga = grad_buf(n.a);
      // grad_f = sum_{e != f} g_e * prod_{e' not in {e, f}} x_e'. Computed
      // per f with prefix/suffix over the run with f removed; O(d^2) per
      // run, fine for check degrees <= a few dozen.
      std::vector<double> red, wred, pre, suf;
      for (std::size_t k = 0; k + 1 < n.idx.size(); ++k) {
        std::size_t lo = n.idx[k], hi = n.idx[k + 1], d = hi - lo;
        if (d < 2) continue;  // single element: empty product, zero grad
        for (std::size_t f = lo; f < hi; ++f) {
          red.clear();
          wred.clear();
          for (std::size_t e = lo; e < hi; ++e) {
            if (e == f) continue;
            red.push_back(va.v[e]);
            wred.push_back(g.v[e]);
          }
          std::size_t m = red.size();
          pre.assign(m + 1, 1.0);
          suf.assign(m + 1, 1.0);
          for (std::size_t i = 0; i < m; ++i) pre[i + 1] = pre[i] * red[i];
          for (std::size_t i = m; i-- > 0;) suf[i] = suf[i + 1] * red[i];
          double acc = 0.0;
          for (std::size_t i = 0; i < m; ++i) acc += wred[i] * pre[i] * suf[i + 1];
          ga.v[f] += acc;
        }
      }
      break;
    }
    case Op::kRowDot: {
      const Tensor& va = nodes_[n.a].val;
      const Tensor& vb = nodes_[n.b].val;
      Tensor& ga = grad_buf(n.a);
      Tensor& gb = grad_buf(n.b);
      for (std::size_t r = 0; r < va.rows; ++r) {
        const double* pa = va.row_ptr(r);
        const double* pb = vb.row_ptr(r);
        double* oa = ga.row_ptr(r);
        double* ob = gb.row_ptr(r);
        double gr = g.v[r];
        for (std::size_t c = 0; c < va.cols; ++c) {
          oa[c] += gr * pb[c];
          ob[c] += gr * pa[c];
        }
      }
      break;
    }
    case Op::kSum: {
      Tensor& ga = grad_buf(n.a);
      for (double& x : ga.v) x += g.v[0];
      break;
    }
    case Op::kMean: {
      Tensor& ga = grad_buf(n.a);
      double k = g.v[0] / (double)ga.size();
      for (double& x : ga.v) x += k;
      break;
    }
    case Op::kSoftmaxRows: {
      Tensor& ga = grad_buf(n.a);
      for (std::size_t r = 0; r < g.rows; ++r) {
        const double* gr = g.row_ptr(r);
        const double* yr = n.val.row_ptr(r);
        double* out = ga.row_ptr(r);
        double dot = 0.0;
        for (std::size_t c = 0; c < g.cols; ++c) dot += gr[c] * yr[c];
        for (std::size_t c = 0; c < g.cols; ++c) out[c] += yr[c] * (gr[c] - dot);
      }
      break;
    }
  }
}

void Tape::backward(Var loss) {
  if (ran_backward_) throw std::logic_error("nn: backward() ran already; reset() the tape");
  const Node& ln = node(loss);
  if (ln.val.rows != 1 || ln.val.cols != 1) {
    throw std::invalid_argument("nn: backward needs a scalar loss, got " + ln.val.shape_str());
  }
  ran_backward_ = true;
  // Zero gradients for every leaf up front so unreached parameters read
  // as zero afterwards.
  for (Node& n : nodes_) {
    if (n.op == Op::kInput) {
      n.grd = Tensor(n.val.rows, n.val.cols);
      n.has_grad = true;
    }
  }
  grad_buf(loss).v[0] = 1.0;
  for (std::size_t i = loss + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.op == Op::kInput) continue;
    if (n.has_grad) backward_node(i);
    // Interior values and gradients are dead from here on.
    n.val.release();
    n.grd.release();
    n.has_grad = false;
  }
}

void Tape::reset() {
  nodes_.clear();
  ran_backward_ = false;
}

}  // namespace qldpc::nn
