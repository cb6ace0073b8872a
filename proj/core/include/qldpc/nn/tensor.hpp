#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qldpc::nn {

// Dense row-major f64 matrix. Rank is pinned to two: column vectors are
// n x 1, row vectors 1 x n, scalars 1 x 1. A single shape class keeps
// broadcasting rules explicit in the op names (add_rowvec, mul_colvec).
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), v(r * c, fill) {}

  static Tensor scalar(double x) {
    Tensor t(1, 1);
    t.v[0] = x;
    return t;
  }

  static Tensor from(std::size_t r, std::size_t c, std::vector<double> data) {
    if (data.size() != r * c) {
      throw std::invalid_argument("Tensor::from: data length " +
                                  std::to_string(data.size()) +
                                  " does not match shape " + std::to_string(r) +
                                  "x" + std::to_string(c));
    }
    Tensor t;
    t.rows = r;
    t.cols = c;
    t.v = std::move(data);
    return t;
  }

  std::size_t size() const { return rows * cols; }
  bool empty() const { return v.empty(); }

  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
  double* row_ptr(std::size_t r) { return v.data() + r * cols; }
  const double* row_ptr(std::size_t r) const { return v.data() + r * cols; }

  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }

  std::string shape_str() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
  }

  void release() {
    v.clear();
    v.shrink_to_fit();
  }
};

}  // namespace qldpc::nn
