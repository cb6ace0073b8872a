#pragma once

#include <cstddef>
#include <map>
#include <string>

#include "qldpc/nn/tensor.hpp"
#include "qldpc/rng.hpp"

namespace qldpc::nn {

// Named parameter tensors with their accumulated gradients and Adam
// moments. The ordered map pins iteration order for the optimizer, the
// norm clip and checkpoints.
class ParameterStore {
 public:
  struct Entry {
    Tensor value;
    Tensor grad;
    Tensor adam_m;
    Tensor adam_v;
    bool has_grad = false;
  };

  // Zero-initialized (used for biases).
  Tensor& create(const std::string& name, std::size_t rows, std::size_t cols);
  // Uniform in +-sqrt(6 / (rows + cols)) — rows is the fan-in because
  // layers compute x * W.
  Tensor& create_uniform(const std::string& name, std::size_t rows,
                         std::size_t cols, Rng& rng);

  bool has(const std::string& name) const { return entries_.count(name) != 0; }
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;

  void zero_grads();
  void accumulate_grad(const std::string& name, const Tensor& g);

  std::map<std::string, Entry>& entries() { return entries_; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  std::size_t step() const { return step_; }
  void set_step(std::size_t s) { step_ = s; }

  std::size_t scalar_count() const;
  void clear();

 private:
  Entry& entry(const std::string& name);

  std::map<std::string, Entry> entries_;
  std::size_t step_ = 0;
};

}  // namespace qldpc::nn
