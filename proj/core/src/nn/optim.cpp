#include "qldpc/nn/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace qldpc::nn {

ParameterStore::Entry& ParameterStore::entry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw std::invalid_argument("nn: unknown parameter '" + name + "'");
  }
  return it->second;
}

Tensor& ParameterStore::create(const std::string& name, std::size_t rows,
                               std::size_t cols) {
  if (entries_.count(name) != 0) {
    throw std::invalid_argument("nn: parameter '" + name + "' already exists");
  }
  Entry& e = entries_[name];
  e.value = Tensor(rows, cols);
  e.grad = Tensor(rows, cols);
  e.adam_m = Tensor(rows, cols);
  e.adam_v = Tensor(rows, cols);
  return e.value;
}

Tensor& ParameterStore::create_uniform(const std::string& name, std::size_t rows,
                                       std::size_t cols, Rng& rng) {
  Tensor& t = create(name, rows, cols);
  double bound = std::sqrt(6.0 / (double)(rows + cols));
  for (double& x : t.v) x = (2.0 * rng.next_double() - 1.0) * bound;
  return t;
}

Tensor& ParameterStore::value(const std::string& name) { return entry(name).value; }

const Tensor& ParameterStore::value(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw std::invalid_argument("nn: unknown parameter '" + name + "'");
  }
  return it->second.value;
}

void ParameterStore::zero_grads() {
  for (auto& [name, e] : entries_) {
    (void)name;
    for (double& x : e.grad.v) x = 0.0;
    e.has_grad = false;
  }
}

void ParameterStore::accumulate_grad(const std::string& name, const Tensor& g) {
  Entry& e = entry(name);
  if (!e.value.same_shape(g)) {
    throw std::invalid_argument("nn: gradient shape " + g.shape_str() +
                                " does not match parameter '" + name + "' " +
                                e.value.shape_str());
  }
  for (std::size_t i = 0; i < g.size(); ++i) e.grad.v[i] += g.v[i];
  e.has_grad = true;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, e] : entries_) {
    (void)name;
    n += e.value.size();
  }
  return n;
}

void ParameterStore::clear() {
  entries_.clear();
  step_ = 0;
}

double global_grad_norm(const ParameterStore& store) {
  double acc = 0.0;
  for (const auto& [name, e] : store.entries()) {
    (void)name;
    if (!e.has_grad) continue;
    for (double x : e.grad.v) acc += x * x;
  }
  return std::sqrt(acc);
}

void clip_global_norm(ParameterStore& store, double max_norm) {
  if (max_norm <= 0.0) throw std::invalid_argument("nn: max_norm must be positive");
  double norm = global_grad_norm(store);
  if (norm <= max_norm) return;
  double k = max_norm / norm;
  for (auto& [name, e] : store.entries()) {
    (void)name;
    if (!e.has_grad) continue;
    for (double& x : e.grad.v) x *= k;
  }
}

void adam_step(ParameterStore& store, const AdamConfig& config) {
  for (const auto& [name, e] : store.entries()) {
    if (!e.has_grad) {
      throw std::logic_error("nn: adam_step with no gradient for '" + name + "'");
    }
  }
  store.set_step(store.step() + 1);
  double t = (double)store.step();
  double bc1 = 1.0 - std::pow(config.beta1, t);
  double bc2 = 1.0 - std::pow(config.beta2, t);
  for (auto& [name, e] : store.entries()) {
    (void)name;
    for (std::size_t i = 0; i < e.value.size(); ++i) {
      double g = e.grad.v[i];
      e.adam_m.v[i] = config.beta1 * e.adam_m.v[i] + (1.0 - config.beta1) * g;
      e.adam_v.v[i] = config.beta2 * e.adam_v.v[i] + (1.0 - config.beta2) * g * g;
      double mhat = e.adam_m.v[i] / bc1;
      double vhat = e.adam_v.v[i] / bc2;
      e.value.v[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

}  // namespace qldpc::nn
