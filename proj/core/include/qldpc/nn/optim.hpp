#pragma once

#include "qldpc/nn/params.hpp"

namespace qldpc::nn {

struct AdamConfig {
  double lr = 4e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// L2 norm over all accumulated gradients (parameters without a gradient
// contribute zero).
double global_grad_norm(const ParameterStore& store);

// If the global norm exceeds max_norm, scales every gradient by
// max_norm / norm; otherwise leaves them untouched.
void clip_global_norm(ParameterStore& store, double max_norm = 0.5);

// Standard bias-corrected Adam over every parameter; increments the step
// counter. Throws if any parameter is missing its gradient.
void adam_step(ParameterStore& store, const AdamConfig& config = {});

}  // namespace qldpc::nn
