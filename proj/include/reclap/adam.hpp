#pragma once

#include <cstdint>
#include <vector>

#include "reclap/tensor.hpp"

namespace reclap {

// Adam with bias correction. Moment tensors mirror the parameter list they
// were created for, in order.
struct AdamState {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<Tensor2D> first_moment;
  std::vector<Tensor2D> second_moment;

  static AdamState for_params(const std::vector<Tensor2D*>& params,
                              double learning_rate);
};

// One Adam update over the parameter list. Step counter increments before
// bias correction. Throws on non-finite gradients or shape disagreement.
void adam_step(AdamState& state, const std::vector<Tensor2D*>& params,
               const std::vector<Tensor2D*>& grads);

}  // namespace reclap
