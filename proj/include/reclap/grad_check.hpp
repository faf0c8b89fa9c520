#pragma once

#include <functional>
#include <vector>

#include "reclap/layers.hpp"
#include "reclap/tensor.hpp"

namespace reclap {

// Scalar loss over a stack output. Fills `grad_out` (same shape as the
// output) with dLoss/dOutput and returns the loss value.
using StackLoss = std::function<double(const Tensor2D& output, Tensor2D& grad_out)>;

// Compares every parameter's analytic gradient against central finite
// differences and returns the worst scale-floored relative error
// |a - n| / max(|a|, |n|, floor). The floor keeps finite-difference noise on
// near-zero components from dominating the report.
double grad_check(LayerStack& stack, const Tensor2D& input,
                  const StackLoss& loss_fn, double h = 1e-6,
                  double floor = 1e-2);

// Generic variant for models that are more than one stack (both encoders,
// the token table and the temperature at once). `loss_forward` evaluates the
// loss from the current parameter values without touching gradients;
// `populate_grads` zeroes gradient slots, reruns forward/backward, and
// leaves the analytic gradients in `grads`.
double grad_check_params(const std::vector<Tensor2D*>& params,
                         const std::vector<Tensor2D*>& grads,
                         const std::function<double()>& loss_forward,
                         const std::function<void()>& populate_grads,
                         double h = 1e-6, double floor = 1e-2);

}  // namespace reclap
