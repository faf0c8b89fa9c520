#include "reclap/grad_check.hpp"

#include <cmath>

namespace reclap {

double grad_check_params(const std::vector<Tensor2D*>& params,
                         const std::vector<Tensor2D*>& grads,
                         const std::function<double()>& loss_forward,
                         const std::function<void()>& populate_grads,
                         double h, double floor) {
  populate_grads();
  std::vector<Tensor2D> analytic;
  analytic.reserve(grads.size());
  for (const Tensor2D* g : grads) analytic.push_back(*g);

  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor2D& p = *params[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double saved = p.data[j];
      p.data[j] = saved + h;
      const double loss_plus = loss_forward();
      p.data[j] = saved - h;
      const double loss_minus = loss_forward();
      p.data[j] = saved;
      const double numeric = (loss_plus - loss_minus) / (2.0 * h);
      const double a = analytic[i].data[j];
      const double err =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      if (err > worst) worst = err;
    }
  }
  return worst;
}

double grad_check(LayerStack& stack, const Tensor2D& input,
                  const StackLoss& loss_fn, double h, double floor) {
  auto loss_forward = [&]() {
    const Tensor2D out = stack.infer(input);
    Tensor2D unused(out.rows, out.cols);
    return loss_fn(out, unused);
  };
  auto populate = [&]() {
    stack.zero_grads();
    const Tensor2D out = stack.forward(input);
    Tensor2D grad_out(out.rows, out.cols);
    loss_fn(out, grad_out);
    stack.backward(grad_out);
  };
  return grad_check_params(stack.parameters(), stack.gradients(), loss_forward,
                           populate, h, floor);
}

}  // namespace reclap
