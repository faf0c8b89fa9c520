#include "reclap/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace reclap {

AdamState AdamState::for_params(const std::vector<Tensor2D*>& params,
                                double learning_rate) {
  AdamState state;
  state.learning_rate = learning_rate;
  state.first_moment.reserve(params.size());
  state.second_moment.reserve(params.size());
  for (const Tensor2D* p : params) {
    state.first_moment.emplace_back(p->rows, p->cols);
    state.second_moment.emplace_back(p->rows, p->cols);
  }
  return state;
}

void adam_step(AdamState& state, const std::vector<Tensor2D*>& params,
               const std::vector<Tensor2D*>& grads) {
  if (params.size() != grads.size() ||
      params.size() != state.first_moment.size()) {
    throw std::runtime_error("adam_step: parameter/gradient/moment counts disagree");
  }
  state.step += 1;
  const double bias1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor2D& p = *params[i];
    const Tensor2D& g = *grads[i];
    Tensor2D& m = state.first_moment[i];
    Tensor2D& v = state.second_moment[i];
    if (!p.same_shape(g) || !p.same_shape(m)) {
      throw std::runtime_error("adam_step: shape mismatch at parameter " +
                               std::to_string(i));
    }
    g.require_finite("adam_step: gradient " + std::to_string(i));
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double grad = g.data[j];
      m.data[j] = state.beta1 * m.data[j] + (1.0 - state.beta1) * grad;
      v.data[j] = state.beta2 * v.data[j] + (1.0 - state.beta2) * grad * grad;
      const double m_hat = m.data[j] / bias1;
      const double v_hat = v.data[j] / bias2;
      p.data[j] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace reclap
