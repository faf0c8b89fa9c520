#include "reclap/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace reclap {

namespace {

Tensor2D dense_forward(DenseLayer& layer, const Tensor2D& input, bool cache) {
  if (input.cols != layer.weights.rows) {
    throw std::runtime_error("Dense: input width " + std::to_string(input.cols) +
                             " does not match layer input dim " +
                             std::to_string(layer.weights.rows));
  }
  Tensor2D out = matmul(input, layer.weights);
  for (std::size_t r = 0; r < out.rows; ++r) {
    for (std::size_t c = 0; c < out.cols; ++c) {
      out.at(r, c) += layer.bias.at(0, c);
    }
  }
  if (cache) layer.cached_input = input;
  return out;
}

Tensor2D dense_forward_const(const DenseLayer& layer, const Tensor2D& input) {
  return dense_forward(const_cast<DenseLayer&>(layer), input, false);
}

Tensor2D dense_backward(DenseLayer& layer, const Tensor2D& grad) {
  require_shape(grad, layer.cached_input.rows, layer.weights.cols,
                "Dense backward");
  const Tensor2D dw = matmul_transpose_a(layer.cached_input, grad);
  for (std::size_t i = 0; i < dw.size(); ++i) {
    layer.weight_grad.data[i] += dw.data[i];
  }
  for (std::size_t r = 0; r < grad.rows; ++r) {
    for (std::size_t c = 0; c < grad.cols; ++c) {
      layer.bias_grad.at(0, c) += grad.at(r, c);
    }
  }
  return matmul_transpose_b(grad, layer.weights);
}

Tensor2D relu_forward(ReluLayer& layer, const Tensor2D& input, bool cache) {
  Tensor2D out = input;
  for (auto& v : out.data) {
    if (v <= 0.0) v = 0.0;  // gradient at exactly 0 is defined as 0
  }
  if (cache) layer.cached_input = input;
  return out;
}

Tensor2D relu_backward(const ReluLayer& layer, const Tensor2D& grad) {
  require_shape(grad, layer.cached_input.rows, layer.cached_input.cols,
                "ReLU backward");
  Tensor2D out = grad;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (layer.cached_input.data[i] <= 0.0) out.data[i] = 0.0;
  }
  return out;
}

Tensor2D l2_forward(L2NormalizeLayer& layer, const Tensor2D& input,
                    bool cache) {
  Tensor2D out = input;
  std::vector<double> norms(input.rows);
  for (std::size_t r = 0; r < input.rows; ++r) {
    const double norm = input.row_norm(r);
    if (norm < layer.epsilon) {
      throw std::runtime_error(
          "L2Normalize: row " + std::to_string(r) + " has norm " +
          std::to_string(norm) + " below epsilon; cosine similarity undefined");
    }
    norms[r] = norm;
    for (std::size_t c = 0; c < input.cols; ++c) {
      out.at(r, c) = input.at(r, c) / norm;
    }
  }
  if (cache) {
    layer.cached_output = out;
    layer.cached_norms = std::move(norms);
  }
  return out;
}

// d/dv (v/|v|) applied to g:  (g - (g.y) y) / |v|  with y = v/|v|.
Tensor2D l2_backward(const L2NormalizeLayer& layer, const Tensor2D& grad) {
  require_shape(grad, layer.cached_output.rows, layer.cached_output.cols,
                "L2Normalize backward");
  Tensor2D out(grad.rows, grad.cols);
  for (std::size_t r = 0; r < grad.rows; ++r) {
    double dot = 0.0;
    for (std::size_t c = 0; c < grad.cols; ++c) {
      dot += grad.at(r, c) * layer.cached_output.at(r, c);
    }
    const double inv_norm = 1.0 / layer.cached_norms[r];
    for (std::size_t c = 0; c < grad.cols; ++c) {
      out.at(r, c) =
          (grad.at(r, c) - dot * layer.cached_output.at(r, c)) * inv_norm;
    }
  }
  return out;
}

}  // namespace

Tensor2D LayerStack::forward(const Tensor2D& input) {
  input.require_finite("LayerStack::forward input");
  Tensor2D current = input;
  for (auto& layer : layers) {
    if (auto* dense = std::get_if<DenseLayer>(&layer)) {
      current = dense_forward(*dense, current, true);
    } else if (auto* relu = std::get_if<ReluLayer>(&layer)) {
      current = relu_forward(*relu, current, true);
    } else {
      current = l2_forward(std::get<L2NormalizeLayer>(layer), current, true);
    }
  }
  forward_cached_ = true;
  batch_rows_ = input.rows;
  return current;
}

Tensor2D LayerStack::infer(const Tensor2D& input) const {
  input.require_finite("LayerStack::infer input");
  Tensor2D current = input;
  for (const auto& layer : layers) {
    if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      current = dense_forward_const(*dense, current);
    } else if (std::holds_alternative<ReluLayer>(layer)) {
      ReluLayer scratch;
      current = relu_forward(scratch, current, false);
    } else {
      L2NormalizeLayer scratch = std::get<L2NormalizeLayer>(layer);
      current = l2_forward(scratch, current, false);
    }
  }
  return current;
}

Tensor2D LayerStack::backward(const Tensor2D& upstream_grad) {
  if (!forward_cached_) {
    throw std::runtime_error("LayerStack::backward called without forward");
  }
  if (upstream_grad.rows != batch_rows_) {
    throw std::runtime_error("LayerStack::backward: upstream rows " +
                             std::to_string(upstream_grad.rows) +
                             " do not match forward batch " +
                             std::to_string(batch_rows_));
  }
  Tensor2D current = upstream_grad;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    if (auto* dense = std::get_if<DenseLayer>(&*it)) {
      current = dense_backward(*dense, current);
    } else if (auto* relu = std::get_if<ReluLayer>(&*it)) {
      current = relu_backward(*relu, current);
    } else {
      current = l2_backward(std::get<L2NormalizeLayer>(*it), current);
    }
  }
  return current;
}

void LayerStack::zero_grads() {
  for (auto& layer : layers) {
    if (auto* dense = std::get_if<DenseLayer>(&layer)) {
      dense->weight_grad.zero();
      dense->bias_grad.zero();
    }
  }
}

std::vector<Tensor2D*> LayerStack::parameters() {
  std::vector<Tensor2D*> params;
  for (auto& layer : layers) {
    if (auto* dense = std::get_if<DenseLayer>(&layer)) {
      params.push_back(&dense->weights);
      params.push_back(&dense->bias);
    }
  }
  return params;
}

std::vector<const Tensor2D*> LayerStack::parameters() const {
  std::vector<const Tensor2D*> params;
  for (const auto& layer : layers) {
    if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      params.push_back(&dense->weights);
      params.push_back(&dense->bias);
    }
  }
  return params;
}

std::vector<Tensor2D*> LayerStack::gradients() {
  std::vector<Tensor2D*> grads;
  for (auto& layer : layers) {
    if (auto* dense = std::get_if<DenseLayer>(&layer)) {
      grads.push_back(&dense->weight_grad);
      grads.push_back(&dense->bias_grad);
    }
  }
  return grads;
}

std::size_t LayerStack::input_dim() const {
  for (const auto& layer : layers) {
    if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      return dense->weights.rows;
    }
  }
  return 0;  // dimension-free stack (pure ReLU / normalize)
}

std::size_t LayerStack::output_dim() const {
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    if (const auto* dense = std::get_if<DenseLayer>(&*it)) {
      return dense->weights.cols;
    }
  }
  return 0;
}

DenseLayer make_dense(std::size_t in, std::size_t out, Rng& rng) {
  DenseLayer layer(in, out);
  const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
  for (auto& w : layer.weights.data) {
    w = rng.uniform(-bound, bound);
  }
  return layer;
}

std::size_t validate_stack(const LayerStack& stack, std::size_t input_dim) {
  std::size_t dim = input_dim;
  std::size_t idx = 0;
  for (const auto& layer : stack.layers) {
    if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      if (dense->weights.rows != dim) {
        throw std::runtime_error(
            "layer " + std::to_string(idx) + ": expects input dim " +
            std::to_string(dense->weights.rows) + ", previous layer emits " +
            std::to_string(dim));
      }
      if (!dense->weight_grad.same_shape(dense->weights) ||
          !dense->bias_grad.same_shape(dense->bias)) {
        throw std::runtime_error("layer " + std::to_string(idx) +
                                 ": gradient slots do not mirror parameters");
      }
      dim = dense->weights.cols;
    }
    ++idx;
  }
  return dim;
}

}  // namespace reclap
