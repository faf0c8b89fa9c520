#pragma once

#include <variant>
#include <vector>

#include "reclap/rng.hpp"
#include "reclap/tensor.hpp"

namespace reclap {

// y = x * W + b, with W stored input_dim x output_dim.
struct DenseLayer {
  Tensor2D weights;
  Tensor2D bias;  // 1 x output_dim
  Tensor2D weight_grad;
  Tensor2D bias_grad;
  Tensor2D cached_input;

  DenseLayer(std::size_t in, std::size_t out)
      : weights(in, out),
        bias(1, out),
        weight_grad(in, out),
        bias_grad(1, out) {}
};

struct ReluLayer {
  Tensor2D cached_input;
};

// Row-wise projection onto the unit sphere. Rows with norm below epsilon are
// rejected: downstream cosine similarity is undefined for them.
struct L2NormalizeLayer {
  double epsilon = 1e-12;
  Tensor2D cached_output;
  std::vector<double> cached_norms;
};

using Layer = std::variant<DenseLayer, ReluLayer, L2NormalizeLayer>;

// Ordered sequence of layers with cached activations for one backward pass.
// Training code owns a stack exclusively; `infer` is stateless and safe to
// call concurrently on a shared const stack.
class LayerStack {
 public:
  std::vector<Layer> layers;

  // Training forward: caches per-layer activations for backward().
  Tensor2D forward(const Tensor2D& input);

  // Populates parameter gradient slots (accumulating) and returns the
  // gradient with respect to the stack input. Requires a prior forward().
  Tensor2D backward(const Tensor2D& upstream_grad);

  // Cache-free forward pass for inference.
  Tensor2D infer(const Tensor2D& input) const;

  void zero_grads();

  std::vector<Tensor2D*> parameters();
  std::vector<Tensor2D*> gradients();
  std::vector<const Tensor2D*> parameters() const;

  std::size_t input_dim() const;
  std::size_t output_dim() const;

 private:
  bool forward_cached_ = false;
  std::size_t batch_rows_ = 0;
};

// Xavier-uniform weights (+-sqrt(6/(in+out))), zero bias.
DenseLayer make_dense(std::size_t in, std::size_t out, Rng& rng);

// Validates that adjacent layer dimensions chain from `input_dim`; throws on
// mismatch. Returns the stack output dimension.
std::size_t validate_stack(const LayerStack& stack, std::size_t input_dim);

}  // namespace reclap
