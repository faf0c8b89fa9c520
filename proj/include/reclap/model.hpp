#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "reclap/layers.hpp"
#include "reclap/tensor.hpp"
#include "reclap/tokenizer.hpp"

namespace reclap {

struct ModelConfig {
  std::size_t feature_dim = 64;
  std::size_t vocab_buckets = 32768;
  std::size_t token_embed_dim = 64;
  std::size_t hidden_dim = 128;
  std::size_t embed_dim = 64;
  double temperature_init = 1.0 / 0.07;
  double temperature_max = 100.0;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& doc);
};

// Audio and text encoders sharing one embedding space, plus the learnable
// log-temperature. The audio side is a two-layer MLP over the input features;
// the text side mean-pools hashed token embeddings and runs the same MLP
// shape. Both end in L2Normalize, so every emitted row is unit norm.
class DualEncoder {
 public:
  explicit DualEncoder(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  // Inference (stateless, safe on shared const instances).
  Tensor2D encode_audio(const Tensor2D& features) const;
  Tensor2D encode_text(const std::vector<std::string>& captions) const;

  // Training path with cached activations.
  Tensor2D forward_audio(const Tensor2D& features);
  Tensor2D forward_text(const std::vector<std::string>& captions);
  void backward_audio(const Tensor2D& grad);
  void backward_text(const Tensor2D& grad);

  void zero_grads();

  double tau() const;
  double log_tau() const { return log_tau_.at(0, 0); }
  void add_log_tau_grad(double g) { log_tau_grad_.at(0, 0) += g; }
  // Applied after each optimizer step; keeps tau in (0, temperature_max].
  void clamp_temperature();

  // Canonical parameter order used by the optimizer and the checkpoint
  // format: audio stack (W, b per dense layer), token table, text stack,
  // log-temperature.
  std::vector<Tensor2D*> parameters();
  std::vector<const Tensor2D*> parameters() const;
  std::vector<Tensor2D*> gradients();
  std::vector<std::string> parameter_names() const;

  Tensor2D& token_table() { return token_table_; }
  const Tensor2D& token_table() const { return token_table_; }
  LayerStack& audio_stack() { return audio_stack_; }
  LayerStack& text_stack() { return text_stack_; }

 private:
  Tensor2D pool_tokens(const std::vector<TokenSequence>& sequences) const;
  std::vector<TokenSequence> tokenize_captions(
      const std::vector<std::string>& captions) const;

  ModelConfig config_;
  Tensor2D token_table_;       // vocab_buckets x token_embed_dim
  Tensor2D token_table_grad_;
  LayerStack audio_stack_;
  LayerStack text_stack_;
  Tensor2D log_tau_;           // 1x1
  Tensor2D log_tau_grad_;

  // caches for backward_text
  std::vector<TokenSequence> cached_sequences_;
};

}  // namespace reclap
