#include "reclap/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "reclap/rng.hpp"

namespace reclap {

void ModelConfig::validate() const {
  if (feature_dim < 1 || vocab_buckets < 1 || token_embed_dim < 1 ||
      hidden_dim < 1 || embed_dim < 1) {
    throw std::runtime_error("ModelConfig: all dimensions must be >= 1");
  }
  if (!(temperature_init > 0.0) || temperature_init > temperature_max) {
    throw std::runtime_error(
        "ModelConfig: temperature_init must lie in (0, temperature_max]");
  }
}

nlohmann::json ModelConfig::to_json() const {
  return nlohmann::json{{"feature_dim", feature_dim},
                        {"vocab_buckets", vocab_buckets},
                        {"token_embed_dim", token_embed_dim},
                        {"hidden_dim", hidden_dim},
                        {"embed_dim", embed_dim},
                        {"temperature_init", temperature_init},
                        {"temperature_max", temperature_max},
                        {"seed", seed}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& doc) {
  ModelConfig config;
  config.feature_dim = doc.at("feature_dim").get<std::size_t>();
  config.vocab_buckets = doc.at("vocab_buckets").get<std::size_t>();
  config.token_embed_dim = doc.at("token_embed_dim").get<std::size_t>();
  config.hidden_dim = doc.at("hidden_dim").get<std::size_t>();
  config.embed_dim = doc.at("embed_dim").get<std::size_t>();
  config.temperature_init = doc.at("temperature_init").get<double>();
  config.temperature_max = doc.at("temperature_max").get<double>();
  config.seed = doc.at("seed").get<std::uint64_t>();
  config.validate();
  return config;
}

DualEncoder::DualEncoder(const ModelConfig& config) : config_(config) {
  config_.validate();
  Rng rng(config_.seed);

  audio_stack_.layers.emplace_back(
      make_dense(config_.feature_dim, config_.hidden_dim, rng));
  audio_stack_.layers.emplace_back(ReluLayer{});
  audio_stack_.layers.emplace_back(
      make_dense(config_.hidden_dim, config_.embed_dim, rng));
  audio_stack_.layers.emplace_back(L2NormalizeLayer{});

  token_table_ = Tensor2D(config_.vocab_buckets, config_.token_embed_dim);
  for (auto& v : token_table_.data) v = rng.normal(0.0, 0.02);
  token_table_grad_ = Tensor2D(config_.vocab_buckets, config_.token_embed_dim);

  text_stack_.layers.emplace_back(
      make_dense(config_.token_embed_dim, config_.hidden_dim, rng));
  text_stack_.layers.emplace_back(ReluLayer{});
  text_stack_.layers.emplace_back(
      make_dense(config_.hidden_dim, config_.embed_dim, rng));
  text_stack_.layers.emplace_back(L2NormalizeLayer{});

  log_tau_ = Tensor2D(1, 1, {std::log(config_.temperature_init)});
  log_tau_grad_ = Tensor2D(1, 1);
}

double DualEncoder::tau() const {
  const double t = std::exp(log_tau_.at(0, 0));
  return std::min(t, config_.temperature_max);
}

void DualEncoder::clamp_temperature() {
  const double cap = std::log(config_.temperature_max);
  if (log_tau_.at(0, 0) > cap) log_tau_.at(0, 0) = cap;
}

std::vector<TokenSequence> DualEncoder::tokenize_captions(
    const std::vector<std::string>& captions) const {
  std::vector<TokenSequence> sequences;
  sequences.reserve(captions.size());
  for (const auto& caption : captions) {
    TokenSequence tokens = tokenize(caption, config_.vocab_buckets);
    if (tokens.empty()) {
      throw std::runtime_error("encode_text: caption \"" + caption +
                               "\" has no alphanumeric tokens");
    }
    sequences.push_back(std::move(tokens));
  }
  return sequences;
}

Tensor2D DualEncoder::pool_tokens(
    const std::vector<TokenSequence>& sequences) const {
  Tensor2D pooled(sequences.size(), config_.token_embed_dim);
  for (std::size_t r = 0; r < sequences.size(); ++r) {
    // Accumulate in sorted-id order so permutations of a caption pool to
    // bit-identical rows, not merely mathematically equal ones.
    TokenSequence tokens = sequences[r];
    std::sort(tokens.begin(), tokens.end());
    const double inv = 1.0 / static_cast<double>(tokens.size());
    for (const std::uint32_t tok : tokens) {
      for (std::size_t c = 0; c < config_.token_embed_dim; ++c) {
        pooled.at(r, c) += token_table_.at(tok, c);
      }
    }
    for (std::size_t c = 0; c < config_.token_embed_dim; ++c) {
      pooled.at(r, c) *= inv;
    }
  }
  return pooled;
}

Tensor2D DualEncoder::encode_audio(const Tensor2D& features) const {
  if (features.cols != config_.feature_dim) {
    throw std::runtime_error("encode_audio: feature width " +
                             std::to_string(features.cols) +
                             " does not match feature_dim " +
                             std::to_string(config_.feature_dim));
  }
  return audio_stack_.infer(features);
}

Tensor2D DualEncoder::encode_text(
    const std::vector<std::string>& captions) const {
  const auto sequences = tokenize_captions(captions);
  return text_stack_.infer(pool_tokens(sequences));
}

Tensor2D DualEncoder::forward_audio(const Tensor2D& features) {
  if (features.cols != config_.feature_dim) {
    throw std::runtime_error("forward_audio: feature width mismatch");
  }
  return audio_stack_.forward(features);
}

Tensor2D DualEncoder::forward_text(const std::vector<std::string>& captions) {
  cached_sequences_ = tokenize_captions(captions);
  return text_stack_.forward(pool_tokens(cached_sequences_));
}

void DualEncoder::backward_audio(const Tensor2D& grad) {
  audio_stack_.backward(grad);
}

void DualEncoder::backward_text(const Tensor2D& grad) {
  const Tensor2D pooled_grad = text_stack_.backward(grad);
  if (pooled_grad.rows != cached_sequences_.size()) {
    throw std::runtime_error("backward_text: no matching forward_text pass");
  }
  for (std::size_t r = 0; r < cached_sequences_.size(); ++r) {
    const auto& tokens = cached_sequences_[r];
    const double inv = 1.0 / static_cast<double>(tokens.size());
    for (const std::uint32_t tok : tokens) {
      for (std::size_t c = 0; c < config_.token_embed_dim; ++c) {
        token_table_grad_.at(tok, c) += pooled_grad.at(r, c) * inv;
      }
    }
  }
}

void DualEncoder::zero_grads() {
  audio_stack_.zero_grads();
  text_stack_.zero_grads();
  token_table_grad_.zero();
  log_tau_grad_.zero();
}

std::vector<Tensor2D*> DualEncoder::parameters() {
  std::vector<Tensor2D*> params = audio_stack_.parameters();
  params.push_back(&token_table_);
  for (Tensor2D* p : text_stack_.parameters()) params.push_back(p);
  params.push_back(&log_tau_);
  return params;
}

std::vector<const Tensor2D*> DualEncoder::parameters() const {
  std::vector<const Tensor2D*> params = audio_stack_.parameters();
  params.push_back(&token_table_);
  for (const Tensor2D* p : text_stack_.parameters()) params.push_back(p);
  params.push_back(&log_tau_);
  return params;
}

std::vector<Tensor2D*> DualEncoder::gradients() {
  std::vector<Tensor2D*> grads = audio_stack_.gradients();
  grads.push_back(&token_table_grad_);
  for (Tensor2D* g : text_stack_.gradients()) grads.push_back(g);
  grads.push_back(&log_tau_grad_);
  return grads;
}

std::vector<std::string> DualEncoder::parameter_names() const {
  return {"audio.dense0.weight", "audio.dense0.bias", "audio.dense1.weight",
          "audio.dense1.bias",   "token_table",       "text.dense0.weight",
          "text.dense0.bias",    "text.dense1.weight", "text.dense1.bias",
          "log_tau"};
}

}  // namespace reclap
