#include "reclap/trainer.hpp"

#include <cstdio>
#include <filesystem>
#include <numeric>
#include <stdexcept>

#include "reclap/checkpoint.hpp"

namespace reclap {

void TrainConfig::validate() const {
  if (batch_size < 1) {
    throw std::runtime_error("TrainConfig: batch_size must be >= 1");
  }
  if (epochs < 1) {
    throw std::runtime_error("TrainConfig: epochs must be >= 1");
  }
  if (!(learning_rate > 0.0)) {
    throw std::runtime_error("TrainConfig: learning_rate must be positive");
  }
  policy.validate();
}

double train_step(DualEncoder& model, const Batch& batch,
                  const AugmentationPolicy& policy, Rng& rng,
                  AdamState& adam) {
  if (batch.records.size() != batch.features.rows) {
    throw std::runtime_error("train_step: batch records and feature rows "
                             "disagree");
  }

  std::vector<std::string> captions;
  captions.reserve(batch.records.size());
  for (const SampleRecord* record : batch.records) {
    captions.push_back(select_caption(record->caption, record->rewrites,
                                      policy, rng.uniform()));
  }

  model.zero_grads();
  const Tensor2D audio = model.forward_audio(batch.features);
  const Tensor2D text = model.forward_text(captions);
  const SimilarityMatrix sim = similarity_matrix(audio, text, model.tau());
  const ContrastiveResult result = contrastive_loss(sim);

  // C = tau * A T^T, so dA = tau * G T, dT = tau * G^T A, and the
  // log-temperature gradient is sum(G . C) since dC/dlog_tau = C.
  Tensor2D grad_audio = matmul(result.grad, text);
  Tensor2D grad_text = matmul_transpose_a(result.grad, audio);
  for (auto& v : grad_audio.data) v *= sim.tau;
  for (auto& v : grad_text.data) v *= sim.tau;
  double log_tau_grad = 0.0;
  for (std::size_t i = 0; i < result.grad.data.size(); ++i) {
    log_tau_grad += result.grad.data[i] * sim.values.data[i];
  }

  model.backward_audio(grad_audio);
  model.backward_text(grad_text);
  model.add_log_tau_grad(log_tau_grad);

  adam_step(adam, model.parameters(), model.gradients());
  model.clamp_temperature();
  return result.loss;
}

TrainResult train(DualEncoder& model, const std::vector<SampleRecord>& records,
                  const std::string& base_dir, const TrainConfig& config) {
  config.validate();
  if (records.empty()) {
    throw std::runtime_error("train: empty dataset");
  }

  const Tensor2D all_features =
      feature_matrix(records, base_dir, model.config().feature_dim);
  AdamState adam =
      AdamState::for_params(model.parameters(), config.learning_rate);
  Rng rng(config.seed);

  const auto checkpoint_path = [&](const std::string& name) {
    return (std::filesystem::path(config.checkpoint_dir) / name).string();
  };

  TrainResult result;
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);

  std::size_t step = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t size =
          std::min(config.batch_size, order.size() - start);
      if (size < 2) continue;  // no contrastive signal in a single pair

      Batch batch;
      batch.features = Tensor2D(size, all_features.cols);
      batch.records.reserve(size);
      for (std::size_t b = 0; b < size; ++b) {
        const std::size_t row = order[start + b];
        batch.records.push_back(&records[row]);
        for (std::size_t c = 0; c < all_features.cols; ++c) {
          batch.features.at(b, c) = all_features.at(row, c);
        }
      }

      const double tau_used = model.tau();
      const double loss = train_step(model, batch, config.policy, rng, adam);
      ++step;
      result.history.push_back(LossPoint{step, epoch, loss, tau_used});
    }

    if (!config.checkpoint_dir.empty() && config.checkpoint_every_epochs > 0 &&
        epoch % config.checkpoint_every_epochs == 0) {
      save_checkpoint(model, adam,
                      checkpoint_path("checkpoint_epoch_" +
                                      std::to_string(epoch) + ".rclp"));
    }
  }

  if (result.history.empty()) {
    throw std::runtime_error(
        "train: no trainable batches (every batch had fewer than 2 samples)");
  }
  result.final_loss = result.history.back().loss;

  if (!config.checkpoint_dir.empty()) {
    save_checkpoint(model, adam, checkpoint_path("checkpoint_final.rclp"));
  }
  return result;
}

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_loss_csv(const std::vector<LossPoint>& history,
                    const std::string& path) {
  std::string out = "step,epoch,loss,tau\n";
  for (const LossPoint& point : history) {
    out += std::to_string(point.step);
    out.push_back(',');
    out += std::to_string(point.epoch);
    out.push_back(',');
    out += format_double(point.loss);
    out.push_back(',');
    out += format_double(point.tau);
    out.push_back('\n');
  }
  write_file_locked(path, out);
}

}  // namespace reclap
