#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reclap/adam.hpp"
#include "reclap/contrastive.hpp"
#include "reclap/data.hpp"
#include "reclap/model.hpp"
#include "reclap/rng.hpp"
#include "reclap/tensor.hpp"

namespace reclap {

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  double learning_rate = 5e-4;
  std::uint64_t seed = 0;
  AugmentationPolicy policy;
  // Directory for periodic checkpoints; empty writes none. A final
  // checkpoint is always written when the directory is set.
  std::string checkpoint_dir;
  std::size_t checkpoint_every_epochs = 0;  // 0 = final checkpoint only

  void validate() const;
};

struct LossPoint {
  std::size_t step = 0;   // 1-based, global across epochs
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;
  double tau = 0.0;  // temperature used for this step's loss
};

struct TrainResult {
  std::vector<LossPoint> history;
  double final_loss = 0.0;
};

// One batch ready for a step: feature rows plus the records whose captions
// (original or rewrite, drawn per step) pair with them.
struct Batch {
  Tensor2D features;
  std::vector<const SampleRecord*> records;
};

// One optimization step: draws a caption per sample, encodes both
// modalities, backpropagates the contrastive loss through both encoders and
// the log-temperature, applies Adam, clamps tau. Returns the pre-step loss.
double train_step(DualEncoder& model, const Batch& batch,
                  const AugmentationPolicy& policy, Rng& rng,
                  AdamState& adam);

// Full loop: per-epoch seeded shuffle, fixed-size batches with the trailing
// remainder kept when it has at least 2 samples (size-1 batches carry no
// contrastive signal and are skipped).
TrainResult train(DualEncoder& model, const std::vector<SampleRecord>& records,
                  const std::string& base_dir, const TrainConfig& config);

// Loss history as CSV (step,epoch,loss,tau), floats in round-trip precision.
void write_loss_csv(const std::vector<LossPoint>& history,
                    const std::string& path);

// %.17g rendering used for every float that lands in a CSV; callers rely on
// byte-identical output across runs.
std::string format_double(double value);

}  // namespace reclap
