#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "reclap/data.hpp"

namespace reclap {

// Synthetic separable dataset: each class is a Gaussian cluster on the unit
// sphere, each training caption describes the class through two tokens of a
// per-class training lexicon, and each rewrite describes it through a
// held-out paraphrase lexicon. Prompt pools come in two flavors: one built
// from the training lexicon and one built only from the paraphrase lexicon,
// so generalization to never-trained-directly vocabulary is measurable.
struct ToySpec {
  std::size_t n_classes = 8;
  std::size_t samples_per_class = 40;
  std::size_t eval_per_class = 10;
  std::size_t feature_dim = 64;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;

  std::vector<std::string> labels;
  // Four descriptor tokens per class; paraphrase tokens are held out of all
  // original training captions and appear only in rewrites.
  std::vector<std::array<std::string, 4>> train_lexicons;
  std::vector<std::array<std::string, 4>> paraphrase_lexicons;

  ToySpec();
  void validate() const;
};

struct ToyDataset {
  std::vector<std::string> labels;
  std::vector<SampleRecord> train;
  std::vector<EvalRecord> eval;
  // Per-class cluster centers (unit rows), kept for diagnostics.
  Tensor2D centers;
  // Prompt pools over the training lexicon (in-vocabulary condition) and
  // over the held-out paraphrase lexicon (generalization condition).
  std::vector<LabelSpec> train_lexicon_specs;
  std::vector<LabelSpec> paraphrase_specs;
};

ToyDataset generate_toy_dataset(const ToySpec& spec);

}  // namespace reclap
