#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "reclap/tensor.hpp"

namespace reclap {

// tau-scaled cosine similarities between a batch of audio embeddings and the
// captions paired with them, row i = audio i, column j = caption j.
struct SimilarityMatrix {
  Tensor2D values;  // B x B
  double tau = 1.0;
  std::size_t batch = 0;
};

// C = tau * (A . T^T). Both inputs must be B x D with unit-norm rows; a row
// whose norm deviates from 1 by more than 1e-6 is rejected because the
// entries would no longer be cosines.
SimilarityMatrix similarity_matrix(const Tensor2D& audio_emb,
                                   const Tensor2D& text_emb, double tau);

struct ContrastiveResult {
  double loss = 0.0;
  Tensor2D grad;  // dLoss/dC, B x B
};

// Symmetric contrastive objective: mean cross-entropy of the diagonal under
// row softmax (texts per audio) and under column softmax (audios per text),
// averaged. Numerically organized so that adding any exactly-representable
// constant to C leaves the result bit-identical.
ContrastiveResult contrastive_loss(const SimilarityMatrix& sim);

// Caption augmentation: keep the original caption with probability p, else
// pick one of the rewrite_count rewrites uniformly.
struct AugmentationPolicy {
  double p = 0.4;
  std::size_t rewrite_count = 4;

  void validate() const;
};

// Maps one uniform draw u in [0,1) to a caption. u < p selects the original;
// the remainder of the interval is split into rewrite_count equal slots.
// The slot index is floor((u - p) * K / (1 - p)) with a 1e-12 nudge so that
// real-valued slot boundaries land in the upper slot despite rounding, then
// clamped to K - 1.
const std::string& select_caption(const std::string& original,
                                  const std::vector<std::string>& rewrites,
                                  const AugmentationPolicy& policy, double u);

}  // namespace reclap
