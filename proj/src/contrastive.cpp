#include "reclap/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace reclap {

namespace {

void require_unit_rows(const Tensor2D& emb, const std::string& which) {
  for (std::size_t r = 0; r < emb.rows; ++r) {
    if (std::abs(emb.row_norm(r) - 1.0) > 1e-6) {
      throw std::runtime_error("similarity_matrix: " + which + " row " +
                               std::to_string(r) +
                               " is not unit norm; embeddings must pass "
                               "through L2Normalize");
    }
  }
}

}  // namespace

SimilarityMatrix similarity_matrix(const Tensor2D& audio_emb,
                                   const Tensor2D& text_emb, double tau) {
  if (!audio_emb.same_shape(text_emb)) {
    throw std::runtime_error(
        "similarity_matrix: audio and text embedding shapes differ");
  }
  if (!(tau > 0.0)) {
    throw std::runtime_error("similarity_matrix: tau must be positive");
  }
  require_unit_rows(audio_emb, "audio");
  require_unit_rows(text_emb, "text");

  Tensor2D values = matmul_transpose_b(audio_emb, text_emb);
  for (auto& v : values.data) v *= tau;
  return SimilarityMatrix{std::move(values), tau, audio_emb.rows};
}

ContrastiveResult contrastive_loss(const SimilarityMatrix& sim) {
  const Tensor2D& C = sim.values;
  if (C.rows != C.cols || C.rows == 0) {
    throw std::runtime_error("contrastive_loss: similarity matrix must be "
                             "square and non-empty");
  }
  C.require_finite("similarity matrix");
  const std::size_t B = C.rows;

  ContrastiveResult result;
  result.grad = Tensor2D(B, B);
  const double w = 0.5 / static_cast<double>(B);

  // Per-row loss is log(sum_j exp(C[i][j] - max_i)) + (max_i - C[i][i]):
  // every term is a difference of entries, so a constant shift of C cancels
  // exactly rather than up to rounding.
  double text_total = 0.0;
  for (std::size_t i = 0; i < B; ++i) {
    double row_max = C.at(i, 0);
    for (std::size_t j = 1; j < B; ++j) row_max = std::max(row_max, C.at(i, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < B; ++j) denom += std::exp(C.at(i, j) - row_max);
    text_total += std::log(denom) + (row_max - C.at(i, i));
    for (std::size_t j = 0; j < B; ++j) {
      const double p = std::exp(C.at(i, j) - row_max) / denom;
      result.grad.at(i, j) += w * (p - (i == j ? 1.0 : 0.0));
    }
  }

  double audio_total = 0.0;
  for (std::size_t j = 0; j < B; ++j) {
    double col_max = C.at(0, j);
    for (std::size_t i = 1; i < B; ++i) col_max = std::max(col_max, C.at(i, j));
    double denom = 0.0;
    for (std::size_t i = 0; i < B; ++i) denom += std::exp(C.at(i, j) - col_max);
    audio_total += std::log(denom) + (col_max - C.at(j, j));
    for (std::size_t i = 0; i < B; ++i) {
      const double p = std::exp(C.at(i, j) - col_max) / denom;
      result.grad.at(i, j) += w * (p - (i == j ? 1.0 : 0.0));
    }
  }

  const double bd = static_cast<double>(B);
  result.loss = 0.5 * (text_total / bd + audio_total / bd);
  return result;
}

void AugmentationPolicy::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::runtime_error("AugmentationPolicy: p must lie in [0, 1]");
  }
}

const std::string& select_caption(const std::string& original,
                                  const std::vector<std::string>& rewrites,
                                  const AugmentationPolicy& policy, double u) {
  policy.validate();
  const std::size_t K = policy.rewrite_count;
  if (K == 0 || u < policy.p) {
    return original;
  }
  if (rewrites.size() < K) {
    throw std::runtime_error(
        "select_caption: sample has " + std::to_string(rewrites.size()) +
        " rewrites but the policy expects " + std::to_string(K));
  }
  const double scaled =
      (u - policy.p) * static_cast<double>(K) / (1.0 - policy.p);
  auto index = static_cast<std::size_t>(std::floor(scaled + 1e-12));
  index = std::min(index, K - 1);
  return rewrites[index];
}

}  // namespace reclap
