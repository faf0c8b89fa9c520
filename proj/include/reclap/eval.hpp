#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reclap/data.hpp"
#include "reclap/model.hpp"
#include "reclap/tensor.hpp"

namespace reclap {

// One label's scoring vector: the re-normalized mean of its sampled prompt
// embeddings. Per-prompt embeddings are kept for diagnostics.
struct LabelEmbedding {
  std::string label;
  Tensor2D pooled;             // 1 x D, unit norm
  std::vector<std::string> prompts;
  Tensor2D prompt_embeddings;  // N_p x D
};

// Uniform sample of n_prompts distinct prompts from the spec's pool, in
// draw order. Requesting more prompts than the pool holds is an error, not
// a clamp.
std::vector<std::string> sample_prompts(const LabelSpec& spec,
                                        std::size_t n_prompts,
                                        std::uint64_t seed);

// Mean the rows and re-normalize. Throws when the mean collapses toward
// zero (antipodal rows), since the direction would be noise.
Tensor2D pool_embeddings(const Tensor2D& prompt_embeddings,
                         const std::string& label);

// Encode each prompt, mean the embeddings, re-normalize. Every scoring path
// (pooled, single-prompt, template baseline) routes through here, so the
// N_p = 1 case and a repeated-prompt pool produce bit-identical vectors.
LabelEmbedding pool_label_embedding(const DualEncoder& model,
                                    const std::string& label,
                                    const std::vector<std::string>& prompts);

// Label embeddings for a spec list: prompts sampled once per label for the
// whole evaluation run, seeded per label.
std::vector<LabelEmbedding> label_embeddings_from_specs(
    const DualEncoder& model, const std::vector<LabelSpec>& specs,
    std::size_t n_prompts, std::uint64_t seed);

// Baseline condition: one hand-written template per label, no generated
// prompts involved.
std::vector<LabelEmbedding> single_template_embeddings(
    const DualEncoder& model, const std::vector<std::string>& labels);

struct ScoredLabel {
  std::size_t index = 0;
  double score = 0.0;
};

// Cosine scores of one unit-norm audio embedding against every label,
// ranked descending; exact ties broken by ascending label index.
std::vector<ScoredLabel> classify(const Tensor2D& audio_embedding,
                                  const std::vector<LabelEmbedding>& labels);

// Top-1 accuracy of prompt-pooled classification over raw feature rows.
double eval_multiclass(const DualEncoder& model, const Tensor2D& features,
                       const std::vector<std::int64_t>& truth,
                       const std::vector<LabelSpec>& specs,
                       std::size_t n_prompts, std::uint64_t seed);

// Same, but against precomputed label embeddings (template baseline or
// diagnostics).
double accuracy_against_labels(const DualEncoder& model,
                               const Tensor2D& features,
                               const std::vector<std::int64_t>& truth,
                               const std::vector<LabelEmbedding>& labels);

struct MapResult {
  double map = 0.0;
  std::vector<double> per_label_ap;         // one entry per evaluated label
  std::vector<std::size_t> evaluated;       // label indices included in mAP
  std::vector<std::string> warnings;        // zero-positive labels
};

// Macro mAP: per label, items ranked by descending score (ties by ascending
// item index); AP is the mean of precision at each positive's rank. Labels
// without positives are excluded with a warning.
MapResult eval_multilabel_map(const Tensor2D& scores,
                              const std::vector<std::vector<int>>& relevance);

struct RetrievalReport {
  std::vector<std::size_t> ks;
  std::vector<double> audio_to_text;
  std::vector<double> text_to_audio;
};

// R@k over a square cosine matrix whose diagonal is the ground truth.
// audio-to-text ranks within rows, text-to-audio within columns; ties by
// ascending index.
RetrievalReport eval_retrieval(const Tensor2D& cosines,
                               const std::vector<std::size_t>& ks);

// Unscaled audio x text cosine matrix for a manifest (original captions).
Tensor2D cosine_matrix(const DualEncoder& model,
                       const std::vector<SampleRecord>& records,
                       const std::string& base_dir);

struct MetricRow {
  std::string condition;
  std::string metric;
  double value = 0.0;
};

// condition,metric,value CSV with round-trip float formatting.
void write_metrics_csv(const std::vector<MetricRow>& rows,
                       const std::string& path);

}  // namespace reclap
