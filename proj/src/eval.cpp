#include "reclap/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>

#include "reclap/rng.hpp"
#include "reclap/trainer.hpp"

namespace reclap {

std::vector<std::string> sample_prompts(const LabelSpec& spec,
                                        std::size_t n_prompts,
                                        std::uint64_t seed) {
  if (n_prompts == 0) {
    throw std::invalid_argument("sample_prompts: n_prompts must be positive");
  }
  if (n_prompts > spec.prompts.size()) {
    throw std::invalid_argument(
        "sample_prompts: requested " + std::to_string(n_prompts) +
        " prompts for label \"" + spec.label + "\" but the pool has only " +
        std::to_string(spec.prompts.size()));
  }
  Rng rng(seed);
  std::vector<std::size_t> picks =
      rng.sample_without_replacement(spec.prompts.size(), n_prompts);
  std::vector<std::string> prompts;
  prompts.reserve(picks.size());
  for (std::size_t index : picks) {
    prompts.push_back(spec.prompts[index].text);
  }
  return prompts;
}

Tensor2D pool_embeddings(const Tensor2D& prompt_embeddings,
                         const std::string& label) {
  if (prompt_embeddings.rows == 0 || prompt_embeddings.cols == 0) {
    throw std::invalid_argument("pool_embeddings: label \"" + label +
                                "\" has no embeddings to pool");
  }
  const std::size_t dim = prompt_embeddings.cols;
  Tensor2D mean(1, dim);
  for (std::size_t p = 0; p < prompt_embeddings.rows; ++p) {
    for (std::size_t d = 0; d < dim; ++d) {
      mean.at(0, d) += prompt_embeddings.at(p, d);
    }
  }
  double norm = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    mean.at(0, d) /= static_cast<double>(prompt_embeddings.rows);
    norm += mean.at(0, d) * mean.at(0, d);
  }
  norm = std::sqrt(norm);
  if (norm < 1e-12) {
    throw std::runtime_error(
        "pool_embeddings: prompts for label \"" + label +
        "\" pool to a near-zero vector (antipodal embeddings); cannot "
        "re-normalize");
  }
  for (std::size_t d = 0; d < dim; ++d) {
    mean.at(0, d) /= norm;
  }
  return mean;
}

LabelEmbedding pool_label_embedding(const DualEncoder& model,
                                    const std::string& label,
                                    const std::vector<std::string>& prompts) {
  if (prompts.empty()) {
    throw std::invalid_argument("pool_label_embedding: label \"" + label +
                                "\" has no prompts to pool");
  }
  LabelEmbedding out;
  out.label = label;
  out.prompts = prompts;
  out.prompt_embeddings = model.encode_text(prompts);
  out.pooled = pool_embeddings(out.prompt_embeddings, label);
  return out;
}

std::vector<LabelEmbedding> label_embeddings_from_specs(
    const DualEncoder& model, const std::vector<LabelSpec>& specs,
    std::size_t n_prompts, std::uint64_t seed) {
  std::vector<LabelEmbedding> labels;
  labels.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    std::vector<std::string> prompts =
        sample_prompts(specs[i], n_prompts, seed + i);
    labels.push_back(pool_label_embedding(model, specs[i].label, prompts));
  }
  return labels;
}

std::vector<LabelEmbedding> single_template_embeddings(
    const DualEncoder& model, const std::vector<std::string>& labels) {
  std::vector<LabelEmbedding> out;
  out.reserve(labels.size());
  for (const std::string& label : labels) {
    out.push_back(pool_label_embedding(
        model, label, {"The sound of a " + label + "."}));
  }
  return out;
}

std::vector<ScoredLabel> classify(const Tensor2D& audio_embedding,
                                  const std::vector<LabelEmbedding>& labels) {
  if (labels.empty()) {
    throw std::invalid_argument("classify: no labels to score against");
  }
  if (audio_embedding.rows != 1 ||
      audio_embedding.cols != labels.front().pooled.cols) {
    throw std::invalid_argument(
        "classify: audio embedding must be a single row matching the label "
        "embedding width");
  }
  std::vector<ScoredLabel> scored(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double dot = 0.0;
    for (std::size_t d = 0; d < audio_embedding.cols; ++d) {
      dot += audio_embedding.at(0, d) * labels[i].pooled.at(0, d);
    }
    scored[i] = ScoredLabel{i, dot};
  }
  std::sort(scored.begin(), scored.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.index < b.index;
            });
  return scored;
}

double accuracy_against_labels(const DualEncoder& model,
                               const Tensor2D& features,
                               const std::vector<std::int64_t>& truth,
                               const std::vector<LabelEmbedding>& labels) {
  if (features.rows != truth.size()) {
    throw std::invalid_argument(
        "eval: feature rows and ground-truth labels disagree in count");
  }
  if (features.rows == 0) {
    throw std::invalid_argument("eval: empty evaluation set");
  }
  for (std::int64_t index : truth) {
    if (index < 0 || static_cast<std::size_t>(index) >= labels.size()) {
      throw std::invalid_argument(
          "eval: ground-truth label index " + std::to_string(index) +
          " is outside the " + std::to_string(labels.size()) + "-label set");
    }
  }
  Tensor2D embedded = model.encode_audio(features);
  std::size_t correct = 0;
  Tensor2D row(1, embedded.cols);
  for (std::size_t i = 0; i < embedded.rows; ++i) {
    for (std::size_t d = 0; d < embedded.cols; ++d) {
      row.at(0, d) = embedded.at(i, d);
    }
    std::vector<ScoredLabel> ranked = classify(row, labels);
    if (ranked.front().index == static_cast<std::size_t>(truth[i])) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(features.rows);
}

double eval_multiclass(const DualEncoder& model, const Tensor2D& features,
                       const std::vector<std::int64_t>& truth,
                       const std::vector<LabelSpec>& specs,
                       std::size_t n_prompts, std::uint64_t seed) {
  std::vector<LabelEmbedding> labels =
      label_embeddings_from_specs(model, specs, n_prompts, seed);
  return accuracy_against_labels(model, features, truth, labels);
}

MapResult eval_multilabel_map(
    const Tensor2D& scores, const std::vector<std::vector<int>>& relevance) {
  if (scores.rows == 0 || scores.cols == 0) {
    throw std::invalid_argument("eval_multilabel_map: empty score matrix");
  }
  if (relevance.size() != scores.rows) {
    throw std::invalid_argument(
        "eval_multilabel_map: relevance rows and score rows disagree");
  }
  for (const std::vector<int>& row : relevance) {
    if (row.size() != scores.cols) {
      throw std::invalid_argument(
          "eval_multilabel_map: relevance width and score width disagree");
    }
  }

  MapResult result;
  std::vector<std::size_t> order(scores.rows);
  for (std::size_t label = 0; label < scores.cols; ++label) {
    std::size_t positives = 0;
    for (std::size_t item = 0; item < scores.rows; ++item) {
      positives += relevance[item][label] != 0 ? 1 : 0;
    }
    if (positives == 0) {
      result.warnings.push_back(
          "label " + std::to_string(label) +
          " has no positive items and is excluded from mAP");
      continue;
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) {
                if (scores.at(a, label) != scores.at(b, label)) {
                  return scores.at(a, label) > scores.at(b, label);
                }
                return a < b;
              });
    double precision_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      if (relevance[order[rank]][label] != 0) {
        ++hits;
        precision_sum += static_cast<double>(hits) /
                         static_cast<double>(rank + 1);
      }
    }
    result.per_label_ap.push_back(precision_sum /
                                  static_cast<double>(positives));
    result.evaluated.push_back(label);
  }
  if (result.evaluated.empty()) {
    throw std::runtime_error(
        "eval_multilabel_map: every label has zero positives; mAP is "
        "undefined");
  }
  result.map = std::accumulate(result.per_label_ap.begin(),
                               result.per_label_ap.end(), 0.0) /
               static_cast<double>(result.per_label_ap.size());
  return result;
}

RetrievalReport eval_retrieval(const Tensor2D& cosines,
                               const std::vector<std::size_t>& ks) {
  if (cosines.rows != cosines.cols || cosines.rows == 0) {
    throw std::invalid_argument(
        "eval_retrieval: cosine matrix must be square and non-empty");
  }
  if (ks.empty()) {
    throw std::invalid_argument("eval_retrieval: no k values requested");
  }
  const std::size_t size = cosines.rows;
  for (std::size_t k : ks) {
    if (k == 0 || k > size) {
      throw std::invalid_argument(
          "eval_retrieval: k=" + std::to_string(k) +
          " is outside the valid range 1.." + std::to_string(size));
    }
  }

  // Rank of the diagonal entry within its row (audio-to-text) or column
  // (text-to-audio): one plus the number of strictly better entries, plus
  // equal entries at a smaller index.
  std::vector<std::size_t> row_rank(size), col_rank(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double truth = cosines.at(i, i);
    std::size_t rank = 1;
    for (std::size_t j = 0; j < size; ++j) {
      if (cosines.at(i, j) > truth || (cosines.at(i, j) == truth && j < i)) {
        ++rank;
      }
    }
    row_rank[i] = rank;
    rank = 1;
    for (std::size_t j = 0; j < size; ++j) {
      if (cosines.at(j, i) > truth || (cosines.at(j, i) == truth && j < i)) {
        ++rank;
      }
    }
    col_rank[i] = rank;
  }

  RetrievalReport report;
  report.ks = ks;
  for (std::size_t k : ks) {
    std::size_t row_hits = 0;
    std::size_t col_hits = 0;
    for (std::size_t i = 0; i < size; ++i) {
      row_hits += row_rank[i] <= k ? 1 : 0;
      col_hits += col_rank[i] <= k ? 1 : 0;
    }
    report.audio_to_text.push_back(static_cast<double>(row_hits) /
                                   static_cast<double>(size));
    report.text_to_audio.push_back(static_cast<double>(col_hits) /
                                   static_cast<double>(size));
  }
  return report;
}

Tensor2D cosine_matrix(const DualEncoder& model,
                       const std::vector<SampleRecord>& records,
                       const std::string& base_dir) {
  if (records.empty()) {
    throw std::invalid_argument("cosine_matrix: empty manifest");
  }
  Tensor2D features = feature_matrix(records, base_dir,
                                     model.config().feature_dim);
  std::vector<std::string> captions;
  captions.reserve(records.size());
  for (const SampleRecord& record : records) {
    captions.push_back(record.caption);
  }
  Tensor2D audio = model.encode_audio(features);
  Tensor2D text = model.encode_text(captions);
  return matmul_transpose_b(audio, text);
}

void write_metrics_csv(const std::vector<MetricRow>& rows,
                       const std::string& path) {
  std::string csv = "condition,metric,value\n";
  for (const MetricRow& row : rows) {
    csv += row.condition + "," + row.metric + "," +
           format_double(row.value) + "\n";
  }
  write_file_locked(path, csv);
}

}  // namespace reclap
