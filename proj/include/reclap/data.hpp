#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reclap/tensor.hpp"

namespace reclap {

// One training pair: audio features (inline, or a relative path to a raw
// little-endian 32-bit float file) and its caption plus K rewrites. Fields
// this code does not know about ride along in `extra` and survive a
// save/load round trip.
struct SampleRecord {
  std::string id;
  std::vector<float> features;
  std::string features_path;
  std::string caption;
  std::vector<std::string> rewrites;
  nlohmann::json extra = nlohmann::json::object();

  bool inline_features() const { return features_path.empty(); }
};

// Line-delimited manifest: one record per line, schema
// {id, features | features_path, caption, rewrites[]}. Loading reports
// schema violations with their line numbers and rejects duplicate ids.
std::vector<SampleRecord> load_manifest(const std::string& path);
void save_manifest(const std::vector<SampleRecord>& records,
                   const std::string& path);

// Raw little-endian 32-bit float files used for bulky features.
std::vector<float> read_feature_file(const std::string& path);
void write_feature_file(const std::string& path,
                        const std::vector<float>& values);

// Inline or file-backed features for one record, validated against the
// model's feature width; errors name the offending record id.
std::vector<float> sample_features(const SampleRecord& record,
                                   const std::string& base_dir,
                                   std::size_t feature_dim);
Tensor2D feature_matrix(const std::vector<SampleRecord>& records,
                        const std::string& base_dir, std::size_t feature_dim);

// One generated scene prompt and the description it was derived from.
struct PromptEntry {
  std::string text;
  std::size_t description_index = 0;
};

// A label with its t acoustic-property descriptions and the n-per-
// description prompt pool built from them.
struct LabelSpec {
  std::string label;
  std::vector<std::string> descriptions;
  std::vector<PromptEntry> prompts;

  void validate() const;
};

// Line-delimited label specs, schema
// {label, descriptions[], prompts[{text, description_index}]}.
std::vector<LabelSpec> load_label_specs(const std::string& path);
void save_label_specs(const std::vector<LabelSpec>& specs,
                      const std::string& path);

// Evaluation item: features plus either a class index (multi-class) or a
// 0/1 relevance row over the label set (multi-label).
struct EvalRecord {
  std::string id;
  std::vector<float> features;
  std::string features_path;
  std::int64_t label_index = -1;
  std::vector<int> relevance;

  bool multilabel() const { return !relevance.empty(); }
};

std::vector<EvalRecord> load_eval_set(const std::string& path);
void save_eval_set(const std::vector<EvalRecord>& records,
                   const std::string& path);
Tensor2D eval_feature_matrix(const std::vector<EvalRecord>& records,
                             const std::string& base_dir,
                             std::size_t feature_dim);

// Writes the whole buffer under an exclusive advisory lock (concurrent
// readers see either the old or the new content, never a torn write).
void write_file_locked(const std::string& path, const std::string& bytes);

// Lowercase with whitespace runs collapsed to single spaces; the
// normalization behind every distinctness check on generated text.
std::string normalize_text(const std::string& text);

}  // namespace reclap
