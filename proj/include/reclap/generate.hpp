#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "reclap/data.hpp"
#include "reclap/llm_client.hpp"
#include "reclap/rng.hpp"

namespace reclap {

// Exemplar (original, rewrite) pairs; each rewrite request embeds
// sample_size of them, drawn without replacement.
struct InContextBank {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::size_t sample_size = 5;

  void validate() const;
  std::vector<std::pair<std::string, std::string>> sample(Rng& rng) const;

  // The built-in 50-pair fixture used when no bank file is given.
  static InContextBank builtin();
};

// Line-delimited bank file, schema {original, rewrite}.
InContextBank load_bank(const std::string& path);
void save_bank(const InContextBank& bank, const std::string& path);

// The three generation surfaces the pipelines need. Implementations must
// return distinct strings (after normalize_text) that survive the
// tokenizer's non-empty contract.
class CaptionGenerator {
 public:
  virtual ~CaptionGenerator() = default;

  // K rewrites of one caption, each preserving at least one of its content
  // tokens.
  virtual std::vector<std::string> rewrite_captions(
      const std::string& caption, std::size_t k) = 0;

  // t short phrases describing the label's acoustic character.
  virtual std::vector<std::string> describe_label(const std::string& label,
                                                  std::size_t t) = 0;

  // n scene captions, each containing the description verbatim or all of
  // its content tokens.
  virtual std::vector<std::string> scene_prompts(
      const std::string& label, const std::string& description,
      std::size_t n) = 0;
};

// Deterministic templates: a pure function of its inputs, so offline runs
// and golden files are byte-stable.
class FallbackGenerator : public CaptionGenerator {
 public:
  std::vector<std::string> rewrite_captions(const std::string& caption,
                                            std::size_t k) override;
  std::vector<std::string> describe_label(const std::string& label,
                                          std::size_t t) override;
  std::vector<std::string> scene_prompts(const std::string& label,
                                         const std::string& description,
                                         std::size_t n) override;
};

// Endpoint-backed generator: numbered-list responses are parsed, validated
// token-wise, and regenerated within a bounded budget (2x the requested
// count in endpoint calls) before giving up.
class LlmGenerator : public CaptionGenerator {
 public:
  LlmGenerator(LlmClient& client, InContextBank bank, std::uint64_t seed);

  std::vector<std::string> rewrite_captions(const std::string& caption,
                                            std::size_t k) override;
  std::vector<std::string> describe_label(const std::string& label,
                                          std::size_t t) override;
  std::vector<std::string> scene_prompts(const std::string& label,
                                         const std::string& description,
                                         std::size_t n) override;

 private:
  LlmClient& client_;
  InContextBank bank_;
  Rng rng_;
};

// Splits a numbered- or bulleted-list response into items with their
// markers stripped. A non-empty line without a marker makes the whole
// response unparseable (throws), never a silent truncation.
std::vector<std::string> parse_numbered_list(const std::string& text);

// describe_label + scene_prompts per description, deduplicated into an
// n x t pool; each prompt keeps the index of the description it came from.
LabelSpec build_label_spec(CaptionGenerator& generator,
                           const std::string& label, std::size_t t,
                           std::size_t n);

struct RewriteFailure {
  std::string id;
  std::string message;
};

struct RewriteOutcome {
  std::size_t rewritten = 0;
  std::vector<RewriteFailure> failures;
};

// Fills record.rewrites for every record; failed records are left untouched
// and reported by id so a partial run is diagnosable.
RewriteOutcome rewrite_manifest(std::vector<SampleRecord>& records,
                                CaptionGenerator& generator, std::size_t k);

}  // namespace reclap
