#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "reclap/llm_client.hpp"
#include "reclap/model.hpp"
#include "reclap/trainer.hpp"

namespace reclap {

// Everything a run needs, materialized from the resolved key/value set.
// augment.* lives inside train.policy; prompt.* and eval.* are the
// generation and scoring knobs.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  std::size_t prompt_t = 3;
  std::size_t prompt_n = 4;
  std::size_t eval_n_prompts = 2;
  std::uint64_t eval_seed = 1000;
  LlmClientConfig llm;
};

struct ResolvedConfig {
  RunConfig values;
  // Nested sections with every key present, suitable for re-loading.
  nlohmann::json document;
  // Dotted key -> "default", "file", or "flag".
  std::map<std::string, std::string> sources;
};

// Resolves built-in defaults, then the config file (empty path = none),
// then dotted-key flag overrides ("train.seed" -> "7"). Unknown keys and
// type mismatches are hard errors; unknown keys carry a nearest-match
// suggestion.
ResolvedConfig load_config(
    const std::string& path,
    const std::map<std::string, std::string>& flag_overrides);

// Writes resolved_config.json (reloadable values) and
// resolved_config.sources.json (per-key provenance) into the directory.
void write_config_echo(const ResolvedConfig& config,
                       const std::string& directory);

// Edit distance used for unknown-key suggestions.
std::size_t edit_distance(const std::string& a, const std::string& b);

}  // namespace reclap
