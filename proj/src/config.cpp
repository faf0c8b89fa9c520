#include "reclap/config.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <limits>
#include <stdexcept>
#include <vector>

#include "reclap/data.hpp"

namespace reclap {

namespace {

using nlohmann::json;

enum class Kind { kUInt, kDouble, kString };

struct KeyDef {
  const char* key;  // dotted "section.name"
  Kind kind;
};

// Every legal key with its type; defaults come from default_document().
constexpr KeyDef kKeys[] = {
    {"model.feature_dim", Kind::kUInt},
    {"model.vocab_buckets", Kind::kUInt},
    {"model.token_embed_dim", Kind::kUInt},
    {"model.hidden_dim", Kind::kUInt},
    {"model.embed_dim", Kind::kUInt},
    {"model.temperature_init", Kind::kDouble},
    {"model.temperature_max", Kind::kDouble},
    {"model.seed", Kind::kUInt},
    {"train.batch_size", Kind::kUInt},
    {"train.epochs", Kind::kUInt},
    {"train.learning_rate", Kind::kDouble},
    {"train.seed", Kind::kUInt},
    {"train.checkpoint_every_epochs", Kind::kUInt},
    {"augment.p", Kind::kDouble},
    {"augment.k", Kind::kUInt},
    {"prompt.t", Kind::kUInt},
    {"prompt.n", Kind::kUInt},
    {"eval.n_prompts", Kind::kUInt},
    {"eval.seed", Kind::kUInt},
    {"llm.endpoint", Kind::kString},
    {"llm.model", Kind::kString},
    {"llm.api_key_env", Kind::kString},
    {"llm.max_inflight", Kind::kUInt},
    {"llm.timeout_seconds", Kind::kDouble},
    {"llm.retries", Kind::kUInt},
    {"llm.backoff_base_seconds", Kind::kDouble},
    {"llm.backoff_factor", Kind::kDouble},
    {"llm.temperature", Kind::kDouble},
};

const KeyDef* find_key(const std::string& dotted) {
  for (const KeyDef& def : kKeys) {
    if (dotted == def.key) return &def;
  }
  return nullptr;
}

json default_document() {
  const RunConfig defaults;
  json doc;
  doc["model"] = {
      {"feature_dim", defaults.model.feature_dim},
      {"vocab_buckets", defaults.model.vocab_buckets},
      {"token_embed_dim", defaults.model.token_embed_dim},
      {"hidden_dim", defaults.model.hidden_dim},
      {"embed_dim", defaults.model.embed_dim},
      {"temperature_init", defaults.model.temperature_init},
      {"temperature_max", defaults.model.temperature_max},
      {"seed", defaults.model.seed},
  };
  doc["train"] = {
      {"batch_size", defaults.train.batch_size},
      {"epochs", defaults.train.epochs},
      {"learning_rate", defaults.train.learning_rate},
      {"seed", defaults.train.seed},
      {"checkpoint_every_epochs", defaults.train.checkpoint_every_epochs},
  };
  doc["augment"] = {
      {"p", defaults.train.policy.p},
      {"k", defaults.train.policy.rewrite_count},
  };
  doc["prompt"] = {
      {"t", defaults.prompt_t},
      {"n", defaults.prompt_n},
  };
  doc["eval"] = {
      {"n_prompts", defaults.eval_n_prompts},
      {"seed", defaults.eval_seed},
  };
  doc["llm"] = {
      {"endpoint", defaults.llm.endpoint},
      {"model", defaults.llm.model},
      {"api_key_env", defaults.llm.api_key_env},
      {"max_inflight", defaults.llm.max_inflight},
      {"timeout_seconds", defaults.llm.timeout_seconds},
      {"retries", defaults.llm.retries},
      {"backoff_base_seconds", defaults.llm.backoff_base_seconds},
      {"backoff_factor", defaults.llm.backoff_factor},
      {"temperature", defaults.llm.temperature},
  };
  return doc;
}

std::string nearest_key(const std::string& unknown,
                        const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_distance = std::numeric_limits<std::size_t>::max();
  for (const std::string& candidate : candidates) {
    std::size_t distance = edit_distance(unknown, candidate);
    if (distance < best_distance) {
      best_distance = distance;
      best = candidate;
    }
  }
  return best;
}

[[noreturn]] void unknown_key_error(const std::string& dotted) {
  std::vector<std::string> known;
  for (const KeyDef& def : kKeys) known.emplace_back(def.key);
  throw std::invalid_argument("config: unknown key \"" + dotted +
                              "\"; did you mean \"" +
                              nearest_key(dotted, known) + "\"?");
}

json coerce(const std::string& dotted, Kind kind, const json& value) {
  switch (kind) {
    case Kind::kUInt:
      if (value.is_number_unsigned()) return value;
      if (value.is_number_integer() && value.get<std::int64_t>() >= 0) {
        return json(value.get<std::uint64_t>());
      }
      throw std::invalid_argument("config: key \"" + dotted +
                                  "\" must be an unsigned integer");
    case Kind::kDouble:
      if (value.is_number()) return json(value.get<double>());
      throw std::invalid_argument("config: key \"" + dotted +
                                  "\" must be a number");
    case Kind::kString:
      if (value.is_string()) return value;
      throw std::invalid_argument("config: key \"" + dotted +
                                  "\" must be a string");
  }
  throw std::logic_error("config: unhandled kind");
}

json parse_flag(const std::string& dotted, Kind kind,
                const std::string& text) {
  try {
    switch (kind) {
      case Kind::kUInt: {
        std::size_t used = 0;
        unsigned long long value = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return json(static_cast<std::uint64_t>(value));
      }
      case Kind::kDouble: {
        std::size_t used = 0;
        double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return json(value);
      }
      case Kind::kString:
        return json(text);
    }
  } catch (const std::exception&) {
    throw std::invalid_argument("config: flag value \"" + text +
                                "\" is not valid for key \"" + dotted +
                                "\"");
  }
  throw std::logic_error("config: unhandled kind");
}

RunConfig materialize(const json& doc) {
  RunConfig config;
  const json& model = doc["model"];
  config.model.feature_dim = model["feature_dim"].get<std::size_t>();
  config.model.vocab_buckets = model["vocab_buckets"].get<std::size_t>();
  config.model.token_embed_dim =
      model["token_embed_dim"].get<std::size_t>();
  config.model.hidden_dim = model["hidden_dim"].get<std::size_t>();
  config.model.embed_dim = model["embed_dim"].get<std::size_t>();
  config.model.temperature_init = model["temperature_init"].get<double>();
  config.model.temperature_max = model["temperature_max"].get<double>();
  config.model.seed = model["seed"].get<std::uint64_t>();

  const json& train = doc["train"];
  config.train.batch_size = train["batch_size"].get<std::size_t>();
  config.train.epochs = train["epochs"].get<std::size_t>();
  config.train.learning_rate = train["learning_rate"].get<double>();
  config.train.seed = train["seed"].get<std::uint64_t>();
  config.train.checkpoint_every_epochs =
      train["checkpoint_every_epochs"].get<std::size_t>();

  config.train.policy.p = doc["augment"]["p"].get<double>();
  config.train.policy.rewrite_count =
      doc["augment"]["k"].get<std::size_t>();

  config.prompt_t = doc["prompt"]["t"].get<std::size_t>();
  config.prompt_n = doc["prompt"]["n"].get<std::size_t>();
  config.eval_n_prompts = doc["eval"]["n_prompts"].get<std::size_t>();
  config.eval_seed = doc["eval"]["seed"].get<std::uint64_t>();

  const json& llm = doc["llm"];
  config.llm.endpoint = llm["endpoint"].get<std::string>();
  config.llm.model = llm["model"].get<std::string>();
  config.llm.api_key_env = llm["api_key_env"].get<std::string>();
  config.llm.max_inflight = llm["max_inflight"].get<std::size_t>();
  config.llm.timeout_seconds = llm["timeout_seconds"].get<double>();
  config.llm.retries = llm["retries"].get<std::size_t>();
  config.llm.backoff_base_seconds =
      llm["backoff_base_seconds"].get<double>();
  config.llm.backoff_factor = llm["backoff_factor"].get<double>();
  config.llm.temperature = llm["temperature"].get<double>();

  config.model.validate();
  config.train.validate();
  config.llm.validate();
  if (config.prompt_t == 0 || config.prompt_n == 0) {
    throw std::invalid_argument(
        "config: prompt.t and prompt.n must be at least 1");
  }
  if (config.eval_n_prompts == 0) {
    throw std::invalid_argument(
        "config: eval.n_prompts must be at least 1");
  }
  return config;
}

}  // namespace

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diagonal = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t next_diagonal = row[j];
      const std::size_t substitution =
          diagonal + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, substitution});
      diagonal = next_diagonal;
    }
  }
  return row[b.size()];
}

ResolvedConfig load_config(
    const std::string& path,
    const std::map<std::string, std::string>& flag_overrides) {
  ResolvedConfig resolved;
  resolved.document = default_document();
  for (const KeyDef& def : kKeys) {
    resolved.sources[def.key] = "default";
  }

  if (!path.empty()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw std::runtime_error("config: cannot open " + path);
    }
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    json file_doc;
    try {
      file_doc = json::parse(text);
    } catch (const json::exception& e) {
      throw std::runtime_error("config: " + path + " is not valid: " +
                               e.what());
    }
    if (!file_doc.is_object()) {
      throw std::invalid_argument("config: " + path +
                                  " must hold one object of sections");
    }
    for (const auto& [section, body] : file_doc.items()) {
      if (!resolved.document.contains(section)) {
        std::vector<std::string> sections;
        for (const auto& [known, unused] : resolved.document.items()) {
          (void)unused;
          sections.push_back(known);
        }
        throw std::invalid_argument(
            "config: unknown section \"" + section + "\"; did you mean \"" +
            nearest_key(section, sections) + "\"?");
      }
      if (!body.is_object()) {
        throw std::invalid_argument("config: section \"" + section +
                                    "\" must be an object");
      }
      for (const auto& [name, value] : body.items()) {
        const std::string dotted = section + "." + name;
        const KeyDef* def = find_key(dotted);
        if (def == nullptr) {
          unknown_key_error(dotted);
        }
        resolved.document[section][name] = coerce(dotted, def->kind, value);
        resolved.sources[dotted] = "file";
      }
    }
  }

  for (const auto& [dotted, text] : flag_overrides) {
    const KeyDef* def = find_key(dotted);
    if (def == nullptr) {
      unknown_key_error(dotted);
    }
    const std::size_t dot = dotted.find('.');
    resolved.document[dotted.substr(0, dot)][dotted.substr(dot + 1)] =
        parse_flag(dotted, def->kind, text);
    resolved.sources[dotted] = "flag";
  }

  resolved.values = materialize(resolved.document);
  return resolved;
}

void write_config_echo(const ResolvedConfig& config,
                       const std::string& directory) {
  write_file_locked(directory + "/resolved_config.json",
                    config.document.dump(2) + "\n");
  json sources(config.sources);
  write_file_locked(directory + "/resolved_config.sources.json",
                    sources.dump(2) + "\n");
}

}  // namespace reclap
