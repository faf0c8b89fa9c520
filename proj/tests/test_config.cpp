#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "reclap/config.hpp"

using namespace reclap;
using nlohmann::json;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

std::string write_config(const TempDir& dir, const json& doc) {
  std::string path = dir.file("config.json");
  std::ofstream out(path, std::ios::binary);
  out << doc.dump(2);
  return path;
}

}  // namespace

TEST_CASE("an absent config resolves to pure defaults") {
  ResolvedConfig resolved = load_config("", {});
  CHECK(resolved.values.model.feature_dim == 64);
  CHECK(resolved.values.model.vocab_buckets == 32768);
  CHECK(resolved.values.train.batch_size == 32);
  CHECK(resolved.values.train.learning_rate == 5e-4);
  CHECK(resolved.values.train.policy.p == 0.4);
  CHECK(resolved.values.train.policy.rewrite_count == 4);
  CHECK(resolved.values.prompt_t == 3);
  CHECK(resolved.values.prompt_n == 4);
  CHECK(resolved.values.eval_n_prompts == 2);
  CHECK(resolved.values.llm.max_inflight == 4);
  CHECK(resolved.values.llm.retries == 3);

  for (const auto& [key, source] : resolved.sources) {
    CAPTURE(key);
    CHECK(source == "default");
  }
  CHECK(resolved.sources.size() == 28);
  // Six sections, every key present in the document.
  CHECK(resolved.document.size() == 6);
}

TEST_CASE("flags outrank the file, which outranks defaults") {
  TempDir dir("reclap_config_precedence");
  std::string path = write_config(
      dir, json{{"augment", {{"p", 0.2}}}, {"train", {{"epochs", 3}}}});

  ResolvedConfig resolved =
      load_config(path, {{"augment.p", "0.6"}, {"train.seed", "9"}});
  CHECK(resolved.values.train.policy.p == 0.6);
  CHECK(resolved.sources.at("augment.p") == "flag");
  CHECK(resolved.values.train.epochs == 3);
  CHECK(resolved.sources.at("train.epochs") == "file");
  CHECK(resolved.values.train.seed == 9);
  CHECK(resolved.sources.at("train.seed") == "flag");
  CHECK(resolved.sources.at("train.batch_size") == "default");
  CHECK(resolved.values.train.batch_size == 32);
}

TEST_CASE("misspelled keys fail hard with a nearest-match suggestion") {
  TempDir dir("reclap_config_typo");
  std::string path =
      write_config(dir, json{{"train", {{"learnig_rate", 0.001}}}});
  CHECK_THROWS_WITH_AS(
      load_config(path, {}),
      doctest::Contains("unknown key \"train.learnig_rate\"; did you mean "
                        "\"train.learning_rate\"?"),
      std::invalid_argument);

  std::string section_typo = write_config(dir, json{{"trane", json::object()}});
  CHECK_THROWS_WITH_AS(load_config(section_typo, {}),
                       doctest::Contains("did you mean \"train\"?"),
                       std::invalid_argument);

  CHECK_THROWS_WITH_AS(load_config("", {{"eval.nprompts", "2"}}),
                       doctest::Contains("did you mean \"eval.n_prompts\"?"),
                       std::invalid_argument);
}

TEST_CASE("type mismatches are rejected per key") {
  TempDir dir("reclap_config_types");
  CHECK_THROWS_WITH_AS(
      load_config(write_config(dir, json{{"train", {{"epochs", "ten"}}}}),
                  {}),
      doctest::Contains("\"train.epochs\" must be an unsigned integer"),
      std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      load_config(write_config(dir, json{{"train", {{"epochs", -3}}}}), {}),
      doctest::Contains("unsigned integer"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      load_config(
          write_config(dir, json{{"model", {{"temperature_init", "hot"}}}}),
          {}),
      doctest::Contains("\"model.temperature_init\" must be a number"),
      std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      load_config(write_config(dir, json{{"llm", {{"endpoint", 12}}}}), {}),
      doctest::Contains("\"llm.endpoint\" must be a string"),
      std::invalid_argument);
  CHECK_THROWS_WITH_AS(load_config("", {{"train.epochs", "ten"}}),
                       doctest::Contains("is not valid for key"),
                       std::invalid_argument);
}

TEST_CASE("domain validation still applies to well-typed values") {
  TempDir dir("reclap_config_domain");
  CHECK_THROWS_AS(
      load_config(write_config(dir, json{{"augment", {{"p", 1.5}}}}), {}),
      std::exception);
  CHECK_THROWS_AS(
      load_config(write_config(dir, json{{"train", {{"epochs", 0}}}}), {}),
      std::exception);
  CHECK_THROWS_AS(load_config("", {{"prompt.t", "0"}}), std::exception);
}

TEST_CASE("missing or malformed config files are reported") {
  CHECK_THROWS_WITH_AS(load_config("/nonexistent/config.json", {}),
                       doctest::Contains("cannot open"), std::runtime_error);
  TempDir dir("reclap_config_malformed");
  std::string path = dir.file("broken.json");
  std::ofstream(path, std::ios::binary) << "{not json";
  CHECK_THROWS_WITH_AS(load_config(path, {}),
                       doctest::Contains("is not valid"),
                       std::runtime_error);
  std::string array_path = dir.file("array.json");
  std::ofstream(array_path, std::ios::binary) << "[1,2,3]";
  CHECK_THROWS_WITH_AS(load_config(array_path, {}),
                       doctest::Contains("one object of sections"),
                       std::invalid_argument);
}

TEST_CASE("the resolved echo reloads to the identical configuration") {
  TempDir dir("reclap_config_fixpoint");
  std::string path = write_config(
      dir, json{{"train", {{"learning_rate", 0.30000000000000004}}},
                {"model", {{"hidden_dim", 48}}}});
  ResolvedConfig first = load_config(path, {{"eval.seed", "123"}});
  write_config_echo(first, dir.path.string());

  ResolvedConfig second = load_config(dir.file("resolved_config.json"), {});
  CHECK(first.document == second.document);
  CHECK(second.values.train.learning_rate == 0.30000000000000004);
  CHECK(second.values.model.hidden_dim == 48);
  CHECK(second.values.eval_seed == 123);
  // Provenance of the reloaded copy is all "file" by construction.
  for (const auto& [key, source] : second.sources) {
    CAPTURE(key);
    CHECK(source == "file");
  }

  // The sources sidecar lists exactly the known keys.
  std::ifstream sources_in(dir.file("resolved_config.sources.json"),
                           std::ios::binary);
  REQUIRE(sources_in.good());
  json sources = json::parse(sources_in);
  CHECK(sources.size() == first.sources.size());
  CHECK(sources.at("eval.seed") == "flag");
  CHECK(sources.at("train.learning_rate") == "file");
  CHECK(sources.at("train.epochs") == "default");
}

TEST_CASE("edit distance is a real Levenshtein metric") {
  CHECK(edit_distance("", "") == 0);
  CHECK(edit_distance("abc", "abc") == 0);
  CHECK(edit_distance("abc", "") == 3);
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_distance("learnig_rate", "learning_rate") == 1);
}
