#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "reclap/data.hpp"
#include "reclap/rng.hpp"
#include "reclap/tokenizer.hpp"
#include "reclap/toy.hpp"

using namespace reclap;

namespace {

// Fresh scratch directory per test binary run.
std::filesystem::path scratch_dir() {
  static const std::filesystem::path dir = [] {
    auto d = std::filesystem::temp_directory_path() / "reclap_data_tests";
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

std::vector<SampleRecord> three_records() {
  SampleRecord a;
  a.id = "a";
  a.features = {1.0f, 2.0f, 3.0f};
  a.caption = "a dog barks";
  a.rewrites = {"Rapid bursts of: a dog barks", "A hound yaps"};

  SampleRecord b;
  b.id = "b";
  b.features_path = "b_features.f32";
  b.caption = "rain on a tin roof";
  b.extra["source"] = "field recording";
  b.extra["quality"] = 7;

  SampleRecord c;
  c.id = "c";
  c.features = {-0.5f, 0.25f, 0.125f};
  c.caption = "an owl hoots";
  return {a, b, c};
}

bool same_record(const SampleRecord& x, const SampleRecord& y) {
  return x.id == y.id && x.features == y.features &&
         x.features_path == y.features_path && x.caption == y.caption &&
         x.rewrites == y.rewrites && x.extra == y.extra;
}

}  // namespace

TEST_CASE("manifest round-trip preserves records and unknown fields") {
  const auto path = scratch_dir() / "roundtrip.jsonl";
  const auto records = three_records();
  save_manifest(records, path.string());
  const auto loaded = load_manifest(path.string());
  REQUIRE(loaded.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CAPTURE(records[i].id);
    CHECK(same_record(records[i], loaded[i]));
  }

  // A second save of the loaded records is byte-identical.
  const auto again = scratch_dir() / "roundtrip2.jsonl";
  save_manifest(loaded, again.string());
  CHECK(slurp(path) == slurp(again));
}

TEST_CASE("manifest loader cites the line of a duplicate id") {
  const auto path = scratch_dir() / "dup.jsonl";
  spit(path,
       R"({"id":"x","features":[1],"caption":"one"})"
       "\n"
       R"({"id":"y","features":[1],"caption":"two"})"
       "\n"
       R"({"id":"x","features":[1],"caption":"three"})"
       "\n");
  CHECK_THROWS_WITH_AS(load_manifest(path.string()),
                       doctest::Contains("line 3"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_manifest(path.string()),
                       doctest::Contains("duplicate id \"x\""),
                       std::runtime_error);
}

TEST_CASE("manifest loader rejects malformed records with line numbers") {
  const auto path = scratch_dir() / "bad.jsonl";

  spit(path, R"({"id":"x","features":[1],"caption":"ok"})"
             "\nnot json at all\n");
  CHECK_THROWS_WITH_AS(load_manifest(path.string()),
                       doctest::Contains("line 2"), std::runtime_error);

  spit(path, R"({"id":"x","features":[1]})" "\n");
  CHECK_THROWS_WITH_AS(load_manifest(path.string()),
                       doctest::Contains("caption"), std::runtime_error);

  spit(path, R"({"id":"x","features":[1],"caption":"!!!"})" "\n");
  CHECK_THROWS_WITH_AS(load_manifest(path.string()),
                       doctest::Contains("alphanumeric"), std::runtime_error);

  spit(path,
       R"({"id":"x","features":[1],"features_path":"p.f32","caption":"ok"})"
       "\n");
  CHECK_THROWS_WITH_AS(load_manifest(path.string()),
                       doctest::Contains("exactly one"), std::runtime_error);

  spit(path, R"({"id":"x","caption":"ok"})" "\n");
  CHECK_THROWS_AS(load_manifest(path.string()), std::runtime_error);
}

TEST_CASE("manifest round-trip holds for randomized records") {
  Rng rng(42);
  std::vector<SampleRecord> records;
  for (std::size_t i = 0; i < 50; ++i) {
    SampleRecord r;
    r.id = "sample_" + std::to_string(i);
    r.caption = "caption number " + std::to_string(rng.index(1000));
    const std::size_t n = 1 + rng.index(8);
    for (std::size_t j = 0; j < n; ++j) {
      r.features.push_back(static_cast<float>(rng.normal()));
    }
    const std::size_t k = rng.index(5);
    for (std::size_t j = 0; j < k; ++j) {
      r.rewrites.push_back("rewrite " + std::to_string(rng.index(1000)) +
                           " of " + r.id);
    }
    if (rng.uniform() < 0.5) {
      r.extra["weight"] = rng.uniform();
      r.extra["tag"] = "t" + std::to_string(rng.index(10));
    }
    records.push_back(std::move(r));
  }

  const auto path = scratch_dir() / "random.jsonl";
  save_manifest(records, path.string());
  const auto loaded = load_manifest(path.string());
  REQUIRE(loaded.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(same_record(records[i], loaded[i]));
  }
}

TEST_CASE("feature files round-trip raw little-endian floats") {
  const auto path = scratch_dir() / "feat.f32";
  const std::vector<float> values = {0.0f, -1.5f, 3.25f,
                                     std::nextafter(1.0f, 2.0f)};
  write_feature_file(path.string(), values);
  CHECK(std::filesystem::file_size(path) == 16);
  CHECK(read_feature_file(path.string()) == values);

  spit(path, "abcde");  // 5 bytes
  CHECK_THROWS_WITH_AS(read_feature_file(path.string()),
                       doctest::Contains("multiple of 4"), std::runtime_error);
}

TEST_CASE("sample_features validates width and resolves paths") {
  SampleRecord inline_rec;
  inline_rec.id = "short";
  inline_rec.features.assign(63, 0.5f);
  inline_rec.caption = "x";
  CHECK_THROWS_WITH_AS(sample_features(inline_rec, ".", 64),
                       doctest::Contains("\"short\""), std::runtime_error);
  CHECK_THROWS_WITH_AS(sample_features(inline_rec, ".", 64),
                       doctest::Contains("63"), std::runtime_error);

  write_feature_file((scratch_dir() / "ok.f32").string(), {1.0f, 2.0f});
  SampleRecord file_rec;
  file_rec.id = "filed";
  file_rec.features_path = "ok.f32";
  file_rec.caption = "x";
  CHECK(sample_features(file_rec, scratch_dir().string(), 2) ==
        std::vector<float>{1.0f, 2.0f});

  const Tensor2D m = feature_matrix({file_rec}, scratch_dir().string(), 2);
  CHECK(m.rows == 1);
  CHECK(m.at(0, 1) == 2.0);
}

TEST_CASE("label specs round-trip and validate") {
  LabelSpec spec;
  spec.label = "bell";
  spec.descriptions = {"metallic ring", "high-pitched, tinkling chime"};
  spec.prompts = {{"a metallic ring sounds", 0},
                  {"somewhere a high-pitched, tinkling chime plays", 1}};

  const auto path = scratch_dir() / "specs.jsonl";
  save_label_specs({spec}, path.string());
  const auto loaded = load_label_specs(path.string());
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].label == "bell");
  CHECK(loaded[0].descriptions == spec.descriptions);
  REQUIRE(loaded[0].prompts.size() == 2);
  CHECK(loaded[0].prompts[1].text == spec.prompts[1].text);
  CHECK(loaded[0].prompts[1].description_index == 1);

  LabelSpec bad = spec;
  bad.prompts[0].description_index = 9;
  CHECK_THROWS_WITH_AS(save_label_specs({bad}, path.string()),
                       doctest::Contains("description 9"), std::runtime_error);

  LabelSpec dup = spec;
  dup.prompts.push_back({"A  Metallic ring   sounds", 0});
  CHECK_THROWS_WITH_AS(dup.validate(), doctest::Contains("duplicates"),
                       std::runtime_error);
}

TEST_CASE("label spec loader reports line numbers and duplicate labels") {
  const auto path = scratch_dir() / "badspecs.jsonl";
  spit(path,
       R"({"label":"a","descriptions":["x"],"prompts":[{"text":"x here","description_index":0}]})"
       "\n"
       R"({"label":"a","descriptions":["y"],"prompts":[{"text":"y here","description_index":0}]})"
       "\n");
  CHECK_THROWS_WITH_AS(load_label_specs(path.string()),
                       doctest::Contains("line 2"), std::runtime_error);

  spit(path, R"({"label":"a","descriptions":["x"]})" "\n");
  CHECK_THROWS_WITH_AS(load_label_specs(path.string()),
                       doctest::Contains("prompts"), std::runtime_error);
}

TEST_CASE("eval sets round-trip in both flavors") {
  std::vector<EvalRecord> multiclass(2);
  multiclass[0].id = "e0";
  multiclass[0].features = {1.0f, 0.0f};
  multiclass[0].label_index = 3;
  multiclass[1].id = "e1";
  multiclass[1].features = {0.0f, 1.0f};
  multiclass[1].label_index = 0;

  const auto path = scratch_dir() / "eval.jsonl";
  save_eval_set(multiclass, path.string());
  auto loaded = load_eval_set(path.string());
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].label_index == 3);
  CHECK_FALSE(loaded[0].multilabel());
  CHECK(loaded[1].features == multiclass[1].features);

  std::vector<EvalRecord> multilabel(1);
  multilabel[0].id = "m0";
  multilabel[0].features = {1.0f};
  multilabel[0].relevance = {1, 0, 1};
  save_eval_set(multilabel, path.string());
  loaded = load_eval_set(path.string());
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].multilabel());
  CHECK(loaded[0].relevance == std::vector<int>{1, 0, 1});
}

TEST_CASE("eval set loader rejects inconsistent ground truth") {
  const auto path = scratch_dir() / "badeval.jsonl";
  spit(path,
       R"({"id":"a","features":[1],"label_index":0})"
       "\n"
       R"({"id":"b","features":[1],"relevance":[1,0]})"
       "\n");
  CHECK_THROWS_WITH_AS(load_eval_set(path.string()), doctest::Contains("mixed"),
                       std::runtime_error);

  spit(path, R"({"id":"a","features":[1],"label_index":-2})" "\n");
  CHECK_THROWS_AS(load_eval_set(path.string()), std::runtime_error);

  spit(path, R"({"id":"a","features":[1],"relevance":[1,2]})" "\n");
  CHECK_THROWS_WITH_AS(load_eval_set(path.string()),
                       doctest::Contains("0 or 1"), std::runtime_error);

  spit(path, R"({"id":"a","features":[1]})" "\n");
  CHECK_THROWS_WITH_AS(load_eval_set(path.string()),
                       doctest::Contains("exactly one"), std::runtime_error);
}

TEST_CASE("toy dataset has the documented shape") {
  const ToySpec spec;
  const ToyDataset data = generate_toy_dataset(spec);
  CHECK(data.labels.size() == 8);
  CHECK(data.train.size() == 320);
  CHECK(data.eval.size() == 80);
  CHECK(data.centers.rows == 8);
  CHECK(data.centers.cols == 64);
  REQUIRE(data.train_lexicon_specs.size() == 8);
  REQUIRE(data.paraphrase_specs.size() == 8);
  for (const auto& s : data.train_lexicon_specs) {
    CHECK(s.descriptions.size() == 2);
    CHECK(s.prompts.size() == 6);
  }
  for (const auto& s : data.paraphrase_specs) {
    CHECK(s.descriptions.size() == 3);
    CHECK(s.prompts.size() == 6);
  }
  for (const auto& record : data.train) {
    CHECK(record.rewrites.size() == 4);
    CHECK_FALSE(tokenize(record.caption, 32768).empty());
  }
}

TEST_CASE("toy generation is deterministic in the seed") {
  const ToySpec spec;
  const ToyDataset a = generate_toy_dataset(spec);
  const ToyDataset b = generate_toy_dataset(spec);
  REQUIRE(a.train.size() == b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].caption == b.train[i].caption);
    CHECK(a.train[i].features == b.train[i].features);
    CHECK(a.train[i].rewrites == b.train[i].rewrites);
  }

  ToySpec other = spec;
  other.seed = 1;
  const ToyDataset c = generate_toy_dataset(other);
  CHECK(c.train[0].features != a.train[0].features);
}

TEST_CASE("zero noise collapses every sample onto its class center") {
  ToySpec spec;
  spec.noise_sigma = 0.0;
  spec.samples_per_class = 3;
  spec.eval_per_class = 2;
  const ToyDataset data = generate_toy_dataset(spec);
  for (std::size_t c = 0; c < 8; ++c) {
    for (std::size_t s = 0; s < 3; ++s) {
      const auto& f = data.train[c * 3 + s].features;
      for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(f[i] == static_cast<float>(data.centers.at(c, i)));
      }
    }
  }
}

TEST_CASE("toy clusters are separable by the nearest-center rule") {
  const ToySpec spec;
  const ToyDataset data = generate_toy_dataset(spec);
  for (const auto& record : data.eval) {
    double best = -2.0;
    std::size_t best_class = 0;
    for (std::size_t c = 0; c < 8; ++c) {
      double dot = 0.0;
      for (std::size_t i = 0; i < 64; ++i) {
        dot += static_cast<double>(record.features[i]) * data.centers.at(c, i);
      }
      if (dot > best) {
        best = dot;
        best_class = c;
      }
    }
    CHECK(best_class == static_cast<std::size_t>(record.label_index));
  }
}

TEST_CASE("toy captions respect the lexicon hold-out rules") {
  const ToySpec spec;
  const ToyDataset data = generate_toy_dataset(spec);

  std::set<std::string> paraphrase_tokens;
  for (const auto& lexicon : spec.paraphrase_lexicons) {
    paraphrase_tokens.insert(lexicon.begin(), lexicon.end());
  }

  std::set<std::string> captions;
  for (std::size_t i = 0; i < data.train.size(); ++i) {
    const auto& record = data.train[i];
    const std::string& label = data.labels[i / spec.samples_per_class];

    // Originals stay inside the training lexicon; the class name never
    // appears; every caption is unique.
    CHECK(captions.insert(record.caption).second);
    for (const auto& word : split_words(record.caption)) {
      CHECK(paraphrase_tokens.count(word) == 0);
      CHECK(word != label);
    }

    // Rewrites draw on the held-out paraphrase lexicon and keep the
    // sample's ordinal token so the pairing stays unique.
    const auto original_words = split_words(record.caption);
    const std::string ordinal = original_words.back();
    for (const auto& rewrite : record.rewrites) {
      const auto words = split_words(rewrite);
      CHECK(std::count_if(words.begin(), words.end(), [&](const auto& w) {
              return paraphrase_tokens.count(w) != 0;
            }) >= 2);
      CHECK(std::find(words.begin(), words.end(), ordinal) != words.end());
      for (const auto& word : words) CHECK(word != label);
    }
  }

  // Paraphrase prompt pools never mention the class name either.
  for (std::size_t c = 0; c < data.paraphrase_specs.size(); ++c) {
    for (const auto& prompt : data.paraphrase_specs[c].prompts) {
      for (const auto& word : split_words(prompt.text)) {
        CHECK(word != data.labels[c]);
      }
    }
  }
}

TEST_CASE("toy spec validation catches lexicon violations") {
  ToySpec bad;
  bad.train_lexicons[0][1] = bad.train_lexicons[1][0];  // duplicate token
  CHECK_THROWS_WITH_AS(generate_toy_dataset(bad), doctest::Contains("disjoint"),
                       std::runtime_error);

  ToySpec leak;
  leak.paraphrase_lexicons[2][0] = "rain";  // class name leaks in
  CHECK_THROWS_WITH_AS(generate_toy_dataset(leak),
                       doctest::Contains("class name"), std::runtime_error);

  ToySpec oversized;
  oversized.n_classes = 9;
  CHECK_THROWS_AS(generate_toy_dataset(oversized), std::runtime_error);
}

TEST_CASE("toy artifacts persist through the data-io layer") {
  ToySpec spec;
  spec.samples_per_class = 4;
  spec.eval_per_class = 2;
  const ToyDataset data = generate_toy_dataset(spec);

  const auto dir = scratch_dir();
  save_manifest(data.train, (dir / "toy_train.jsonl").string());
  save_eval_set(data.eval, (dir / "toy_eval.jsonl").string());
  save_label_specs(data.paraphrase_specs, (dir / "toy_specs.jsonl").string());

  CHECK(load_manifest((dir / "toy_train.jsonl").string()).size() == 32);
  CHECK(load_eval_set((dir / "toy_eval.jsonl").string()).size() == 16);
  CHECK(load_label_specs((dir / "toy_specs.jsonl").string()).size() == 8);
}
