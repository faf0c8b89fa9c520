#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "reclap/checkpoint.hpp"
#include "reclap/grad_check.hpp"
#include "reclap/model.hpp"
#include "reclap/rng.hpp"
#include "reclap/tokenizer.hpp"

using namespace reclap;

namespace {

ModelConfig small_config() {
  ModelConfig config;
  config.feature_dim = 3;
  config.vocab_buckets = 64;
  config.token_embed_dim = 4;
  config.hidden_dim = 16;
  config.embed_dim = 3;
  config.seed = 7;
  return config;
}

Tensor2D random_features(std::size_t rows, std::size_t cols,
                         std::uint64_t seed) {
  Rng rng(seed);
  Tensor2D t(rows, cols);
  for (auto& v : t.data) v = rng.normal();
  return t;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("reclap_test_" + name);
}

}  // namespace

TEST_CASE("fnv1a64 matches the reference value for \"organ\"") {
  // Frozen from an independent FNV-1a-64 implementation.
  CHECK(fnv1a64("organ") == 9641760892526746354ULL);
  CHECK(fnv1a64("organ") % 32768 == 23282);
}

TEST_CASE("tokenize splits on every non-alphanumeric boundary") {
  CHECK(split_words("The organ's deep tones") ==
        std::vector<std::string>{"the", "organ", "s", "deep", "tones"});
  CHECK(tokenize("The organ's deep tones", 32768) ==
        TokenSequence{21884, 23282, 2850, 26671, 16854});
  CHECK(split_words("MP3-file, v2.0!") ==
        std::vector<std::string>{"mp3", "file", "v2", "0"});
}

TEST_CASE("tokenize is a pure function") {
  const std::string text = "Rain patters gently on a tin roof";
  CHECK(tokenize(text, 32768) == tokenize(text, 32768));
}

TEST_CASE("tokenize of symbols-only text is empty") {
  CHECK(tokenize("!!!", 32768).empty());
  CHECK(tokenize("", 32768).empty());
  CHECK(tokenize("  \t\n", 32768).empty());
}

TEST_CASE("twenty-caption bucket-id golden fixture") {
  // Bucket ids frozen from an independent FNV-1a-64 reference, V = 32768.
  const std::vector<std::pair<std::string, TokenSequence>> fixture = {
      {"A dog barks twice in the distance",
       {27788, 30953, 13392, 10163, 19390, 21884, 30786}},
      {"Rain patters gently on a tin roof",
       {1107, 22282, 30204, 25456, 27788, 12016, 32655}},
      {"The church organ swells to a deep chord",
       {21884, 30594, 23282, 23975, 16548, 27788, 26671, 18901}},
      {"Bicycle bell rings near a busy crossing",
       {4858, 3192, 27880, 8847, 27788, 9760, 16125}},
      {"Waves crash against the rocky shore",
       {22565, 20376, 2560, 21884, 24951, 12402}},
      {"Someone whistles a cheerful tune", {11099, 6366, 27788, 16093, 12019}},
      {"An engine idles roughly then revs",
       {1030, 21467, 19744, 22989, 3478, 5651}},
      {"Thunder rumbles low over the hills",
       {19377, 4229, 28513, 8303, 21884, 24379}},
      {"Glass shatters on a kitchen floor",
       {30027, 19175, 25456, 27788, 1935, 17341}},
      {"A crowd cheers after the final whistle",
       {27788, 846, 3163, 27369, 21884, 25911, 10457}},
      {"Wind chimes tinkle in a light breeze",
       {25863, 32572, 31926, 19390, 27788, 6927, 19742}},
      {"The kettle hisses and clicks off",
       {21884, 10978, 26636, 29318, 14516, 15850}},
      {"Footsteps echo down a long hallway",
       {848, 16740, 29781, 27788, 26419, 21529}},
      {"A cat purrs softly on the sofa",
       {27788, 8999, 14163, 25318, 25456, 21884, 582}},
      {"Fireworks pop and crackle overhead",
       {4037, 12112, 29318, 20438, 12661}},
      {"Water drips steadily into a metal sink",
       {15984, 8907, 140, 24995, 27788, 21180, 23666}},
      {"An owl hoots twice at dusk", {1030, 23941, 24944, 10163, 10600, 31176}},
      {"Keys jangle as a door unlocks",
       {15917, 20736, 13645, 27788, 20201, 3314}},
      {"A harp glissando rises and falls",
       {27788, 17824, 10641, 31721, 29318, 19721}},
      {"Static crackles from an old radio",
       {27003, 21855, 16565, 1030, 118, 11540}},
  };
  for (const auto& [caption, expected] : fixture) {
    CAPTURE(caption);
    CHECK(tokenize(caption, 32768) == expected);
  }
}

TEST_CASE("content_words strips stopwords") {
  CHECK(content_words("The sound of a dog in the rain") ==
        std::vector<std::string>{"sound", "dog", "rain"});
}

TEST_CASE("encode_audio emits unit-norm rows of dimension D") {
  DualEncoder model(small_config());
  const Tensor2D features = random_features(6, 3, 11);
  const Tensor2D emb = model.encode_audio(features);
  CHECK(emb.rows == 6);
  CHECK(emb.cols == 3);
  for (std::size_t r = 0; r < emb.rows; ++r) {
    CHECK(emb.row_norm(r) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("encode_audio is deterministic across identical rows") {
  DualEncoder model(small_config());
  Tensor2D features(2, 3, {0.5, -1.0, 2.0, 0.5, -1.0, 2.0});
  const Tensor2D emb = model.encode_audio(features);
  for (std::size_t c = 0; c < emb.cols; ++c) {
    CHECK(emb.at(0, c) == emb.at(1, c));
  }
}

TEST_CASE("encode_audio rejects wrong feature width") {
  DualEncoder model(small_config());
  CHECK_THROWS_AS(model.encode_audio(Tensor2D(2, 5)), std::runtime_error);
}

TEST_CASE("encode_text emits unit-norm rows and repeats captions exactly") {
  DualEncoder model(small_config());
  const Tensor2D emb = model.encode_text(
      {"a dog barks", "rain on the roof", "a dog barks"});
  CHECK(emb.rows == 3);
  CHECK(emb.cols == 3);
  for (std::size_t r = 0; r < emb.rows; ++r) {
    CHECK(emb.row_norm(r) == doctest::Approx(1.0).epsilon(1e-9));
  }
  for (std::size_t c = 0; c < emb.cols; ++c) {
    CHECK(emb.at(0, c) == emb.at(2, c));
  }
}

TEST_CASE("encode_text is invariant to token order (mean pooling)") {
  DualEncoder model(small_config());
  const Tensor2D a = model.encode_text({"deep organ tones"});
  const Tensor2D b = model.encode_text({"tones deep organ"});
  for (std::size_t c = 0; c < a.cols; ++c) {
    CHECK(a.at(0, c) == b.at(0, c));
  }
}

TEST_CASE("encode_text rejects untokenizable captions") {
  DualEncoder model(small_config());
  CHECK_THROWS_WITH_AS(model.encode_text({"!!!"}),
                       doctest::Contains("no alphanumeric tokens"),
                       std::runtime_error);
}

TEST_CASE("training forward matches inference outputs") {
  DualEncoder model(small_config());
  const Tensor2D features = random_features(4, 3, 3);
  const std::vector<std::string> captions = {"a dog barks", "an owl hoots",
                                             "rain falls", "thunder rolls"};
  const Tensor2D audio_train = model.forward_audio(features);
  const Tensor2D audio_infer = model.encode_audio(features);
  const Tensor2D text_train = model.forward_text(captions);
  const Tensor2D text_infer = model.encode_text(captions);
  for (std::size_t i = 0; i < audio_train.data.size(); ++i) {
    CHECK(audio_train.data[i] == audio_infer.data[i]);
  }
  for (std::size_t i = 0; i < text_train.data.size(); ++i) {
    CHECK(text_train.data[i] == text_infer.data[i]);
  }
}

TEST_CASE("tau starts at 1/0.07 and clamps at temperature_max") {
  ModelConfig config = small_config();
  DualEncoder model(config);
  CHECK(model.tau() == doctest::Approx(1.0 / 0.07).epsilon(1e-12));

  // Push log-tau past the cap and confirm the clamp pulls it back.
  model.parameters().back()->at(0, 0) = 10.0;
  model.clamp_temperature();
  CHECK(model.tau() == doctest::Approx(config.temperature_max).epsilon(1e-12));
  CHECK(model.log_tau() == doctest::Approx(std::log(100.0)).epsilon(1e-12));
}

TEST_CASE("parameter list and names agree in length and order") {
  DualEncoder model(small_config());
  const auto params = model.parameters();
  const auto grads = model.gradients();
  const auto names = model.parameter_names();
  REQUIRE(params.size() == names.size());
  REQUIRE(grads.size() == names.size());
  CHECK(names.front() == "audio.dense0.weight");
  CHECK(names[4] == "token_table");
  CHECK(names.back() == "log_tau");
  for (std::size_t i = 0; i < params.size(); ++i) {
    CHECK(params[i]->same_shape(*grads[i]));
  }
  // token table shape comes from the config
  CHECK(params[4]->rows == 64);
  CHECK(params[4]->cols == 4);
  // log-tau is a 1x1 scalar slot
  CHECK(params.back()->size() == 1);
}

TEST_CASE("whole-model gradients agree with finite differences") {
  DualEncoder model(small_config());
  const Tensor2D features = random_features(4, 3, 21);
  const std::vector<std::string> captions = {
      "a dog barks twice", "rain patters on tin", "an engine idles",
      "thunder rumbles low"};

  // Loss = tau * sum(A ⊙ T): exercises both stacks, the token-table scatter,
  // and the log-temperature gradient in one scalar.
  const auto loss_forward = [&]() {
    const Tensor2D a = model.encode_audio(features);
    const Tensor2D t = model.encode_text(captions);
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * t.data[i];
    return model.tau() * s;
  };
  const auto populate = [&]() {
    model.zero_grads();
    const Tensor2D a = model.forward_audio(features);
    const Tensor2D t = model.forward_text(captions);
    const double tau = model.tau();
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * t.data[i];
    Tensor2D ga(a.rows, a.cols);
    Tensor2D gt(t.rows, t.cols);
    for (std::size_t i = 0; i < a.data.size(); ++i) {
      ga.data[i] = tau * t.data[i];
      gt.data[i] = tau * a.data[i];
    }
    model.backward_audio(ga);
    model.backward_text(gt);
    model.add_log_tau_grad(tau * s);  // d/dlog_tau exp(log_tau) * s
  };

  const double worst = grad_check_params(model.parameters(), model.gradients(),
                                         loss_forward, populate);
  CHECK(worst < 1e-4);
}

TEST_CASE("construction is reproducible from the seed") {
  DualEncoder a(small_config());
  DualEncoder b(small_config());
  const auto pa = a.parameters();
  const auto pb = b.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i]->data == pb[i]->data);
  }
}

TEST_CASE("checkpoint round-trip is bit-exact at 32-bit precision") {
  DualEncoder model(small_config());
  AdamState adam = AdamState::for_params(model.parameters(), 5e-4);
  adam.step = 17;
  adam.first_moment[0].at(0, 0) = 0.125;
  adam.second_moment[2].at(1, 1) = 0.25;

  const auto path = temp_path("roundtrip.rclp");
  save_checkpoint(model, adam, path.string());
  LoadedCheckpoint loaded = load_checkpoint(path.string());

  CHECK(loaded.model.config().vocab_buckets == 64);
  CHECK(loaded.adam.step == 17);
  CHECK(loaded.adam.learning_rate == 5e-4);

  const auto orig = model.parameters();
  const auto back = loaded.model.parameters();
  for (std::size_t i = 0; i < orig.size(); ++i) {
    for (std::size_t j = 0; j < orig[i]->data.size(); ++j) {
      // Persisted truth is the 32-bit projection.
      CHECK(static_cast<float>(orig[i]->data[j]) ==
            static_cast<float>(back[i]->data[j]));
      CHECK(back[i]->data[j] ==
            static_cast<double>(static_cast<float>(orig[i]->data[j])));
    }
  }
  CHECK(loaded.adam.first_moment[0].at(0, 0) == 0.125);
  CHECK(loaded.adam.second_moment[2].at(1, 1) == 0.25);
  std::filesystem::remove(path);
}

TEST_CASE("save-load-save produces byte-identical files") {
  DualEncoder model(small_config());
  AdamState adam = AdamState::for_params(model.parameters(), 5e-4);
  const auto path_a = temp_path("first.rclp");
  const auto path_b = temp_path("second.rclp");
  save_checkpoint(model, adam, path_a.string());
  LoadedCheckpoint loaded = load_checkpoint(path_a.string());
  save_checkpoint(loaded.model, loaded.adam, path_b.string());
  CHECK(read_file(path_a) == read_file(path_b));
  std::filesystem::remove(path_a);
  std::filesystem::remove(path_b);
}

TEST_CASE("checkpoint encode outputs survive the round-trip") {
  DualEncoder model(small_config());
  AdamState adam = AdamState::for_params(model.parameters(), 5e-4);
  const auto path = temp_path("encode.rclp");
  save_checkpoint(model, adam, path.string());
  LoadedCheckpoint loaded = load_checkpoint(path.string());

  const Tensor2D features = random_features(5, 3, 99);
  const Tensor2D before = model.encode_audio(features);
  const Tensor2D after = loaded.model.encode_audio(features);
  for (std::size_t i = 0; i < before.data.size(); ++i) {
    // Parameters moved through a 32-bit projection, so outputs agree to
    // single precision.
    CHECK(static_cast<float>(before.data[i]) ==
          doctest::Approx(static_cast<float>(after.data[i])).epsilon(1e-5));
  }
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint with bad magic is rejected") {
  DualEncoder model(small_config());
  AdamState adam = AdamState::for_params(model.parameters(), 5e-4);
  const auto path = temp_path("badmagic.rclp");
  save_checkpoint(model, adam, path.string());
  std::string bytes = read_file(path);
  bytes[0] = 'X';
  bytes[1] = 'X';
  bytes[2] = 'X';
  bytes[3] = 'X';
  write_file(path, bytes);
  CHECK_THROWS_WITH_AS(load_checkpoint(path.string()),
                       doctest::Contains("bad magic"), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint with an unknown version is rejected") {
  DualEncoder model(small_config());
  AdamState adam = AdamState::for_params(model.parameters(), 5e-4);
  const auto path = temp_path("badversion.rclp");
  save_checkpoint(model, adam, path.string());
  std::string bytes = read_file(path);
  bytes[4] = 2;
  write_file(path, bytes);
  CHECK_THROWS_WITH_AS(load_checkpoint(path.string()),
                       doctest::Contains("version 2"), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("truncated checkpoint names the tensor that ran out") {
  DualEncoder model(small_config());
  AdamState adam = AdamState::for_params(model.parameters(), 5e-4);
  const auto path = temp_path("truncated.rclp");
  save_checkpoint(model, adam, path.string());
  std::string bytes = read_file(path);

  // Cut mid-way through the first tensor (config length sits at offset 5).
  const auto config_len =
      static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[5])) |
      (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[6])) << 8) |
      (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[7])) << 16) |
      (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[8])) << 24);
  write_file(path, bytes.substr(0, 9 + config_len + 6));
  CHECK_THROWS_WITH_AS(load_checkpoint(path.string()),
                       doctest::Contains("audio.dense0.weight"),
                       std::runtime_error);

  // Cut the very last tensor instead.
  write_file(path, bytes.substr(0, bytes.size() - 2));
  CHECK_THROWS_WITH_AS(load_checkpoint(path.string()),
                       doctest::Contains("log_tau.adam_v"), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint with trailing bytes is rejected") {
  DualEncoder model(small_config());
  AdamState adam = AdamState::for_params(model.parameters(), 5e-4);
  const auto path = temp_path("trailing.rclp");
  save_checkpoint(model, adam, path.string());
  std::string bytes = read_file(path);
  bytes += "junk";
  write_file(path, bytes);
  CHECK_THROWS_WITH_AS(load_checkpoint(path.string()),
                       doctest::Contains("trailing"), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("missing checkpoint file is reported") {
  CHECK_THROWS_WITH_AS(load_checkpoint("/nonexistent/nowhere.rclp"),
                       doctest::Contains("cannot open"), std::runtime_error);
}
