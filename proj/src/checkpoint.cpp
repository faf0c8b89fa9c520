#include "reclap/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace reclap {

namespace {

constexpr char kMagic[4] = {'R', 'C', 'L', 'P'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32(out, bits);
}

void append_tensor(std::string& out, const Tensor2D& t) {
  for (const double v : t.data) put_f32(out, static_cast<float>(v));
}

// Cursor over the raw file bytes; every read names what it was reading when
// the bytes run out.
struct Reader {
  const std::string& bytes;
  std::size_t offset = 0;

  void require(std::size_t n, const std::string& what) {
    if (offset + n > bytes.size()) {
      throw std::runtime_error("checkpoint truncated while reading " + what);
    }
  }

  std::uint32_t read_u32(const std::string& what) {
    require(4, what);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
    offset += 4;
    return static_cast<std::uint32_t>(p[0]) |
           (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
  }

  void read_tensor(Tensor2D& t, const std::string& name) {
    for (std::size_t i = 0; i < t.data.size(); ++i) {
      const std::uint32_t bits = read_u32("tensor " + name);
      float v;
      std::memcpy(&v, &bits, sizeof(v));
      t.data[i] = static_cast<double>(v);
    }
  }
};

}  // namespace

void save_checkpoint(const DualEncoder& model, const AdamState& adam,
                     const std::string& path) {
  const auto params = model.parameters();
  if (adam.first_moment.size() != params.size() ||
      adam.second_moment.size() != params.size()) {
    throw std::runtime_error(
        "save_checkpoint: optimizer state does not match the parameter list");
  }

  nlohmann::json doc;
  doc["model"] = model.config().to_json();
  doc["adam"] = {{"learning_rate", adam.learning_rate},
                 {"beta1", adam.beta1},
                 {"beta2", adam.beta2},
                 {"epsilon", adam.epsilon},
                 {"step", adam.step}};
  const std::string config_bytes = doc.dump();

  std::string out;
  out.append(kMagic, sizeof(kMagic));
  out.push_back(static_cast<char>(kVersion));
  put_u32(out, static_cast<std::uint32_t>(config_bytes.size()));
  out += config_bytes;
  for (const Tensor2D* p : params) append_tensor(out, *p);
  for (const Tensor2D& m : adam.first_moment) append_tensor(out, m);
  for (const Tensor2D& v : adam.second_moment) append_tensor(out, v);

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) {
    throw std::runtime_error("cannot write checkpoint: " + path);
  }
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open checkpoint: " + path);
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  const std::string bytes = buffer.str();

  Reader reader{bytes};
  reader.require(sizeof(kMagic), "magic bytes");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("checkpoint has bad magic (expected \"RCLP\"): " +
                             path);
  }
  reader.offset += sizeof(kMagic);
  reader.require(1, "version byte");
  const auto version =
      static_cast<std::uint8_t>(bytes[reader.offset++]);
  if (version != kVersion) {
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version) + " (expected " +
                             std::to_string(kVersion) + ")");
  }

  const std::uint32_t config_len = reader.read_u32("config length");
  reader.require(config_len, "config document");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(
        bytes.substr(reader.offset, config_len));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("checkpoint config is not valid JSON: ") +
                             e.what());
  }
  reader.offset += config_len;

  const ModelConfig config = ModelConfig::from_json(doc.at("model"));
  LoadedCheckpoint loaded{DualEncoder(config), AdamState{}};

  const auto& adam_doc = doc.at("adam");
  loaded.adam = AdamState::for_params(loaded.model.parameters(),
                                      adam_doc.at("learning_rate").get<double>());
  loaded.adam.beta1 = adam_doc.at("beta1").get<double>();
  loaded.adam.beta2 = adam_doc.at("beta2").get<double>();
  loaded.adam.epsilon = adam_doc.at("epsilon").get<double>();
  loaded.adam.step = adam_doc.at("step").get<std::int64_t>();

  const auto params = loaded.model.parameters();
  const auto names = loaded.model.parameter_names();
  for (std::size_t i = 0; i < params.size(); ++i) {
    reader.read_tensor(*params[i], names[i]);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    reader.read_tensor(loaded.adam.first_moment[i], names[i] + ".adam_m");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    reader.read_tensor(loaded.adam.second_moment[i], names[i] + ".adam_v");
  }
  if (reader.offset != bytes.size()) {
    throw std::runtime_error("checkpoint has " +
                             std::to_string(bytes.size() - reader.offset) +
                             " trailing bytes: " + path);
  }
  return loaded;
}

}  // namespace reclap
