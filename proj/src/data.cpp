#include "reclap/data.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "reclap/tokenizer.hpp"

namespace reclap {

namespace {

using nlohmann::json;

[[noreturn]] void line_error(const std::string& path, std::size_t line,
                             const std::string& message) {
  throw std::runtime_error(path + " line " + std::to_string(line) + ": " +
                           message);
}

json parse_line(const std::string& path, std::size_t line,
                const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    line_error(path, line, std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object()) {
    line_error(path, line, "expected one object per line");
  }
  return doc;
}

std::string take_string(json& doc, const char* key, const std::string& path,
                        std::size_t line) {
  if (!doc.contains(key) || !doc[key].is_string()) {
    line_error(path, line, std::string("missing or non-string \"") + key +
                               "\" field");
  }
  std::string value = doc[key].get<std::string>();
  doc.erase(key);
  return value;
}

std::vector<float> take_float_array(json& doc, const char* key,
                                    const std::string& path,
                                    std::size_t line) {
  std::vector<float> values;
  const json& arr = doc[key];
  if (!arr.is_array()) {
    line_error(path, line, std::string("\"") + key + "\" must be an array");
  }
  values.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) {
      line_error(path, line,
                 std::string("\"") + key + "\" must contain only numbers");
    }
    values.push_back(v.get<float>());
  }
  doc.erase(key);
  return values;
}

std::string read_lines_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Invokes fn(line_number, line_text) for every non-empty line.
template <typename Fn>
void for_each_line(const std::string& content, Fn&& fn) {
  std::size_t line = 0;
  std::size_t start = 0;
  while (start <= content.size()) {
    const std::size_t end = content.find('\n', start);
    const std::size_t stop = end == std::string::npos ? content.size() : end;
    ++line;
    std::string text = content.substr(start, stop - start);
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (!text.empty()) fn(line, text);
    if (end == std::string::npos) break;
    start = end + 1;
  }
}

void check_feature_source(const std::string& path, std::size_t line,
                          bool has_inline, bool has_path) {
  if (has_inline == has_path) {
    line_error(path, line,
               "record must carry exactly one of \"features\" and "
               "\"features_path\"");
  }
}

}  // namespace

std::string normalize_text(const std::string& text) {
  std::string out;
  bool in_space = true;
  for (const char ch : text) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      if (!in_space && !out.empty()) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(static_cast<char>(
          ch >= 'A' && ch <= 'Z' ? ch - 'A' + 'a' : ch));
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<SampleRecord> load_manifest(const std::string& path) {
  std::vector<SampleRecord> records;
  std::unordered_map<std::string, std::size_t> first_seen;

  for_each_line(read_lines_file(path), [&](std::size_t line,
                                           const std::string& text) {
    json doc = parse_line(path, line, text);
    SampleRecord record;
    record.id = take_string(doc, "id", path, line);
    const auto [it, inserted] = first_seen.emplace(record.id, line);
    if (!inserted) {
      line_error(path, line,
                 "duplicate id \"" + record.id + "\" (first seen on line " +
                     std::to_string(it->second) + ")");
    }
    record.caption = take_string(doc, "caption", path, line);
    if (split_words(record.caption).empty()) {
      line_error(path, line, "caption of \"" + record.id +
                                 "\" has no alphanumeric tokens");
    }

    check_feature_source(path, line, doc.contains("features"),
                         doc.contains("features_path"));
    if (doc.contains("features")) {
      record.features = take_float_array(doc, "features", path, line);
    } else {
      record.features_path = take_string(doc, "features_path", path, line);
    }

    if (doc.contains("rewrites")) {
      if (!doc["rewrites"].is_array()) {
        line_error(path, line, "\"rewrites\" must be an array of strings");
      }
      for (const auto& r : doc["rewrites"]) {
        if (!r.is_string()) {
          line_error(path, line, "\"rewrites\" must be an array of strings");
        }
        record.rewrites.push_back(r.get<std::string>());
      }
      doc.erase("rewrites");
    }
    record.extra = std::move(doc);
    records.push_back(std::move(record));
  });
  return records;
}

void save_manifest(const std::vector<SampleRecord>& records,
                   const std::string& path) {
  std::string out;
  for (const SampleRecord& record : records) {
    json doc = record.extra;
    doc["id"] = record.id;
    doc["caption"] = record.caption;
    doc["rewrites"] = record.rewrites;
    if (record.inline_features()) {
      doc["features"] = record.features;
    } else {
      doc["features_path"] = record.features_path;
    }
    out += doc.dump();
    out.push_back('\n');
  }
  write_file_locked(path, out);
}

std::vector<float> read_feature_file(const std::string& path) {
  const std::string bytes = read_lines_file(path);
  if (bytes.size() % 4 != 0) {
    throw std::runtime_error("feature file " + path + " has " +
                             std::to_string(bytes.size()) +
                             " bytes, not a multiple of 4");
  }
  std::vector<float> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + 4 * i);
    const std::uint32_t bits =
        static_cast<std::uint32_t>(p[0]) |
        (static_cast<std::uint32_t>(p[1]) << 8) |
        (static_cast<std::uint32_t>(p[2]) << 16) |
        (static_cast<std::uint32_t>(p[3]) << 24);
    std::memcpy(&values[i], &bits, sizeof(float));
  }
  return values;
}

void write_feature_file(const std::string& path,
                        const std::vector<float>& values) {
  std::string bytes;
  bytes.reserve(values.size() * 4);
  for (const float v : values) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    bytes.push_back(static_cast<char>(bits & 0xff));
    bytes.push_back(static_cast<char>((bits >> 8) & 0xff));
    bytes.push_back(static_cast<char>((bits >> 16) & 0xff));
    bytes.push_back(static_cast<char>((bits >> 24) & 0xff));
  }
  write_file_locked(path, bytes);
}

std::vector<float> sample_features(const SampleRecord& record,
                                   const std::string& base_dir,
                                   std::size_t feature_dim) {
  std::vector<float> values;
  if (record.inline_features()) {
    values = record.features;
  } else {
    const auto full =
        std::filesystem::path(base_dir) / record.features_path;
    values = read_feature_file(full.string());
  }
  if (values.size() != feature_dim) {
    throw std::runtime_error(
        "record \"" + record.id + "\" has " + std::to_string(values.size()) +
        " features, expected " + std::to_string(feature_dim));
  }
  return values;
}

Tensor2D feature_matrix(const std::vector<SampleRecord>& records,
                        const std::string& base_dir, std::size_t feature_dim) {
  Tensor2D features(records.size(), feature_dim);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto row = sample_features(records[r], base_dir, feature_dim);
    for (std::size_t c = 0; c < feature_dim; ++c) {
      features.at(r, c) = static_cast<double>(row[c]);
    }
  }
  return features;
}

void LabelSpec::validate() const {
  if (split_words(label).empty()) {
    throw std::runtime_error("label spec has an empty label");
  }
  if (descriptions.empty()) {
    throw std::runtime_error("label \"" + label + "\" has no descriptions");
  }
  std::set<std::string> seen;
  for (const auto& d : descriptions) {
    if (split_words(d).empty()) {
      throw std::runtime_error("label \"" + label +
                               "\" has an untokenizable description");
    }
    if (!seen.insert(normalize_text(d)).second) {
      throw std::runtime_error("label \"" + label +
                               "\" has duplicate descriptions");
    }
  }
  seen.clear();
  for (const auto& prompt : prompts) {
    if (prompt.description_index >= descriptions.size()) {
      throw std::runtime_error(
          "label \"" + label + "\" prompt \"" + prompt.text +
          "\" references description " +
          std::to_string(prompt.description_index) + " of " +
          std::to_string(descriptions.size()));
    }
    if (split_words(prompt.text).empty()) {
      throw std::runtime_error("label \"" + label +
                               "\" has an untokenizable prompt");
    }
    if (!seen.insert(normalize_text(prompt.text)).second) {
      throw std::runtime_error("label \"" + label + "\" prompt \"" +
                               prompt.text + "\" duplicates another prompt");
    }
  }
}

std::vector<LabelSpec> load_label_specs(const std::string& path) {
  std::vector<LabelSpec> specs;
  std::unordered_map<std::string, std::size_t> first_seen;

  for_each_line(read_lines_file(path), [&](std::size_t line,
                                           const std::string& text) {
    json doc = parse_line(path, line, text);
    LabelSpec spec;
    spec.label = take_string(doc, "label", path, line);
    const auto [it, inserted] = first_seen.emplace(spec.label, line);
    if (!inserted) {
      line_error(path, line, "duplicate label \"" + spec.label +
                                 "\" (first seen on line " +
                                 std::to_string(it->second) + ")");
    }
    if (!doc.contains("descriptions") || !doc["descriptions"].is_array()) {
      line_error(path, line, "missing \"descriptions\" array");
    }
    for (const auto& d : doc["descriptions"]) {
      if (!d.is_string()) {
        line_error(path, line, "\"descriptions\" must contain strings");
      }
      spec.descriptions.push_back(d.get<std::string>());
    }
    if (!doc.contains("prompts") || !doc["prompts"].is_array()) {
      line_error(path, line, "missing \"prompts\" array");
    }
    for (const auto& p : doc["prompts"]) {
      if (!p.is_object() || !p.contains("text") ||
          !p.contains("description_index")) {
        line_error(path, line,
                   "prompts must be {text, description_index} objects");
      }
      spec.prompts.push_back(PromptEntry{
          p["text"].get<std::string>(),
          p["description_index"].get<std::size_t>()});
    }
    try {
      spec.validate();
    } catch (const std::runtime_error& e) {
      line_error(path, line, e.what());
    }
    specs.push_back(std::move(spec));
  });
  return specs;
}

void save_label_specs(const std::vector<LabelSpec>& specs,
                      const std::string& path) {
  std::string out;
  for (const LabelSpec& spec : specs) {
    spec.validate();
    json prompts = json::array();
    for (const PromptEntry& p : spec.prompts) {
      prompts.push_back(
          {{"text", p.text}, {"description_index", p.description_index}});
    }
    const json doc = {{"label", spec.label},
                      {"descriptions", spec.descriptions},
                      {"prompts", prompts}};
    out += doc.dump();
    out.push_back('\n');
  }
  write_file_locked(path, out);
}

std::vector<EvalRecord> load_eval_set(const std::string& path) {
  std::vector<EvalRecord> records;
  std::unordered_map<std::string, std::size_t> first_seen;

  for_each_line(read_lines_file(path), [&](std::size_t line,
                                           const std::string& text) {
    json doc = parse_line(path, line, text);
    EvalRecord record;
    record.id = take_string(doc, "id", path, line);
    const auto [it, inserted] = first_seen.emplace(record.id, line);
    if (!inserted) {
      line_error(path, line, "duplicate id \"" + record.id +
                                 "\" (first seen on line " +
                                 std::to_string(it->second) + ")");
    }
    check_feature_source(path, line, doc.contains("features"),
                         doc.contains("features_path"));
    if (doc.contains("features")) {
      record.features = take_float_array(doc, "features", path, line);
    } else {
      record.features_path = take_string(doc, "features_path", path, line);
    }

    const bool has_index = doc.contains("label_index");
    const bool has_relevance = doc.contains("relevance");
    if (has_index == has_relevance) {
      line_error(path, line,
                 "record must carry exactly one of \"label_index\" and "
                 "\"relevance\"");
    }
    if (has_index) {
      if (!doc["label_index"].is_number_integer() ||
          doc["label_index"].get<std::int64_t>() < 0) {
        line_error(path, line, "\"label_index\" must be a non-negative "
                               "integer");
      }
      record.label_index = doc["label_index"].get<std::int64_t>();
    } else {
      for (const auto& v : doc["relevance"]) {
        if (!v.is_number_integer() ||
            (v.get<int>() != 0 && v.get<int>() != 1)) {
          line_error(path, line, "\"relevance\" must contain only 0 or 1");
        }
        record.relevance.push_back(v.get<int>());
      }
      if (record.relevance.empty()) {
        line_error(path, line, "\"relevance\" must be non-empty");
      }
    }
    if (!records.empty() &&
        records.front().multilabel() != record.multilabel()) {
      line_error(path, line,
                 "mixed multi-class and multi-label records in one eval set");
    }
    records.push_back(std::move(record));
  });
  return records;
}

void save_eval_set(const std::vector<EvalRecord>& records,
                   const std::string& path) {
  std::string out;
  for (const EvalRecord& record : records) {
    json doc;
    doc["id"] = record.id;
    if (record.features_path.empty()) {
      doc["features"] = record.features;
    } else {
      doc["features_path"] = record.features_path;
    }
    if (record.multilabel()) {
      doc["relevance"] = record.relevance;
    } else {
      doc["label_index"] = record.label_index;
    }
    out += doc.dump();
    out.push_back('\n');
  }
  write_file_locked(path, out);
}

Tensor2D eval_feature_matrix(const std::vector<EvalRecord>& records,
                             const std::string& base_dir,
                             std::size_t feature_dim) {
  Tensor2D features(records.size(), feature_dim);
  for (std::size_t r = 0; r < records.size(); ++r) {
    std::vector<float> row;
    if (records[r].features_path.empty()) {
      row = records[r].features;
    } else {
      const auto full =
          std::filesystem::path(base_dir) / records[r].features_path;
      row = read_feature_file(full.string());
    }
    if (row.size() != feature_dim) {
      throw std::runtime_error("record \"" + records[r].id + "\" has " +
                               std::to_string(row.size()) +
                               " features, expected " +
                               std::to_string(feature_dim));
    }
    for (std::size_t c = 0; c < feature_dim; ++c) {
      features.at(r, c) = static_cast<double>(row[c]);
    }
  }
  return features;
}

void write_file_locked(const std::string& path, const std::string& bytes) {
  const int fd = ::open(path.c_str(), O_CREAT | O_WRONLY | O_TRUNC, 0644);
  if (fd < 0) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  if (::flock(fd, LOCK_EX) != 0) {
    ::close(fd);
    throw std::runtime_error("cannot lock for writing: " + path);
  }
  std::size_t written = 0;
  while (written < bytes.size()) {
    const ssize_t n =
        ::write(fd, bytes.data() + written, bytes.size() - written);
    if (n <= 0) {
      ::flock(fd, LOCK_UN);
      ::close(fd);
      throw std::runtime_error("short write to: " + path);
    }
    written += static_cast<std::size_t>(n);
  }
  ::flock(fd, LOCK_UN);
  ::close(fd);
}

}  // namespace reclap
