#include "reclap/tokenizer.hpp"

#include <array>
#include <unordered_set>

namespace reclap {

namespace {

constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}

char lower(unsigned char c) {
  if (c >= 'A' && c <= 'Z') return static_cast<char>(c - 'A' + 'a');
  return static_cast<char>(c);
}

const std::unordered_set<std::string>& stopwords() {
  static const std::unordered_set<std::string> words = {
      "a",  "an", "and", "are",  "as",   "at",   "be", "by", "for", "from",
      "in", "is", "it",  "its",  "of",   "on",   "or", "s",  "the", "this",
      "to", "was", "with", "that", "these", "those"};
  return words;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = kFnvOffsetBasis;
  for (unsigned char c : text) {
    hash ^= static_cast<std::uint64_t>(c);
    hash *= kFnvPrime;
  }
  return hash;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      current.push_back(lower(c));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

TokenSequence tokenize(std::string_view text, std::size_t vocab_buckets) {
  TokenSequence tokens;
  for (const auto& word : split_words(text)) {
    tokens.push_back(
        static_cast<std::uint32_t>(fnv1a64(word) % vocab_buckets));
  }
  return tokens;
}

std::vector<std::string> content_words(std::string_view text) {
  std::vector<std::string> words;
  for (auto& word : split_words(text)) {
    if (!stopwords().count(word)) words.push_back(std::move(word));
  }
  return words;
}

bool is_stopword(std::string_view word) {
  return stopwords().count(std::string(word)) > 0;
}

}  // namespace reclap
