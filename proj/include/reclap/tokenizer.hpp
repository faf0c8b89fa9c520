#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace reclap {

using TokenSequence = std::vector<std::uint32_t>;

std::uint64_t fnv1a64(std::string_view text);

// Lowercased maximal runs of [a-z0-9]; every other byte is a separator.
std::vector<std::string> split_words(std::string_view text);

// Each word hashed with FNV-1a-64 and reduced mod vocab_buckets. Returns an
// empty sequence when the text has no alphanumeric characters; callers that
// need a caption must reject that case.
TokenSequence tokenize(std::string_view text, std::size_t vocab_buckets);

// Words minus a small English stopword list; used to validate generated
// rewrites and prompts by token overlap.
std::vector<std::string> content_words(std::string_view text);

bool is_stopword(std::string_view word);

}  // namespace reclap
