#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace raglab::text {

// A normalized token together with the byte span it came from.
struct Token {
  std::string folded;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Splits UTF-8 text on runs of non-alphanumeric code points and case-folds
// each token. Offsets are byte offsets into `text`. Invalid UTF-8 bytes are
// treated as separators.
std::vector<Token> tokenize(std::string_view text);

// Folded token strings only.
std::vector<std::string> normalized_tokens(std::string_view text);

// Unique folded tokens.
std::set<std::string> word_set(std::string_view text);

// Normalized form used for equality tests: folded tokens joined by one space.
std::string normalize(std::string_view text);

// Locates the first contiguous occurrence of `needle` inside `haystack`.
// Returns the index of the first matching haystack token.
std::optional<std::size_t> find_token_sequence(const std::vector<std::string>& haystack,
                                               const std::vector<std::string>& needle);

bool contains_token_sequence(std::string_view haystack, std::string_view needle);

std::string trim(std::string_view s);

}  // namespace raglab::text
