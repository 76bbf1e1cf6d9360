#pragma once

// Small text helpers shared by the parsers and lexical detectors.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sldx::text {

std::string ascii_lower(std::string_view s);

/// Trims and collapses runs of whitespace to a single space.
std::string collapse_whitespace(std::string_view s);

struct Token {
  std::string norm;   // ASCII-lowercased token text
  std::size_t begin;  // byte offsets into the source
  std::size_t end;
};

/// Word tokens: maximal runs of ASCII letters/digits and non-ASCII letters.
/// Punctuation (including the U+2000..U+206F block) and apostrophes split
/// tokens, so "nose" never yields "no" and "don't" yields "don", "t".
std::vector<Token> tokenize(std::string_view s);

/// Lowercased token strings only.
std::vector<std::string> words(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Lowercase hex of a byte buffer.
std::string to_hex(const unsigned char* data, std::size_t n);

}  // namespace sldx::text
