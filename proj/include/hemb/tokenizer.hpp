#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hemb {

struct TokenizerConfig {
  bool lowercase = true;
  // When set, records are split into sentences on [.!?] before encoding.
  bool split_sentences = false;
};

// Lowercases and splits on runs of non-alphanumeric ASCII. Bytes >= 0x80
// (UTF-8 multibyte sequences) are kept inside tokens untouched, so no
// codepoint is ever split in half.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& cfg = {});

// Splits on [.!?]; empty chunks are dropped.
std::vector<std::string> split_sentences(std::string_view text);

}  // namespace hemb
