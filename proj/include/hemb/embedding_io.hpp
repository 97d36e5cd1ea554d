#pragma once

#include <string>
#include <vector>

#include "hemb/matrix.hpp"
#include "hemb/vocabulary.hpp"

namespace hemb {

// word2vec text format: a "V K" header line, then one "word v1 ... vK"
// line per word. Values are written as float32 with enough digits to
// round-trip exactly at 32-bit precision.
void write_word2vec_text(const std::string& path, const Matrix& matrix,
                         const Vocabulary& vocab);

struct TextEmbeddings {
  std::vector<std::string> words;
  Matrix matrix;
};

TextEmbeddings read_word2vec_text(const std::string& path);

}  // namespace hemb
