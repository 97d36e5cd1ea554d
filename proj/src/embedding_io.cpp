#include "hemb/embedding_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hemb {

void write_word2vec_text(const std::string& path, const Matrix& matrix,
                         const Vocabulary& vocab) {
  if (matrix.rows() != vocab.size()) {
    throw std::invalid_argument("matrix rows do not match vocabulary size");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write embeddings file: " + path);
  out << matrix.rows() << ' ' << matrix.cols() << '\n';
  char buf[32];
  for (size_t v = 0; v < matrix.rows(); ++v) {
    out << vocab.word(static_cast<WordId>(v));
    for (double value : matrix.row(v)) {
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(static_cast<float>(value)));
      out << ' ' << buf;
    }
    out << '\n';
  }
}

TextEmbeddings read_word2vec_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read embeddings file: " + path);
  size_t rows = 0;
  size_t cols = 0;
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty embeddings file: " + path);
  {
    std::istringstream hs(header);
    if (!(hs >> rows >> cols)) throw std::runtime_error("bad embeddings header: " + header);
  }
  TextEmbeddings out;
  out.words.reserve(rows);
  out.matrix = Matrix(rows, cols);
  std::string line;
  for (size_t v = 0; v < rows; ++v) {
    if (!std::getline(in, line)) throw std::runtime_error("truncated embeddings file: " + path);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) throw std::runtime_error("malformed embeddings line: " + line);
    out.words.push_back(word);
    auto row = out.matrix.row(v);
    for (size_t k = 0; k < cols; ++k) {
      float value = 0.0f;
      if (!(ls >> value)) throw std::runtime_error("malformed embeddings line: " + line);
      row[k] = static_cast<double>(value);
    }
  }
  return out;
}

}  // namespace hemb
