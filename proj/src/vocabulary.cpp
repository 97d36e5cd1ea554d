#include "hemb/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace hemb {

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

WordId Vocabulary::id_of(std::string_view word) const {
  auto id = find(word);
  if (!id) throw std::runtime_error("unknown word: " + std::string(word));
  return *id;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write vocabulary file: " + path);
  for (size_t i = 0; i < words_.size(); ++i) {
    out << words_[i] << '\t' << counts_[i] << '\n';
  }
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read vocabulary file: " + path);
  Vocabulary vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("malformed vocabulary line: " + line);
    }
    std::string word = line.substr(0, tab);
    uint64_t count = std::stoull(line.substr(tab + 1));
    auto id = static_cast<WordId>(vocab.words_.size());
    vocab.index_.emplace(word, id);
    vocab.words_.push_back(std::move(word));
    vocab.counts_.push_back(count);
    vocab.total_tokens_ += count;
  }
  if (vocab.words_.empty()) throw std::runtime_error("empty vocabulary file: " + path);
  return vocab;
}

void VocabBuilder::add(std::string_view token) {
  ++counts_[std::string(token)];
  ++total_;
}

void VocabBuilder::add_all(const std::vector<std::string>& tokens) {
  for (const auto& t : tokens) add(t);
}

void VocabBuilder::merge(const VocabBuilder& other) {
  for (const auto& [word, count] : other.counts_) counts_[word] += count;
  total_ += other.total_;
}

Vocabulary VocabBuilder::build(size_t max_size) const {
  if (max_size < 1) throw std::invalid_argument("max_size must be >= 1");
  if (counts_.empty()) throw std::runtime_error("empty corpus");

  std::vector<std::pair<std::string, uint64_t>> entries(counts_.begin(), counts_.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (entries.size() > max_size) entries.resize(max_size);

  Vocabulary vocab;
  vocab.total_tokens_ = total_;
  vocab.words_.reserve(entries.size());
  vocab.counts_.reserve(entries.size());
  for (auto& [word, count] : entries) {
    auto id = static_cast<WordId>(vocab.words_.size());
    vocab.index_.emplace(word, id);
    vocab.words_.push_back(std::move(word));
    vocab.counts_.push_back(count);
  }
  return vocab;
}

}  // namespace hemb
