#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hemb {

using WordId = uint32_t;

// Word <-> dense id mapping with occurrence counts. Ids are assigned by
// descending count, ties broken lexicographically, so builds are
// reproducible. Frequencies are relative to the full token stream seen at
// build time, including tokens of words later truncated away.
class Vocabulary {
 public:
  Vocabulary() = default;

  size_t size() const { return words_.size(); }
  std::optional<WordId> find(std::string_view word) const;
  WordId id_of(std::string_view word) const;  // throws if absent
  const std::string& word(WordId id) const { return words_.at(id); }
  uint64_t count(WordId id) const { return counts_.at(id); }
  double freq(WordId id) const {
    return static_cast<double>(counts_.at(id)) / static_cast<double>(total_tokens_);
  }
  uint64_t total_tokens() const { return total_tokens_; }

  // Text format: one "word<TAB>count" per line, in id order.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

 private:
  friend class VocabBuilder;
  std::vector<std::string> words_;
  std::vector<uint64_t> counts_;
  std::unordered_map<std::string, WordId> index_;
  uint64_t total_tokens_ = 0;
};

// Accumulates token counts; counts from sharded builders merge
// associatively via merge().
class VocabBuilder {
 public:
  void add(std::string_view token);
  void add_all(const std::vector<std::string>& tokens);
  void merge(const VocabBuilder& other);
  uint64_t total_tokens() const { return total_; }

  // Keeps the max_size most frequent words. Throws on an empty stream.
  Vocabulary build(size_t max_size) const;

 private:
  std::unordered_map<std::string, uint64_t> counts_;
  uint64_t total_ = 0;
};

}  // namespace hemb
