#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hemb/taxonomy.hpp"
#include "hemb/tokenizer.hpp"
#include "hemb/vocabulary.hpp"

namespace hemb {

// One input record: a taxonomy path plus either raw text or, when tokens
// is non-empty, a pre-tokenized sentence that bypasses the tokenizer.
// Records tagged with multiple categories are expected to be duplicated
// upstream, one record per path.
struct RawRecord {
  std::string node_path;
  std::string text;
  std::vector<std::string> tokens;
};

struct EncodedSentence {
  std::vector<WordId> tokens;
  NodeId node = 0;
};

struct EncodedCorpus {
  std::vector<EncodedSentence> sentences;

  size_t total_positions() const {
    size_t n = 0;
    for (const auto& s : sentences) n += s.tokens.size();
    return n;
  }
};

// Probability of keeping one occurrence of a word with relative frequency
// freq: min(1, sqrt(threshold / freq)). Throws on freq <= 0.
double subsample_keep_prob(double freq, double threshold);

struct EncodeOptions {
  bool subsample = false;
  double subsample_threshold = 1e-5;
  uint64_t seed = 0;
  TokenizerConfig tokenizer;
};

// Tokenizes, drops out-of-vocabulary tokens, optionally subsamples
// frequent words, resolves each record's path against the taxonomy, and
// drops sentences left empty. Subsampling decisions are drawn from a
// per-record stream seeded with (seed, record index), so the result is
// deterministic and independent of sharding.
EncodedCorpus encode_corpus(std::span<const RawRecord> records, const Vocabulary& vocab,
                            const Taxonomy& tax, const EncodeOptions& opts);

// Corpus JSONL readers: one object per line with "node" and either "text"
// or "tokens".
std::vector<RawRecord> read_corpus_jsonl(const std::string& path);
void write_corpus_jsonl(const std::string& path, std::span<const RawRecord> records);

// Sentence counts per path, as build_taxonomy input. Honors cfg.split_sentences.
std::vector<std::pair<std::string, uint64_t>> count_sentences_per_path(
    std::span<const RawRecord> records, const TokenizerConfig& cfg);

}  // namespace hemb
