#include "hemb/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "hemb/rng.hpp"

namespace hemb {

double subsample_keep_prob(double freq, double threshold) {
  if (!(freq > 0.0)) throw std::invalid_argument("invalid frequency");
  if (!(threshold > 0.0)) throw std::invalid_argument("subsample threshold must be > 0");
  return std::min(1.0, std::sqrt(threshold / freq));
}

namespace {

// Sentences for one record: the record itself, or its [.!?] chunks.
std::vector<std::vector<std::string>> record_sentences(const RawRecord& record,
                                                       const TokenizerConfig& cfg) {
  std::vector<std::vector<std::string>> out;
  if (!record.tokens.empty()) {
    out.push_back(record.tokens);
    return out;
  }
  if (cfg.split_sentences) {
    for (const auto& chunk : split_sentences(record.text)) {
      auto tokens = tokenize(chunk, cfg);
      if (!tokens.empty()) out.push_back(std::move(tokens));
    }
  } else {
    auto tokens = tokenize(record.text, cfg);
    if (!tokens.empty()) out.push_back(std::move(tokens));
  }
  return out;
}

}  // namespace

EncodedCorpus encode_corpus(std::span<const RawRecord> records, const Vocabulary& vocab,
                            const Taxonomy& tax, const EncodeOptions& opts) {
  EncodedCorpus corpus;
  for (size_t r = 0; r < records.size(); ++r) {
    const RawRecord& record = records[r];
    NodeId node = tax.resolve(record.node_path);
    Rng rng(mix_seed(opts.seed, r));
    for (const auto& tokens : record_sentences(record, opts.tokenizer)) {
      EncodedSentence sentence;
      sentence.node = node;
      sentence.tokens.reserve(tokens.size());
      for (const auto& token : tokens) {
        auto id = vocab.find(token);
        if (!id) continue;
        if (opts.subsample) {
          double keep = subsample_keep_prob(vocab.freq(*id), opts.subsample_threshold);
          if (rng.uniform01() >= keep) continue;
        }
        sentence.tokens.push_back(*id);
      }
      if (!sentence.tokens.empty()) corpus.sentences.push_back(std::move(sentence));
    }
  }
  return corpus;
}

std::vector<RawRecord> read_corpus_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read corpus file: " + path);
  std::vector<RawRecord> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    RawRecord record;
    record.node_path = obj.at("node").get<std::string>();
    if (obj.contains("tokens")) {
      record.tokens = obj.at("tokens").get<std::vector<std::string>>();
    } else {
      record.text = obj.at("text").get<std::string>();
    }
    records.push_back(std::move(record));
  }
  return records;
}

void write_corpus_jsonl(const std::string& path, std::span<const RawRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  for (const auto& record : records) {
    nlohmann::json obj;
    obj["node"] = record.node_path;
    if (!record.tokens.empty()) {
      obj["tokens"] = record.tokens;
    } else {
      obj["text"] = record.text;
    }
    out << obj.dump() << '\n';
  }
}

std::vector<std::pair<std::string, uint64_t>> count_sentences_per_path(
    std::span<const RawRecord> records, const TokenizerConfig& cfg) {
  std::map<std::string, uint64_t> counts;
  for (const auto& record : records) {
    counts[record.node_path] += record_sentences(record, cfg).size();
  }
  return {counts.begin(), counts.end()};
}

}  // namespace hemb
