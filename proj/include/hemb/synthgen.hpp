#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hemb/corpus.hpp"

namespace hemb {

// One planted domain-shifted word: it appears in node_a surrounded by
// partner_set_a words and in node_b surrounded by partner_set_b words,
// giving the same word two distinct co-occurrence contexts.
struct PlantedWordSpec {
  std::string word;
  std::string node_a;
  std::vector<std::string> partners_a;
  std::string node_b;
  std::vector<std::string> partners_b;
};

struct SynthSpec {
  int vocab_size = 500;
  std::vector<int> branching = {3, 2};  // children per level; size = depth
  int sentences_per_node = 2000;
  int sentence_length = 12;
  int planted_words = 5;     // auto-assigned when planted is empty
  int partner_set_size = 20;
  double zipf_exponent = 1.0;
  double shift_strength = 0.3;  // probability a sentence carries the planted word
  int window = 4;               // partner words fill this radius around the planted word
  uint64_t seed = 1;
  std::vector<PlantedWordSpec> planted;
};

struct SynthData {
  std::vector<RawRecord> records;
  // node path -> planted words whose usage was shifted at that node
  std::map<std::string, std::vector<std::string>> ground_truth;
};

// Fills spec.planted with the default assignment: planted words at
// mid-frequency ranks, paired across leaves (alternating different-parent
// and same-parent pairs), partner sets carved from disjoint rank blocks.
void assign_default_planted(SynthSpec& spec);

// Emits sentences_per_node sentences of Zipf-distributed background words
// for every non-root node. In a planted word's nodes, each sentence
// carries the word with probability shift_strength, its window filled
// with partner-set draws. Deterministic given the seed.
SynthData generate(const SynthSpec& spec);

void write_ground_truth_json(const std::string& path,
                             const std::map<std::string, std::vector<std::string>>& truth);
std::map<std::string, std::vector<std::string>> read_ground_truth_json(const std::string& path);

}  // namespace hemb
