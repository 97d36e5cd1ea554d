#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hemb/model.hpp"

namespace hemb {

// Negative-sampled pseudo log-likelihood per position: the training
// objective's data term evaluated with fixed, seed-derived negatives.
// positive_ll / negative_ll expose the per-position decomposition.
struct LLReport {
  double per_observation_ll = 0.0;
  double positive_ll = 0.0;
  double negative_ll = 0.0;
  size_t n_positions = 0;
  std::string variant;
};

struct ScoredWord {
  WordId word = 0;
  double score = 0.0;
};

// Scores in non-increasing order, words distinct.
struct RankedWords {
  std::vector<ScoredWord> items;
};

// The held-out corpus must be encoded with the training vocabulary and
// taxonomy. Sentences at nodes without a table are scored against the
// nearest tabled ancestor, so one implementation serves all variants.
LLReport heldout_ll(const ModelParams& params, const EncodedCorpus& heldout,
                    const Taxonomy& tax, const ModelConfig& cfg, const Vocabulary& vocab,
                    uint64_t seed, const std::string& variant_label = "");

// Top-k words by parent-deviation norm ||rho^d_v - rho^parent(d)_v||_2,
// ties broken by word id ascending. The node must be a non-root node with
// its own table.
RankedWords deviation_ranking(const ModelParams& params, const Taxonomy& tax, NodeId node,
                              size_t k);

// k words closest to the query word's embedding in the node's table by
// euclidean distance, ascending; score is the negative distance. Nodes
// without a table fall back to the nearest tabled ancestor.
RankedWords nearest_neighbors(const ModelParams& params, const Taxonomy& tax, NodeId node,
                              WordId word, size_t k, bool exclude_self);

}  // namespace hemb
