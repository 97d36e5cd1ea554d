#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hemb/corpus.hpp"
#include "hemb/matrix.hpp"
#include "hemb/rng.hpp"
#include "hemb/taxonomy.hpp"
#include "hemb/vocabulary.hpp"

namespace hemb {

enum class NegativeDistribution { kUniform, kUnigramPow75 };

std::string to_string(NegativeDistribution dist);
NegativeDistribution negative_distribution_from_string(const std::string& name);

struct ModelConfig {
  int dim = 100;
  int window = 4;
  int negatives = 10;
  double sigma = 10.0;             // parent-child prior std
  double global_prior_std = 1.0;   // zero-mean prior std on the root table and alpha
  NegativeDistribution negative_distribution = NegativeDistribution::kUniform;
  uint64_t seed = 1;
  bool context_mean = false;       // average the context rows instead of summing
  bool propagate_data_to_ancestors = false;
};

// One shared context-vector table plus one embedding table per trained
// taxonomy node. Under flattened variants only nodes up to the training
// depth carry tables; lookups for deeper nodes fall back to the nearest
// tabled ancestor.
struct ModelParams {
  Matrix alpha;
  std::map<NodeId, Matrix> rho;  // ordered: serialization and sweeps are deterministic
  int dim = 0;

  bool has_table(NodeId node) const { return rho.count(node) > 0; }
  const Matrix& rho_table(NodeId node) const;
  Matrix& rho_table(NodeId node);

  // Nearest ancestor of node (possibly node itself) that has a table.
  NodeId table_node(NodeId node, const Taxonomy& tax) const;

  bool all_finite() const;
  // FNV-1a over the float32 little-endian serialization of all tables.
  uint64_t checksum() const;
};

// Context positions j != i with |j - i| <= w, truncated at the sentence
// boundaries.
std::vector<int> context_window(int sentence_length, int i, int w);

// Sum (or mean) of the alpha rows of the words in the context window of
// position i. Writes a zero vector when the window is empty.
void context_sum(std::span<const WordId> tokens, int i, int w, const Matrix& alpha,
                 bool mean, std::span<double> out);

double sigmoid(double x);

// Dot product rho . ctx: the Bernoulli log-odds under the identity link.
double natural_param(std::span<const double> rho_row, std::span<const double> ctx);

// x * eta - softplus(eta), with the numerically stable softplus.
double bernoulli_logprob(int x, double eta);

// -||child - parent||^2 / (2 sigma^2); the Gaussian log-density with its
// additive normalization constant dropped.
double prior_penalty(std::span<const double> child, std::span<const double> parent,
                     double sigma);
// Same with a zero-mean prior.
double prior_penalty(std::span<const double> row, double sigma);

// Draws negative ids i.i.d. from the configured distribution, resampling
// any draw equal to the positive id.
class NegativeSampler {
 public:
  NegativeSampler(const Vocabulary& vocab, NegativeDistribution dist);

  WordId draw(Rng& rng, WordId positive) const;
  void fill(Rng& rng, WordId positive, std::span<WordId> out) const;

 private:
  uint32_t vocab_size_ = 0;
  std::vector<double> cdf_;  // empty for the uniform distribution
};

// One fixed list of negative ids per corpus position, derived from a seed
// so the objective is a pure function of (params, corpus, negatives).
struct FixedNegatives {
  int per_position = 0;
  std::vector<WordId> ids;

  std::span<const WordId> at(size_t position) const {
    return {ids.data() + position * static_cast<size_t>(per_position),
            static_cast<size_t>(per_position)};
  }
};

// Position g gets its list from an Rng seeded with mix_seed(seed, g).
FixedNegatives make_fixed_negatives(const EncodedCorpus& corpus, const NegativeSampler& sampler,
                                    int count, uint64_t seed);

// The full training objective: Bernoulli data terms over all positions
// (positives plus fixed negatives), parent-child penalties for every
// non-root table, and zero-mean penalties on the root table and alpha.
// Throws "numerical blowup" on any non-finite intermediate.
double objective(const ModelParams& params, const EncodedCorpus& corpus, const Taxonomy& tax,
                 const ModelConfig& cfg, const FixedNegatives& negatives);

// Scratch buffers reused across positions.
struct PositionWorkspace {
  std::vector<double> ctx;
  std::vector<double> alpha_residual;
};

// Data log-probability of one position scored against one embedding
// table: bernoulli_logprob(1, eta_true) plus the zero-labelled terms of
// the negatives. Shared by the objective and the held-out evaluator; the
// positive/negative decomposition accumulates into the optional sinks.
double position_loglik(const ModelParams& params, std::span<const WordId> tokens, int i,
                       std::span<const WordId> negatives, const Matrix& rho,
                       const ModelConfig& cfg, PositionWorkspace& ws,
                       double* positive_part = nullptr, double* negative_part = nullptr);

// Chain of nodes a sentence's data term applies to under the
// propagate-to-ancestors reading: the resolved node plus its ancestors at
// levels >= 1. Without the flag, just the resolved node.
std::vector<NodeId> data_term_nodes(NodeId node, const Taxonomy& tax, bool propagate);

}  // namespace hemb
