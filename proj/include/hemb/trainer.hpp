#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hemb/model.hpp"

namespace hemb {

enum class Variant { kGlobal, kGrouped, kHierarchical };
enum class Optimizer { kSgd, kAdagrad };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);
std::string to_string(Optimizer opt);
Optimizer optimizer_from_string(const std::string& name);

struct TrainConfig {
  ModelConfig model;
  double learning_rate = 0.05;
  Optimizer optimizer = Optimizer::kAdagrad;
  int epochs = 5;
  int minibatch = 64;      // sentences per step
  double init_std = 0.1;
  int threads = 1;
  int checkpoint_every = 0;  // epochs; 0 disables intermediate checkpoints
  Variant variant = Variant::kHierarchical;
  // Reuse the seed-derived eval negative lists every epoch instead of
  // resampling; used by tests that track the fixed-negative objective.
  bool fixed_negatives = false;
  bool lr_decay = false;   // linear decay over the full run
};

struct TrainReport {
  std::vector<double> epoch_objective;  // per-position running estimates
  uint64_t param_checksum = 0;
  double wall_seconds = 0.0;
  uint64_t seed = 0;
  std::string variant;
  size_t corpus_sentences = 0;
  size_t corpus_positions = 0;
};

// Embedding-table depth for a variant: 0 for global, 1 for grouped, the
// full height for hierarchical. Grouped requires height >= 1.
int variant_depth(Variant variant, const Taxonomy& tax);

// Alpha and the root table are drawn i.i.d. Normal(0, init_std^2); every
// child table starts as an exact copy of its parent, so the hierarchical
// penalty is zero at step 0. Tables are created for nodes with
// level <= variant_depth.
ModelParams init_params(const Vocabulary& vocab, const Taxonomy& tax, const TrainConfig& cfg,
                        Rng& rng);

// Sparse gradient keyed by (table, word row).
class SparseGrad {
 public:
  explicit SparseGrad(int dim) : dim_(dim) {}

  static uint64_t key(bool is_alpha, NodeId node, WordId word) {
    const uint64_t table = is_alpha ? 0 : static_cast<uint64_t>(node) + 1;
    return (table << 32) | static_cast<uint64_t>(word);
  }

  std::span<double> grad_row(bool is_alpha, NodeId node, WordId word) {
    auto& row = rows_[key(is_alpha, node, word)];
    if (row.empty()) row.assign(static_cast<size_t>(dim_), 0.0);
    return row;
  }

  const std::vector<double>* find(bool is_alpha, NodeId node, WordId word) const {
    auto it = rows_.find(key(is_alpha, node, word));
    return it == rows_.end() ? nullptr : &it->second;
  }

  const std::unordered_map<uint64_t, std::vector<double>>& rows() const { return rows_; }
  void clear() { rows_.clear(); }
  int dim() const { return dim_; }

 private:
  int dim_;
  std::unordered_map<uint64_t, std::vector<double>> rows_;
};

// Dense gradient buffer mirroring the parameter tables; the trainer's
// per-step accumulator.
struct DenseGrad {
  Matrix alpha;
  std::map<NodeId, Matrix> rho;

  static DenseGrad like(const ModelParams& params);
  void zero();
  std::span<double> grad_row(bool is_alpha, NodeId node, WordId word) {
    return is_alpha ? alpha.row(word) : rho.at(node).row(word);
  }
};

// Gradient of the data term of position i scored at node_id: entries
// (x - sigmoid(eta)) * ctx for the scored rho rows and the matching
// residual for every context word's alpha row. Returns the position's
// data log-likelihood.
double grad_data_term(const ModelParams& params, const EncodedSentence& sentence, int i,
                      std::span<const WordId> negatives, NodeId node_id,
                      const ModelConfig& cfg, SparseGrad& grad);

// Gradient of all prior terms; touches every row of every table.
void grad_prior_terms(const ModelParams& params, const Taxonomy& tax, double sigma,
                      double sigma0, SparseGrad& grad);

// Full gradient of objective() at fixed negatives; verification helper.
SparseGrad full_gradient(const ModelParams& params, const EncodedCorpus& corpus,
                         const Taxonomy& tax, const ModelConfig& cfg,
                         const FixedNegatives& negatives);

// Minibatch gradient-ascent driver. With threads == 1 the run is strictly
// sequential and bit-reproducible; with threads > 1 sentences are sharded
// across workers that update rows without locks, and the prior sweep is
// applied once per epoch.
class Trainer {
 public:
  Trainer(const EncodedCorpus& corpus, const Taxonomy& tax, const Vocabulary& vocab,
          const TrainConfig& cfg);

  void run_epoch();
  int epochs_run() const { return epochs_run_; }
  const ModelParams& params() const { return params_; }
  const TrainConfig& config() const { return cfg_; }
  const std::vector<double>& epoch_objectives() const { return epoch_objectives_; }
  TrainReport report() const;

 private:
  void sequential_epoch(uint64_t negative_seed);
  void threaded_epoch(uint64_t negative_seed);
  void apply_dense(double lr);
  void apply_sparse(const SparseGrad& grad, double lr);
  double current_lr() const;

  const EncodedCorpus& corpus_;
  const Taxonomy& tax_;
  TrainConfig cfg_;
  NegativeSampler sampler_;
  std::vector<NodeId> train_node_;      // resolved node -> tabled training node
  std::vector<size_t> position_offset_; // per-sentence global position base
  size_t total_positions_ = 0;
  ModelParams params_;
  DenseGrad grad_;
  DenseGrad adagrad_;                   // squared-gradient accumulators
  int epochs_run_ = 0;
  size_t steps_done_ = 0;
  size_t planned_steps_ = 0;
  std::vector<double> epoch_objectives_;
  double wall_seconds_ = 0.0;
};

std::pair<ModelParams, TrainReport> train(const EncodedCorpus& corpus, const Taxonomy& tax,
                                          const Vocabulary& vocab, const TrainConfig& cfg);

}  // namespace hemb
