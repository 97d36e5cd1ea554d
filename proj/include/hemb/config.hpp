#pragma once

#include <cstdint>
#include <string>

#include "hemb/corpus.hpp"
#include "hemb/synthgen.hpp"
#include "hemb/trainer.hpp"

namespace hemb {

// Flat key=value run configuration shared by every CLI subcommand. Keys
// mirror the long option names; a config file is applied first and
// explicit command-line flags override it. Unknown keys are rejected.
struct RunConfig {
  // corpus / vocabulary
  uint64_t max_vocab = 50000;
  bool subsample = true;
  double subsample_threshold = 1e-5;
  bool split_sentences = false;

  // taxonomy
  uint64_t min_node_size = 30000;

  // model
  int dim = 100;
  int window = 4;
  int negatives = 10;
  double sigma = 10.0;
  double global_prior_std = 1.0;
  std::string negative_distribution = "uniform";
  uint64_t seed = 1;
  bool context_mean = false;
  bool propagate_data_to_ancestors = false;

  // trainer
  double learning_rate = 0.05;
  std::string optimizer = "adagrad";
  int epochs = 5;
  int minibatch = 64;
  double init_std = 0.1;
  int threads = 1;
  int checkpoint_every = 0;
  std::string variant = "hierarchical";
  bool fixed_negatives = false;
  bool lr_decay = false;

  // ranking queries
  int topk = 10;
  bool include_self = false;

  // synthetic corpus generation
  int synth_vocab = 500;
  std::string branching = "3,2";
  int sentences_per_node = 2000;
  int sentence_length = 12;
  int planted_words = 5;
  int partner_set = 20;
  double zipf_exponent = 1.0;
  double shift_strength = 0.3;

  // Applies one key; throws on unknown keys or unparsable values.
  void apply(const std::string& key, const std::string& value);
  // Applies a config file of "key = value" lines; '#' starts a comment.
  void apply_file(const std::string& path);

  TrainConfig to_train_config() const;
  EncodeOptions to_encode_options() const;
  SynthSpec to_synth_spec() const;
};

}  // namespace hemb
