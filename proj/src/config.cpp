#include "hemb/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hemb {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::runtime_error("config key '" + key + "': expected a boolean, got '" + value + "'");
}

int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': expected an integer, got '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
  if (key == "max_vocab") max_vocab = static_cast<uint64_t>(parse_int(key, value));
  else if (key == "subsample") subsample = parse_bool(key, value);
  else if (key == "subsample_threshold") subsample_threshold = parse_double(key, value);
  else if (key == "split_sentences") split_sentences = parse_bool(key, value);
  else if (key == "min_node_size") min_node_size = static_cast<uint64_t>(parse_int(key, value));
  else if (key == "dim") dim = static_cast<int>(parse_int(key, value));
  else if (key == "window") window = static_cast<int>(parse_int(key, value));
  else if (key == "negatives") negatives = static_cast<int>(parse_int(key, value));
  else if (key == "sigma") sigma = parse_double(key, value);
  else if (key == "global_prior_std") global_prior_std = parse_double(key, value);
  else if (key == "negative_distribution") negative_distribution = value;
  else if (key == "seed") seed = static_cast<uint64_t>(parse_int(key, value));
  else if (key == "context_mean") context_mean = parse_bool(key, value);
  else if (key == "propagate_data_to_ancestors") propagate_data_to_ancestors = parse_bool(key, value);
  else if (key == "learning_rate") learning_rate = parse_double(key, value);
  else if (key == "optimizer") optimizer = value;
  else if (key == "epochs") epochs = static_cast<int>(parse_int(key, value));
  else if (key == "minibatch") minibatch = static_cast<int>(parse_int(key, value));
  else if (key == "init_std") init_std = parse_double(key, value);
  else if (key == "threads") threads = static_cast<int>(parse_int(key, value));
  else if (key == "checkpoint_every") checkpoint_every = static_cast<int>(parse_int(key, value));
  else if (key == "variant") variant = value;
  else if (key == "fixed_negatives") fixed_negatives = parse_bool(key, value);
  else if (key == "lr_decay") lr_decay = parse_bool(key, value);
  else if (key == "topk") topk = static_cast<int>(parse_int(key, value));
  else if (key == "include_self") include_self = parse_bool(key, value);
  else if (key == "synth_vocab") synth_vocab = static_cast<int>(parse_int(key, value));
  else if (key == "branching") branching = value;
  else if (key == "sentences_per_node") sentences_per_node = static_cast<int>(parse_int(key, value));
  else if (key == "sentence_length") sentence_length = static_cast<int>(parse_int(key, value));
  else if (key == "planted_words") planted_words = static_cast<int>(parse_int(key, value));
  else if (key == "partner_set") partner_set = static_cast<int>(parse_int(key, value));
  else if (key == "zipf_exponent") zipf_exponent = parse_double(key, value);
  else if (key == "shift_strength") shift_strength = parse_double(key, value);
  else throw std::runtime_error("unknown config key: '" + key + "'");
}

void RunConfig::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file: " + path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 'key = value', got '" + line + "'");
    }
    apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

TrainConfig RunConfig::to_train_config() const {
  TrainConfig cfg;
  cfg.model.dim = dim;
  cfg.model.window = window;
  cfg.model.negatives = negatives;
  cfg.model.sigma = sigma;
  cfg.model.global_prior_std = global_prior_std;
  cfg.model.negative_distribution = negative_distribution_from_string(negative_distribution);
  cfg.model.seed = seed;
  cfg.model.context_mean = context_mean;
  cfg.model.propagate_data_to_ancestors = propagate_data_to_ancestors;
  cfg.learning_rate = learning_rate;
  cfg.optimizer = optimizer_from_string(optimizer);
  cfg.epochs = epochs;
  cfg.minibatch = minibatch;
  cfg.init_std = init_std;
  cfg.threads = threads;
  cfg.checkpoint_every = checkpoint_every;
  cfg.variant = variant_from_string(variant);
  cfg.fixed_negatives = fixed_negatives;
  cfg.lr_decay = lr_decay;
  return cfg;
}

EncodeOptions RunConfig::to_encode_options() const {
  EncodeOptions opts;
  opts.subsample = subsample;
  opts.subsample_threshold = subsample_threshold;
  opts.seed = seed;
  opts.tokenizer.split_sentences = split_sentences;
  return opts;
}

SynthSpec RunConfig::to_synth_spec() const {
  SynthSpec spec;
  spec.vocab_size = synth_vocab;
  spec.branching.clear();
  std::istringstream bs(branching);
  std::string part;
  while (std::getline(bs, part, ',')) {
    if (part.empty()) continue;
    spec.branching.push_back(static_cast<int>(parse_int("branching", part)));
  }
  if (spec.branching.empty()) {
    throw std::runtime_error("config key 'branching': expected comma-separated factors");
  }
  spec.sentences_per_node = sentences_per_node;
  spec.sentence_length = sentence_length;
  spec.planted_words = planted_words;
  spec.partner_set_size = partner_set;
  spec.zipf_exponent = zipf_exponent;
  spec.shift_strength = shift_strength;
  spec.window = window;
  spec.seed = seed;
  return spec;
}

}  // namespace hemb
