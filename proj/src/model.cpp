#include "hemb/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hemb/bytes.hpp"

namespace hemb {

std::string to_string(NegativeDistribution dist) {
  return dist == NegativeDistribution::kUniform ? "uniform" : "unigram";
}

NegativeDistribution negative_distribution_from_string(const std::string& name) {
  if (name == "uniform") return NegativeDistribution::kUniform;
  if (name == "unigram") return NegativeDistribution::kUnigramPow75;
  throw std::invalid_argument("unknown negative distribution: " + name +
                              " (expected 'uniform' or 'unigram')");
}

const Matrix& ModelParams::rho_table(NodeId node) const {
  auto it = rho.find(node);
  if (it == rho.end()) {
    throw std::runtime_error("no embedding table for node id " + std::to_string(node));
  }
  return it->second;
}

Matrix& ModelParams::rho_table(NodeId node) {
  auto it = rho.find(node);
  if (it == rho.end()) {
    throw std::runtime_error("no embedding table for node id " + std::to_string(node));
  }
  return it->second;
}

NodeId ModelParams::table_node(NodeId node, const Taxonomy& tax) const {
  NodeId current = node;
  while (!has_table(current)) {
    NodeId parent = tax.node(current).parent;
    if (parent == kNoNode) {
      throw std::runtime_error("model has no table for node '" + tax.node(node).path +
                               "' or any of its ancestors");
    }
    current = parent;
  }
  return current;
}

bool ModelParams::all_finite() const {
  if (!alpha.all_finite()) return false;
  for (const auto& [node, table] : rho) {
    if (!table.all_finite()) return false;
  }
  return true;
}

uint64_t ModelParams::checksum() const {
  std::string bytes;
  bytes.reserve((alpha.rows() * alpha.cols() + 8) * 4);
  for (double v : alpha.values()) append_f32_le(bytes, static_cast<float>(v));
  for (const auto& [node, table] : rho) {
    append_f32_le(bytes, static_cast<float>(node));
    for (double v : table.values()) append_f32_le(bytes, static_cast<float>(v));
  }
  return fnv1a64(bytes);
}

std::vector<int> context_window(int sentence_length, int i, int w) {
  std::vector<int> out;
  const int lo = std::max(0, i - w);
  const int hi = std::min(sentence_length - 1, i + w);
  out.reserve(static_cast<size_t>(hi - lo));
  for (int j = lo; j <= hi; ++j) {
    if (j != i) out.push_back(j);
  }
  return out;
}

void context_sum(std::span<const WordId> tokens, int i, int w, const Matrix& alpha,
                 bool mean, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const int n = static_cast<int>(tokens.size());
  const int lo = std::max(0, i - w);
  const int hi = std::min(n - 1, i + w);
  int count = 0;
  for (int j = lo; j <= hi; ++j) {
    if (j == i) continue;
    auto row = alpha.row(tokens[j]);
    for (size_t k = 0; k < out.size(); ++k) out[k] += row[k];
    ++count;
  }
  if (mean && count > 0) {
    for (auto& v : out) v /= count;
  }
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double natural_param(std::span<const double> rho_row, std::span<const double> ctx) {
  if (rho_row.size() != ctx.size()) {
    throw std::invalid_argument("natural_param: dimension mismatch");
  }
  double dot = 0.0;
  for (size_t k = 0; k < rho_row.size(); ++k) dot += rho_row[k] * ctx[k];
  return dot;
}

double bernoulli_logprob(int x, double eta) {
  // softplus(eta) = max(eta, 0) + log1p(exp(-|eta|))
  const double softplus = std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta)));
  return static_cast<double>(x) * eta - softplus;
}

double prior_penalty(std::span<const double> child, std::span<const double> parent,
                     double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  if (child.size() != parent.size()) {
    throw std::invalid_argument("prior_penalty: dimension mismatch");
  }
  double sq = 0.0;
  for (size_t k = 0; k < child.size(); ++k) {
    const double d = child[k] - parent[k];
    sq += d * d;
  }
  return -sq / (2.0 * sigma * sigma);
}

double prior_penalty(std::span<const double> row, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  double sq = 0.0;
  for (double v : row) sq += v * v;
  return -sq / (2.0 * sigma * sigma);
}

NegativeSampler::NegativeSampler(const Vocabulary& vocab, NegativeDistribution dist)
    : vocab_size_(static_cast<uint32_t>(vocab.size())) {
  if (dist == NegativeDistribution::kUnigramPow75) {
    cdf_.resize(vocab.size());
    double total = 0.0;
    for (size_t v = 0; v < vocab.size(); ++v) {
      total += std::pow(static_cast<double>(vocab.count(static_cast<WordId>(v))), 0.75);
      cdf_[v] = total;
    }
    for (auto& c : cdf_) c /= total;
    cdf_.back() = 1.0;
  }
}

WordId NegativeSampler::draw(Rng& rng, WordId positive) const {
  if (vocab_size_ < 2) {
    throw std::runtime_error("negative sampling requires a vocabulary of size >= 2");
  }
  while (true) {
    WordId id;
    if (cdf_.empty()) {
      id = rng.uniform_below(vocab_size_);
    } else {
      const double u = rng.uniform01();
      id = static_cast<WordId>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
      if (id >= vocab_size_) id = vocab_size_ - 1;
    }
    if (id != positive) return id;
  }
}

void NegativeSampler::fill(Rng& rng, WordId positive, std::span<WordId> out) const {
  for (auto& id : out) id = draw(rng, positive);
}

FixedNegatives make_fixed_negatives(const EncodedCorpus& corpus, const NegativeSampler& sampler,
                                    int count, uint64_t seed) {
  FixedNegatives negatives;
  negatives.per_position = count;
  negatives.ids.resize(corpus.total_positions() * static_cast<size_t>(count));
  size_t g = 0;
  for (const auto& sentence : corpus.sentences) {
    for (size_t i = 0; i < sentence.tokens.size(); ++i, ++g) {
      if (count == 0) continue;
      Rng rng(mix_seed(seed, g));
      sampler.fill(rng, sentence.tokens[i],
                   {negatives.ids.data() + g * static_cast<size_t>(count),
                    static_cast<size_t>(count)});
    }
  }
  return negatives;
}

std::vector<NodeId> data_term_nodes(NodeId node, const Taxonomy& tax, bool propagate) {
  std::vector<NodeId> chain{node};
  if (propagate) {
    NodeId current = node;
    while (tax.node(current).level > 1) {
      current = tax.node(current).parent;
      chain.push_back(current);
    }
  }
  return chain;
}

double position_loglik(const ModelParams& params, std::span<const WordId> tokens, int i,
                       std::span<const WordId> negatives, const Matrix& rho,
                       const ModelConfig& cfg, PositionWorkspace& ws,
                       double* positive_part, double* negative_part) {
  ws.ctx.resize(static_cast<size_t>(params.dim));
  context_sum(tokens, i, cfg.window, params.alpha, cfg.context_mean, ws.ctx);
  const double eta = natural_param(rho.row(tokens[i]), ws.ctx);
  if (!std::isfinite(eta)) throw std::runtime_error("numerical blowup: non-finite natural parameter");
  const double positive = bernoulli_logprob(1, eta);
  double negative = 0.0;
  for (WordId u : negatives) {
    const double eta_u = natural_param(rho.row(u), ws.ctx);
    if (!std::isfinite(eta_u)) throw std::runtime_error("numerical blowup: non-finite natural parameter");
    negative += bernoulli_logprob(0, eta_u);
  }
  if (positive_part) *positive_part += positive;
  if (negative_part) *negative_part += negative;
  return positive + negative;
}

double objective(const ModelParams& params, const EncodedCorpus& corpus, const Taxonomy& tax,
                 const ModelConfig& cfg, const FixedNegatives& negatives) {
  PositionWorkspace ws;
  double total = 0.0;
  size_t g = 0;
  for (const auto& sentence : corpus.sentences) {
    auto chain = data_term_nodes(sentence.node, tax, cfg.propagate_data_to_ancestors);
    for (size_t i = 0; i < sentence.tokens.size(); ++i, ++g) {
      NodeId previous = kNoNode;
      for (NodeId d : chain) {
        const NodeId tabled = params.table_node(d, tax);
        if (tabled == previous) continue;  // flattened tables collapse chain steps
        previous = tabled;
        total += position_loglik(params, sentence.tokens, static_cast<int>(i),
                                 negatives.at(g), params.rho_table(tabled), cfg, ws);
      }
    }
  }
  // Parent-child penalties for every non-root table, then the zero-mean
  // penalties on the root table and the context vectors.
  const NodeId root = tax.root();
  for (const auto& [node, table] : params.rho) {
    if (node == root) continue;
    const Matrix& parent = params.rho_table(params.table_node(tax.node(node).parent, tax));
    for (size_t v = 0; v < table.rows(); ++v) {
      total += prior_penalty(table.row(v), parent.row(v), cfg.sigma);
    }
  }
  const Matrix& root_table = params.rho_table(root);
  for (size_t v = 0; v < root_table.rows(); ++v) {
    total += prior_penalty(root_table.row(v), cfg.global_prior_std);
  }
  for (size_t v = 0; v < params.alpha.rows(); ++v) {
    total += prior_penalty(params.alpha.row(v), cfg.global_prior_std);
  }
  if (!std::isfinite(total)) throw std::runtime_error("numerical blowup: non-finite objective");
  return total;
}

}  // namespace hemb
