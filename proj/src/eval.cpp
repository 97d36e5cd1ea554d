#include "hemb/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hemb {

LLReport heldout_ll(const ModelParams& params, const EncodedCorpus& heldout,
                    const Taxonomy& tax, const ModelConfig& cfg, const Vocabulary& vocab,
                    uint64_t seed, const std::string& variant_label) {
  if (heldout.sentences.empty()) throw std::runtime_error("empty held-out corpus");

  NegativeSampler sampler(vocab, cfg.negative_distribution);
  FixedNegatives negatives = make_fixed_negatives(heldout, sampler, cfg.negatives, seed);

  LLReport report;
  report.variant = variant_label;
  report.n_positions = heldout.total_positions();

  PositionWorkspace ws;
  double positive = 0.0;
  double negative = 0.0;
  size_t g = 0;
  for (const auto& sentence : heldout.sentences) {
    const Matrix& rho = params.rho_table(params.table_node(sentence.node, tax));
    for (size_t i = 0; i < sentence.tokens.size(); ++i, ++g) {
      position_loglik(params, sentence.tokens, static_cast<int>(i), negatives.at(g), rho,
                      cfg, ws, &positive, &negative);
    }
  }
  report.positive_ll = positive / static_cast<double>(report.n_positions);
  report.negative_ll = negative / static_cast<double>(report.n_positions);
  report.per_observation_ll = (positive + negative) / static_cast<double>(report.n_positions);
  return report;
}

namespace {

RankedWords top_k(std::vector<ScoredWord> scored, size_t k) {
  std::sort(scored.begin(), scored.end(), [](const ScoredWord& a, const ScoredWord& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.word < b.word;
  });
  if (scored.size() > k) scored.resize(k);
  return RankedWords{std::move(scored)};
}

}  // namespace

RankedWords deviation_ranking(const ModelParams& params, const Taxonomy& tax, NodeId node,
                              size_t k) {
  if (node == tax.root()) throw std::invalid_argument("root has no parent");
  if (!params.has_table(node)) {
    throw std::runtime_error("node '" + tax.node(node).path +
                             "' has no embedding table in this model");
  }
  const Matrix& child = params.rho_table(node);
  const Matrix& parent = params.rho_table(params.table_node(tax.node(node).parent, tax));

  std::vector<ScoredWord> scored(child.rows());
  for (size_t v = 0; v < child.rows(); ++v) {
    auto c = child.row(v);
    auto p = parent.row(v);
    double sq = 0.0;
    for (size_t j = 0; j < c.size(); ++j) {
      const double d = c[j] - p[j];
      sq += d * d;
    }
    scored[v] = {static_cast<WordId>(v), std::sqrt(sq)};
  }
  return top_k(std::move(scored), k);
}

RankedWords nearest_neighbors(const ModelParams& params, const Taxonomy& tax, NodeId node,
                              WordId word, size_t k, bool exclude_self) {
  const Matrix& table = params.rho_table(params.table_node(node, tax));
  if (word >= table.rows()) throw std::runtime_error("word id out of range");

  auto query = table.row(word);
  std::vector<ScoredWord> scored;
  scored.reserve(table.rows());
  for (size_t v = 0; v < table.rows(); ++v) {
    if (exclude_self && v == word) continue;
    auto row = table.row(v);
    double sq = 0.0;
    for (size_t j = 0; j < row.size(); ++j) {
      const double d = row[j] - query[j];
      sq += d * d;
    }
    scored.push_back({static_cast<WordId>(v), -std::sqrt(sq)});
  }
  return top_k(std::move(scored), k);
}

}  // namespace hemb
