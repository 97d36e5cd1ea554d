#include "hemb/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace hemb {

namespace {

constexpr uint64_t kInitTag = 0x54494e49ULL;   // parameter initialization stream
constexpr uint64_t kEpochTag = 0x434f5045ULL;  // per-epoch negative streams
constexpr double kAdagradEps = 1e-8;

void axpy(std::span<double> out, double a, std::span<const double> x) {
  for (size_t k = 0; k < out.size(); ++k) out[k] += a * x[k];
}

// Accumulates the data-term gradient of one position into acc, which
// provides grad_row(is_alpha, node, word) -> span<double>.
template <class Acc>
double add_position_gradient(const ModelParams& params, std::span<const WordId> tokens, int i,
                             std::span<const WordId> negatives, NodeId node_id,
                             const ModelConfig& cfg, Acc& acc, PositionWorkspace& ws) {
  const auto dim = static_cast<size_t>(params.dim);
  ws.ctx.resize(dim);
  ws.alpha_residual.assign(dim, 0.0);
  context_sum(tokens, i, cfg.window, params.alpha, cfg.context_mean, ws.ctx);

  const Matrix& rho = params.rho_table(node_id);
  const WordId v = tokens[i];
  const double eta = natural_param(rho.row(v), ws.ctx);
  if (!std::isfinite(eta)) {
    throw std::runtime_error("numerical blowup: non-finite natural parameter");
  }
  double ll = bernoulli_logprob(1, eta);
  const double gv = 1.0 - sigmoid(eta);
  axpy(acc.grad_row(false, node_id, v), gv, ws.ctx);
  axpy(ws.alpha_residual, gv, rho.row(v));

  for (WordId u : negatives) {
    const double eta_u = natural_param(rho.row(u), ws.ctx);
    if (!std::isfinite(eta_u)) {
      throw std::runtime_error("numerical blowup: non-finite natural parameter");
    }
    ll += bernoulli_logprob(0, eta_u);
    const double gu = -sigmoid(eta_u);
    axpy(acc.grad_row(false, node_id, u), gu, ws.ctx);
    axpy(ws.alpha_residual, gu, rho.row(u));
  }

  const int n = static_cast<int>(tokens.size());
  const int lo = std::max(0, i - cfg.window);
  const int hi = std::min(n - 1, i + cfg.window);
  double scale = 1.0;
  if (cfg.context_mean) {
    const int count = (hi - lo + 1) - (i >= lo && i <= hi ? 1 : 0);
    if (count > 0) scale = 1.0 / count;
  }
  for (int j = lo; j <= hi; ++j) {
    if (j == i) continue;
    axpy(acc.grad_row(true, 0, tokens[j]), scale, ws.alpha_residual);
  }
  return ll;
}

template <class Acc>
void add_prior_gradient(const ModelParams& params, const Taxonomy& tax, double sigma,
                        double sigma0, double scale, Acc& acc, double* penalty_out) {
  const NodeId root = tax.root();
  const double inv_s2 = 1.0 / (sigma * sigma);
  const double inv_s02 = 1.0 / (sigma0 * sigma0);
  double penalty = 0.0;

  for (const auto& [node, table] : params.rho) {
    if (node == root) continue;
    const NodeId parent_node = params.table_node(tax.node(node).parent, tax);
    const Matrix& parent = params.rho_table(parent_node);
    for (size_t v = 0; v < table.rows(); ++v) {
      auto child_row = table.row(v);
      auto parent_row = parent.row(v);
      auto g_child = acc.grad_row(false, node, static_cast<WordId>(v));
      auto g_parent = acc.grad_row(false, parent_node, static_cast<WordId>(v));
      for (size_t k = 0; k < child_row.size(); ++k) {
        const double diff = child_row[k] - parent_row[k];
        g_child[k] -= scale * diff * inv_s2;
        g_parent[k] += scale * diff * inv_s2;
        penalty -= 0.5 * diff * diff * inv_s2;
      }
    }
  }
  const Matrix& root_table = params.rho_table(root);
  for (size_t v = 0; v < root_table.rows(); ++v) {
    auto row = root_table.row(v);
    auto g = acc.grad_row(false, root, static_cast<WordId>(v));
    for (size_t k = 0; k < row.size(); ++k) {
      g[k] -= scale * row[k] * inv_s02;
      penalty -= 0.5 * row[k] * row[k] * inv_s02;
    }
  }
  for (size_t v = 0; v < params.alpha.rows(); ++v) {
    auto row = params.alpha.row(v);
    auto g = acc.grad_row(true, 0, static_cast<WordId>(v));
    for (size_t k = 0; k < row.size(); ++k) {
      g[k] -= scale * row[k] * inv_s02;
      penalty -= 0.5 * row[k] * row[k] * inv_s02;
    }
  }
  if (penalty_out) *penalty_out += penalty;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kGlobal: return "global";
    case Variant::kGrouped: return "grouped";
    case Variant::kHierarchical: return "hierarchical";
  }
  return "hierarchical";
}

Variant variant_from_string(const std::string& name) {
  if (name == "global") return Variant::kGlobal;
  if (name == "grouped") return Variant::kGrouped;
  if (name == "hierarchical") return Variant::kHierarchical;
  throw std::invalid_argument("unknown variant: " + name +
                              " (expected global, grouped or hierarchical)");
}

std::string to_string(Optimizer opt) {
  return opt == Optimizer::kSgd ? "sgd" : "adagrad";
}

Optimizer optimizer_from_string(const std::string& name) {
  if (name == "sgd") return Optimizer::kSgd;
  if (name == "adagrad") return Optimizer::kAdagrad;
  throw std::invalid_argument("unknown optimizer: " + name + " (expected sgd or adagrad)");
}

int variant_depth(Variant variant, const Taxonomy& tax) {
  switch (variant) {
    case Variant::kGlobal: return 0;
    case Variant::kGrouped:
      if (tax.height() < 1) {
        throw std::invalid_argument("grouped variant requires a taxonomy of height >= 1");
      }
      return 1;
    case Variant::kHierarchical: return tax.height();
  }
  return tax.height();
}

ModelParams init_params(const Vocabulary& vocab, const Taxonomy& tax, const TrainConfig& cfg,
                        Rng& rng) {
  const int depth = variant_depth(cfg.variant, tax);
  const auto V = vocab.size();
  const auto K = static_cast<size_t>(cfg.model.dim);

  ModelParams params;
  params.dim = cfg.model.dim;
  params.alpha = Matrix(V, K);
  for (auto& v : params.alpha.values()) v = rng.gaussian() * cfg.init_std;

  Matrix root(V, K);
  for (auto& v : root.values()) v = rng.gaussian() * cfg.init_std;
  params.rho.emplace(tax.root(), std::move(root));

  // Node ids are assigned level by level, so parents are always created
  // before their children in this sweep.
  for (const auto& node : tax.nodes()) {
    if (node.level == 0 || node.level > depth) continue;
    params.rho.emplace(node.id, params.rho.at(node.parent));
  }
  return params;
}

DenseGrad DenseGrad::like(const ModelParams& params) {
  DenseGrad grad;
  grad.alpha = Matrix(params.alpha.rows(), params.alpha.cols());
  for (const auto& [node, table] : params.rho) {
    grad.rho.emplace(node, Matrix(table.rows(), table.cols()));
  }
  return grad;
}

void DenseGrad::zero() {
  alpha.fill(0.0);
  for (auto& [node, table] : rho) table.fill(0.0);
}

double grad_data_term(const ModelParams& params, const EncodedSentence& sentence, int i,
                      std::span<const WordId> negatives, NodeId node_id,
                      const ModelConfig& cfg, SparseGrad& grad) {
  PositionWorkspace ws;
  return add_position_gradient(params, sentence.tokens, i, negatives, node_id, cfg, grad, ws);
}

void grad_prior_terms(const ModelParams& params, const Taxonomy& tax, double sigma,
                      double sigma0, SparseGrad& grad) {
  add_prior_gradient(params, tax, sigma, sigma0, 1.0, grad, nullptr);
}

SparseGrad full_gradient(const ModelParams& params, const EncodedCorpus& corpus,
                         const Taxonomy& tax, const ModelConfig& cfg,
                         const FixedNegatives& negatives) {
  SparseGrad grad(params.dim);
  PositionWorkspace ws;
  size_t g = 0;
  for (const auto& sentence : corpus.sentences) {
    auto chain = data_term_nodes(sentence.node, tax, cfg.propagate_data_to_ancestors);
    for (size_t i = 0; i < sentence.tokens.size(); ++i, ++g) {
      NodeId previous = kNoNode;
      for (NodeId d : chain) {
        const NodeId tabled = params.table_node(d, tax);
        if (tabled == previous) continue;
        previous = tabled;
        add_position_gradient(params, sentence.tokens, static_cast<int>(i), negatives.at(g),
                              tabled, cfg, grad, ws);
      }
    }
  }
  add_prior_gradient(params, tax, cfg.sigma, cfg.global_prior_std, 1.0, grad, nullptr);
  return grad;
}

Trainer::Trainer(const EncodedCorpus& corpus, const Taxonomy& tax, const Vocabulary& vocab,
                 const TrainConfig& cfg)
    : corpus_(corpus), tax_(tax), cfg_(cfg),
      sampler_(vocab, cfg.model.negative_distribution) {
  if (corpus.sentences.empty()) throw std::runtime_error("cannot train on an empty corpus");
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(cfg.learning_rate > 0)) throw std::invalid_argument("learning_rate must be > 0");

  const int depth = variant_depth(cfg.variant, tax);
  train_node_.resize(tax.size());
  for (NodeId n = 0; n < tax.size(); ++n) {
    train_node_[n] = tax.ancestor_at_level(n, depth);
  }

  position_offset_.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) {
    position_offset_.push_back(total_positions_);
    total_positions_ += s.tokens.size();
  }

  Rng init_rng(mix_seed(cfg.model.seed, kInitTag));
  params_ = init_params(vocab, tax, cfg, init_rng);
  grad_ = DenseGrad::like(params_);
  if (cfg.optimizer == Optimizer::kAdagrad) adagrad_ = DenseGrad::like(params_);

  const size_t batch = std::max<size_t>(1, static_cast<size_t>(cfg.minibatch));
  const size_t steps_per_epoch = (corpus.sentences.size() + batch - 1) / batch;
  planned_steps_ = steps_per_epoch * static_cast<size_t>(cfg.epochs);
}

double Trainer::current_lr() const {
  if (!cfg_.lr_decay || planned_steps_ == 0) return cfg_.learning_rate;
  const double progress = static_cast<double>(steps_done_) / static_cast<double>(planned_steps_);
  return cfg_.learning_rate * std::max(1.0 - progress, 1e-4);
}

void Trainer::apply_dense(double lr) {
  auto apply_table = [&](Matrix& theta, const Matrix& g_table, Matrix* acc_table) {
    const auto& g = g_table.values();
    auto& values = theta.values();
    for (size_t c = 0; c < values.size(); ++c) {
      const double gc = g[c];
      if (gc == 0.0) continue;
      double step = lr * gc;
      if (acc_table) {
        double& acc = acc_table->values()[c];
        acc += gc * gc;
        step = lr * gc / (std::sqrt(acc) + kAdagradEps);
      }
      values[c] += step;
      if (!std::isfinite(values[c])) {
        throw std::runtime_error(
            "numerical blowup: non-finite parameter at epoch " + std::to_string(epochs_run_ + 1) +
            ", step " + std::to_string(steps_done_ + 1) + "; try a lower learning rate");
      }
    }
  };
  const bool ada = cfg_.optimizer == Optimizer::kAdagrad;
  apply_table(params_.alpha, grad_.alpha, ada ? &adagrad_.alpha : nullptr);
  for (auto& [node, table] : params_.rho) {
    apply_table(table, grad_.rho.at(node), ada ? &adagrad_.rho.at(node) : nullptr);
  }
}

void Trainer::apply_sparse(const SparseGrad& grad, double lr) {
  const bool ada = cfg_.optimizer == Optimizer::kAdagrad;
  for (const auto& [key, row] : grad.rows()) {
    const bool is_alpha = (key >> 32) == 0;
    const NodeId node = is_alpha ? 0 : static_cast<NodeId>((key >> 32) - 1);
    const auto word = static_cast<WordId>(key & 0xffffffffULL);
    auto theta = is_alpha ? params_.alpha.row(word) : params_.rho.at(node).row(word);
    std::span<double> acc;
    if (ada) {
      acc = is_alpha ? adagrad_.alpha.row(word) : adagrad_.rho.at(node).row(word);
    }
    for (size_t k = 0; k < theta.size(); ++k) {
      const double gc = row[k];
      if (gc == 0.0) continue;
      double step = lr * gc;
      if (ada) {
        acc[k] += gc * gc;
        step = lr * gc / (std::sqrt(acc[k]) + kAdagradEps);
      }
      theta[k] += step;
      if (!std::isfinite(theta[k])) {
        throw std::runtime_error(
            "numerical blowup: non-finite parameter at epoch " + std::to_string(epochs_run_ + 1) +
            "; try a lower learning rate");
      }
    }
  }
}

void Trainer::run_epoch() {
  const auto start = std::chrono::steady_clock::now();
  const uint64_t negative_seed =
      cfg_.fixed_negatives ? cfg_.model.seed
                           : mix_seed(cfg_.model.seed, kEpochTag,
                                      static_cast<uint64_t>(epochs_run_) + 1);
  if (cfg_.threads > 1) {
    threaded_epoch(negative_seed);
  } else {
    sequential_epoch(negative_seed);
  }
  ++epochs_run_;
  wall_seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void Trainer::sequential_epoch(uint64_t negative_seed) {
  const size_t batch_size = std::max<size_t>(1, static_cast<size_t>(cfg_.minibatch));
  const size_t n_sentences = corpus_.sentences.size();
  const auto nu = static_cast<size_t>(cfg_.model.negatives);

  PositionWorkspace ws;
  std::vector<WordId> negatives(nu);
  double epoch_objective = 0.0;

  for (size_t begin = 0; begin < n_sentences; begin += batch_size) {
    const size_t end = std::min(begin + batch_size, n_sentences);
    grad_.zero();
    double batch_ll = 0.0;
    for (size_t s = begin; s < end; ++s) {
      const auto& sentence = corpus_.sentences[s];
      const NodeId assigned = train_node_[sentence.node];
      auto chain = data_term_nodes(assigned, tax_, cfg_.model.propagate_data_to_ancestors);
      for (size_t i = 0; i < sentence.tokens.size(); ++i) {
        const size_t g = position_offset_[s] + i;
        if (nu > 0) {
          Rng rng(mix_seed(negative_seed, g));
          sampler_.fill(rng, sentence.tokens[i], negatives);
        }
        for (NodeId d : chain) {
          batch_ll += add_position_gradient(params_, sentence.tokens, static_cast<int>(i),
                                            negatives, d, cfg_.model, grad_, ws);
        }
      }
    }
    const double prior_scale =
        static_cast<double>(end - begin) / static_cast<double>(n_sentences);
    double prior_penalty_total = 0.0;
    add_prior_gradient(params_, tax_, cfg_.model.sigma, cfg_.model.global_prior_std,
                       prior_scale, grad_, &prior_penalty_total);
    epoch_objective += batch_ll + prior_scale * prior_penalty_total;
    apply_dense(current_lr());
    ++steps_done_;
  }
  epoch_objectives_.push_back(epoch_objective / static_cast<double>(total_positions_));
}

void Trainer::threaded_epoch(uint64_t negative_seed) {
  const size_t n_sentences = corpus_.sentences.size();
  const auto n_threads = static_cast<size_t>(cfg_.threads);
  const auto nu = static_cast<size_t>(cfg_.model.negatives);
  std::vector<double> thread_ll(n_threads, 0.0);
  std::vector<std::thread> workers;
  workers.reserve(n_threads);

  const double lr = current_lr();
  for (size_t t = 0; t < n_threads; ++t) {
    workers.emplace_back([&, t] {
      const size_t begin = n_sentences * t / n_threads;
      const size_t end = n_sentences * (t + 1) / n_threads;
      PositionWorkspace ws;
      std::vector<WordId> negatives(nu);
      SparseGrad grad(params_.dim);
      double ll = 0.0;
      for (size_t s = begin; s < end; ++s) {
        const auto& sentence = corpus_.sentences[s];
        const NodeId assigned = train_node_[sentence.node];
        auto chain = data_term_nodes(assigned, tax_, cfg_.model.propagate_data_to_ancestors);
        grad.clear();
        for (size_t i = 0; i < sentence.tokens.size(); ++i) {
          const size_t g = position_offset_[s] + i;
          if (nu > 0) {
            Rng rng(mix_seed(negative_seed, g));
            sampler_.fill(rng, sentence.tokens[i], negatives);
          }
          for (NodeId d : chain) {
            ll += add_position_gradient(params_, sentence.tokens, static_cast<int>(i),
                                        negatives, d, cfg_.model, grad, ws);
          }
        }
        apply_sparse(grad, lr);  // lock-free row updates, word2vec style
      }
      thread_ll[t] = ll;
    });
  }
  for (auto& w : workers) w.join();

  grad_.zero();
  double prior_penalty_total = 0.0;
  add_prior_gradient(params_, tax_, cfg_.model.sigma, cfg_.model.global_prior_std, 1.0,
                     grad_, &prior_penalty_total);
  apply_dense(lr);
  steps_done_ += std::max<size_t>(1, n_sentences / std::max<size_t>(1, cfg_.minibatch));

  double data_ll = 0.0;
  for (double ll : thread_ll) data_ll += ll;
  epoch_objectives_.push_back((data_ll + prior_penalty_total) /
                              static_cast<double>(total_positions_));
}

TrainReport Trainer::report() const {
  TrainReport report;
  report.epoch_objective = epoch_objectives_;
  report.param_checksum = params_.checksum();
  report.wall_seconds = wall_seconds_;
  report.seed = cfg_.model.seed;
  report.variant = to_string(cfg_.variant);
  report.corpus_sentences = corpus_.sentences.size();
  report.corpus_positions = total_positions_;
  return report;
}

std::pair<ModelParams, TrainReport> train(const EncodedCorpus& corpus, const Taxonomy& tax,
                                          const Vocabulary& vocab, const TrainConfig& cfg) {
  Trainer trainer(corpus, tax, vocab, cfg);
  for (int e = 0; e < cfg.epochs; ++e) trainer.run_epoch();
  auto report = trainer.report();
  return {trainer.params(), report};
}

}  // namespace hemb
