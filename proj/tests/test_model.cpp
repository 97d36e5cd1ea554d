#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <set>

#include "hemb/model.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace hemb;

TEST_CASE("context_window truncates at sentence boundaries") {
  CHECK(context_window(10, 5, 2) == std::vector<int>{3, 4, 6, 7});
  CHECK(context_window(3, 0, 4) == std::vector<int>{1, 2});
  CHECK(context_window(1, 0, 3).empty());
}

TEST_CASE("context_sum adds the alpha rows of the window") {
  Matrix alpha(3, 2);
  alpha.row(1)[0] = 1.0;
  alpha.row(1)[1] = 2.0;
  alpha.row(2)[0] = 3.0;
  alpha.row(2)[1] = -1.0;
  std::vector<WordId> tokens{0, 1, 2};
  std::vector<double> out(2);

  context_sum(tokens, 0, 2, alpha, false, out);  // context = {1, 2}
  CHECK(out[0] == doctest::Approx(4.0));
  CHECK(out[1] == doctest::Approx(1.0));

  context_sum(tokens, 0, 1, alpha, false, out);  // singleton context = {1}
  CHECK(out[0] == doctest::Approx(1.0));
  CHECK(out[1] == doctest::Approx(2.0));

  std::vector<WordId> lone{0};
  context_sum(lone, 0, 4, alpha, false, out);  // empty window
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);

  context_sum(tokens, 0, 2, alpha, true, out);  // mean option
  CHECK(out[0] == doctest::Approx(2.0));
  CHECK(out[1] == doctest::Approx(0.5));
}

TEST_CASE("natural_param is the dot product") {
  std::vector<double> rho{1.0, 0.0};
  std::vector<double> ctx{2.0, 3.0};
  CHECK(natural_param(rho, ctx) == doctest::Approx(2.0));
  std::vector<double> zero{0.0, 0.0};
  CHECK(natural_param(zero, ctx) == 0.0);
  std::vector<double> half{0.5, -0.5};
  std::vector<double> twos{2.0, 2.0};
  CHECK(natural_param(half, twos) == doctest::Approx(0.0));
  std::vector<double> wrong{1.0};
  CHECK_THROWS_AS(natural_param(wrong, ctx), std::invalid_argument);
}

TEST_CASE("natural_param is bilinear in rho") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> rho(3), ctx(3);
    for (auto& v : rho) v = rng.gaussian();
    for (auto& v : ctx) v = rng.gaussian();
    const double a = rng.gaussian();
    std::vector<double> scaled = rho;
    for (auto& v : scaled) v *= a;
    CHECK(natural_param(scaled, ctx) ==
          doctest::Approx(a * natural_param(rho, ctx)).epsilon(1e-12));
  }
}

TEST_CASE("bernoulli_logprob values") {
  CHECK(bernoulli_logprob(1, 0.0) == doctest::Approx(-0.6931472).epsilon(1e-6));
  CHECK(bernoulli_logprob(0, 0.0) == doctest::Approx(-0.6931472).epsilon(1e-6));
  CHECK(bernoulli_logprob(1, 2.0) == doctest::Approx(-0.1269280).epsilon(1e-6));
  // Stays finite far into the tails.
  CHECK(std::isfinite(bernoulli_logprob(1, 1000.0)));
  CHECK(std::isfinite(bernoulli_logprob(0, -1000.0)));
  CHECK(std::isfinite(bernoulli_logprob(1, -1000.0)));
}

TEST_CASE("bernoulli identities over the eta grid") {
  for (double eta = -30.0; eta <= 30.0; eta += 0.125) {
    const double p1 = std::exp(bernoulli_logprob(1, eta));
    const double p0 = std::exp(bernoulli_logprob(0, eta));
    CHECK(std::abs(p1 + p0 - 1.0) < 1e-12);
    CHECK(std::abs(bernoulli_logprob(1, eta) - bernoulli_logprob(0, eta) - eta) <=
          1e-12 * std::max(1.0, std::abs(eta)));
  }
}

TEST_CASE("prior_penalty") {
  std::vector<double> child{1.0, 2.0};
  std::vector<double> parent{1.0, 2.0};
  CHECK(prior_penalty(child, parent, 3.0) == 0.0);

  std::vector<double> c2{1.0, 1.0};
  std::vector<double> p2{0.0, 0.0};
  CHECK(prior_penalty(c2, p2, 1.0) == doctest::Approx(-1.0));  // ||diff||^2 = 2

  std::vector<double> c3{10.0, 10.0};
  std::vector<double> p3{0.0, 0.0};
  CHECK(prior_penalty(c3, p3, 10.0) == doctest::Approx(-1.0));  // 200 / (2*100)

  CHECK(prior_penalty(c2, 1.0) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(prior_penalty(c2, p2, 0.0), std::invalid_argument);
}

TEST_CASE("prior_penalty is never positive and zero only at the parent") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> child(4), parent(4);
    for (auto& v : child) v = rng.gaussian();
    for (auto& v : parent) v = rng.gaussian();
    const double p = prior_penalty(child, parent, 0.5 + rng.uniform01());
    CHECK(p <= 0.0);
    if (child != parent) CHECK(p < 0.0);
  }
}

TEST_CASE("sample_negatives excludes the positive id") {
  auto vocab = testsup::make_vocab(2);
  NegativeSampler sampler(vocab, NegativeDistribution::kUniform);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) CHECK(sampler.draw(rng, 0) == 1);

  std::vector<WordId> none;
  sampler.fill(rng, 0, none);  // nu = 0 is a no-op
  CHECK(none.empty());
}

TEST_CASE("uniform negative sampling is unbiased") {
  const uint32_t V = 100;
  auto vocab = testsup::make_vocab(V);
  NegativeSampler sampler(vocab, NegativeDistribution::kUniform);
  Rng rng(2);
  const size_t draws = 1000000;
  std::vector<size_t> histogram(V, 0);
  const WordId positive = 17;
  for (size_t i = 0; i < draws; ++i) ++histogram[sampler.draw(rng, positive)];
  CHECK(histogram[positive] == 0);
  const double p = 1.0 / (V - 1);
  const double sigma3 = 3.0 * std::sqrt(draws * p * (1 - p));
  for (uint32_t v = 0; v < V; ++v) {
    if (v == positive) continue;
    CHECK(std::abs(static_cast<double>(histogram[v]) - draws * p) < sigma3 + 1.0);
  }
}

TEST_CASE("unigram^0.75 sampling tracks the expected distribution") {
  auto vocab = testsup::make_vocab(8);
  NegativeSampler sampler(vocab, NegativeDistribution::kUnigramPow75);
  Rng rng(99);
  const size_t draws = 400000;
  const WordId positive = 7;
  std::vector<size_t> histogram(8, 0);
  for (size_t i = 0; i < draws; ++i) ++histogram[sampler.draw(rng, positive)];
  CHECK(histogram[positive] == 0);

  double total = 0.0;
  std::vector<double> weight(8);
  for (WordId v = 0; v < 8; ++v) {
    weight[v] = std::pow(static_cast<double>(vocab.count(v)), 0.75);
    if (v != positive) total += weight[v];
  }
  for (WordId v = 0; v < 8; ++v) {
    if (v == positive) continue;
    const double p = weight[v] / total;
    const double sigma3 = 3.0 * std::sqrt(draws * p * (1 - p));
    CHECK(std::abs(static_cast<double>(histogram[v]) - draws * p) < sigma3 + 1.0);
  }
}

TEST_CASE("fixed negatives are deterministic per position") {
  auto inst = testsup::random_tiny_instance(21);
  NegativeSampler sampler(inst.vocab, NegativeDistribution::kUniform);
  auto a = make_fixed_negatives(inst.corpus, sampler, 5, 777);
  auto b = make_fixed_negatives(inst.corpus, sampler, 5, 777);
  CHECK(a.ids == b.ids);
  size_t g = 0;
  for (const auto& sentence : inst.corpus.sentences) {
    for (size_t i = 0; i < sentence.tokens.size(); ++i, ++g) {
      for (WordId u : a.at(g)) CHECK(u != sentence.tokens[i]);
    }
  }
}

TEST_CASE("objective of an empty corpus with zero params is zero") {
  auto vocab = testsup::make_vocab(4);
  auto tax = Taxonomy::build({{"A", 1}}, 0);
  ModelParams params;
  params.dim = 2;
  params.alpha = Matrix(4, 2);
  params.rho.emplace(0, Matrix(4, 2));
  params.rho.emplace(1, Matrix(4, 2));
  ModelConfig cfg;
  cfg.dim = 2;
  EncodedCorpus empty;
  FixedNegatives none;
  none.per_position = cfg.negatives;
  CHECK(objective(params, empty, tax, cfg, none) == 0.0);
}

TEST_CASE("objective matches a fully hand-expanded sum on a one-sentence instance") {
  // One sentence of two words, K=1, one negative per position.
  auto vocab = testsup::make_vocab(3);
  auto tax = Taxonomy::build({{"A", 1}}, 0);
  const NodeId a = tax.resolve("A");

  ModelParams params;
  params.dim = 1;
  params.alpha = Matrix(3, 1);
  params.alpha.row(0)[0] = 0.3;
  params.alpha.row(1)[0] = -0.2;
  params.alpha.row(2)[0] = 0.5;
  Matrix root(3, 1), leaf(3, 1);
  root.row(0)[0] = 0.1;
  root.row(1)[0] = 0.4;
  root.row(2)[0] = -0.6;
  leaf.row(0)[0] = 0.2;
  leaf.row(1)[0] = -0.1;
  leaf.row(2)[0] = 0.7;
  params.rho.emplace(0, root);
  params.rho.emplace(a, leaf);

  ModelConfig cfg;
  cfg.dim = 1;
  cfg.window = 1;
  cfg.negatives = 1;
  cfg.sigma = 2.0;
  cfg.global_prior_std = 1.5;

  EncodedCorpus corpus;
  corpus.sentences.push_back({{0, 1}, a});
  FixedNegatives negatives;
  negatives.per_position = 1;
  negatives.ids = {2, 2};

  auto lp = [](int x, double eta) {
    const double p = 1.0 / (1.0 + std::exp(-eta));
    return std::log(x == 1 ? p : 1.0 - p);
  };
  // Position 0: ctx = alpha[w1] = -0.2; true word 0, negative 2.
  double expected = lp(1, 0.2 * -0.2) + lp(0, 0.7 * -0.2);
  // Position 1: ctx = alpha[w0] = 0.3; true word 1, negative 2.
  expected += lp(1, -0.1 * 0.3) + lp(0, 0.7 * 0.3);
  // Hierarchical prior: leaf vs root, sigma = 2.
  expected += -((0.2 - 0.1) * (0.2 - 0.1) + (-0.1 - 0.4) * (-0.1 - 0.4) +
                (0.7 + 0.6) * (0.7 + 0.6)) /
              (2.0 * 4.0);
  // Global priors on the root table and alpha, sigma0 = 1.5.
  expected += -(0.1 * 0.1 + 0.4 * 0.4 + 0.6 * 0.6) / (2.0 * 2.25);
  expected += -(0.3 * 0.3 + 0.2 * 0.2 + 0.5 * 0.5) / (2.0 * 2.25);

  CHECK(objective(params, corpus, tax, cfg, negatives) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("doubling the global prior std shifts the objective by the algebraic amount") {
  auto inst = testsup::random_tiny_instance(31);
  const double before = objective(inst.params, inst.corpus, inst.tax, inst.cfg, inst.negatives);
  ModelConfig doubled = inst.cfg;
  doubled.global_prior_std *= 2.0;
  const double after = objective(inst.params, inst.corpus, inst.tax, doubled, inst.negatives);

  double squares = 0.0;
  for (double v : inst.params.rho.at(inst.tax.root()).values()) squares += v * v;
  for (double v : inst.params.alpha.values()) squares += v * v;
  const double s0 = inst.cfg.global_prior_std;
  const double expected_change = 0.75 * squares / (2.0 * s0 * s0);
  CHECK(after - before == doctest::Approx(expected_change).epsilon(1e-9));
}

TEST_CASE("streaming objective equals the brute-force oracle") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    auto inst = testsup::random_tiny_instance(seed * 101);
    const double fast = objective(inst.params, inst.corpus, inst.tax, inst.cfg, inst.negatives);
    const double slow =
        oracle::objective_bruteforce(inst.params, inst.corpus, inst.tax, inst.cfg, inst.negatives);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-9));
  }
}

TEST_CASE("objective agrees with the oracle under propagation and mean context") {
  auto with_propagate = testsup::random_tiny_instance(555, true, false);
  CHECK(objective(with_propagate.params, with_propagate.corpus, with_propagate.tax,
                  with_propagate.cfg, with_propagate.negatives) ==
        doctest::Approx(oracle::objective_bruteforce(with_propagate.params, with_propagate.corpus,
                                                     with_propagate.tax, with_propagate.cfg,
                                                     with_propagate.negatives))
            .epsilon(1e-9));
  auto with_mean = testsup::random_tiny_instance(556, false, true);
  CHECK(objective(with_mean.params, with_mean.corpus, with_mean.tax, with_mean.cfg,
                  with_mean.negatives) ==
        doctest::Approx(oracle::objective_bruteforce(with_mean.params, with_mean.corpus,
                                                     with_mean.tax, with_mean.cfg,
                                                     with_mean.negatives))
            .epsilon(1e-9));
}

TEST_CASE("objective agrees with the oracle for flattened table sets") {
  auto grouped = testsup::random_tiny_instance(557, false, false, Variant::kGrouped);
  CHECK(objective(grouped.params, grouped.corpus, grouped.tax, grouped.cfg, grouped.negatives) ==
        doctest::Approx(oracle::objective_bruteforce(grouped.params, grouped.corpus, grouped.tax,
                                                     grouped.cfg, grouped.negatives))
            .epsilon(1e-9));
  auto global = testsup::random_tiny_instance(558, false, false, Variant::kGlobal);
  CHECK(objective(global.params, global.corpus, global.tax, global.cfg, global.negatives) ==
        doctest::Approx(oracle::objective_bruteforce(global.params, global.corpus, global.tax,
                                                     global.cfg, global.negatives))
            .epsilon(1e-9));
}

TEST_CASE("non-finite parameters raise a numerical blowup error") {
  auto inst = testsup::random_tiny_instance(60);
  // An infinite alpha entry poisons either a window sum or, at the latest,
  // the global prior term.
  inst.params.alpha.row(0)[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(objective(inst.params, inst.corpus, inst.tax, inst.cfg, inst.negatives),
                  std::runtime_error);
}
