// hemb: trainer and evaluator for taxonomy-structured word embeddings.
//
// Bernoulli embedding models over text tagged with nodes of a domain
// taxonomy: a shared context-vector table plus per-node embedding tables
// tied to their parents by a Gaussian prior. Subcommands cover the whole
// pipeline: vocab, train, eval, neighbors, deviations, synth, export.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "hemb/checkpoint.hpp"
#include "hemb/config.hpp"
#include "hemb/corpus.hpp"
#include "hemb/embedding_io.hpp"
#include "hemb/eval.hpp"
#include "hemb/synthgen.hpp"
#include "hemb/trainer.hpp"

namespace fs = std::filesystem;
using namespace hemb;

namespace {

// Bad invocations and unreadable inputs exit with 2; runtime failures
// (training blowups, unknown words or nodes) exit with 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_readable(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw UsageError("cannot read input file: " + path);
}

void write_ranking_tsv(std::ostream& out, const RankedWords& ranked, const Vocabulary& vocab) {
  char buf[64];
  int rank = 1;
  for (const auto& item : ranked.items) {
    std::snprintf(buf, sizeof(buf), "%.6f", item.score);
    out << rank++ << '\t' << vocab.word(item.word) << '\t' << buf << '\n';
  }
}

void emit_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + out_path);
  out << text;
}

struct Paths {
  std::string corpus;
  std::string vocab;
  std::string model;
  std::string out;
  std::string truth;
  std::string taxonomy;
  std::string node = "Global";
  std::string word;
  std::string table = "rho";
  std::string config;  // applied in a pre-pass; registered for --help only
};

void run_vocab(const RunConfig& rc, const Paths& paths) {
  require_readable(paths.corpus);
  auto records = read_corpus_jsonl(paths.corpus);
  TokenizerConfig tokenizer;
  tokenizer.split_sentences = rc.split_sentences;
  VocabBuilder builder;
  for (const auto& record : records) {
    if (!record.tokens.empty()) {
      builder.add_all(record.tokens);
    } else {
      builder.add_all(tokenize(record.text, tokenizer));
    }
  }
  auto vocab = builder.build(rc.max_vocab);
  vocab.save(paths.out);
  std::cout << "V=" << vocab.size() << " tokens=" << vocab.total_tokens() << '\n';
}

Taxonomy build_taxonomy_for(const RunConfig& rc, const Paths& paths,
                            const std::vector<RawRecord>& records,
                            const TokenizerConfig& tokenizer) {
  auto counts = count_sentences_per_path(records, tokenizer);
  if (!paths.taxonomy.empty()) {
    require_readable(paths.taxonomy);
    std::ifstream in(paths.taxonomy);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      counts.emplace_back(line, 0);  // structure-only node
    }
  }
  return Taxonomy::build(counts, rc.min_node_size);
}

void run_train(const RunConfig& rc, const Paths& paths) {
  require_readable(paths.corpus);
  require_readable(paths.vocab);
  auto vocab = Vocabulary::load(paths.vocab);
  auto records = read_corpus_jsonl(paths.corpus);

  auto opts = rc.to_encode_options();
  auto tax = build_taxonomy_for(rc, paths, records, opts.tokenizer);
  auto corpus = encode_corpus(records, vocab, tax, opts);
  std::cout << "encoded " << corpus.sentences.size() << " sentences, "
            << corpus.total_positions() << " positions, " << tax.size()
            << " taxonomy nodes (height " << tax.height() << ")\n";

  auto cfg = rc.to_train_config();
  Trainer trainer(corpus, tax, vocab, cfg);
  for (int e = 0; e < cfg.epochs; ++e) {
    trainer.run_epoch();
    std::cout << "epoch " << (e + 1) << "/" << cfg.epochs
              << " objective=" << trainer.epoch_objectives().back() << '\n';
    const bool last = e + 1 == cfg.epochs;
    if (!last && cfg.checkpoint_every > 0 && (e + 1) % cfg.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof(name), "epoch_%04d", e + 1);
      auto report = trainer.report();
      save_model_dir((fs::path(paths.out) / name).string(), trainer.params(), tax, cfg, vocab,
                     e + 1, &report);
    }
  }
  auto report = trainer.report();
  save_model_dir(paths.out, trainer.params(), tax, cfg, vocab, cfg.epochs, &report);
  char checksum[32];
  std::snprintf(checksum, sizeof(checksum), "%016llx",
                static_cast<unsigned long long>(report.param_checksum));
  std::cout << "model written to " << paths.out << " (checksum " << checksum << ")\n";
}

void run_eval(const RunConfig& rc, const Paths& paths) {
  require_readable(paths.corpus);
  auto model = load_model_dir(paths.model);

  EncodeOptions opts;  // held-out text is never subsampled
  opts.tokenizer.split_sentences = rc.split_sentences;
  auto records = read_corpus_jsonl(paths.corpus);
  auto corpus = encode_corpus(records, model.vocab, model.tax, opts);

  auto report = heldout_ll(model.params, corpus, model.tax, model.cfg.model, model.vocab,
                           rc.seed, to_string(model.cfg.variant));
  emit_output(paths.out, ll_report_to_json(report).dump(2) + "\n");
}

void run_neighbors(const RunConfig& rc, const Paths& paths) {
  auto model = load_model_dir(paths.model);
  const NodeId node = model.tax.resolve(paths.node);
  const WordId word = model.vocab.id_of(paths.word);
  auto ranked = nearest_neighbors(model.params, model.tax, node, word,
                                  static_cast<size_t>(rc.topk), !rc.include_self);
  std::ostringstream out;
  write_ranking_tsv(out, ranked, model.vocab);
  emit_output(paths.out, out.str());
}

void run_deviations(const RunConfig& rc, const Paths& paths) {
  auto model = load_model_dir(paths.model);
  const NodeId node = model.tax.resolve(paths.node);
  auto ranked = deviation_ranking(model.params, model.tax, node, static_cast<size_t>(rc.topk));
  std::ostringstream out;
  write_ranking_tsv(out, ranked, model.vocab);
  emit_output(paths.out, out.str());
}

void run_synth(const RunConfig& rc, const Paths& paths) {
  auto spec = rc.to_synth_spec();
  auto data = generate(spec);
  write_corpus_jsonl(paths.out, data.records);
  if (!paths.truth.empty()) write_ground_truth_json(paths.truth, data.ground_truth);
  std::cout << "wrote " << data.records.size() << " records, " << data.ground_truth.size()
            << " shifted nodes\n";
}

void run_export(const RunConfig& rc, const Paths& paths) {
  (void)rc;
  auto model = load_model_dir(paths.model);
  if (paths.table == "alpha") {
    write_word2vec_text(paths.out, model.params.alpha, model.vocab);
  } else if (paths.table == "rho") {
    const NodeId resolved = model.tax.resolve(paths.node);
    const NodeId tabled = model.params.table_node(resolved, model.tax);
    if (tabled != resolved) {
      std::cerr << "note: node '" << paths.node << "' has no table in this model; exporting '"
                << model.tax.node(tabled).path << "'\n";
    }
    write_word2vec_text(paths.out, model.params.rho_table(tabled), model.vocab);
  } else {
    throw UsageError("unknown table '" + paths.table + "' (expected rho or alpha)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig rc;
  Paths paths;
  try {
    // Config files apply before flag parsing, so explicit flags win.
    for (int i = 1; i < argc; ++i) {
      const std::string arg = argv[i];
      if (arg == "--config" && i + 1 < argc) {
        rc.apply_file(argv[i + 1]);
      } else if (arg.rfind("--config=", 0) == 0) {
        rc.apply_file(arg.substr(9));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  CLI::App app{"hemb: hierarchical domain word embeddings"};
  app.require_subcommand(1);

  auto add_config_flag = [&](CLI::App* cmd) {
    cmd->add_option("--config", paths.config,
                    "flat key=value config file, applied before other flags");
  };
  auto add_model_flags = [&](CLI::App* cmd) {
    cmd->add_option("--dim", rc.dim, "embedding dimension K")->capture_default_str();
    cmd->add_option("--window", rc.window, "context window size")->capture_default_str();
    cmd->add_option("--negatives", rc.negatives, "negative samples per position")
        ->capture_default_str();
    cmd->add_option("--sigma", rc.sigma, "parent-child prior std")->capture_default_str();
    cmd->add_option("--global-prior-std", rc.global_prior_std,
                    "zero-mean prior std on the root table and context vectors")
        ->capture_default_str();
    cmd->add_option("--negative-distribution", rc.negative_distribution,
                    "negative sampling distribution: uniform or unigram")
        ->capture_default_str();
    cmd->add_flag("--context-mean", rc.context_mean,
                  "average context vectors instead of summing");
    cmd->add_flag("--propagate-data-to-ancestors", rc.propagate_data_to_ancestors,
                  "score each position at the node and all its non-root ancestors");
  };
  auto add_seed_flag = [&](CLI::App* cmd) {
    cmd->add_option("--seed", rc.seed, "random seed")->capture_default_str();
  };

  // vocab
  auto* vocab_cmd = app.add_subcommand("vocab", "build a vocabulary from a JSONL corpus");
  vocab_cmd->add_option("--corpus", paths.corpus, "input corpus (JSONL)")->required();
  vocab_cmd->add_option("--out", paths.out, "output vocabulary TSV")->required();
  vocab_cmd->add_option("--max-vocab", rc.max_vocab, "keep the most frequent words")
      ->capture_default_str();
  vocab_cmd->add_flag("--split-sentences", rc.split_sentences,
                      "split records into sentences on .!? before counting");
  add_config_flag(vocab_cmd);
  vocab_cmd->callback([&] { run_vocab(rc, paths); });

  // train
  auto* train_cmd = app.add_subcommand("train", "train embeddings over the taxonomy");
  train_cmd->add_option("--corpus", paths.corpus, "training corpus (JSONL)")->required();
  train_cmd->add_option("--vocab", paths.vocab, "vocabulary TSV from 'vocab'")->required();
  train_cmd->add_option("--out", paths.out, "output model directory")->required();
  train_cmd->add_option("--taxonomy", paths.taxonomy,
                        "optional newline-delimited paths declaring zero-data nodes");
  train_cmd->add_option("--variant", rc.variant, "global, grouped or hierarchical")
      ->capture_default_str();
  train_cmd->add_option("--min-node-size", rc.min_node_size,
                        "merge leaves with fewer sentences into their parent")
      ->capture_default_str();
  add_model_flags(train_cmd);
  add_seed_flag(train_cmd);
  train_cmd->add_option("--learning-rate", rc.learning_rate, "ascent step size")
      ->capture_default_str();
  train_cmd->add_option("--optimizer", rc.optimizer, "sgd or adagrad")->capture_default_str();
  train_cmd->add_option("--epochs", rc.epochs, "training epochs")->capture_default_str();
  train_cmd->add_option("--minibatch", rc.minibatch, "sentences per step")
      ->capture_default_str();
  train_cmd->add_option("--init-std", rc.init_std, "initialization std")->capture_default_str();
  train_cmd->add_option("--threads", rc.threads, "worker threads (1 = reproducible)")
      ->capture_default_str();
  train_cmd->add_option("--checkpoint-every", rc.checkpoint_every,
                        "write a checkpoint directory every N epochs (0 = off)")
      ->capture_default_str();
  train_cmd->add_flag("--fixed-negatives", rc.fixed_negatives,
                      "reuse the seed-derived negative lists every epoch");
  train_cmd->add_flag("--lr-decay", rc.lr_decay, "linear learning-rate decay");
  train_cmd->add_flag("--subsample,!--no-subsample", rc.subsample,
                      "down-sample frequent words before training")
      ->capture_default_str();
  train_cmd->add_option("--subsample-threshold", rc.subsample_threshold,
                        "subsampling threshold t in min(1, sqrt(t/f))")
      ->capture_default_str();
  train_cmd->add_flag("--split-sentences", rc.split_sentences,
                      "split records into sentences on .!? before encoding");
  add_config_flag(train_cmd);
  train_cmd->callback([&] { run_train(rc, paths); });

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "held-out pseudo log-likelihood of a model");
  eval_cmd->add_option("--model", paths.model, "model directory")->required();
  eval_cmd->add_option("--corpus", paths.corpus, "held-out corpus (JSONL)")->required();
  eval_cmd->add_option("--out", paths.out, "output JSON report (default: stdout)");
  eval_cmd->add_flag("--split-sentences", rc.split_sentences,
                     "split records into sentences on .!? before encoding");
  add_seed_flag(eval_cmd);
  add_config_flag(eval_cmd);
  eval_cmd->callback([&] { run_eval(rc, paths); });

  // neighbors
  auto* nn_cmd = app.add_subcommand("neighbors", "nearest neighbors in a node's table");
  nn_cmd->add_option("--model", paths.model, "model directory")->required();
  nn_cmd->add_option("--node", paths.node, "taxonomy node path")->capture_default_str();
  nn_cmd->add_option("--word", paths.word, "query word")->required();
  nn_cmd->add_option("-k,--topk", rc.topk, "neighbors to return")->capture_default_str();
  nn_cmd->add_flag("--include-self", rc.include_self, "keep the query word in the ranking");
  nn_cmd->add_option("--out", paths.out, "output TSV (default: stdout)");
  add_config_flag(nn_cmd);
  nn_cmd->callback([&] { run_neighbors(rc, paths); });

  // deviations
  auto* dev_cmd = app.add_subcommand("deviations",
                                     "words deviating most from the parent domain");
  dev_cmd->add_option("--model", paths.model, "model directory")->required();
  dev_cmd->add_option("--node", paths.node, "taxonomy node path (non-root)")->required();
  dev_cmd->add_option("-k,--topk", rc.topk, "words to return")->capture_default_str();
  dev_cmd->add_option("--out", paths.out, "output TSV (default: stdout)");
  add_config_flag(dev_cmd);
  dev_cmd->callback([&] { run_deviations(rc, paths); });

  // synth
  auto* synth_cmd = app.add_subcommand("synth",
                                       "generate a synthetic corpus with planted shifts");
  synth_cmd->add_option("--out", paths.out, "output corpus JSONL")->required();
  synth_cmd->add_option("--truth", paths.truth, "output ground-truth JSON");
  synth_cmd->add_option("--synth-vocab", rc.synth_vocab, "synthetic vocabulary size")
      ->capture_default_str();
  synth_cmd->add_option("--branching", rc.branching, "children per level, comma separated")
      ->capture_default_str();
  synth_cmd->add_option("--sentences-per-node", rc.sentences_per_node, "sentences per node")
      ->capture_default_str();
  synth_cmd->add_option("--sentence-length", rc.sentence_length, "tokens per sentence")
      ->capture_default_str();
  synth_cmd->add_option("--planted-words", rc.planted_words, "planted shifted words")
      ->capture_default_str();
  synth_cmd->add_option("--partner-set", rc.partner_set, "partner words per planted node")
      ->capture_default_str();
  synth_cmd->add_option("--zipf-exponent", rc.zipf_exponent, "background Zipf exponent")
      ->capture_default_str();
  synth_cmd->add_option("--shift-strength", rc.shift_strength,
                        "probability a sentence carries the planted word")
      ->capture_default_str();
  synth_cmd->add_option("--window", rc.window, "partner fill radius")->capture_default_str();
  add_seed_flag(synth_cmd);
  add_config_flag(synth_cmd);
  synth_cmd->callback([&] { run_synth(rc, paths); });

  // export
  auto* export_cmd = app.add_subcommand("export", "write a table in word2vec text format");
  export_cmd->add_option("--model", paths.model, "model directory")->required();
  export_cmd->add_option("--out", paths.out, "output text file")->required();
  export_cmd->add_option("--node", paths.node, "taxonomy node whose rho table to export")
      ->capture_default_str();
  export_cmd->add_option("--table", paths.table, "rho or alpha")->capture_default_str();
  add_config_flag(export_cmd);
  export_cmd->callback([&] { run_export(rc, paths); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
