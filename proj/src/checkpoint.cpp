#include "hemb/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hemb/bytes.hpp"

namespace hemb {

namespace fs = std::filesystem;

namespace {

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string checksum_hex(uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace

void write_matrix_file(const std::string& path, const Matrix& matrix) {
  std::string bytes;
  bytes.reserve(8 + matrix.values().size() * 4);
  bytes.append(kMatrixMagic, 8);
  for (double v : matrix.values()) append_f32_le(bytes, static_cast<float>(v));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write matrix file: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing matrix file: " + path);
}

Matrix read_matrix_file(const std::string& path, size_t rows, size_t cols) {
  const std::string bytes = read_file_bytes(path);
  if (bytes.size() < 8 || bytes.compare(0, 8, kMatrixMagic, 8) != 0) {
    throw std::runtime_error("bad matrix file magic: " + path);
  }
  if (bytes.size() != 8 + rows * cols * 4) {
    throw std::runtime_error("matrix file size mismatch: " + path);
  }
  Matrix matrix(rows, cols);
  const char* p = bytes.data() + 8;
  for (auto& v : matrix.values()) {
    v = static_cast<double>(read_f32_le(p));
    p += 4;
  }
  return matrix;
}

nlohmann::json taxonomy_to_json(const Taxonomy& tax) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : tax.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"name", n.name},
                     {"path", n.path},
                     {"parent", n.parent == kNoNode ? -1 : static_cast<int64_t>(n.parent)},
                     {"level", n.level},
                     {"count", n.sentence_count}});
  }
  nlohmann::json paths = nlohmann::json::object();
  for (const auto& [path, id] : tax.path_index()) paths[path] = id;
  return {{"nodes", nodes}, {"path_index", paths}};
}

Taxonomy taxonomy_from_json(const nlohmann::json& obj) {
  std::vector<TaxonomyNode> nodes;
  for (const auto& item : obj.at("nodes")) {
    TaxonomyNode n;
    n.id = item.at("id").get<NodeId>();
    n.name = item.at("name").get<std::string>();
    n.path = item.at("path").get<std::string>();
    const auto parent = item.at("parent").get<int64_t>();
    n.parent = parent < 0 ? kNoNode : static_cast<NodeId>(parent);
    n.level = item.at("level").get<int>();
    n.sentence_count = item.at("count").get<uint64_t>();
    nodes.push_back(std::move(n));
  }
  std::sort(nodes.begin(), nodes.end(),
            [](const TaxonomyNode& a, const TaxonomyNode& b) { return a.id < b.id; });
  for (auto& n : nodes) {
    if (n.parent != kNoNode) nodes.at(n.parent).children.push_back(n.id);
  }
  std::map<std::string, NodeId> index;
  for (const auto& [path, id] : obj.at("path_index").items()) {
    index[path] = id.get<NodeId>();
  }
  return Taxonomy::from_parts(std::move(nodes), std::move(index));
}

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
  return {{"dim", cfg.model.dim},
          {"window", cfg.model.window},
          {"negatives", cfg.model.negatives},
          {"sigma", cfg.model.sigma},
          {"global_prior_std", cfg.model.global_prior_std},
          {"negative_distribution", to_string(cfg.model.negative_distribution)},
          {"seed", cfg.model.seed},
          {"context_mean", cfg.model.context_mean},
          {"propagate_data_to_ancestors", cfg.model.propagate_data_to_ancestors},
          {"learning_rate", cfg.learning_rate},
          {"optimizer", to_string(cfg.optimizer)},
          {"epochs", cfg.epochs},
          {"minibatch", cfg.minibatch},
          {"init_std", cfg.init_std},
          {"threads", cfg.threads},
          {"checkpoint_every", cfg.checkpoint_every},
          {"variant", to_string(cfg.variant)},
          {"fixed_negatives", cfg.fixed_negatives},
          {"lr_decay", cfg.lr_decay}};
}

TrainConfig train_config_from_json(const nlohmann::json& obj) {
  TrainConfig cfg;
  cfg.model.dim = obj.at("dim").get<int>();
  cfg.model.window = obj.at("window").get<int>();
  cfg.model.negatives = obj.at("negatives").get<int>();
  cfg.model.sigma = obj.at("sigma").get<double>();
  cfg.model.global_prior_std = obj.at("global_prior_std").get<double>();
  cfg.model.negative_distribution =
      negative_distribution_from_string(obj.at("negative_distribution").get<std::string>());
  cfg.model.seed = obj.at("seed").get<uint64_t>();
  cfg.model.context_mean = obj.at("context_mean").get<bool>();
  cfg.model.propagate_data_to_ancestors = obj.at("propagate_data_to_ancestors").get<bool>();
  cfg.learning_rate = obj.at("learning_rate").get<double>();
  cfg.optimizer = optimizer_from_string(obj.at("optimizer").get<std::string>());
  cfg.epochs = obj.at("epochs").get<int>();
  cfg.minibatch = obj.at("minibatch").get<int>();
  cfg.init_std = obj.at("init_std").get<double>();
  cfg.threads = obj.at("threads").get<int>();
  cfg.checkpoint_every = obj.at("checkpoint_every").get<int>();
  cfg.variant = variant_from_string(obj.at("variant").get<std::string>());
  cfg.fixed_negatives = obj.at("fixed_negatives").get<bool>();
  cfg.lr_decay = obj.at("lr_decay").get<bool>();
  return cfg;
}

nlohmann::json train_report_to_json(const TrainReport& report) {
  return {{"epoch_objective", report.epoch_objective},
          {"param_checksum", checksum_hex(report.param_checksum)},
          {"wall_seconds", report.wall_seconds},
          {"seed", report.seed},
          {"variant", report.variant},
          {"corpus_sentences", report.corpus_sentences},
          {"corpus_positions", report.corpus_positions}};
}

nlohmann::json ll_report_to_json(const LLReport& report) {
  return {{"per_observation_ll", report.per_observation_ll},
          {"positive_ll", report.positive_ll},
          {"negative_ll", report.negative_ll},
          {"n_positions", report.n_positions},
          {"variant", report.variant},
          {"metric",
           "negative-sampled pseudo log-likelihood per position "
           "(one positive plus the fixed negatives, in nats)"}};
}

void save_model_dir(const std::string& dir, const ModelParams& params, const Taxonomy& tax,
                    const TrainConfig& cfg, const Vocabulary& vocab, int epoch,
                    const TrainReport* report) {
  fs::create_directories(dir);
  const std::string vocab_path = (fs::path(dir) / "vocab.tsv").string();
  vocab.save(vocab_path);

  nlohmann::json tables;
  tables["alpha"] = "alpha.bin";
  nlohmann::json rho_files = nlohmann::json::object();
  write_matrix_file((fs::path(dir) / "alpha.bin").string(), params.alpha);
  for (const auto& [node, table] : params.rho) {
    const std::string name = "rho_" + std::to_string(node) + ".bin";
    write_matrix_file((fs::path(dir) / name).string(), table);
    rho_files[std::to_string(node)] = name;
  }
  tables["rho"] = rho_files;

  nlohmann::json manifest = {
      {"format", kMatrixMagic},
      {"epoch", epoch},
      {"dim", params.dim},
      {"vocab_size", vocab.size()},
      {"vocab_file", "vocab.tsv"},
      {"vocab_checksum", checksum_hex(fnv1a64(read_file_bytes(vocab_path)))},
      {"config", train_config_to_json(cfg)},
      {"taxonomy", taxonomy_to_json(tax)},
      {"tables", tables}};
  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest in " + dir);
  out << manifest.dump(2) << '\n';

  if (report) {
    std::ofstream rep(fs::path(dir) / "report.json", std::ios::binary);
    rep << train_report_to_json(*report).dump(2) << '\n';
  }
}

LoadedModel load_model_dir(const std::string& dir) {
  const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read model manifest: " + manifest_path);
  nlohmann::json manifest = nlohmann::json::parse(in);

  LoadedModel model;
  model.epoch = manifest.at("epoch").get<int>();
  model.cfg = train_config_from_json(manifest.at("config"));
  model.tax = taxonomy_from_json(manifest.at("taxonomy"));

  const std::string vocab_path =
      (fs::path(dir) / manifest.at("vocab_file").get<std::string>()).string();
  const std::string expected = manifest.at("vocab_checksum").get<std::string>();
  const std::string actual = checksum_hex(fnv1a64(read_file_bytes(vocab_path)));
  if (expected != actual) {
    throw std::runtime_error("vocabulary checksum mismatch in " + dir);
  }
  model.vocab = Vocabulary::load(vocab_path);

  const auto V = model.vocab.size();
  const auto K = static_cast<size_t>(manifest.at("dim").get<int>());
  model.params.dim = static_cast<int>(K);
  model.params.alpha = read_matrix_file(
      (fs::path(dir) / manifest.at("tables").at("alpha").get<std::string>()).string(), V, K);
  for (const auto& [node_str, file] : manifest.at("tables").at("rho").items()) {
    const auto node = static_cast<NodeId>(std::stoul(node_str));
    model.params.rho.emplace(
        node, read_matrix_file((fs::path(dir) / file.get<std::string>()).string(), V, K));
  }
  return model;
}

}  // namespace hemb
