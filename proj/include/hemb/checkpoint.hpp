#pragma once

#include <string>

#include <json.hpp>

#include "hemb/eval.hpp"
#include "hemb/model.hpp"
#include "hemb/trainer.hpp"

namespace hemb {

// Model directory layout:
//   manifest.json   config, vocab checksum, taxonomy, epoch, table files
//   vocab.tsv       word<TAB>count per line, id order
//   alpha.bin       context vectors
//   rho_<id>.bin    one embedding table per trained node
//   report.json     training report (final checkpoints)
// Matrix files carry the 8-byte magic "HEMB0001" followed by row-major
// little-endian float32 values; dimensions live in the manifest.

inline constexpr char kMatrixMagic[] = "HEMB0001";

void write_matrix_file(const std::string& path, const Matrix& matrix);
Matrix read_matrix_file(const std::string& path, size_t rows, size_t cols);

nlohmann::json taxonomy_to_json(const Taxonomy& tax);
Taxonomy taxonomy_from_json(const nlohmann::json& obj);

nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& obj);

nlohmann::json train_report_to_json(const TrainReport& report);
nlohmann::json ll_report_to_json(const LLReport& report);

void save_model_dir(const std::string& dir, const ModelParams& params, const Taxonomy& tax,
                    const TrainConfig& cfg, const Vocabulary& vocab, int epoch,
                    const TrainReport* report = nullptr);

struct LoadedModel {
  ModelParams params;
  Taxonomy tax;
  Vocabulary vocab;
  TrainConfig cfg;
  int epoch = 0;
};

LoadedModel load_model_dir(const std::string& dir);

}  // namespace hemb
