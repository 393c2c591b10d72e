#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mlda/lda.hpp"
#include "mlda/simgen.hpp"

namespace mlda {

/// Rectangular numeric CSV, one matrix row per line, '#' lines skipped.
/// Errors carry the offending row/column. Locale-independent parsing.
Mat load_matrix_csv(const std::filesystem::path& path);
void save_matrix_csv(const Mat& m, const std::filesystem::path& path);

/// Packed binary format: 8-byte magic "MLDAMATB", little-endian uint64 p and q,
/// then p*q little-endian float64 in row-major order.
Mat load_matrix_bin(const std::filesystem::path& path);
void save_matrix_bin(const Mat& m, const std::filesystem::path& path);

/// Dispatches on the magic header: binary when present, CSV otherwise.
Mat load_matrix_any(const std::filesystem::path& path);

/// Binary PGM (P5, maxval 255) mapping [min, max] linearly to [255, 0] so
/// larger values render darker; constant matrices render uniform 128.
void render_pgm(const Mat& m, const std::filesystem::path& path);

std::uint64_t fnv1a64(const void* bytes, std::size_t len);
std::uint64_t file_checksum(const std::filesystem::path& path);

struct ManifestEntry {
  std::string matrix_path;  // relative to the manifest's directory
  int label = 1;
  std::optional<std::uint64_t> checksum;
};

struct DatasetManifest {
  int format_version = 1;
  Eigen::Index p = 0;
  Eigen::Index q = 0;
  std::vector<ManifestEntry> entries;
};

DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Loads every referenced matrix, validating shape and checksum; errors name
/// the first offending file.
Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Writes matrices as CSV files plus a manifest (with checksums) into dir.
void save_dataset(const Dataset& data, const std::filesystem::path& dir);

struct ModelMetadata {
  Loss loss = Loss::squared;
  Penalty penalty = Penalty::nuclear;
  std::uint64_t seed = 0;
};

void save_model(const DiscriminantModel& model, const ModelMetadata& meta,
                const std::filesystem::path& path);
std::pair<DiscriminantModel, ModelMetadata> load_model(const std::filesystem::path& path);

struct Prediction {
  int index = 0;
  int true_label = 0;
  int pred_label = 0;
  double score = 0.0;
};

void save_predictions(const std::vector<Prediction>& preds, const std::filesystem::path& path);
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

struct McReportConfig {
  StudySpec study;
  FitConfig fit;
  int grid_k = 20;
  double grid_span = 0.01;
};

/// Flat key/value + table report; byte-identical for identical inputs.
void write_mc_report(const EvalReport& report, const McReportConfig& cfg,
                     const std::filesystem::path& path);

std::string shape_name(Shape s);
Shape shape_from_name(const std::string& name);
std::string loss_name(Loss l);
Loss loss_from_name(const std::string& name);
std::string penalty_name(Penalty p);
Penalty penalty_from_name(const std::string& name);

}  // namespace mlda
