#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "btfuzz/dataset_io.hpp"
#include "btfuzz/evaluation.hpp"
#include "btfuzz/fuzzy.hpp"
#include "btfuzz/preprocess.hpp"
#include "btfuzz/segmentation.hpp"
#include "btfuzz/thresholding.hpp"

namespace btfuzz {

struct PipelineConfig {
  Size2 resize{256, 256};
  int median_window = 3;
  SegmentationMethod method = SegmentationMethod::RegionGrowing;
  SegmentationParams segmentation;
  std::filesystem::path fis;  // empty = built-in default.fis
  std::filesystem::path output_dir = ".";
  int workers = 1;
  // Recorded for provenance; no pipeline stage draws random numbers.
  std::uint64_t seed = 42;

  void validate() const;
  /// Applies one `key=value` setting; throws InvalidArgument on unknown keys
  /// or malformed values.
  void set(std::string_view key, std::string_view value);
};

/// `key=value` lines, `#` comments. Keys: resize (WxH), resize_width,
/// resize_height, median_window, binarize_threshold, method, marker_radius,
/// reconstruct_radius, tolerance, seed_strategy, fis, output_dir, workers, seed.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const PipelineConfig& config);

/// Parses "WxH".
Size2 parse_size(std::string_view text);

/// Resize then median filter.
GrayImage preprocess_image(const GrayImage& img, const PipelineConfig& config);

struct PredictionRecord {
  std::string path;
  SegmentationMethod method = SegmentationMethod::RegionGrowing;
  double size_fraction = 0.0;
  double global_threshold = 0.0;
  double crisp = 0.0;
  std::optional<fuzzy::Diagnosis> label;  // absent when the image failed
  std::vector<std::string> flags;
  std::string error;

  bool ok() const noexcept { return label.has_value(); }
};

/// Features and classification of one already-loaded image.
PredictionRecord classify_image(const GrayImage& img, const PipelineConfig& config,
                                const fuzzy::MamdaniFis& fis);

/// The FIS named by config.fis (or the built-in one). Fatal errors surface
/// as IoError / FisParseError / InvalidArgument.
fuzzy::MamdaniFis load_pipeline_fis(const PipelineConfig& config);

/// Processes the test split in manifest order with config.workers threads.
/// Per-image failures become records with `error` set.
std::vector<PredictionRecord> run_pipeline(const PipelineConfig& config, const fuzzy::MamdaniFis& fis,
                                           const DatasetManifest& manifest);
std::vector<PredictionRecord> run_pipeline(const PipelineConfig& config, const DatasetManifest& manifest);

/// Columns: path,method,size_fraction,global_threshold,crisp,label,flags
void write_predictions_csv(const std::vector<PredictionRecord>& records, std::ostream& out);
void write_predictions_csv(const std::vector<PredictionRecord>& records, const std::filesystem::path& path);
std::vector<PredictionRecord> read_predictions_csv(const std::filesystem::path& path);

struct EvaluationResult {
  std::vector<MethodMetrics> methods;
  std::vector<std::pair<SegmentationMethod, ConfusionMatrix>> matrices;
  std::size_t comparable = 0;
};

/// Matches successful records to manifest entries by path, grouped by method.
EvaluationResult evaluate_predictions(const std::vector<PredictionRecord>& records,
                                      const DatasetManifest& manifest);

}  // namespace btfuzz
