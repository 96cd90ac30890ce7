#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "btfuzz/dataset_io.hpp"
#include "btfuzz/segmentation.hpp"

namespace btfuzz {

/// Positive class = Tumour.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion_matrix(std::span<const Label> predictions, std::span<const Label> truth);

/// Exact ratio; `den` is never zero.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  double percent() const noexcept { return 100.0 * static_cast<double>(num) / static_cast<double>(den); }
  /// Percentage in hundredths, rounded half-up in integer arithmetic.
  std::int64_t percent_hundredths() const noexcept;
  /// e.g. "96.08"
  std::string percent_text() const;
};

/// Percentages; a ratio with a zero denominator is absent.
struct Metrics {
  Ratio accuracy;
  std::optional<Ratio> precision;
  std::optional<Ratio> recall;
  std::optional<Ratio> f1;

  /// Names of the absent metrics, e.g. {"precision", "f1"}.
  std::vector<std::string> undefined() const;
};

Metrics compute_metrics(const ConfusionMatrix& cm);

enum class ReportFormat { Text, Csv, Json };
ReportFormat parse_report_format(std::string_view token);

using MethodMetrics = std::pair<SegmentationMethod, Metrics>;

/// Watershed first, then region growing; percentages to two decimals.
/// Absent metrics are left empty (csv), omitted (json) or shown as "-" (text).
std::string render_report(std::vector<MethodMetrics> entries, ReportFormat format);

}  // namespace btfuzz
