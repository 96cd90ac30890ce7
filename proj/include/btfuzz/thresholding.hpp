#pragma once

#include <array>
#include <cstdint>

#include "btfuzz/image.hpp"

namespace btfuzz {

inline constexpr int kHistogramBins = 256;

/// 256-bin intensity histogram. Invariant: sum(bins) == total >= 1.
class Histogram {
 public:
  using Bins = std::array<std::uint64_t, kHistogramBins>;

  explicit Histogram(const Bins& bins);

  const Bins& bins() const noexcept { return bins_; }
  std::uint64_t total() const noexcept { return total_; }
  std::uint64_t operator[](int bin) const { return bins_.at(static_cast<std::size_t>(bin)); }

 private:
  Bins bins_;
  std::uint64_t total_;
};

/// Threshold normalized to [0,1].
class UnitThreshold {
 public:
  explicit UnitThreshold(double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Bin of an intensity: floor(v * 255 + 0.5), clamped to [0,255].
int intensity_bin(double v) noexcept;

Histogram compute_histogram(const GrayImage& img);

/// Two-class statistics for the split {bin <= t} vs {bin > t}, in bin units.
/// `within + between == total_variance` for every t.
struct ClassSplitStats {
  double weight_low = 0.0;   // class probability of {<= t}
  double weight_high = 0.0;  // class probability of {> t}
  double mean_low = 0.0;
  double mean_high = 0.0;
  double var_low = 0.0;
  double var_high = 0.0;
  double within = 0.0;   // weight_low * var_low + weight_high * var_high
  double between = 0.0;  // weight_low * weight_high * (mean_low - mean_high)^2
  double total_variance = 0.0;
};

ClassSplitStats class_split_stats(const Histogram& hist, int t);

/// Integer bin t* in [0,255] maximizing the between-class variance, compared
/// exactly in integer arithmetic; ties go to the smallest t. A histogram with
/// a single occupied bin returns that bin.
int otsu_bin(const Histogram& hist);

/// otsu_bin(hist) / 255.
UnitThreshold otsu_threshold(const Histogram& hist);

/// Otsu threshold of the intensity-adjusted (1% tails) image.
UnitThreshold global_threshold_feature(const GrayImage& img);

}  // namespace btfuzz
