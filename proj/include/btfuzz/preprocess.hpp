#pragma once

#include "btfuzz/image.hpp"

namespace btfuzz {

struct Size2 {
  int width = 256;
  int height = 256;
};

/// Scales by the largest factor that fits inside `target` (bilinear,
/// pixel-centre aligned), then zero-pads symmetrically to exactly `target`.
/// Odd padding puts the extra row/column at the bottom/right.
GrayImage resize_with_aspect(const GrayImage& img, Size2 target);

/// window x window median with replicate border. `window` must be odd.
GrayImage median_filter(const GrayImage& img, int window = 3);

/// Linear stretch between the `low_frac` and `1 - high_frac` nearest-rank
/// quantiles, clamped to [0,1]. A degenerate range maps everything to 0.
GrayImage adjust_intensity(const GrayImage& img, double low_frac = 0.01, double high_frac = 0.01);

/// Nearest-rank quantile of the pixel multiset, `p` in [0,1].
double nearest_rank_quantile(const GrayImage& img, double p);

inline constexpr double kDefaultBinarizeThreshold = 0.65;

/// Foreground iff intensity > t (strict).
BinaryMask binarize(const GrayImage& img, double t = kDefaultBinarizeThreshold);

}  // namespace btfuzz
