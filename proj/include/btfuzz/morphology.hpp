#pragma once

#include <vector>

#include "btfuzz/image.hpp"

namespace btfuzz {

struct Offset {
  int dy = 0;
  int dx = 0;
  bool operator==(const Offset&) const = default;
  auto operator<=>(const Offset&) const = default;
};

/// Set of displacements containing (0,0) and closed under negation.
class StructuringElement {
 public:
  explicit StructuringElement(std::vector<Offset> offsets);

  const std::vector<Offset>& offsets() const noexcept { return offsets_; }
  std::size_t size() const noexcept { return offsets_.size(); }
  /// Chebyshev extent, max(|dy|, |dx|) over the offsets.
  int extent() const noexcept { return extent_; }

 private:
  std::vector<Offset> offsets_;  // sorted, unique
  int extent_ = 0;
};

/// {(dy,dx) : dy^2 + dx^2 <= radius^2}
StructuringElement disc_element(int radius);

/// Neighbourhood max / min over `se`, replicate border.
GrayImage dilate(const GrayImage& img, const StructuringElement& se);
GrayImage erode(const GrayImage& img, const StructuringElement& se);
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se);
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se);

/// Reconstruction by dilation: the fixpoint of r <- min(dilate(r, se), mask)
/// starting from `marker`. Requires marker <= mask pointwise.
///
/// Computed with the hybrid raster / anti-raster / FIFO scheme. Out-of-image
/// neighbours are skipped, which coincides with the replicate-border
/// definition for any element that contains every lattice point between the
/// origin and its offsets (discs in particular).
GrayImage morph_reconstruct(const GrayImage& marker, const GrayImage& mask,
                            const StructuringElement& se);
BinaryMask morph_reconstruct(const BinaryMask& marker, const BinaryMask& mask,
                             const StructuringElement& se);

/// Reconstruction by erosion: fixpoint of r <- max(erode(r, se), mask) from
/// `marker`. Requires marker >= mask pointwise.
GrayImage reconstruct_by_erosion(const GrayImage& marker, const GrayImage& mask,
                                 const StructuringElement& se);

}  // namespace btfuzz
