#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "btfuzz/image.hpp"
#include "btfuzz/morphology.hpp"
#include "btfuzz/preprocess.hpp"

namespace btfuzz {

enum class SegmentationMethod { Watershed, RegionGrowing };

/// CLI / predictions token: `watershed`, `region-growing`.
std::string_view to_token(SegmentationMethod method) noexcept;
/// Report key: `watershed`, `region_growing`.
std::string_view report_key(SegmentationMethod method) noexcept;
/// Accepts `watershed`, `region-growing` and `region_growing`.
SegmentationMethod parse_method(std::string_view token);

/// 4-connected components in raster order of first pixel, labelled 1..count.
struct Components {
  LabelMap labels;
  int count = 0;
};
Components label_components(const BinaryMask& mask);

/// Internal labels 1..K (object markers) and one external background marker.
/// The two pixel sets are disjoint.
struct MarkerSet {
  LabelMap internal;
  BinaryMask external;
  int internal_count = 0;

  /// Label the watershed assigns to the external marker.
  int external_label() const noexcept { return internal_count + 1; }
};

/// Internal markers: components of erode(binary, se). External marker: pixels
/// farther than 2 * se.extent() (Euclidean) from every foreground pixel.
/// Throws NoInternalMarker when erosion leaves nothing.
MarkerSet extract_markers(const BinaryMask& binary, const StructuringElement& se);

inline constexpr double kMinimaEpsilon = 1.0 / 255.0;

/// Forces the regional minima of `relief` onto the marker pixels: markers
/// become 0, every other pixel is reconstructed by erosion (4-connectivity)
/// over min(relief + 1/255, 1).
GrayImage impose_minima(const GrayImage& relief, const MarkerSet& markers);

/// Sobel gradient magnitude (replicate border), divided by its maximum.
/// A flat image yields all zeros.
GrayImage sobel_gradient(const GrayImage& img);

/// Priority-flood watershed of `relief` from the markers (4-connectivity).
/// Pixels are flooded in ascending (value, row, col) order; a pixel touching
/// two different labels becomes a line pixel (0).
LabelMap flood_from_markers(const GrayImage& relief, const MarkerSet& markers);

/// sobel_gradient -> impose_minima -> flood_from_markers.
LabelMap watershed_segment(const GrayImage& img, const MarkerSet& markers);

/// Seeded region growing: repeatedly admits the unassigned 4-neighbour whose
/// intensity is closest to the running region mean, while that distance is
/// <= tolerance. Ties go to the smaller raster index.
BinaryMask region_grow(const GrayImage& img, const std::vector<Pixel>& seeds, double tolerance);

struct RegionStats {
  double size_fraction = 0.0;
  double circularity = 0.0;
  double border_irregularity = 1.0;
  SegmentationMethod method = SegmentationMethod::RegionGrowing;
};

/// Perimeter is the count of exposed 4-neighbour pixel edges (image border
/// included) scaled by pi/4, so circularity 4*pi*A/P^2 is near 1 for discs.
double mask_perimeter(const BinaryMask& mask);
RegionStats region_stats(const BinaryMask& mask, SegmentationMethod method);

enum class SeedStrategy {
  Centroid,   // component pixel nearest the centroid of the largest component
  Brightest,  // brightest pixel of the largest component
};
SeedStrategy parse_seed_strategy(std::string_view token);
std::string_view to_token(SeedStrategy strategy) noexcept;

struct SegmentationParams {
  double binarize_threshold = kDefaultBinarizeThreshold;
  int marker_radius = 3;
  int reconstruct_radius = 3;
  double tolerance = 0.15;
  SeedStrategy seed_strategy = SeedStrategy::Centroid;
};

struct TumourRegion {
  BinaryMask mask;
  RegionStats stats;
  /// Watershed label map; only set on the watershed path.
  std::optional<LabelMap> labels;
};

/// Region-growing seed from the binarized mask; empty when there is no foreground.
std::vector<Pixel> select_seeds(const GrayImage& img, const BinaryMask& binary, SeedStrategy strategy);

/// Binarize, segment with `method`, then reconstruct under the binarized mask.
/// An empty binarized foreground yields an empty region (no error); the
/// watershed path propagates NoInternalMarker.
TumourRegion tumour_region(const GrayImage& img, SegmentationMethod method,
                           const SegmentationParams& params = {});

}  // namespace btfuzz
