#pragma once

// Seeded random inputs shared by the unit and acceptance suites.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "btfuzz/image.hpp"
#include "btfuzz/segmentation.hpp"
#include "btfuzz/thresholding.hpp"

namespace btfuzz::oracle {

/// Histograms of mixed character: sparse, dense, clustered and tie-prone.
inline Histogram::Bins random_histogram(std::mt19937_64& rng) {
  Histogram::Bins bins{};
  std::uniform_int_distribution<int> kind_dist(0, 3);
  std::uniform_int_distribution<int> bin_dist(0, 255);
  switch (kind_dist(rng)) {
    case 0: {  // a few occupied bins with small counts (plateaus and ties)
      const int n = std::uniform_int_distribution<int>(1, 4)(rng);
      for (int i = 0; i < n; ++i) bins[bin_dist(rng)] += std::uniform_int_distribution<int>(1, 5)(rng);
      break;
    }
    case 1: {  // dense, arbitrary counts
      std::uniform_int_distribution<int> count(0, 1000);
      for (auto& b : bins) b = count(rng);
      break;
    }
    case 2: {  // two Gaussian-ish clusters
      std::normal_distribution<double> a(std::uniform_real_distribution<double>(20, 120)(rng), 12.0);
      std::normal_distribution<double> b(std::uniform_real_distribution<double>(130, 235)(rng), 15.0);
      const int n = std::uniform_int_distribution<int>(50, 5000)(rng);
      for (int i = 0; i < n; ++i) {
        const double v = (i % 3 == 0) ? b(rng) : a(rng);
        bins[std::clamp(static_cast<int>(std::lround(v)), 0, 255)]++;
      }
      break;
    }
    default: {  // sparse with large counts
      const int n = std::uniform_int_distribution<int>(2, 30)(rng);
      std::uniform_int_distribution<std::uint64_t> count(1, 1'000'000);
      for (int i = 0; i < n; ++i) bins[bin_dist(rng)] += count(rng);
      break;
    }
  }
  if (std::all_of(bins.begin(), bins.end(), [](auto b) { return b == 0; })) bins[bin_dist(rng)] = 1;
  return bins;
}

/// 1..4 small rectangular internal markers and an external marker (the
/// image frame or a corner block), pairwise disjoint and each non-empty.
inline MarkerSet random_markers(std::mt19937_64& rng, int w, int h) {
  LabelMap internal(w, h, 0);
  BinaryMask external(w, h, 0);
  const bool frame = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
  if (frame) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (r == 0 || c == 0 || r == h - 1 || c == w - 1) external(r, c) = 1;
      }
    }
  } else {
    const int bh = std::uniform_int_distribution<int>(1, 4)(rng);
    const int bw = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int r = 0; r < bh; ++r) {
      for (int c = 0; c < bw; ++c) external(r, c) = 1;
    }
  }
  const int k = std::uniform_int_distribution<int>(1, 4)(rng);
  std::uniform_int_distribution<int> extent(1, 3);
  std::uniform_int_distribution<int> row(1, h - 5), col(1, w - 5);
  for (int label = 1; label <= k; ++label) {
    for (;;) {
      const int r0 = row(rng), c0 = col(rng), eh = extent(rng), ew = extent(rng);
      bool clear = true;
      for (int r = r0; r < r0 + eh; ++r) {
        for (int c = c0; c < c0 + ew; ++c) clear = clear && internal(r, c) == 0 && external(r, c) == 0;
      }
      if (!clear) continue;
      for (int r = r0; r < r0 + eh; ++r) {
        for (int c = c0; c < c0 + ew; ++c) internal(r, c) = label;
      }
      break;
    }
  }
  return MarkerSet{std::move(internal), std::move(external), k};
}

/// Smooth random relief: a few Gaussian bumps plus mild noise, in [0,1].
inline GrayImage random_relief(std::mt19937_64& rng, int w, int h) {
  GrayImage img(w, h, 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int bumps = std::uniform_int_distribution<int>(2, 6)(rng);
  for (int b = 0; b < bumps; ++b) {
    const double cy = u(rng) * h, cx = u(rng) * w, s = 2.0 + u(rng) * 6.0, a = 0.3 + 0.7 * u(rng);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const double d2 = (r - cy) * (r - cy) + (c - cx) * (c - cx);
        img(r, c) += a * std::exp(-d2 / (2 * s * s));
      }
    }
  }
  for (auto& v : img.pixels()) v = std::clamp(v + 0.05 * u(rng), 0.0, 1.0);
  return img;
}

/// A random image with 1..3 seeds. Intensities are quantized to a few levels
/// half the time so ties in the admission order are common.
struct GrowInstance {
  GrayImage image;
  std::vector<Pixel> seeds;
};

inline GrowInstance random_grow_instance(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GrayImage img = random_relief(rng, w, h);
  if (std::uniform_int_distribution<int>(0, 1)(rng) == 1) {
    for (auto& v : img.pixels()) v = std::round(v * 4.0) / 4.0;
  }
  const int n = std::uniform_int_distribution<int>(1, 3)(rng);
  std::vector<Pixel> seeds;
  for (int i = 0; i < n; ++i) {
    seeds.push_back({std::uniform_int_distribution<int>(0, h - 1)(rng),
                     std::uniform_int_distribution<int>(0, w - 1)(rng)});
  }
  return {std::move(img), std::move(seeds)};
}

/// Checks the partition laws of a watershed label map against its markers.
/// Returns an empty string when all hold, otherwise a description.
inline std::string watershed_law_violation(const LabelMap& out, const MarkerSet& markers) {
  if (!out.same_shape(markers.internal)) return "dimension mismatch";
  const int max_label = markers.external_label();
  std::set<int> regions;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0 || out[i] > max_label) return "label outside 0.." + std::to_string(max_label);
    if (out[i] > 0) regions.insert(out[i]);
    if (markers.internal[i] > 0 && out[i] != markers.internal[i]) return "internal marker lost its label";
    if (markers.external[i] != 0 && out[i] != max_label) return "external marker lost its label";
  }
  std::set<int> present;
  for (auto v : markers.internal.pixels()) {
    if (v > 0) present.insert(v);
  }
  const bool has_external =
      std::any_of(markers.external.pixels().begin(), markers.external.pixels().end(), [](auto v) { return v; });
  if (regions.size() > present.size() + (has_external ? 1 : 0)) return "more regions than markers";
  return {};
}

/// Checks tolerance monotonicity (t1 <= t2 gives nested masks) and seed
/// connectivity (every 4-connected piece of a mask holds a seed).
inline std::string region_grow_law_violation(const GrowInstance& inst, double t1, double t2) {
  const BinaryMask small = region_grow(inst.image, inst.seeds, std::min(t1, t2));
  const BinaryMask large = region_grow(inst.image, inst.seeds, std::max(t1, t2));
  for (std::size_t i = 0; i < small.size(); ++i) {
    if (small[i] && !large[i]) return "mask at the smaller tolerance is not contained in the larger one";
  }
  for (const BinaryMask* m : {&small, &large}) {
    for (const auto& s : inst.seeds) {
      if (!(*m)(s.row, s.col)) return "seed missing from mask";
    }
    const Components comps = label_components(*m);
    std::set<int> seeded;
    for (const auto& s : inst.seeds) seeded.insert(comps.labels(s.row, s.col));
    for (int k = 1; k <= comps.count; ++k) {
      if (!seeded.count(k)) return "mask component without a seed";
    }
  }
  return {};
}

}  // namespace btfuzz::oracle
