#include "btfuzz/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <queue>
#include <set>
#include <tuple>

namespace btfuzz {

namespace {

constexpr std::array<Offset, 4> kNeighbours4{{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};

}  // namespace

std::string_view to_token(SegmentationMethod method) noexcept {
  return method == SegmentationMethod::Watershed ? "watershed" : "region-growing";
}

std::string_view report_key(SegmentationMethod method) noexcept {
  return method == SegmentationMethod::Watershed ? "watershed" : "region_growing";
}

SegmentationMethod parse_method(std::string_view token) {
  if (token == "watershed") return SegmentationMethod::Watershed;
  if (token == "region-growing" || token == "region_growing") return SegmentationMethod::RegionGrowing;
  throw InvalidArgument("unknown segmentation method '" + std::string(token) + "'");
}

SeedStrategy parse_seed_strategy(std::string_view token) {
  if (token == "centroid") return SeedStrategy::Centroid;
  if (token == "brightest") return SeedStrategy::Brightest;
  throw InvalidArgument("unknown seed strategy '" + std::string(token) + "'");
}

std::string_view to_token(SeedStrategy strategy) noexcept {
  return strategy == SeedStrategy::Centroid ? "centroid" : "brightest";
}

Components label_components(const BinaryMask& mask) {
  Components out{LabelMap(mask.width(), mask.height(), 0), 0};
  std::vector<Pixel> stack;
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask(r, c) || out.labels(r, c) != 0) continue;
      const int label = ++out.count;
      out.labels(r, c) = label;
      stack.push_back({r, c});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        for (const auto& o : kNeighbours4) {
          const int rr = p.row + o.dy, cc = p.col + o.dx;
          if (mask.contains(rr, cc) && mask(rr, cc) && out.labels(rr, cc) == 0) {
            out.labels(rr, cc) = label;
            stack.push_back({rr, cc});
          }
        }
      }
    }
  }
  return out;
}

MarkerSet extract_markers(const BinaryMask& binary, const StructuringElement& se) {
  Components internal = label_components(erode(binary, se));
  if (internal.count == 0) throw NoInternalMarker();
  BinaryMask external = complement(dilate(binary, disc_element(2 * se.extent())));
  return MarkerSet{std::move(internal.labels), std::move(external), internal.count};
}

GrayImage impose_minima(const GrayImage& relief, const MarkerSet& markers) {
  if (!relief.same_shape(markers.internal) || !relief.same_shape(markers.external)) {
    throw InvalidArgument("relief and marker dimensions differ");
  }
  GrayImage forced(relief.width(), relief.height(), 1.0);
  GrayImage floor(relief.width(), relief.height());
  for (std::size_t i = 0; i < relief.size(); ++i) {
    const bool marked = markers.internal[i] > 0 || markers.external[i] != 0;
    forced[i] = marked ? 0.0 : 1.0;
    floor[i] = marked ? 0.0 : std::min(relief[i] + kMinimaEpsilon, 1.0);
  }
  return reconstruct_by_erosion(forced, floor, disc_element(1));
}

GrayImage sobel_gradient(const GrayImage& img) {
  const int h = img.height(), w = img.width();
  auto at = [&](int r, int c) { return img(std::clamp(r, 0, h - 1), std::clamp(c, 0, w - 1)); };
  GrayImage out(w, h);
  double peak = 0.0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double gx = (at(r - 1, c + 1) + 2 * at(r, c + 1) + at(r + 1, c + 1)) -
                        (at(r - 1, c - 1) + 2 * at(r, c - 1) + at(r + 1, c - 1));
      const double gy = (at(r + 1, c - 1) + 2 * at(r + 1, c) + at(r + 1, c + 1)) -
                        (at(r - 1, c - 1) + 2 * at(r - 1, c) + at(r - 1, c + 1));
      out(r, c) = std::hypot(gx, gy);
      peak = std::max(peak, out(r, c));
    }
  }
  if (peak > 0.0) {
    for (auto& v : out.pixels()) v = std::min(v / peak, 1.0);
  }
  return out;
}

LabelMap flood_from_markers(const GrayImage& relief, const MarkerSet& markers) {
  if (!relief.same_shape(markers.internal) || !relief.same_shape(markers.external)) {
    throw InvalidArgument("relief and marker dimensions differ");
  }
  constexpr int kUnvisited = -1;
  constexpr int kQueued = -2;
  const int w = relief.width();
  LabelMap labels(w, relief.height(), kUnvisited);
  bool any_marker = false;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (markers.internal[i] > 0) {
      labels[i] = markers.internal[i];
      any_marker = true;
    } else if (markers.external[i]) {
      labels[i] = markers.external_label();
      any_marker = true;
    }
  }
  if (!any_marker) throw InvalidArgument("watershed needs at least one marker");

  using Entry = std::pair<double, std::size_t>;  // (relief value, raster index)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
  auto enqueue_neighbours = [&](int r, int c) {
    for (const auto& o : kNeighbours4) {
      const int rr = r + o.dy, cc = c + o.dx;
      if (labels.contains(rr, cc) && labels(rr, cc) == kUnvisited) {
        labels(rr, cc) = kQueued;
        queue.emplace(relief(rr, cc), labels.index(rr, cc));
      }
    }
  };
  for (int r = 0; r < labels.height(); ++r) {
    for (int c = 0; c < w; ++c) {
      if (labels(r, c) > 0) enqueue_neighbours(r, c);
    }
  }

  while (!queue.empty()) {
    const std::size_t idx = queue.top().second;
    queue.pop();
    const int r = static_cast<int>(idx / static_cast<std::size_t>(w));
    const int c = static_cast<int>(idx % static_cast<std::size_t>(w));
    int found = 0;
    bool conflict = false;
    for (const auto& o : kNeighbours4) {
      const int rr = r + o.dy, cc = c + o.dx;
      if (!labels.contains(rr, cc) || labels(rr, cc) <= 0) continue;
      if (found == 0) {
        found = labels(rr, cc);
      } else if (labels(rr, cc) != found) {
        conflict = true;
      }
    }
    if (conflict || found == 0) {
      labels(r, c) = 0;
      continue;
    }
    labels(r, c) = found;
    enqueue_neighbours(r, c);
  }
  // Anything never reached (fenced in by line pixels) is left unassigned.
  for (auto& v : labels.pixels()) v = std::max(v, 0);
  return labels;
}

LabelMap watershed_segment(const GrayImage& img, const MarkerSet& markers) {
  return flood_from_markers(impose_minima(sobel_gradient(img), markers), markers);
}

BinaryMask region_grow(const GrayImage& img, const std::vector<Pixel>& seeds, double tolerance) {
  if (seeds.empty()) throw InvalidArgument("region growing needs at least one seed");
  if (!(tolerance >= 0.0 && tolerance <= 1.0)) throw InvalidArgument("tolerance must lie in [0,1]");
  for (const auto& s : seeds) {
    if (!img.contains(s.row, s.col)) {
      throw InvalidArgument("seed (" + std::to_string(s.row) + "," + std::to_string(s.col) +
                            ") is outside the image");
    }
  }

  enum : std::uint8_t { kFree = 0, kRegion = 1, kFrontier = 2 };
  Grid<std::uint8_t> state(img.width(), img.height(), kFree);
  std::set<std::pair<double, std::size_t>> frontier;  // (intensity, raster index)
  double sum = 0.0;
  std::size_t count = 0;

  auto admit = [&](int r, int c) {
    state(r, c) = kRegion;
    sum += img(r, c);
    ++count;
    for (const auto& o : kNeighbours4) {
      const int rr = r + o.dy, cc = c + o.dx;
      if (state.contains(rr, cc) && state(rr, cc) == kFree) {
        state(rr, cc) = kFrontier;
        frontier.emplace(img(rr, cc), state.index(rr, cc));
      }
    }
  };

  for (const auto& s : seeds) {
    if (state(s.row, s.col) == kFrontier) frontier.erase({img(s.row, s.col), state.index(s.row, s.col)});
    if (state(s.row, s.col) != kRegion) admit(s.row, s.col);
  }

  while (!frontier.empty()) {
    const double mean = sum / static_cast<double>(count);
    auto best = frontier.end();
    auto above = frontier.lower_bound({mean, 0});
    if (above != frontier.end()) best = above;
    if (above != frontier.begin()) {
      // Lowest index among the largest intensity below the mean.
      auto below = frontier.lower_bound({std::prev(above)->first, 0});
      if (best == frontier.end()) {
        best = below;
      } else {
        const double d_below = std::abs(below->first - mean);
        const double d_above = std::abs(best->first - mean);
        if (d_below < d_above || (d_below == d_above && below->second < best->second)) best = below;
      }
    }
    if (std::abs(best->first - mean) > tolerance) break;
    const std::size_t idx = best->second;
    frontier.erase(best);
    admit(static_cast<int>(idx / static_cast<std::size_t>(img.width())),
          static_cast<int>(idx % static_cast<std::size_t>(img.width())));
  }

  BinaryMask out(img.width(), img.height());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = state[i] == kRegion ? 1 : 0;
  return out;
}

double mask_perimeter(const BinaryMask& mask) {
  std::size_t edges = 0;
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask(r, c)) continue;
      for (const auto& o : kNeighbours4) {
        const int rr = r + o.dy, cc = c + o.dx;
        if (!mask.contains(rr, cc) || !mask(rr, cc)) ++edges;
      }
    }
  }
  return static_cast<double>(edges) * std::numbers::pi / 4.0;
}

RegionStats region_stats(const BinaryMask& mask, SegmentationMethod method) {
  RegionStats st;
  st.method = method;
  const auto area = static_cast<double>(count_foreground(mask));
  st.size_fraction = area / static_cast<double>(mask.size());
  if (area > 0) {
    const double p = mask_perimeter(mask);
    st.circularity = std::clamp(4.0 * std::numbers::pi * area / (p * p), 0.0, 1.0);
  }
  st.border_irregularity = 1.0 - st.circularity;
  return st;
}

std::vector<Pixel> select_seeds(const GrayImage& img, const BinaryMask& binary, SeedStrategy strategy) {
  const Components comps = label_components(binary);
  if (comps.count == 0) return {};
  std::vector<std::size_t> sizes(static_cast<std::size_t>(comps.count) + 1, 0);
  for (int v : comps.labels.pixels()) ++sizes[static_cast<std::size_t>(v)];
  int largest = 1;
  for (int k = 2; k <= comps.count; ++k) {
    if (sizes[static_cast<std::size_t>(k)] > sizes[static_cast<std::size_t>(largest)]) largest = k;
  }

  if (strategy == SeedStrategy::Brightest) {
    Pixel best{-1, -1};
    for (int r = 0; r < img.height(); ++r) {
      for (int c = 0; c < img.width(); ++c) {
        if (comps.labels(r, c) != largest) continue;
        if (best.row < 0 || img(r, c) > img(best.row, best.col)) best = {r, c};
      }
    }
    return {best};
  }

  double sum_r = 0, sum_c = 0;
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      if (comps.labels(r, c) == largest) {
        sum_r += r;
        sum_c += c;
      }
    }
  }
  const double n = static_cast<double>(sizes[static_cast<std::size_t>(largest)]);
  const double cr = sum_r / n, cc = sum_c / n;
  Pixel best{-1, -1};
  double best_d = 0;
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      if (comps.labels(r, c) != largest) continue;
      const double d = (r - cr) * (r - cr) + (c - cc) * (c - cc);
      if (best.row < 0 || d < best_d) {
        best = {r, c};
        best_d = d;
      }
    }
  }
  return {best};
}

TumourRegion tumour_region(const GrayImage& img, SegmentationMethod method,
                           const SegmentationParams& params) {
  const BinaryMask binary = binarize(img, params.binarize_threshold);
  if (count_foreground(binary) == 0) {
    BinaryMask empty(img.width(), img.height(), 0);
    RegionStats st = region_stats(empty, method);
    return TumourRegion{std::move(empty), st, std::nullopt};
  }

  BinaryMask segmented(img.width(), img.height(), 0);
  std::optional<LabelMap> labels;
  if (method == SegmentationMethod::Watershed) {
    const MarkerSet markers = extract_markers(binary, disc_element(params.marker_radius));
    labels = watershed_segment(img, markers);
    for (std::size_t i = 0; i < segmented.size(); ++i) {
      const int v = (*labels)[i];
      segmented[i] = (v >= 1 && v <= markers.internal_count) ? 1 : 0;
    }
  } else {
    segmented = region_grow(img, select_seeds(img, binary, params.seed_strategy), params.tolerance);
  }

  // Reconstruction requires marker <= mask.
  for (std::size_t i = 0; i < segmented.size(); ++i) segmented[i] = segmented[i] && binary[i];
  BinaryMask mask = morph_reconstruct(segmented, binary, disc_element(params.reconstruct_radius));
  RegionStats st = region_stats(mask, method);
  return TumourRegion{std::move(mask), st, std::move(labels)};
}

}  // namespace btfuzz
