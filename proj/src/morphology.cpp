#include "btfuzz/morphology.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <functional>

namespace btfuzz {

StructuringElement::StructuringElement(std::vector<Offset> offsets) : offsets_(std::move(offsets)) {
  std::sort(offsets_.begin(), offsets_.end());
  offsets_.erase(std::unique(offsets_.begin(), offsets_.end()), offsets_.end());
  if (!std::binary_search(offsets_.begin(), offsets_.end(), Offset{0, 0})) {
    throw InvalidArgument("structuring element must contain the origin");
  }
  for (const auto& o : offsets_) {
    if (!std::binary_search(offsets_.begin(), offsets_.end(), Offset{-o.dy, -o.dx})) {
      throw InvalidArgument("structuring element must be symmetric under negation");
    }
    extent_ = std::max({extent_, std::abs(o.dy), std::abs(o.dx)});
  }
}

StructuringElement disc_element(int radius) {
  if (radius < 0) throw InvalidArgument("disc radius must be >= 0");
  std::vector<Offset> offsets;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dy * dy + dx * dx <= radius * radius) offsets.push_back({dy, dx});
    }
  }
  return StructuringElement(std::move(offsets));
}

namespace {

template <typename T, typename Pick>
Grid<T> rank_filter(const Grid<T>& img, const StructuringElement& se, Pick pick) {
  Grid<T> out(img.width(), img.height());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      T acc = img(r, c);
      for (const auto& o : se.offsets()) {
        const int rr = std::clamp(r + o.dy, 0, img.height() - 1);
        const int cc = std::clamp(c + o.dx, 0, img.width() - 1);
        acc = pick(acc, img(rr, cc));
      }
      out(r, c) = acc;
    }
  }
  return out;
}

constexpr auto kMax = [](auto a, auto b) { return a < b ? b : a; };
constexpr auto kMin = [](auto a, auto b) { return b < a ? b : a; };

// Geodesic reconstruction. `Wider(a, b)` is true when a extends further than
// b in the propagation direction (a > b for dilation, a < b for erosion).
template <typename Wider>
GrayImage hybrid_reconstruct(const GrayImage& marker, const GrayImage& mask,
                             const StructuringElement& se, Wider wider) {
  const int h = mask.height();
  const int w = mask.width();
  auto extend = [&](double a, double b) { return wider(a, b) ? a : b; };
  auto clip = [&](double a, double b) { return wider(a, b) ? b : a; };

  std::vector<Offset> forward, backward;  // neighbours before / after the origin in raster order
  for (const auto& o : se.offsets()) {
    if (o.dy < 0 || (o.dy == 0 && o.dx < 0)) forward.push_back(o);
    if (o.dy > 0 || (o.dy == 0 && o.dx > 0)) backward.push_back(o);
  }

  GrayImage out = marker;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = out(r, c);
      for (const auto& o : forward) {
        if (out.contains(r + o.dy, c + o.dx)) acc = extend(acc, out(r + o.dy, c + o.dx));
      }
      out(r, c) = clip(acc, mask(r, c));
    }
  }

  std::deque<Pixel> fifo;
  for (int r = h - 1; r >= 0; --r) {
    for (int c = w - 1; c >= 0; --c) {
      double acc = out(r, c);
      for (const auto& o : backward) {
        if (out.contains(r + o.dy, c + o.dx)) acc = extend(acc, out(r + o.dy, c + o.dx));
      }
      out(r, c) = clip(acc, mask(r, c));
      for (const auto& o : backward) {
        const int rr = r + o.dy, cc = c + o.dx;
        if (out.contains(rr, cc) && wider(out(r, c), out(rr, cc)) && wider(mask(rr, cc), out(rr, cc))) {
          fifo.push_back({r, c});
          break;
        }
      }
    }
  }

  while (!fifo.empty()) {
    const Pixel p = fifo.front();
    fifo.pop_front();
    const double v = out(p.row, p.col);
    for (const auto& o : se.offsets()) {
      const int rr = p.row + o.dy, cc = p.col + o.dx;
      if (!out.contains(rr, cc)) continue;
      if (wider(v, out(rr, cc)) && mask(rr, cc) != out(rr, cc)) {
        out(rr, cc) = clip(v, mask(rr, cc));
        fifo.push_back({rr, cc});
      }
    }
  }
  return out;
}

}  // namespace

GrayImage dilate(const GrayImage& img, const StructuringElement& se) { return rank_filter(img, se, kMax); }
GrayImage erode(const GrayImage& img, const StructuringElement& se) { return rank_filter(img, se, kMin); }
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se) {
  return rank_filter(mask, se, kMax);
}
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se) {
  return rank_filter(mask, se, kMin);
}

GrayImage morph_reconstruct(const GrayImage& marker, const GrayImage& mask,
                            const StructuringElement& se) {
  if (!marker.same_shape(mask)) throw InvalidArgument("marker and mask dimensions differ");
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (marker[i] > mask[i]) throw InvalidArgument("reconstruction marker exceeds mask");
  }
  return hybrid_reconstruct(marker, mask, se, std::greater<double>{});
}

BinaryMask morph_reconstruct(const BinaryMask& marker, const BinaryMask& mask,
                             const StructuringElement& se) {
  auto to_gray = [](const BinaryMask& m) {
    GrayImage g(m.width(), m.height());
    for (std::size_t i = 0; i < m.size(); ++i) g[i] = m[i] ? 1.0 : 0.0;
    return g;
  };
  if (!marker.same_shape(mask)) throw InvalidArgument("marker and mask dimensions differ");
  const GrayImage rec = morph_reconstruct(to_gray(marker), to_gray(mask), se);
  BinaryMask out(mask.width(), mask.height());
  for (std::size_t i = 0; i < rec.size(); ++i) out[i] = rec[i] > 0.5 ? 1 : 0;
  return out;
}

GrayImage reconstruct_by_erosion(const GrayImage& marker, const GrayImage& mask,
                                 const StructuringElement& se) {
  if (!marker.same_shape(mask)) throw InvalidArgument("marker and mask dimensions differ");
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (marker[i] < mask[i]) throw InvalidArgument("erosion marker lies below mask");
  }
  return hybrid_reconstruct(marker, mask, se, std::less<double>{});
}

}  // namespace btfuzz
