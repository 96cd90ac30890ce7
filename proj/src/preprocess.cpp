#include "btfuzz/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace btfuzz {

GrayImage resize_with_aspect(const GrayImage& img, Size2 target) {
  if (target.width < 1 || target.height < 1) {
    throw InvalidArgument("resize target must be >= 1x1");
  }
  const double scale = std::min(static_cast<double>(target.width) / img.width(),
                                static_cast<double>(target.height) / img.height());
  const int content_w =
      std::clamp(static_cast<int>(std::lround(img.width() * scale)), 1, target.width);
  const int content_h =
      std::clamp(static_cast<int>(std::lround(img.height() * scale)), 1, target.height);
  const int off_x = (target.width - content_w) / 2;
  const int off_y = (target.height - content_h) / 2;
  const double step_x = static_cast<double>(img.width()) / content_w;
  const double step_y = static_cast<double>(img.height()) / content_h;

  GrayImage out(target.width, target.height, 0.0);
  for (int y = 0; y < content_h; ++y) {
    const double sy = std::clamp((y + 0.5) * step_y - 0.5, 0.0, img.height() - 1.0);
    const int y0 = static_cast<int>(sy);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double fy = sy - y0;
    for (int x = 0; x < content_w; ++x) {
      const double sx = std::clamp((x + 0.5) * step_x - 0.5, 0.0, img.width() - 1.0);
      const int x0 = static_cast<int>(sx);
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double fx = sx - x0;
      // a + f * (b - a) is exact when a == b, so flat regions stay flat.
      const double top = img(y0, x0) + fx * (img(y0, x1) - img(y0, x0));
      const double bottom = img(y1, x0) + fx * (img(y1, x1) - img(y1, x0));
      out(off_y + y, off_x + x) = std::clamp(top + fy * (bottom - top), 0.0, 1.0);
    }
  }
  return out;
}

GrayImage median_filter(const GrayImage& img, int window) {
  if (window < 1 || window % 2 == 0) {
    throw InvalidArgument("median window must be odd and >= 1, got " + std::to_string(window));
  }
  const int half = window / 2;
  GrayImage out(img.width(), img.height());
  std::vector<double> buf(static_cast<std::size_t>(window) * window);
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      std::size_t n = 0;
      for (int dy = -half; dy <= half; ++dy) {
        const int rr = std::clamp(r + dy, 0, img.height() - 1);
        for (int dx = -half; dx <= half; ++dx) {
          buf[n++] = img(rr, std::clamp(c + dx, 0, img.width() - 1));
        }
      }
      // n is odd, so this is the unique middle element.
      auto mid = buf.begin() + static_cast<std::ptrdiff_t>((n - 1) / 2);
      std::nth_element(buf.begin(), mid, buf.begin() + static_cast<std::ptrdiff_t>(n));
      out(r, c) = *mid;
    }
  }
  return out;
}

namespace {

std::size_t nearest_rank_index(double p, std::size_t n) {
  // Guard against p * n landing a hair above an integer (0.99 * 1000).
  const double rank = std::ceil(p * static_cast<double>(n) - 1e-9);
  return static_cast<std::size_t>(std::clamp(rank, 1.0, static_cast<double>(n))) - 1;
}

}  // namespace

double nearest_rank_quantile(const GrayImage& img, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile must lie in [0,1]");
  std::vector<double> sorted(img.pixels().begin(), img.pixels().end());
  auto nth = sorted.begin() + static_cast<std::ptrdiff_t>(nearest_rank_index(p, sorted.size()));
  std::nth_element(sorted.begin(), nth, sorted.end());
  return *nth;
}

GrayImage adjust_intensity(const GrayImage& img, double low_frac, double high_frac) {
  if (!(low_frac >= 0.0) || !(high_frac >= 0.0) || !(low_frac + high_frac < 1.0)) {
    throw InvalidArgument("adjust_intensity requires low, high >= 0 and low + high < 1");
  }
  std::vector<double> sorted(img.pixels().begin(), img.pixels().end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted[nearest_rank_index(low_frac, sorted.size())];
  const double hi = sorted[nearest_rank_index(1.0 - high_frac, sorted.size())];

  GrayImage out(img.width(), img.height(), 0.0);
  if (hi <= lo) return out;
  const double span = hi - lo;
  for (std::size_t i = 0; i < img.size(); ++i) {
    out[i] = std::clamp((img[i] - lo) / span, 0.0, 1.0);
  }
  return out;
}

BinaryMask binarize(const GrayImage& img, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("binarize threshold must lie in [0,1]");
  BinaryMask out(img.width(), img.height());
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = img[i] > t ? 1 : 0;
  return out;
}

}  // namespace btfuzz
