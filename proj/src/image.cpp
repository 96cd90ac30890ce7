#include "btfuzz/image.hpp"

#include <algorithm>

namespace btfuzz {

void require_unit_range(const GrayImage& img) {
  for (double v : img.pixels()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidArgument("intensity " + std::to_string(v) + " outside [0,1]");
    }
  }
}

std::size_t count_foreground(const BinaryMask& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.pixels().begin(), mask.pixels().end(), [](auto b) { return b != 0; }));
}

BinaryMask complement(const BinaryMask& mask) {
  BinaryMask out(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 0 : 1;
  return out;
}

}  // namespace btfuzz
