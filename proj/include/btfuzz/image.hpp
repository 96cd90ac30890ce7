#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "btfuzz/error.hpp"

namespace btfuzz {

/// Row-major 2-D grid. Width and height are always >= 1.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    check_dims(width, height);
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  Grid(int width, int height, std::vector<T> values)
      : width_(width), height_(height), data_(std::move(values)) {
    check_dims(width, height);
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw InvalidArgument("grid data length " + std::to_string(data_.size()) +
                            " does not match " + std::to_string(width) + "x" +
                            std::to_string(height));
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(int row, int col) { return data_[index(row, col)]; }
  const T& operator()(int row, int col) const { return data_[index(row, col)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }

  bool contains(int row, int col) const noexcept {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  bool same_shape(const auto& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Grid&) const = default;

 private:
  static void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
      throw InvalidArgument("grid dimensions must be >= 1, got " + std::to_string(width) + "x" +
                            std::to_string(height));
    }
  }

  int width_;
  int height_;
  std::vector<T> data_;
};

/// Intensities in [0,1].
using GrayImage = Grid<double>;
/// Nonzero = foreground.
using BinaryMask = Grid<std::uint8_t>;
/// 0 = watershed line / unassigned, k >= 1 = region k.
using LabelMap = Grid<int>;

struct Pixel {
  int row = 0;
  int col = 0;
  bool operator==(const Pixel&) const = default;
  auto operator<=>(const Pixel&) const = default;
};

/// Throws InvalidArgument if any intensity lies outside [0,1] or is NaN.
void require_unit_range(const GrayImage& img);

std::size_t count_foreground(const BinaryMask& mask);
BinaryMask complement(const BinaryMask& mask);

}  // namespace btfuzz
