#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "btfuzz/image.hpp"

namespace btfuzz {

enum class Label { Tumour, NonTumour };
enum class Split { Train, Test };

/// Manifest tokens: `tumour` / `non_tumour`, `train` / `test`.
std::string_view to_token(Label label) noexcept;
std::string_view to_token(Split split) noexcept;
Label parse_label(std::string_view token);
Split parse_split(std::string_view token);

/// Reads an 8-bit grayscale or RGB PNG/JPEG. RGB is reduced to
/// 0.299R + 0.587G + 0.114B; values are divided by 255.
GrayImage load_image(const std::filesystem::path& path);

/// Writes an 8-bit grayscale PNG (round(v * 255)).
void save_png(const GrayImage& img, const std::filesystem::path& path);
void save_png(const BinaryMask& mask, const std::filesystem::path& path);
/// Writes a 16-bit grayscale PNG; labels above 65535 are rejected.
void save_png16(const LabelMap& labels, const std::filesystem::path& path);

struct ManifestEntry {
  std::string path;               // as written in the CSV
  std::filesystem::path resolved; // relative paths are anchored at the CSV's directory
  Label label = Label::NonTumour;
  Split split = Split::Test;
};

class DatasetManifest {
 public:
  DatasetManifest() = default;
  explicit DatasetManifest(std::vector<ManifestEntry> entries);

  const std::vector<ManifestEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t count(Label label, Split split) const noexcept;
  std::vector<ManifestEntry> split(Split split) const;

 private:
  std::vector<ManifestEntry> entries_;
};

struct ManifestOptions {
  bool require_files = true;
};

DatasetManifest load_manifest(const std::filesystem::path& path, ManifestOptions options = {});
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct PhantomSpec {
  int count_per_class = 50;
  int width = 64;
  int height = 64;
  int radius_min = 20;
  int radius_max = 26;
  double blob_intensity = 0.9;
  double background_mean = 0.2;
  double noise_amplitude = 0.05;
  std::uint64_t seed = 42;

  /// Disc radii scaled to the image: 0.32..0.42 of the shorter side, so a
  /// tumour disc covers roughly 30-55% of the frame.
  static PhantomSpec scaled_for(int width, int height, int count_per_class, std::uint64_t seed);

  void validate() const;
};

struct LabeledImage {
  GrayImage image;
  Label label;
};

/// Fully determined by the PhantomSpec fields (seed included). Classes alternate, tumour
/// first: T, N, T, N, ...
std::vector<LabeledImage> generate_phantom(const PhantomSpec& spec);

}  // namespace btfuzz
