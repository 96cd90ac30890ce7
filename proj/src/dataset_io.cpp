#include "btfuzz/dataset_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <random>
#include <set>
#include <sstream>

// jpeglib.h expects size_t and FILE to be declared first.
#include <jpeglib.h>

namespace btfuzz {

namespace fs = std::filesystem;

std::string_view to_token(Label label) noexcept {
  return label == Label::Tumour ? "tumour" : "non_tumour";
}

std::string_view to_token(Split split) noexcept {
  return split == Split::Train ? "train" : "test";
}

Label parse_label(std::string_view token) {
  if (token == "tumour") return Label::Tumour;
  if (token == "non_tumour") return Label::NonTumour;
  throw InvalidArgument("unknown label '" + std::string(token) + "'");
}

Split parse_split(std::string_view token) {
  if (token == "train") return Split::Train;
  if (token == "test") return Split::Test;
  throw InvalidArgument("unknown split '" + std::string(token) + "'");
}

// ---------------------------------------------------------------------------
// Image decoding

namespace {

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode), &std::fclose);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return f;
}

double luminance(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

GrayImage decode_png(const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError("cannot decode PNG '" + path.string() + "': " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  // Alpha is read and ignored; 8-bit non-linear formats are not premultiplied.
  image.format = color ? PNG_FORMAT_RGBA : PNG_FORMAT_GA;
  const int channels = color ? 4 : 2;
  const int width = static_cast<int>(image.width);
  const int height = static_cast<int>(image.height);
  if (width < 1 || height < 1) {
    png_image_free(&image);
    throw IoError("zero-dimension image '" + path.string() + "'");
  }
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError("cannot decode PNG '" + path.string() + "': " + image.message);
  }

  GrayImage out(width, height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const png_byte* px = &buffer[i * channels];
    const double v = color ? luminance(px[0], px[1], px[2]) : px[0];
    out[i] = std::clamp(v / 255.0, 0.0, 1.0);
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  std::array<char, JMSG_LENGTH_MAX> message;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message.data());
  std::longjmp(err->jump, 1);
}

// Kept free of non-trivially-destructible locals between setjmp and longjmp.
bool decode_jpeg_raw(std::FILE* file, std::vector<unsigned char>& pixels, int& width, int& height,
                     int& channels, JpegErrorManager& err) {
  jpeg_decompress_struct cinfo;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  channels = cinfo.output_components;
  pixels.resize(static_cast<std::size_t>(width) * height * channels);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = &pixels[static_cast<std::size_t>(cinfo.output_scanline) * width * channels];
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

GrayImage decode_jpeg(const fs::path& path) {
  FilePtr file = open_file(path, "rb");
  std::vector<unsigned char> pixels;
  int width = 0, height = 0, channels = 0;
  JpegErrorManager err{};
  if (!decode_jpeg_raw(file.get(), pixels, width, height, channels, err)) {
    throw IoError("cannot decode JPEG '" + path.string() + "': " + err.message.data());
  }
  if (width < 1 || height < 1) throw IoError("zero-dimension image '" + path.string() + "'");
  GrayImage out(width, height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const unsigned char* px = &pixels[i * channels];
    const double v = channels >= 3 ? luminance(px[0], px[1], px[2]) : px[0];
    out[i] = std::clamp(v / 255.0, 0.0, 1.0);
  }
  return out;
}

void write_png8(const std::vector<png_byte>& bytes, int width, int height, const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path.string() + "': " + image.message);
  }
}

}  // namespace

GrayImage load_image(const fs::path& path) {
  std::array<unsigned char, 8> magic{};
  {
    FilePtr file = open_file(path, "rb");
    if (std::fread(magic.data(), 1, magic.size(), file.get()) < 3) {
      throw IoError("unsupported or truncated image '" + path.string() + "'");
    }
  }
  static constexpr std::array<unsigned char, 8> kPngMagic{0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (magic == kPngMagic) return decode_png(path);
  if (magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF) return decode_jpeg(path);
  throw IoError("unsupported image format '" + path.string() + "'");
}

void save_png(const GrayImage& img, const fs::path& path) {
  std::vector<png_byte> bytes(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    bytes[i] = static_cast<png_byte>(std::lround(std::clamp(img[i], 0.0, 1.0) * 255.0));
  }
  write_png8(bytes, img.width(), img.height(), path);
}

void save_png(const BinaryMask& mask, const fs::path& path) {
  std::vector<png_byte> bytes(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) bytes[i] = mask[i] ? 255 : 0;
  write_png8(bytes, mask.width(), mask.height(), path);
}

void save_png16(const LabelMap& labels, const fs::path& path) {
  std::vector<png_uint_16> values(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] > 65535) {
      throw InvalidArgument("label " + std::to_string(labels[i]) + " does not fit 16 bits");
    }
    values[i] = static_cast<png_uint_16>(labels[i]);
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(labels.width());
  image.height = static_cast<png_uint_32>(labels.height());
  image.format = PNG_FORMAT_LINEAR_Y;
  if (!png_image_write_to_file(&image, path.c_str(), 0, values.data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path.string() + "': " + image.message);
  }
}

// ---------------------------------------------------------------------------
// Manifest

DatasetManifest::DatasetManifest(std::vector<ManifestEntry> entries) : entries_(std::move(entries)) {
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    if (!seen.insert(e.path).second) throw InvalidArgument("duplicate path '" + e.path + "'");
  }
}

std::size_t DatasetManifest::count(Label label, Split split) const noexcept {
  return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [&](const auto& e) {
    return e.label == label && e.split == split;
  }));
}

std::vector<ManifestEntry> DatasetManifest::split(Split split) const {
  std::vector<ManifestEntry> out;
  std::copy_if(entries_.begin(), entries_.end(), std::back_inserter(out),
               [&](const auto& e) { return e.split == split; });
  return out;
}

namespace {

std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

DatasetManifest load_manifest(const fs::path& path, ManifestOptions options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != std::vector<std::string>{"path", "label", "split"}) {
    throw InvalidArgument("manifest '" + path.string() + "' must start with header path,label,split");
  }
  const fs::path base = path.parent_path();
  std::vector<ManifestEntry> entries;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    if (fields.size() != 3) throw InvalidArgument(where + "expected 3 fields");
    ManifestEntry e;
    e.path = fields[0];
    try {
      e.label = parse_label(fields[1]);
      e.split = parse_split(fields[2]);
    } catch (const InvalidArgument& ex) {
      throw InvalidArgument(where + ex.what());
    }
    e.resolved = fs::path(e.path).is_absolute() ? fs::path(e.path) : base / e.path;
    if (options.require_files && !fs::exists(e.resolved)) {
      throw IoError(where + "referenced file '" + e.resolved.string() + "' does not exist");
    }
    entries.push_back(std::move(e));
  }
  return DatasetManifest(std::move(entries));
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest '" + path.string() + "'");
  out << "path,label,split\n";
  for (const auto& e : manifest.entries()) {
    out << e.path << ',' << to_token(e.label) << ',' << to_token(e.split) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Phantoms

PhantomSpec PhantomSpec::scaled_for(int width, int height, int count_per_class, std::uint64_t seed) {
  PhantomSpec spec;
  spec.width = width;
  spec.height = height;
  spec.count_per_class = count_per_class;
  spec.seed = seed;
  const int side = std::min(width, height);
  spec.radius_min = std::max(1, static_cast<int>(std::lround(0.32 * side)));
  spec.radius_max = std::max(spec.radius_min, static_cast<int>(std::lround(0.42 * side)));
  spec.radius_max = std::min(spec.radius_max, (side - 1) / 2);
  spec.radius_min = std::min(spec.radius_min, spec.radius_max);
  return spec;
}

void PhantomSpec::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (count_per_class < 0) throw InvalidArgument("phantom count must be >= 0");
  if (width < 1 || height < 1) throw InvalidArgument("phantom image size must be >= 1x1");
  if (radius_min < 0 || radius_min > radius_max) {
    throw InvalidArgument("phantom radius range must satisfy 0 <= min <= max");
  }
  if (2 * radius_max + 1 > std::min(width, height)) {
    throw InvalidArgument("phantom radius " + std::to_string(radius_max) + " does not fit a " +
                          std::to_string(width) + "x" + std::to_string(height) + " image");
  }
  if (!unit(blob_intensity) || !unit(background_mean) || !unit(noise_amplitude)) {
    throw InvalidArgument("phantom intensities must lie in [0,1]");
  }
}

namespace {

// mt19937_64 is fully specified by the standard; the std distributions are not,
// so draws are mapped by hand to stay bit-identical across toolchains.
class PhantomRng {
 public:
  explicit PhantomRng(std::uint64_t seed) : engine_(seed) {}
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double symmetric() { return 2.0 * unit() - 1.0; }
  int integer(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

std::vector<LabeledImage> generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  PhantomRng rng(spec.seed);
  std::vector<LabeledImage> out;
  out.reserve(static_cast<std::size_t>(spec.count_per_class) * 2);
  for (int i = 0; i < spec.count_per_class; ++i) {
    for (Label label : {Label::Tumour, Label::NonTumour}) {
      GrayImage img(spec.width, spec.height);
      for (auto& v : img.pixels()) {
        v = std::clamp(spec.background_mean + spec.noise_amplitude * rng.symmetric(), 0.0, 1.0);
      }
      if (label == Label::Tumour) {
        const int r = rng.integer(spec.radius_min, spec.radius_max);
        const int cy = rng.integer(r, spec.height - 1 - r);
        const int cx = rng.integer(r, spec.width - 1 - r);
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) {
            if (dy * dy + dx * dx > r * r) continue;
            img(cy + dy, cx + dx) =
                std::clamp(spec.blob_intensity + spec.noise_amplitude * rng.symmetric(), 0.0, 1.0);
          }
        }
      }
      out.push_back({std::move(img), label});
    }
  }
  return out;
}

}  // namespace btfuzz
