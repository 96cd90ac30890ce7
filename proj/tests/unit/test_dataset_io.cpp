#include <gtest/gtest.h>
#include <jpeglib.h>
#include <png.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "btfuzz/dataset_io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace btfuzz;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("btfuzz_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Writes an 8-bit PNG with libpng directly so reads are not checked against
// the library's own writer.
void write_raw_png(const fs::path& path, int w, int h, const std::vector<std::uint8_t>& bytes,
                   std::uint32_t format) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = format;
  ASSERT_TRUE(png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr));
}

void write_gray_jpeg(const fs::path& path, int w, int h, std::uint8_t value) {
  jpeg_compress_struct cinfo{};
  jpeg_error_mgr jerr{};
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  FILE* f = std::fopen(path.c_str(), "wb");
  ASSERT_NE(f, nullptr);
  jpeg_stdio_dest(&cinfo, f);
  cinfo.image_width = static_cast<JDIMENSION>(w);
  cinfo.image_height = static_cast<JDIMENSION>(h);
  cinfo.input_components = 1;
  cinfo.in_color_space = JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, 95, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  std::vector<JSAMPLE> row(static_cast<std::size_t>(w), value);
  for (int r = 0; r < h; ++r) {
    JSAMPROW ptr = row.data();
    jpeg_write_scanlines(&cinfo, &ptr, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::fclose(f);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace

TEST(LoadImage, MaxValueMapsToOne) {
  const auto dir = scratch_dir("max");
  write_raw_png(dir / "a.png", 1, 1, {255}, PNG_FORMAT_GRAY);
  const GrayImage img = load_image(dir / "a.png");
  EXPECT_EQ(img.width(), 1);
  EXPECT_EQ(img.height(), 1);
  EXPECT_EQ(img(0, 0), 1.0);
}

TEST(LoadImage, MinValueMapsToZero) {
  const auto dir = scratch_dir("min");
  write_raw_png(dir / "a.png", 1, 1, {0}, PNG_FORMAT_GRAY);
  EXPECT_EQ(load_image(dir / "a.png")(0, 0), 0.0);
}

TEST(LoadImage, TwoPixelValues) {
  const auto dir = scratch_dir("two");
  write_raw_png(dir / "a.png", 2, 1, {51, 102}, PNG_FORMAT_GRAY);
  const GrayImage img = load_image(dir / "a.png");
  ASSERT_EQ(img.width(), 2);
  EXPECT_DOUBLE_EQ(img(0, 0), 0.2);
  EXPECT_DOUBLE_EQ(img(0, 1), 0.4);
}

TEST(LoadImage, RgbUsesLuminanceWeights) {
  const auto dir = scratch_dir("rgb");
  write_raw_png(dir / "a.png", 3, 1, {255, 0, 0, 0, 255, 0, 0, 0, 255}, PNG_FORMAT_RGB);
  const GrayImage img = load_image(dir / "a.png");
  EXPECT_NEAR(img(0, 0), 0.299, 1e-12);
  EXPECT_NEAR(img(0, 1), 0.587, 1e-12);
  EXPECT_NEAR(img(0, 2), 0.114, 1e-12);
}

TEST(LoadImage, ReadsJpeg) {
  const auto dir = scratch_dir("jpeg");
  write_gray_jpeg(dir / "a.jpg", 8, 8, 128);
  const GrayImage img = load_image(dir / "a.jpg");
  ASSERT_EQ(img.width(), 8);
  ASSERT_EQ(img.height(), 8);
  for (double v : img.pixels()) EXPECT_NEAR(v, 128.0 / 255.0, 2.0 / 255.0);
}

TEST(LoadImage, Errors) {
  const auto dir = scratch_dir("errors");
  EXPECT_THROW(load_image(dir / "missing.png"), IoError);
  write_text(dir / "text.png", "this is not an image at all");
  EXPECT_THROW(load_image(dir / "text.png"), IoError);
  write_raw_png(dir / "ok.png", 4, 4, std::vector<std::uint8_t>(16, 7), PNG_FORMAT_GRAY);
  const auto full = fs::file_size(dir / "ok.png");
  fs::resize_file(dir / "ok.png", full / 2);
  EXPECT_THROW(load_image(dir / "ok.png"), IoError);
}

TEST(LoadImage, PngRoundTripWithinOneLevel) {
  const auto dir = scratch_dir("roundtrip");
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const GrayImage img = oracle::random_image(rng, 17 + trial, 9 + 2 * trial);
    save_png(img, dir / "r.png");
    const GrayImage back = load_image(dir / "r.png");
    ASSERT_TRUE(back.same_shape(img));
    for (std::size_t i = 0; i < img.size(); ++i) EXPECT_LE(std::abs(back[i] - img[i]), 1.0 / 255.0);
  }
}

TEST(Manifest, TableOneSplitCounts) {
  const auto dir = scratch_dir("table1");
  std::string csv = "path,label,split\n";
  auto add = [&](const char* label, const char* split, int n) {
    for (int i = 0; i < n; ++i) {
      const std::string name = std::string(label) + "_" + split + "_" + std::to_string(i) + ".png";
      write_text(dir / name, "");
      csv += name + "," + label + "," + split + "\n";
    }
  };
  add("non_tumour", "train", 78);
  add("non_tumour", "test", 20);
  add("tumour", "train", 124);
  add("tumour", "test", 31);
  write_text(dir / "manifest.csv", csv);

  const DatasetManifest m = load_manifest(dir / "manifest.csv");
  EXPECT_EQ(m.size(), 253u);
  EXPECT_EQ(m.count(Label::NonTumour, Split::Train), 78u);
  EXPECT_EQ(m.count(Label::NonTumour, Split::Test), 20u);
  EXPECT_EQ(m.count(Label::Tumour, Split::Train), 124u);
  EXPECT_EQ(m.count(Label::Tumour, Split::Test), 31u);
  EXPECT_EQ(m.split(Split::Test).size(), 51u);
  EXPECT_EQ(m.entries().front().resolved, dir / "non_tumour_train_0.png");
}

TEST(Manifest, CountsAreConserved) {
  std::mt19937_64 rng(3);
  std::vector<ManifestEntry> entries;
  for (int i = 0; i < 97; ++i) {
    entries.push_back({"img" + std::to_string(i) + ".png", {}, (rng() & 1) ? Label::Tumour : Label::NonTumour,
                       (rng() & 1) ? Split::Train : Split::Test});
  }
  const DatasetManifest m(entries);
  std::size_t sum = 0;
  for (Label l : {Label::Tumour, Label::NonTumour}) {
    for (Split s : {Split::Train, Split::Test}) sum += m.count(l, s);
  }
  EXPECT_EQ(sum, m.size());
}

TEST(Manifest, HeaderOnlyIsEmpty) {
  const auto dir = scratch_dir("empty");
  write_text(dir / "m.csv", "path,label,split\n");
  EXPECT_EQ(load_manifest(dir / "m.csv").size(), 0u);
}

TEST(Manifest, RejectsUnknownLabel) {
  const auto dir = scratch_dir("maybe");
  write_text(dir / "a.png", "");
  write_text(dir / "m.csv", "path,label,split\na.png,maybe,test\n");
  try {
    load_manifest(dir / "m.csv");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("maybe"), std::string::npos);
  }
}

TEST(Manifest, RejectsBadRows) {
  const auto dir = scratch_dir("bad");
  write_text(dir / "a.png", "");
  write_text(dir / "dup.csv", "path,label,split\na.png,tumour,test\na.png,tumour,train\n");
  EXPECT_THROW(load_manifest(dir / "dup.csv"), Error);
  write_text(dir / "split.csv", "path,label,split\na.png,tumour,validation\n");
  EXPECT_THROW(load_manifest(dir / "split.csv"), Error);
  write_text(dir / "missing.csv", "path,label,split\nnope.png,tumour,test\n");
  EXPECT_THROW(load_manifest(dir / "missing.csv"), Error);
  EXPECT_NO_THROW(load_manifest(dir / "missing.csv", {.require_files = false}));
  write_text(dir / "header.csv", "file,label,split\na.png,tumour,test\n");
  EXPECT_THROW(load_manifest(dir / "header.csv"), Error);
}

TEST(Manifest, WriteThenLoad) {
  const auto dir = scratch_dir("write");
  write_text(dir / "a.png", "");
  write_text(dir / "b.png", "");
  const DatasetManifest m({{"a.png", {}, Label::Tumour, Split::Test}, {"b.png", {}, Label::NonTumour, Split::Train}});
  write_manifest(m, dir / "m.csv");
  const DatasetManifest back = load_manifest(dir / "m.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.entries()[0].path, "a.png");
  EXPECT_EQ(back.entries()[0].label, Label::Tumour);
  EXPECT_EQ(back.entries()[1].split, Split::Train);
}

namespace {

PhantomSpec small_spec() {
  PhantomSpec s;
  s.count_per_class = 1;
  s.width = 64;
  s.height = 64;
  s.radius_min = 8;
  s.radius_max = 8;
  s.blob_intensity = 0.9;
  s.background_mean = 0.2;
  s.noise_amplitude = 0.05;
  s.seed = 7;
  return s;
}

}  // namespace

TEST(Phantom, Deterministic) {
  const auto a = generate_phantom(small_spec());
  const auto b = generate_phantom(small_spec());
  ASSERT_EQ(a.size(), 2u);
  ASSERT_EQ(b.size(), 2u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].label, b[i].label);
    EXPECT_EQ(a[i].image, b[i].image);
  }
  PhantomSpec other = small_spec();
  other.seed = 8;
  EXPECT_NE(generate_phantom(other)[0].image, a[0].image);
}

TEST(Phantom, DiscIsBrightAndBackgroundIsNot) {
  const auto images = generate_phantom(small_spec());
  ASSERT_EQ(images[0].label, Label::Tumour);
  ASSERT_EQ(images[1].label, Label::NonTumour);
  // Disc pixels lie in [0.85, 0.95], background in [0.15, 0.25]: the bright
  // set is exactly the rasterized r = 8 disc, 197 lattice points.
  std::size_t bright = 0;
  for (double v : images[0].image.pixels()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    if (v > 0.5) {
      ++bright;
      EXPECT_GE(v, 0.8);
    } else {
      EXPECT_LE(v, 0.25 + 1e-12);
    }
  }
  EXPECT_EQ(bright, 197u);
  for (double v : images[1].image.pixels()) {
    EXPECT_GE(v, 0.15 - 1e-12);
    EXPECT_LE(v, 0.25 + 1e-12);
  }
}

TEST(Phantom, CountPerClassAndAlternation) {
  PhantomSpec s = small_spec();
  s.count_per_class = 5;
  const auto images = generate_phantom(s);
  ASSERT_EQ(images.size(), 10u);
  for (std::size_t i = 0; i < images.size(); ++i) {
    EXPECT_EQ(images[i].label, i % 2 == 0 ? Label::Tumour : Label::NonTumour);
  }
}

TEST(Phantom, RejectsRadiusThatDoesNotFit) {
  PhantomSpec s = small_spec();
  s.radius_min = 100;
  s.radius_max = 100;
  EXPECT_THROW(generate_phantom(s), InvalidArgument);
  s.radius_min = 10;
  s.radius_max = 5;
  EXPECT_THROW(generate_phantom(s), InvalidArgument);
}

TEST(Phantom, ScaledRadiiFitTheFrame) {
  const PhantomSpec s = PhantomSpec::scaled_for(64, 64, 50, 42);
  EXPECT_NO_THROW(s.validate());
  EXPECT_LE(2 * s.radius_max + 1, 64);
  EXPECT_LE(s.radius_min, s.radius_max);
}
