#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "btfuzz/preprocess.hpp"
#include "btfuzz/thresholding.hpp"
#include "instances.hpp"
#include "oracles.hpp"

using namespace btfuzz;

namespace {

Histogram::Bins two_bins(int a, std::uint64_t na, int b, std::uint64_t nb) {
  Histogram::Bins bins{};
  bins[a] += na;
  bins[b] += nb;
  return bins;
}

}  // namespace

TEST(Histogram, Binning) {
  const Histogram zeros = compute_histogram(GrayImage(10, 1, 0.0));
  EXPECT_EQ(zeros[0], 10u);
  EXPECT_EQ(zeros.total(), 10u);
  for (int i = 1; i < 256; ++i) EXPECT_EQ(zeros[i], 0u);

  GrayImage ends(2, 1);
  ends(0, 1) = 1.0;
  const Histogram h = compute_histogram(ends);
  EXPECT_EQ(h[0], 1u);
  EXPECT_EQ(h[255], 1u);

  EXPECT_EQ(intensity_bin(0.5), 128);
  EXPECT_EQ(intensity_bin(-0.1), 0);
  EXPECT_EQ(intensity_bin(1.1), 255);
  EXPECT_THROW(Histogram(Histogram::Bins{}), InvalidArgument);
}

TEST(Otsu, TwoSeparatedModesPickPlateauStart) {
  EXPECT_EQ(otsu_bin(Histogram(two_bins(50, 50, 200, 50))), 50);
  EXPECT_NEAR(otsu_threshold(Histogram(two_bins(50, 50, 200, 50))).value(), 50.0 / 255.0, 1e-15);
}

TEST(Otsu, SingleBin) {
  Histogram::Bins bins{};
  bins[100] = 7;
  EXPECT_EQ(otsu_bin(Histogram(bins)), 100);
  EXPECT_DOUBLE_EQ(otsu_threshold(Histogram(bins)).value(), 100.0 / 255.0);
}

TEST(Otsu, ExtremeBins) {
  EXPECT_EQ(otsu_bin(Histogram(two_bins(0, 9, 255, 9))), 0);
  EXPECT_EQ(otsu_threshold(Histogram(two_bins(0, 9, 255, 9))).value(), 0.0);
}

TEST(Otsu, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(20240601);
  for (int i = 0; i < 300; ++i) {
    const auto bins = oracle::random_histogram(rng);
    ASSERT_EQ(otsu_bin(Histogram(bins)), oracle::brute_force_otsu(bins)) << "case " << i;
  }
}

TEST(Otsu, WithinPlusBetweenIsTotalVariance) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 40; ++i) {
    const auto bins = oracle::random_histogram(rng);
    const Histogram h(bins);
    double n = 0, s = 0, s2 = 0;
    for (int k = 0; k < 256; ++k) {
      n += static_cast<double>(bins[k]);
      s += static_cast<double>(bins[k]) * k;
      s2 += static_cast<double>(bins[k]) * k * k;
    }
    const double mean = s / n;
    const double total = s2 / n - mean * mean;
    for (int t = 0; t < 256; ++t) {
      const ClassSplitStats st = class_split_stats(h, t);
      const double scale = std::max(total, 1.0);
      ASSERT_NEAR(st.within + st.between, total, 1e-9 * scale) << "t=" << t;
      ASSERT_NEAR(st.total_variance, total, 1e-9 * scale);
      ASSERT_NEAR(st.weight_low + st.weight_high, 1.0, 1e-12);
    }
  }
}

TEST(Otsu, ShiftCovariance) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    Histogram::Bins bins{};
    const int n = std::uniform_int_distribution<int>(1, 40)(rng);
    for (int k = 0; k < n; ++k) bins[std::uniform_int_distribution<int>(0, 200)(rng)] += 1 + rng() % 50;
    const int c = std::uniform_int_distribution<int>(1, 55)(rng);
    Histogram::Bins shifted{};
    for (int k = 0; k + c < 256; ++k) shifted[k + c] = bins[k];
    ASSERT_EQ(otsu_bin(Histogram(shifted)), otsu_bin(Histogram(bins)) + c);
  }
}

TEST(GlobalThreshold, ConstantImageIsZero) {
  EXPECT_EQ(global_threshold_feature(GrayImage(16, 16, 0.42)).value(), 0.0);
}

TEST(GlobalThreshold, BimodalPhantomSeparatesModes) {
  const GrayImage img = oracle::disc_image(64, 64, 32, 32, 12, 0.9, 0.2);
  const GrayImage adjusted = adjust_intensity(img);
  const double lower = *std::min_element(adjusted.pixels().begin(), adjusted.pixels().end());
  const double upper = *std::max_element(adjusted.pixels().begin(), adjusted.pixels().end());
  const double g = global_threshold_feature(img).value();
  // The two-level histogram has a flat optimum between its modes; the
  // smallest maximizing split is the lower mode itself.
  EXPECT_EQ(lower, 0.0);
  EXPECT_EQ(upper, 1.0);
  EXPECT_EQ(g, lower);
  EXPECT_LT(g, upper);
  EXPECT_EQ(static_cast<int>(std::lround(g * 255)), oracle::brute_force_otsu(compute_histogram(adjusted).bins()));
}

TEST(GlobalThreshold, UniformImageNearHalf) {
  GrayImage img(256, 40);
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) img(r, c) = (r * img.width() + c) / double(img.size() - 1);
  }
  EXPECT_NEAR(global_threshold_feature(img).value(), 0.5, 2.0 / 255.0);
}
