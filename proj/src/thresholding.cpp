#include "btfuzz/thresholding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "btfuzz/preprocess.hpp"

namespace btfuzz {

Histogram::Histogram(const Bins& bins)
    : bins_(bins), total_(std::accumulate(bins.begin(), bins.end(), std::uint64_t{0})) {
  if (total_ == 0) throw InvalidArgument("histogram is empty");
}

UnitThreshold::UnitThreshold(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) throw InvalidArgument("threshold outside [0,1]");
}

int intensity_bin(double v) noexcept {
  const double scaled = std::floor(v * 255.0 + 0.5);
  return static_cast<int>(std::clamp(scaled, 0.0, 255.0));
}

Histogram compute_histogram(const GrayImage& img) {
  Histogram::Bins bins{};
  for (double v : img.pixels()) ++bins[static_cast<std::size_t>(intensity_bin(v))];
  return Histogram(bins);
}

ClassSplitStats class_split_stats(const Histogram& hist, int t) {
  if (t < 0 || t >= kHistogramBins) throw InvalidArgument("split index outside [0,255]");
  const double n = static_cast<double>(hist.total());
  double w0 = 0, s0 = 0, q0 = 0, s = 0, q = 0;
  for (int i = 0; i < kHistogramBins; ++i) {
    const double p = static_cast<double>(hist[i]) / n;
    s += p * i;
    q += p * i * i;
    if (i <= t) {
      w0 += p;
      s0 += p * i;
      q0 += p * i * i;
    }
  }
  ClassSplitStats st;
  st.weight_low = w0;
  st.weight_high = 1.0 - w0;
  st.total_variance = q - s * s;
  if (w0 > 0) {
    st.mean_low = s0 / w0;
    st.var_low = q0 / w0 - st.mean_low * st.mean_low;
  }
  if (st.weight_high > 0) {
    st.mean_high = (s - s0) / st.weight_high;
    st.var_high = (q - q0) / st.weight_high - st.mean_high * st.mean_high;
  }
  st.within = st.weight_low * st.var_low + st.weight_high * st.var_high;
  const double dm = st.mean_low - st.mean_high;
  st.between = st.weight_low * st.weight_high * dm * dm;
  return st;
}

namespace {

using u128 = unsigned __int128;
using i128 = __int128;

// Sign of a/b - c/d for b, d > 0, by simultaneous Euclid on both fractions.
int compare_fractions(u128 a, u128 b, u128 c, u128 d) {
  for (;;) {
    const u128 qa = a / b;
    const u128 qc = c / d;
    if (qa != qc) return qa < qc ? -1 : 1;
    const u128 ra = a % b;
    const u128 rc = c % d;
    if (ra == 0 || rc == 0) {
      if (ra == rc) return 0;
      return ra == 0 ? -1 : 1;
    }
    // ra/b vs rc/d  <=>  d/rc vs b/ra
    const u128 old_b = b;
    a = d;
    b = rc;
    c = old_b;
    d = ra;
  }
}

}  // namespace

int otsu_bin(const Histogram& hist) {
  const auto& bins = hist.bins();
  const auto occupied = std::count_if(bins.begin(), bins.end(), [](auto c) { return c > 0; });
  if (occupied == 1) {
    return static_cast<int>(std::find_if(bins.begin(), bins.end(), [](auto c) { return c > 0; }) -
                            bins.begin());
  }

  // between(t) = (S0*N - S*n0)^2 / (n0 * n1 * N^2); the N^2 is common to all t.
  const i128 total = hist.total();
  i128 sum_all = 0;
  for (int i = 0; i < kHistogramBins; ++i) sum_all += static_cast<i128>(bins[i]) * i;

  int best = -1;
  u128 best_num = 0, best_den = 1;
  i128 n0 = 0, s0 = 0;
  for (int t = 0; t < kHistogramBins; ++t) {
    n0 += bins[t];
    s0 += static_cast<i128>(bins[t]) * t;
    const i128 n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    i128 diff = s0 * total - sum_all * n0;
    if (diff < 0) diff = -diff;
    const u128 num = static_cast<u128>(diff) * static_cast<u128>(diff);
    const u128 den = static_cast<u128>(n0) * static_cast<u128>(n1);
    if (best < 0 || compare_fractions(num, den, best_num, best_den) > 0) {
      best = t;
      best_num = num;
      best_den = den;
    }
  }
  return best;
}

UnitThreshold otsu_threshold(const Histogram& hist) {
  return UnitThreshold(otsu_bin(hist) / 255.0);
}

UnitThreshold global_threshold_feature(const GrayImage& img) {
  return otsu_threshold(compute_histogram(adjust_intensity(img)));
}

}  // namespace btfuzz
