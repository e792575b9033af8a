#include "mashq/preprocess.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "mashq/error.hpp"

namespace mashq {

int otsu_threshold(const GrayImage& image) {
  std::array<double, 256> hist{};
  for (auto v : image.samples()) hist[v] += 1.0;
  const double total = static_cast<double>(image.samples().size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[i];

  int best_t = 0;
  double best_var = 0.0;
  double n0 = 0.0;
  double s0 = 0.0;
  // Class 0 holds intensities < t.
  for (int t = 1; t < 256; ++t) {
    n0 += hist[t - 1];
    s0 += (t - 1) * hist[t - 1];
    const double n1 = total - n0;
    if (n0 == 0.0 || n1 == 0.0) continue;
    const double diff = s0 / n0 - (sum_all - s0) / n1;
    const double var = (n0 / total) * (n1 / total) * diff * diff;
    if (var > best_var) {
      best_var = var;
      best_t = t;
    }
  }
  return best_t;
}

BinaryImage binarize_otsu(const GrayImage& image) {
  const int t = otsu_threshold(image);
  BinaryImage out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) out.set(x, y, image.at(x, y) < t);
  return out;
}

BinaryImage median3x3(const BinaryImage& image) {
  const int w = image.width();
  const int h = image.height();
  auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
  BinaryImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int votes = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          votes += image.at(clampi(x + dx, 0, w - 1), clampi(y + dy, 0, h - 1));
      out.set(x, y, votes >= 5);
    }
  }
  return out;
}

SkewEstimate estimate_skew_hough(const BinaryImage& image, double range_degrees,
                                 double step_degrees) {
  if (!(step_degrees > 0.0)) throw Error("skew step must be positive");
  if (!(range_degrees >= 0.0 && range_degrees <= 45.0)) throw Error("skew range must lie in [0, 45]");

  std::vector<std::pair<int, int>> ink;
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      if (image.at(x, y)) ink.emplace_back(x, image.height() - 1 - y);  // y up
  if (ink.empty()) throw Error("no ink");

  const int n_half = static_cast<int>(std::lround(range_degrees / step_degrees));
  const double diag = std::hypot(image.width(), image.height());
  const int offset = static_cast<int>(std::ceil(diag)) + 1;
  std::vector<int> acc(static_cast<std::size_t>(2 * offset + 1));

  SkewEstimate best{0.0, -1.0};
  for (int i = -n_half; i <= n_half; ++i) {
    const double angle = i * step_degrees;
    const double theta = (90.0 + angle) * M_PI / 180.0;
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    std::fill(acc.begin(), acc.end(), 0);
    int peak = 0;
    for (const auto& [x, y] : ink) {
      const auto bin = static_cast<std::size_t>(std::lround(x * c + y * s) + offset);
      peak = std::max(peak, ++acc[bin]);
    }
    const double score = peak;
    bool take = score > best.peak_score;
    if (score == best.peak_score) {
      const double a = std::abs(angle);
      const double b = std::abs(best.angle);
      take = a < b || (a == b && angle < best.angle);
    }
    if (take) best = {angle, score};
  }
  return best;
}

BinaryImage deskew(const BinaryImage& image, const SkewEstimate& est) {
  return rotate(image, -est.angle);
}

int baseline_row(const BinaryImage& line) {
  const auto proj = h_projection(line);
  int best = -1;
  int best_count = 0;
  for (int r = 0; r < static_cast<int>(proj.size()); ++r) {
    if (proj[r] > best_count) {
      best_count = proj[r];
      best = r;
    }
  }
  if (best < 0) throw Error("baseline of an empty line");
  return best;
}

}  // namespace mashq
