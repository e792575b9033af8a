#include "mashq/features.hpp"

#include <cstdio>

#include "mashq/error.hpp"

namespace mashq {

void FeatureConfig::validate() const {
  if (window < 8 || window % 8 != 0) throw Error("window width must be a positive multiple of 8");
  if (shift < 1 || shift > window - 1) throw Error("window shift must lie in [1, window-1]");
  if (cells < 2) throw Error("cell count must be at least 2");
  if (patch < 2) throw Error("patch side must be at least 2");
  if (bins < 1) throw Error("bin count must be at least 1");
}

const char* stream_name(StreamId id) { return id == StreamId::SW ? "SW" : "VH2D"; }

StreamId parse_stream(const std::string& name) {
  if (name == "SW") return StreamId::SW;
  if (name == "VH2D") return StreamId::VH2D;
  throw Error("unknown stream '" + name + "'");
}

std::vector<Frame> slide_windows(const BinaryImage& word, int window, int shift) {
  if (shift < 1 || shift > window - 1) throw Error("window shift must lie in [1, window-1]");
  const int h = word.height();
  if (word.width() < window) {
    return {Frame{pad(word, 0, 0, window - word.width(), 0), window}};
  }
  std::vector<Frame> frames;
  for (int right = word.width(); right - window >= 0; right -= shift)
    frames.push_back({crop(word, BBox{right - window, 0, right, h}), right});
  return frames;
}

std::optional<double> row_centroid(const BinaryImage& patch) {
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < patch.height(); ++y)
    for (int x = 0; x < patch.width(); ++x)
      if (patch.at(x, y)) {
        sum += y;
        ++n;
      }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n) / patch.height();
}

SWVector sw_features(const Frame& frame, std::optional<double> prev_centroid, int cells) {
  const BinaryImage& p = frame.patch;
  const int w = p.width();
  const int h = p.height();
  if (w % 8 != 0) throw Error("frame width must be a multiple of 8");
  SWVector f{};

  // F5..F12: ink density of eight equal column bands. F1 is their mean, which
  // equals ink / (N*H) because the bands partition the window.
  const int band = w / 8;
  double band_sum = 0.0;
  for (int b = 0; b < 8; ++b) {
    int ink = 0;
    for (int y = 0; y < h; ++y)
      for (int x = b * band; x < (b + 1) * band; ++x) ink += p.at(x, y);
    f[4 + b] = static_cast<double>(ink) / (static_cast<double>(band) * h);
    band_sum += f[4 + b];
  }
  f[0] = band_sum / 8.0;
  f[1] = 1.0 - f[0];

  // F3: ink/background label changes between vertical cells.
  int changes = 0;
  int prev_label = -1;
  for (int c = 0; c < cells; ++c) {
    const int y0 = c * h / cells;
    const int y1 = (c + 1) * h / cells;
    int label = 0;
    for (int y = y0; y < y1 && !label; ++y)
      for (int x = 0; x < w; ++x)
        if (p.at(x, y)) {
          label = 1;
          break;
        }
    if (prev_label >= 0 && label != prev_label) ++changes;
    prev_label = label;
  }
  f[2] = static_cast<double>(changes) / (cells - 1);

  const auto cg = row_centroid(p);
  f[12] = cg.value_or(0.0);
  f[3] = (cg && prev_centroid) ? *cg - *prev_centroid : 0.0;

  // F14..F18: background pixels in five local configurations.
  std::array<int, 5> config{};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (p.at(x, y)) continue;
      const bool up = p.at_or_blank(x, y - 1);
      const bool down = p.at_or_blank(x, y + 1);
      const bool right = p.at_or_blank(x + 1, y);
      const bool left = p.at_or_blank(x - 1, y);
      config[0] += up;
      config[1] += down;
      config[2] += right;
      config[3] += left;
      config[4] += (up + down + right + left) >= 3;
    }
  }
  const double area = static_cast<double>(w) * h;
  for (int k = 0; k < 5; ++k) f[13 + k] = config[k] / area;
  return f;
}

BinaryImage normalize_patch(const BinaryImage& patch, int side) {
  if (side < 2) throw Error("patch side must be at least 2");
  BinaryImage out(side, side);
  const auto box = ink_bbox(patch);
  if (!box) return out;
  const int bw = box->width();
  const int bh = box->height();
  for (int y = 0; y < side; ++y) {
    const int sy = box->y0 + y * bh / side;
    for (int x = 0; x < side; ++x) {
      const int sx = box->x0 + x * bw / side;
      out.set(x, y, patch.at(sx, sy));
    }
  }
  return out;
}

Projections vh2d(const BinaryImage& square_patch) {
  const int m = square_patch.width();
  if (square_patch.height() != m) throw Error("VH2D needs a square patch");
  Projections p;
  p.vertical.assign(static_cast<std::size_t>(m), 0);
  p.horizontal.assign(static_cast<std::size_t>(m), 0);
  p.diag45.assign(static_cast<std::size_t>(2 * m - 1), 0);
  p.diag135.assign(static_cast<std::size_t>(2 * m - 1), 0);
  for (int row = 0; row < m; ++row) {
    for (int col = 0; col < m; ++col) {
      if (!square_patch.at(col, row)) continue;
      ++p.vertical[col];
      ++p.horizontal[row];
      // 1-based l = row+1, k = col+1: l - k = M - idx  and  l + k = idx + 1.
      ++p.diag45[static_cast<std::size_t>(m - 1 - row + col)];
      ++p.diag135[static_cast<std::size_t>(row + col)];
    }
  }
  return p;
}

std::vector<double> bin_projection(std::span<const int> proj, int bins, double area) {
  if (bins < 1) throw Error("bin count must be at least 1");
  if (proj.empty()) throw Error("empty projection");
  const std::size_t n = proj.size();
  std::vector<double> out(static_cast<std::size_t>(bins), 0.0);
  for (int g = 0; g < bins; ++g) {
    const std::size_t lo = static_cast<std::size_t>(g) * n / bins;
    const std::size_t hi = static_cast<std::size_t>(g + 1) * n / bins;
    long sum = 0;
    for (std::size_t i = lo; i < hi; ++i) sum += proj[i];
    out[g] = static_cast<double>(sum) / area;
  }
  return out;
}

std::vector<double> vh2d_vector(const BinaryImage& frame_patch, const FeatureConfig& cfg) {
  const auto norm = normalize_patch(frame_patch, cfg.patch);
  const auto p = vh2d(norm);
  const double area = static_cast<double>(cfg.patch) * cfg.patch;
  std::vector<double> v;
  v.reserve(cfg.vh2d_dims());
  for (const auto* proj : {&p.vertical, &p.horizontal, &p.diag45, &p.diag135}) {
    const auto b = bin_projection(*proj, cfg.bins, area);
    v.insert(v.end(), b.begin(), b.end());
  }
  return v;
}

std::pair<StreamSequence, StreamSequence> extract_streams(const BinaryImage& word,
                                                          const FeatureConfig& cfg) {
  cfg.validate();
  if (ink_count(word) == 0) throw Error("cannot extract features from a blank word");
  const auto frames = slide_windows(word, cfg.window, cfg.shift);

  // Centroids first; F4 is then a left fold over them.
  std::vector<std::optional<double>> centroids;
  centroids.reserve(frames.size());
  for (const auto& fr : frames) centroids.push_back(row_centroid(fr.patch));

  StreamSequence sw{StreamId::SW, {}};
  StreamSequence vh{StreamId::VH2D, {}};
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::optional<double> prev = i == 0 ? std::nullopt : centroids[i - 1];
    const auto f = sw_features(frames[i], prev, cfg.cells);
    sw.vectors.emplace_back(f.begin(), f.end());
    vh.vectors.push_back(vh2d_vector(frames[i].patch, cfg));
  }
  return {std::move(sw), std::move(vh)};
}

std::string format_feature_dump(const StreamSequence& seq) {
  const std::size_t dims = seq.vectors.empty() ? 0 : seq.vectors.front().size();
  std::string out = "# mashq-features v1 stream=" + std::string(stream_name(seq.stream)) +
                    " dims=" + std::to_string(dims) + "\n";
  char buf[32];
  for (std::size_t i = 0; i < seq.vectors.size(); ++i) {
    out += stream_name(seq.stream);
    out += '\t';
    out += std::to_string(i);
    for (double v : seq.vectors[i]) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += '\t';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace mashq
