#include "mashq/segment.hpp"

#include <algorithm>

#include "mashq/error.hpp"

namespace mashq {

std::vector<LineBand> segment_lines(const BinaryImage& page, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("line threshold fraction must lie in (0, 1)");
  const auto proj = h_projection(page);
  const int peak = *std::max_element(proj.begin(), proj.end());
  std::vector<LineBand> bands;
  if (peak == 0) return bands;
  const double tau = alpha * peak;

  const int h = page.height();
  int r = 0;
  while (r < h) {
    if (proj[r] <= tau) {
      ++r;
      continue;
    }
    const int start = r;
    while (r < h && proj[r] > tau) ++r;
    if (r - start >= 2) bands.push_back({std::max(0, start - 1), std::min(h, r + 1)});
  }
  return bands;
}

std::vector<WordBox> segment_words(const BinaryImage& line, int gap) {
  if (gap < 1) throw Error("word gap must be at least 1");
  const auto proj = v_projection(line);
  const int w = line.width();

  // Column spans [x0, x1) of words, scanned left to right.
  std::vector<std::pair<int, int>> spans;
  int x = 0;
  while (x < w && proj[x] == 0) ++x;
  while (x < w) {
    const int start = x;
    int last_ink = x;
    while (x < w) {
      if (proj[x] != 0) {
        last_ink = x;
        ++x;
        continue;
      }
      int run_end = x;
      while (run_end < w && proj[run_end] == 0) ++run_end;
      if (run_end == w || run_end - x >= gap) break;
      x = run_end;
    }
    spans.emplace_back(start, last_ink + 1);
    while (x < w && proj[x] == 0) ++x;
  }

  std::vector<WordBox> boxes;
  boxes.reserve(spans.size());
  int order = 0;
  for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
    int y0 = line.height();
    int y1 = 0;
    for (int yy = 0; yy < line.height(); ++yy) {
      for (int xx = it->first; xx < it->second; ++xx) {
        if (line.at(xx, yy)) {
          y0 = std::min(y0, yy);
          y1 = std::max(y1, yy + 1);
          break;
        }
      }
    }
    boxes.push_back({BBox{it->first, y0, it->second, y1}, order++});
  }
  return boxes;
}

}  // namespace mashq
