#pragma once

#include <vector>

#include "mashq/raster.hpp"

namespace mashq {

struct LineBand {
  int top = 0;     // inclusive
  int bottom = 0;  // exclusive
  friend bool operator==(const LineBand&, const LineBand&) = default;
};

struct WordBox {
  BBox bbox;
  int order_index = 0;  // 0 = rightmost word
};

// Rows whose projection exceeds alpha * max(projection) form text lines.
// Runs shorter than two rows are dropped; each band grows one row on both
// sides, clamped to the page.
std::vector<LineBand> segment_lines(const BinaryImage& page, double alpha = 0.05);

// Blank-column runs of at least `gap` columns separate words. Boxes are tight
// around ink and come out right to left.
std::vector<WordBox> segment_words(const BinaryImage& line, int gap = 3);

}  // namespace mashq
