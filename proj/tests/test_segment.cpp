#include <doctest.h>

#include "mashq/error.hpp"
#include "mashq/segment.hpp"
#include "oracles.hpp"

using namespace mashq;

namespace {

void fill(BinaryImage& img, int x0, int y0, int x1, int y1) {
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) img.set(x, y, true);
}

// Word spans from a left-to-right scan of the column projection, where only
// blank runs of at least `gap` columns separate words.
std::vector<std::pair<int, int>> spans_by_scan(const BinaryImage& line, int gap) {
  const auto v = oracle::column_counts(line);
  std::vector<std::pair<int, int>> spans;
  int run = 0;
  int start = -1, last = -1;
  for (int x = 0; x < static_cast<int>(v.size()); ++x) {
    if (v[x] == 0) {
      ++run;
      continue;
    }
    if (start >= 0 && run >= gap) {
      spans.emplace_back(start, last + 1);
      start = -1;
    }
    if (start < 0) start = x;
    last = x;
    run = 0;
  }
  if (start >= 0) spans.emplace_back(start, last + 1);
  return spans;
}

}  // namespace

TEST_SUITE("segment") {

TEST_CASE("single and double line bands") {
  BinaryImage one(12, 10);
  fill(one, 1, 3, 11, 7);
  const auto b = segment_lines(one);
  REQUIRE(b.size() == 1);
  CHECK(b[0].top <= 3);
  CHECK(b[0].bottom >= 7);

  BinaryImage two(12, 16);
  fill(two, 1, 2, 11, 5);
  fill(two, 1, 8, 11, 12);
  const auto bb = segment_lines(two);
  REQUIRE(bb.size() == 2);
  CHECK(bb[0].bottom <= bb[1].top);

  CHECK(segment_lines(BinaryImage(5, 5)).empty());
}

TEST_CASE("one-row runs are dropped") {
  BinaryImage img(10, 10);
  fill(img, 0, 2, 10, 3);
  fill(img, 0, 6, 10, 9);
  const auto b = segment_lines(img);
  REQUIRE(b.size() == 1);
  CHECK(b[0] == LineBand{5, 10});
}

TEST_CASE("generated page lines match the layout") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    // the baseline rows dominate the profile, so tails need a low threshold
    const auto page = oracle::text_page(3, seed, false);
    const auto bands = segment_lines(page.image, 0.01);
    REQUIRE(bands.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(bands[i].top - page.lines[i].first) <= 1);
      CHECK(std::abs(bands[i].bottom - page.lines[i].second) <= 1);
      if (i > 0) CHECK(bands[i - 1].bottom <= bands[i].top);
    }
  }
}

TEST_CASE("a detached dot row band is kept apart from its line") {
  BinaryImage img(20, 20);
  fill(img, 0, 10, 20, 14);
  fill(img, 4, 6, 8, 8);  // dot with two blank rows below it
  const auto b = segment_lines(img);
  REQUIRE(b.size() == 2);
  CHECK(b[0] == LineBand{5, 9});
  CHECK(b[1] == LineBand{9, 15});
}

TEST_CASE("line bands cover every row above the threshold") {
  Rng rng(8);
  for (int i = 0; i < 30; ++i) {
    const auto img = oracle::random_binary(20, 30, rng.uniform(0.02, 0.2), rng);
    const auto bands = segment_lines(img, 0.3);
    const auto proj = oracle::row_counts(img);
    const int peak = *std::max_element(proj.begin(), proj.end());
    for (std::size_t k = 0; k < bands.size(); ++k) {
      CHECK(bands[k].top < bands[k].bottom);
      if (k) CHECK(bands[k - 1].top < bands[k].top);
    }
    for (int r = 0; r < img.height(); ++r) {
      if (!(proj[r] > 0.3 * peak)) continue;
      const bool run = (r > 0 && proj[r - 1] > 0.3 * peak) || (r + 1 < img.height() && proj[r + 1] > 0.3 * peak);
      if (!run) continue;
      int hits = 0;
      for (const auto& b : bands) hits += b.top <= r && r < b.bottom;
      CHECK(hits >= 1);
    }
  }
}

TEST_CASE("word boxes") {
  BinaryImage blob(10, 6);
  fill(blob, 2, 1, 7, 5);
  auto w = segment_words(blob);
  REQUIRE(w.size() == 1);
  CHECK(w[0].order_index == 0);
  CHECK(w[0].bbox == BBox{2, 1, 7, 5});

  BinaryImage two(20, 6);
  fill(two, 1, 1, 6, 4);
  fill(two, 11, 2, 15, 6);
  w = segment_words(two, 3);
  REQUIRE(w.size() == 2);
  CHECK(w[0].bbox == BBox{11, 2, 15, 6});
  CHECK(w[0].order_index == 0);
  CHECK(w[1].bbox == BBox{1, 1, 6, 4});
  CHECK(w[1].order_index == 1);

  BinaryImage close(20, 6);
  fill(close, 1, 1, 6, 4);
  fill(close, 8, 1, 12, 4);
  w = segment_words(close, 3);
  REQUIRE(w.size() == 1);
  CHECK(w[0].bbox == BBox{1, 1, 12, 4});

  CHECK(segment_words(BinaryImage(8, 3)).empty());
}

TEST_CASE("word spans agree with a run-length scan") {
  Rng rng(12);
  for (int i = 0; i < 60; ++i) {
    BinaryImage line(40, 5);
    for (int x = 0; x < 40; ++x)
      if (rng.bernoulli(0.45)) line.set(x, static_cast<int>(rng.below(5)), true);
    const int gap = rng.range(1, 4);
    const auto boxes = segment_words(line, gap);
    auto spans = spans_by_scan(line, gap);
    std::reverse(spans.begin(), spans.end());
    REQUIRE(boxes.size() == spans.size());
    std::size_t covered = 0;
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      CHECK(boxes[k].order_index == static_cast<int>(k));
      CHECK(boxes[k].bbox.x0 == spans[k].first);
      CHECK(boxes[k].bbox.x1 == spans[k].second);
      if (k) CHECK(boxes[k].bbox.x1 <= boxes[k - 1].bbox.x0);
      covered += ink_count(crop(line, boxes[k].bbox));
    }
    CHECK(covered == ink_count(line));
  }
}

TEST_CASE("padding the page only translates the output") {
  const auto page = oracle::text_page(2, 5).image;
  const auto padded = pad(page, 7, 4, 3, 9);
  const auto a = segment_lines(page);
  const auto b = segment_lines(padded);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b[i].top == a[i].top + 4);
    CHECK(b[i].bottom == a[i].bottom + 4);
    const auto wa = segment_words(crop(page, BBox{0, a[i].top, page.width(), a[i].bottom}));
    const auto wb = segment_words(crop(padded, BBox{0, b[i].top, padded.width(), b[i].bottom}));
    REQUIRE(wa.size() == wb.size());
    for (std::size_t k = 0; k < wa.size(); ++k) {
      CHECK(wb[k].bbox.x0 == wa[k].bbox.x0 + 7);
      CHECK(wb[k].bbox.x1 == wa[k].bbox.x1 + 7);
      CHECK(wb[k].bbox.y0 == wa[k].bbox.y0);
    }
  }
  CHECK_THROWS_AS(segment_words(page, 0), Error);
  CHECK_THROWS_AS(segment_lines(page, 1.5), Error);
}

}
