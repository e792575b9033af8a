#pragma once

#include "mashq/raster.hpp"

namespace mashq {

struct SkewEstimate {
  double angle = 0.0;    // degrees, positive = text lines lean counter-clockwise
  double peak_score = 0; // accumulator votes at the winning angle
};

// Otsu threshold: the t in [1, 255] maximising between-class variance, first
// maximiser on ties. Returns 0 when no threshold separates the histogram
// (constant image). Pixels with intensity < t are ink.
int otsu_threshold(const GrayImage& image);
BinaryImage binarize_otsu(const GrayImage& image);

// 3x3 majority filter with edge replication (binary median).
BinaryImage median3x3(const BinaryImage& image);

// Line Hough transform restricted to near-horizontal normals.
// Throws Error("no ink") on a blank image.
SkewEstimate estimate_skew_hough(const BinaryImage& image, double range_degrees = 20.0,
                                 double step_degrees = 0.5);

BinaryImage deskew(const BinaryImage& image, const SkewEstimate& est);

// Row of maximal horizontal projection; first row on ties.
int baseline_row(const BinaryImage& line);

}  // namespace mashq
