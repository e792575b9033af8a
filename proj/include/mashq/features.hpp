#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mashq/raster.hpp"

namespace mashq {

struct FeatureConfig {
  int window = 8;   // N, must be a multiple of 8
  int shift = 4;    // eps, 1 <= eps <= N-1
  int cells = 8;    // vertical cells for the transition feature
  int patch = 16;   // M, side of the normalised VH2D patch
  int bins = 8;     // B, bins per VH2D projection

  void validate() const;
  std::size_t vh2d_dims() const { return 4 * static_cast<std::size_t>(bins); }
  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

struct Frame {
  BinaryImage patch;  // window columns, full word height
  int x_right = 0;    // right edge of the window, in word columns
};

inline constexpr std::size_t kSwDims = 18;
using SWVector = std::array<double, kSwDims>;

enum class StreamId { SW, VH2D };
inline constexpr std::array<StreamId, 2> kStreams{StreamId::SW, StreamId::VH2D};

const char* stream_name(StreamId id);
StreamId parse_stream(const std::string& name);

struct StreamSequence {
  StreamId stream = StreamId::SW;
  std::vector<std::vector<double>> vectors;  // index 0 = rightmost frame
};

// Windows of width N flush with the right edge, moving left by eps. A word
// narrower than N is padded on the right to width N.
std::vector<Frame> slide_windows(const BinaryImage& word, int window, int shift);

// Ink row centroid divided by height; nullopt for a blank frame.
std::optional<double> row_centroid(const BinaryImage& patch);

// The 18 sliding-window features. prev_centroid is the previous frame's
// centroid (nullopt at the first frame or after a blank frame).
SWVector sw_features(const Frame& frame, std::optional<double> prev_centroid, int cells = 8);

// Nearest-neighbour rescale of the tight ink box to side x side.
BinaryImage normalize_patch(const BinaryImage& patch, int side);

struct Projections {
  std::vector<int> vertical;    // column sums, length M
  std::vector<int> horizontal;  // row sums, length M
  std::vector<int> diag45;      // pixels with row - col = M - m, m = 1..2M-1
  std::vector<int> diag135;     // pixels with row + col = m + 1, m = 1..2M-1 (1-based)
};

Projections vh2d(const BinaryImage& square_patch);

// Contiguous near-equal groups; each output is group sum / area.
std::vector<double> bin_projection(std::span<const int> proj, int bins, double area);

std::vector<double> vh2d_vector(const BinaryImage& frame_patch, const FeatureConfig& cfg);

// Both streams for one word, frame-synchronous. Throws on a blank word.
std::pair<StreamSequence, StreamSequence> extract_streams(const BinaryImage& word,
                                                          const FeatureConfig& cfg);

// One header line, then `<stream>\t<frame>\t<values...>` per frame.
std::string format_feature_dump(const StreamSequence& seq);

}  // namespace mashq
