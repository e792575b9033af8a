#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace mashq {

// 8-bit grayscale raster, row-major. 0 = black ink, 255 = white paper.
class GrayImage {
 public:
  GrayImage(int width, int height, std::uint8_t fill = 255);
  GrayImage(int width, int height, std::vector<std::uint8_t> samples);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::uint8_t at(int x, int y) const { return samples_[index(x, y)]; }
  void set(int x, int y, std::uint8_t v) { samples_[index(x, y)] = v; }
  std::span<const std::uint8_t> samples() const noexcept { return samples_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  int width_;
  int height_;
  std::vector<std::uint8_t> samples_;
};

// Bilevel raster, row-major. 1 = ink, 0 = background.
class BinaryImage {
 public:
  BinaryImage(int width, int height);
  BinaryImage(int width, int height, std::vector<std::uint8_t> bits);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
  // Out-of-range coordinates read as background.
  bool at_or_blank(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && bits_[index(x, y)] != 0;
  }
  void set(int x, int y, bool ink) { bits_[index(x, y)] = ink ? 1 : 0; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

using AnyImage = std::variant<GrayImage, BinaryImage>;

// Half-open pixel rectangle: [x0, x1) x [y0, y1).
struct BBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const noexcept { return x1 - x0; }
  int height() const noexcept { return y1 - y0; }
  friend bool operator==(const BBox&, const BBox&) = default;
};

std::size_t ink_count(const BinaryImage& image);

// Per-row ink counts (length = height).
std::vector<int> h_projection(const BinaryImage& image);
// Per-column ink counts (length = width).
std::vector<int> v_projection(const BinaryImage& image);

BinaryImage crop(const BinaryImage& image, const BBox& box);
// Tight box around all ink, or nullopt for a blank image.
std::optional<BBox> ink_bbox(const BinaryImage& image);
BinaryImage pad(const BinaryImage& image, int left, int top, int right, int bottom);
// ORs `src` into `dst` with its top-left corner at (x, y); clips to dst.
void blit_or(BinaryImage& dst, const BinaryImage& src, int x, int y);

// Inverse nearest-neighbour rotation about the image centre. Positive theta
// turns content counter-clockwise as displayed. The canvas grows to hold the
// whole rotated source and keeps the parity of the source dimensions, so the
// centre pixel of an odd-sized image stays the centre pixel.
BinaryImage rotate(const BinaryImage& image, double theta_degrees);

// Flips every bit independently with probability p, deterministically in seed.
BinaryImage add_salt_pepper(const BinaryImage& image, double p, std::uint64_t seed);

AnyImage load_pnm(std::span<const std::uint8_t> bytes);
AnyImage load_pnm_file(const std::string& path);
BinaryImage load_binary_file(const std::string& path);

// Canonical encodings: P4 for binary images, P5 for gray images.
std::vector<std::uint8_t> save_pnm(const BinaryImage& image);
std::vector<std::uint8_t> save_pnm(const GrayImage& image);
void save_pnm_file(const BinaryImage& image, const std::string& path);
void save_pnm_file(const GrayImage& image, const std::string& path);

}  // namespace mashq
