#include "mashq/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "mashq/error.hpp"
#include "mashq/rng.hpp"

namespace mashq {

namespace {

constexpr std::uint64_t kMaxPixels = std::uint64_t{1} << 30;

void check_dims(int width, int height) {
  if (width < 1 || height < 1) throw Error("image dimensions must be positive");
}

}  // namespace

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
  check_dims(width, height);
  samples_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  check_dims(width, height);
  if (samples_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error("sample count does not match dimensions");
}

BinaryImage::BinaryImage(int width, int height) : width_(width), height_(height) {
  check_dims(width, height);
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

BinaryImage::BinaryImage(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  check_dims(width, height);
  if (bits_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error("bit count does not match dimensions");
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t ink_count(const BinaryImage& image) {
  const auto bits = image.bits();
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

std::vector<int> h_projection(const BinaryImage& image) {
  std::vector<int> proj(static_cast<std::size_t>(image.height()), 0);
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) proj[y] += image.at(x, y);
  return proj;
}

std::vector<int> v_projection(const BinaryImage& image) {
  std::vector<int> proj(static_cast<std::size_t>(image.width()), 0);
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) proj[x] += image.at(x, y);
  return proj;
}

BinaryImage crop(const BinaryImage& image, const BBox& box) {
  if (box.x0 < 0 || box.y0 < 0 || box.x1 > image.width() || box.y1 > image.height() ||
      box.x0 >= box.x1 || box.y0 >= box.y1)
    throw Error("crop box outside image");
  BinaryImage out(box.width(), box.height());
  for (int y = box.y0; y < box.y1; ++y)
    for (int x = box.x0; x < box.x1; ++x) out.set(x - box.x0, y - box.y0, image.at(x, y));
  return out;
}

std::optional<BBox> ink_bbox(const BinaryImage& image) {
  BBox box{image.width(), image.height(), 0, 0};
  bool any = false;
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      if (!image.at(x, y)) continue;
      any = true;
      box.x0 = std::min(box.x0, x);
      box.y0 = std::min(box.y0, y);
      box.x1 = std::max(box.x1, x + 1);
      box.y1 = std::max(box.y1, y + 1);
    }
  }
  if (!any) return std::nullopt;
  return box;
}

BinaryImage pad(const BinaryImage& image, int left, int top, int right, int bottom) {
  BinaryImage out(image.width() + left + right, image.height() + top + bottom);
  blit_or(out, image, left, top);
  return out;
}

void blit_or(BinaryImage& dst, const BinaryImage& src, int x, int y) {
  for (int sy = 0; sy < src.height(); ++sy) {
    const int dy = y + sy;
    if (dy < 0 || dy >= dst.height()) continue;
    for (int sx = 0; sx < src.width(); ++sx) {
      const int dx = x + sx;
      if (dx < 0 || dx >= dst.width()) continue;
      if (src.at(sx, sy)) dst.set(dx, dy, true);
    }
  }
}

BinaryImage rotate(const BinaryImage& image, double theta_degrees) {
  const double rad = theta_degrees * M_PI / 180.0;
  const double c = std::cos(rad);
  const double s = std::sin(rad);
  const int w = image.width();
  const int h = image.height();

  auto grow = [](double extent, int src) {
    int n = static_cast<int>(std::ceil(extent - 1e-9));
    n = std::max(n, 1);
    if ((n - src) % 2 != 0) ++n;
    return n;
  };
  const int out_w = grow(std::abs(w * c) + std::abs(h * s), w);
  const int out_h = grow(std::abs(w * s) + std::abs(h * c), h);

  const double cx = (w - 1) / 2.0;
  const double cy = (h - 1) / 2.0;
  const double ocx = (out_w - 1) / 2.0;
  const double ocy = (out_h - 1) / 2.0;

  BinaryImage out(out_w, out_h);
  for (int oy = 0; oy < out_h; ++oy) {
    const double dy = oy - ocy;
    for (int ox = 0; ox < out_w; ++ox) {
      const double dx = ox - ocx;
      // Inverse of the counter-clockwise (as displayed, y down) rotation.
      const double sx = cx + dx * c - dy * s;
      const double sy = cy + dx * s + dy * c;
      const int ix = static_cast<int>(std::lround(sx));
      const int iy = static_cast<int>(std::lround(sy));
      if (image.at_or_blank(ix, iy)) out.set(ox, oy, true);
    }
  }
  return out;
}

BinaryImage add_salt_pepper(const BinaryImage& image, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("noise probability must lie in [0, 1]");
  Rng rng(seed);
  std::vector<std::uint8_t> bits(image.bits().begin(), image.bits().end());
  for (auto& b : bits) {
    // Always draw, so the flip pattern depends only on (p, seed, size).
    const double u = rng.uniform();
    if (u < p) b ^= 1;
  }
  return BinaryImage(image.width(), image.height(), std::move(bits));
}

// --- PNM -------------------------------------------------------------------

namespace {

class PnmReader {
 public:
  explicit PnmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ >= bytes_.size(); }

  static bool is_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
  }

  void skip_space_and_comments() {
    while (!at_end()) {
      const auto c = bytes_[pos_];
      if (is_space(c)) {
        ++pos_;
      } else if (c == '#') {
        while (!at_end() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::uint64_t read_uint(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    std::uint64_t v = 0;
    while (!at_end() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > kMaxPixels) throw PnmError(std::string(what) + " overflows", start);
      ++pos_;
    }
    if (pos_ == start) {
      if (at_end()) throw PnmError(std::string("truncated header: missing ") + what, pos_);
      throw PnmError(std::string("expected ") + what, pos_);
    }
    return v;
  }

  // Exactly one whitespace byte separates the header from binary payloads.
  void single_space() {
    if (at_end()) throw PnmError("truncated header", pos_);
    if (!is_space(bytes_[pos_])) throw PnmError("expected whitespace after header", pos_);
    ++pos_;
  }

  std::uint8_t byte() {
    if (at_end()) throw PnmError("truncated payload", pos_);
    return bytes_[pos_++];
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::pair<int, int> read_dims(PnmReader& r) {
  const auto w = r.read_uint("width");
  const auto h = r.read_uint("height");
  if (w == 0 || h == 0) throw PnmError("dimensions must be positive", r.pos());
  if (w * h > kMaxPixels) throw PnmError("dimension overflow", r.pos());
  return {static_cast<int>(w), static_cast<int>(h)};
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::vector<std::uint8_t>& bytes, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path);
}

}  // namespace

AnyImage load_pnm(std::span<const std::uint8_t> bytes) {
  PnmReader r(bytes);
  if (bytes.size() < 2 || bytes[0] != 'P') throw PnmError("unknown magic", 0);
  const char kind = static_cast<char>(bytes[1]);
  if (kind != '1' && kind != '2' && kind != '4' && kind != '5') throw PnmError("unknown magic", 0);
  r.byte();
  r.byte();
  const auto [w, h] = read_dims(r);
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);

  if (kind == '1' || kind == '4') {
    std::vector<std::uint8_t> bits(n, 0);
    if (kind == '1') {
      for (std::size_t i = 0; i < n; ++i) {
        r.skip_space_and_comments();
        const std::size_t at = r.pos();
        const auto c = r.byte();
        if (c != '0' && c != '1') throw PnmError("invalid P1 sample", at);
        bits[i] = c == '1';
      }
    } else {
      r.single_space();
      const std::size_t row_bytes = (static_cast<std::size_t>(w) + 7) / 8;
      if (r.remaining() < row_bytes * static_cast<std::size_t>(h))
        throw PnmError("truncated payload", r.pos() + r.remaining());
      for (int y = 0; y < h; ++y) {
        for (std::size_t b = 0; b < row_bytes; ++b) {
          const auto v = r.byte();
          for (int k = 0; k < 8; ++k) {
            const std::size_t x = b * 8 + static_cast<std::size_t>(k);
            if (x >= static_cast<std::size_t>(w)) break;
            bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + x] = (v >> (7 - k)) & 1;
          }
        }
      }
    }
    return BinaryImage(w, h, std::move(bits));
  }

  const auto maxval = r.read_uint("maxval");
  if (maxval == 0 || maxval > 255) throw PnmError("unsupported maxval", r.pos());
  auto scale = [maxval](std::uint64_t v) {
    return static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
  };
  std::vector<std::uint8_t> samples(n, 0);
  if (kind == '2') {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t at = r.pos();
      const auto v = r.read_uint("sample");
      if (v > maxval) throw PnmError("sample exceeds maxval", at);
      samples[i] = scale(v);
    }
  } else {
    r.single_space();
    if (r.remaining() < n) throw PnmError("truncated payload", r.pos() + r.remaining());
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t at = r.pos();
      const auto v = r.byte();
      if (v > maxval) throw PnmError("sample exceeds maxval", at);
      samples[i] = scale(v);
    }
  }
  return GrayImage(w, h, std::move(samples));
}

AnyImage load_pnm_file(const std::string& path) {
  const auto bytes = read_file(path);
  return load_pnm(bytes);
}

BinaryImage load_binary_file(const std::string& path) {
  auto img = load_pnm_file(path);
  if (auto* b = std::get_if<BinaryImage>(&img)) return std::move(*b);
  throw Error(path + ": expected a PBM (binary) image");
}

std::vector<std::uint8_t> save_pnm(const BinaryImage& image) {
  const std::string header =
      "P4\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const int row_bytes = (image.width() + 7) / 8;
  for (int y = 0; y < image.height(); ++y) {
    for (int b = 0; b < row_bytes; ++b) {
      std::uint8_t v = 0;
      for (int k = 0; k < 8; ++k) {
        const int x = b * 8 + k;
        if (x < image.width() && image.at(x, y)) v |= static_cast<std::uint8_t>(0x80 >> k);
      }
      out.push_back(v);
    }
  }
  return out;
}

std::vector<std::uint8_t> save_pnm(const GrayImage& image) {
  const std::string header =
      "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.samples().begin(), image.samples().end());
  return out;
}

void save_pnm_file(const BinaryImage& image, const std::string& path) {
  write_file(save_pnm(image), path);
}

void save_pnm_file(const GrayImage& image, const std::string& path) {
  write_file(save_pnm(image), path);
}

}  // namespace mashq
