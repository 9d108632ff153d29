#pragma once

// Raster image -> canonical bipolar grid.
//
// Pipeline: read_pixels -> normalize (c / 255) -> to_gray (luminance)
//           -> resample (box average to the grid size) -> bipolarize.
// Dark cells are ink and map to +1; light cells map to -1.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace scriptauth::encoding {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Decoded 8-bit pixels, row-major.
class RawImage {
 public:
  RawImage(std::size_t width, std::size_t height, std::vector<Rgb> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  const std::vector<Rgb>& pixels() const noexcept { return pixels_; }
  const Rgb& at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }

  friend bool operator==(const RawImage&, const RawImage&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<Rgb> pixels_;
};

struct NormalizedRgb {
  double r = 0, g = 0, b = 0;
};

struct NormalizedMatrix {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<NormalizedRgb> values;
};

struct GrayGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  double at(std::size_t x, std::size_t y) const { return values[y * width + x]; }
};

/// Grid of exactly -1.0 / +1.0 cells; the network's input.
class BipolarGrid {
 public:
  BipolarGrid(std::size_t width, std::size_t height, std::vector<double> values);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  double at(std::size_t x, std::size_t y) const { return values_[y * width_ + x]; }

  /// Returns a copy with the cell at flat index `i` negated.
  BipolarGrid flipped(std::size_t i) const;

  friend bool operator==(const BipolarGrid&, const BipolarGrid&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> values_;
};

struct EncodingConfig {
  std::size_t grid_width = 16;
  std::size_t grid_height = 16;
  double ink_threshold = 0.5;
  std::array<double, 3> luminance_weights{0.299, 0.587, 0.114};

  /// Throws Error{InvalidConfig} when an invariant does not hold.
  void validate() const;
  std::size_t cells() const noexcept { return grid_width * grid_height; }

  friend bool operator==(const EncodingConfig&, const EncodingConfig&) = default;
};

/// Decodes PNG (8/16-bit gray, RGB, RGBA, palette) or binary PGM (P5).
/// Alpha is composited over white.
RawImage read_pixels(std::span<const std::uint8_t> image_bytes);

NormalizedMatrix normalize(const RawImage& image);
GrayGrid to_gray(const NormalizedMatrix& m, const EncodingConfig& cfg);
GrayGrid resample(const GrayGrid& g, const EncodingConfig& cfg);
BipolarGrid bipolarize(const GrayGrid& g, const EncodingConfig& cfg);

BipolarGrid encode(std::span<const std::uint8_t> image_bytes, const EncodingConfig& cfg);
BipolarGrid encode(const RawImage& image, const EncodingConfig& cfg);

}  // namespace scriptauth::encoding
