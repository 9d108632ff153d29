#include "scriptauth/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scriptauth/error.hpp"

namespace scriptauth::encoding {

RawImage::RawImage(std::size_t width, std::size_t height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width_ == 0 || height_ == 0) throw Error(ErrorKind::EmptyImage, "image has zero pixels");
  if (pixels_.size() != width_ * height_) {
    throw Error(ErrorKind::DimensionMismatch, "pixel count does not match width x height");
  }
}

BipolarGrid::BipolarGrid(std::size_t width, std::size_t height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (values_.size() != width_ * height_) {
    throw Error(ErrorKind::DimensionMismatch, "grid value count does not match width x height");
  }
  for (double v : values_) {
    if (v != 1.0 && v != -1.0) throw Error(ErrorKind::InvalidConfig, "grid cell is not -1 or +1");
  }
}

BipolarGrid BipolarGrid::flipped(std::size_t i) const {
  BipolarGrid copy = *this;
  copy.values_.at(i) = -copy.values_.at(i);
  return copy;
}

void EncodingConfig::validate() const {
  if (grid_width < 1 || grid_height < 1) {
    throw Error(ErrorKind::InvalidConfig, "grid dimensions must be >= 1");
  }
  if (!(ink_threshold > 0.0 && ink_threshold < 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "ink_threshold must lie in (0, 1)");
  }
  double sum = 0.0;
  for (double w : luminance_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::InvalidConfig, "luminance weights must be nonnegative");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidConfig, "luminance weights must sum to 1");
  }
}

NormalizedMatrix normalize(const RawImage& image) {
  NormalizedMatrix m{image.width(), image.height(), {}};
  m.values.reserve(image.pixels().size());
  for (const Rgb& p : image.pixels()) {
    m.values.push_back({p.r / 255.0, p.g / 255.0, p.b / 255.0});
  }
  return m;
}

GrayGrid to_gray(const NormalizedMatrix& m, const EncodingConfig& cfg) {
  // wr*r + wg*g + wb*b rewritten with wr + wg + wb = 1 so that neutral
  // colours (r == g == b) map to exactly their own level.
  const auto [wr, wg, wb] = cfg.luminance_weights;
  (void)wb;
  GrayGrid g{m.width, m.height, {}};
  g.values.reserve(m.values.size());
  for (const NormalizedRgb& c : m.values) {
    g.values.push_back(std::clamp(c.b + wr * (c.r - c.b) + wg * (c.g - c.b), 0.0, 1.0));
  }
  return g;
}

namespace {

struct Overlap {
  std::size_t src;
  std::size_t amount;
};

// Works in units of 1/(src*dst): source cell s spans [s*dst, (s+1)*dst) and
// destination cell j spans [j*src, (j+1)*src), so overlaps are integers.
std::vector<std::vector<Overlap>> axis_overlaps(std::size_t src, std::size_t dst) {
  std::vector<std::vector<Overlap>> out(dst);
  for (std::size_t j = 0; j < dst; ++j) {
    const std::size_t lo = j * src, hi = (j + 1) * src;
    for (std::size_t s = lo / dst; s < src && s * dst < hi; ++s) {
      const std::size_t a = std::max(lo, s * dst), b = std::min(hi, (s + 1) * dst);
      if (b > a) out[j].push_back({s, b - a});
    }
  }
  return out;
}

}  // namespace

GrayGrid resample(const GrayGrid& g, const EncodingConfig& cfg) {
  if (g.width < 1 || g.height < 1 || g.values.size() != g.width * g.height) {
    throw Error(ErrorKind::DimensionMismatch, "resample source is empty or malformed");
  }
  if (g.width == cfg.grid_width && g.height == cfg.grid_height) return g;

  const auto xs = axis_overlaps(g.width, cfg.grid_width);
  const auto ys = axis_overlaps(g.height, cfg.grid_height);
  const double area = static_cast<double>(g.width) * static_cast<double>(g.height);

  GrayGrid out{cfg.grid_width, cfg.grid_height, std::vector<double>(cfg.cells())};
  for (std::size_t j = 0; j < cfg.grid_height; ++j) {
    for (std::size_t i = 0; i < cfg.grid_width; ++i) {
      double acc = 0.0;
      for (const Overlap& oy : ys[j]) {
        for (const Overlap& ox : xs[i]) {
          acc += static_cast<double>(oy.amount * ox.amount) * g.at(ox.src, oy.src);
        }
      }
      out.values[j * cfg.grid_width + i] = std::clamp(acc / area, 0.0, 1.0);
    }
  }
  return out;
}

BipolarGrid bipolarize(const GrayGrid& g, const EncodingConfig& cfg) {
  if (g.width != cfg.grid_width || g.height != cfg.grid_height ||
      g.values.size() != cfg.cells()) {
    throw Error(ErrorKind::DimensionMismatch,
                "bipolarize expects a " + std::to_string(cfg.grid_width) + "x" +
                    std::to_string(cfg.grid_height) + " grid, got " + std::to_string(g.width) +
                    "x" + std::to_string(g.height));
  }
  std::vector<double> cells;
  cells.reserve(g.values.size());
  for (double v : g.values) cells.push_back(v < cfg.ink_threshold ? 1.0 : -1.0);
  return BipolarGrid(g.width, g.height, std::move(cells));
}

BipolarGrid encode(const RawImage& image, const EncodingConfig& cfg) {
  cfg.validate();
  return bipolarize(resample(to_gray(normalize(image), cfg), cfg), cfg);
}

BipolarGrid encode(std::span<const std::uint8_t> image_bytes, const EncodingConfig& cfg) {
  return encode(read_pixels(image_bytes), cfg);
}

}  // namespace scriptauth::encoding
