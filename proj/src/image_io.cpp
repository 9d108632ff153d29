#include "scriptauth/image_io.hpp"

#include <png.h>

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "scriptauth/error.hpp"

namespace scriptauth::image_io {

using encoding::RawImage;
using encoding::Rgb;

namespace {

// Straight-alpha "over" onto an opaque white background, rounded to nearest.
std::uint8_t over_white(std::uint8_t c, std::uint8_t a) {
  return static_cast<std::uint8_t>((unsigned{c} * a + 255u * (255u - a) + 127u) / 255u);
}

struct PngImage {
  png_image image{};
  PngImage() { image.version = PNG_IMAGE_VERSION; }
  ~PngImage() { png_image_free(&image); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

bool has_png_signature(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

bool has_pgm_signature(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5';
}

}  // namespace

RawImage decode_png(std::span<const std::uint8_t> bytes) {
  PngImage png;
  if (!png_image_begin_read_from_memory(&png.image, bytes.data(), bytes.size())) {
    throw Error(ErrorKind::UndecodableImage, std::string("png: ") + png.image.message);
  }
  if (png.image.width == 0 || png.image.height == 0) {
    throw Error(ErrorKind::EmptyImage, "png has zero pixels");
  }
  png.image.format = PNG_FORMAT_RGBA;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr)) {
    throw Error(ErrorKind::UndecodableImage, std::string("png: ") + png.image.message);
  }

  const std::size_t w = png.image.width, h = png.image.height;
  std::vector<Rgb> pixels(w * h);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const std::uint8_t* p = &buffer[4 * i];
    pixels[i] = {over_white(p[0], p[3]), over_white(p[1], p[3]), over_white(p[2], p[3])};
  }
  return RawImage(w, h, std::move(pixels));
}

RawImage decode_pgm(std::span<const std::uint8_t> bytes) {
  if (!has_pgm_signature(bytes)) {
    throw Error(ErrorKind::UndecodableImage, "pgm: missing P5 magic");
  }
  std::size_t pos = 2;
  auto read_header_int = [&]() -> unsigned long {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw Error(ErrorKind::UndecodableImage, "pgm: malformed header");
    }
    unsigned long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > (1ul << 24)) throw Error(ErrorKind::UndecodableImage, "pgm: header value too large");
    }
    return v;
  };

  const auto w = read_header_int();
  const auto h = read_header_int();
  const auto maxval = read_header_int();
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw Error(ErrorKind::UndecodableImage, "pgm: malformed header");
  }
  ++pos;  // single whitespace before the raster
  if (maxval == 0 || maxval > 255) {
    throw Error(ErrorKind::UndecodableImage, "pgm: only 8-bit maxval is supported");
  }
  if (w == 0 || h == 0) throw Error(ErrorKind::EmptyImage, "pgm has zero pixels");
  if (bytes.size() - pos < w * h) {
    throw Error(ErrorKind::UndecodableImage, "pgm: truncated raster");
  }

  std::vector<Rgb> pixels(w * h);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    unsigned v = bytes[pos + i];
    if (v > maxval) throw Error(ErrorKind::UndecodableImage, "pgm: sample exceeds maxval");
    const auto c = static_cast<std::uint8_t>((v * 255u + maxval / 2) / maxval);
    pixels[i] = {c, c, c};
  }
  return RawImage(w, h, std::move(pixels));
}

std::vector<std::uint8_t> encode_png(const RawImage& image) {
  PngImage png;
  png.image.width = static_cast<png_uint_32>(image.width());
  png.image.height = static_cast<png_uint_32>(image.height());
  png.image.format = PNG_FORMAT_RGB;

  std::vector<std::uint8_t> raster;
  raster.reserve(image.pixels().size() * 3);
  for (const Rgb& p : image.pixels()) {
    raster.insert(raster.end(), {p.r, p.g, p.b});
  }

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png.image, nullptr, &size, 0, raster.data(), 0, nullptr)) {
    throw Error(ErrorKind::IoFailure, std::string("png encode: ") + png.image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png.image, out.data(), &size, 0, raster.data(), 0, nullptr)) {
    throw Error(ErrorKind::IoFailure, std::string("png encode: ") + png.image.message);
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

RawImage render(const encoding::BipolarGrid& grid) {
  std::vector<Rgb> pixels;
  pixels.reserve(grid.size());
  for (double v : grid.values()) {
    pixels.push_back(v > 0 ? Rgb{0, 0, 0} : Rgb{255, 255, 255});
  }
  return RawImage(grid.width(), grid.height(), std::move(pixels));
}

}  // namespace scriptauth::image_io

namespace scriptauth::encoding {

RawImage read_pixels(std::span<const std::uint8_t> image_bytes) {
  if (image_bytes.empty()) throw Error(ErrorKind::UndecodableImage, "empty input");
  if (image_io::has_png_signature(image_bytes)) return image_io::decode_png(image_bytes);
  if (image_io::has_pgm_signature(image_bytes)) return image_io::decode_pgm(image_bytes);
  throw Error(ErrorKind::UndecodableImage, "unrecognized image format (expected PNG or P5 PGM)");
}

}  // namespace scriptauth::encoding
