#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "scriptauth/encoding.hpp"

namespace scriptauth::image_io {

encoding::RawImage decode_png(std::span<const std::uint8_t> bytes);
encoding::RawImage decode_pgm(std::span<const std::uint8_t> bytes);

/// 8-bit RGB PNG.
std::vector<std::uint8_t> encode_png(const encoding::RawImage& image);

/// Throws Error{IoFailure} with the path in the message.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Black ink on white for every +1 cell; handy for rendering grids back to disk.
encoding::RawImage render(const encoding::BipolarGrid& grid);

}  // namespace scriptauth::image_io
