// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxdenoise_cli/png.hpp"

#include <zlib.h>

#include <fstream>

#include "voxdenoise/errors.hpp"

namespace voxdenoise::cli {

namespace {

void put_u32_be(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<unsigned char>((v >> shift) & 0xffu));
}

void chunk(std::vector<unsigned char>& out, const char* type, std::span<const unsigned char> data) {
  put_u32_be(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
  put_u32_be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::vector<unsigned char> encode_gray_png(std::span<const std::uint8_t> pixels, std::uint32_t width,
                                           std::uint32_t height) {
  if (pixels.size() != static_cast<std::size_t>(width) * height) {
    throw DimensionError("png: " + std::to_string(pixels.size()) + " pixels for a " + std::to_string(width) + "x" +
                         std::to_string(height) + " image");
  }
  std::vector<unsigned char> raw;
  raw.reserve((static_cast<std::size_t>(width) + 1) * height);
  for (std::uint32_t r = 0; r < height; ++r) {
    raw.push_back(0);  // filter: none
    raw.insert(raw.end(), pixels.begin() + static_cast<std::ptrdiff_t>(r) * width,
               pixels.begin() + static_cast<std::ptrdiff_t>(r + 1) * width);
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> packed(packed_size);
  if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK) {
    throw IoError("png: deflate failed");
  }
  packed.resize(packed_size);

  std::vector<unsigned char> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<unsigned char> ihdr;
  put_u32_be(ihdr, width);
  put_u32_be(ihdr, height);
  ihdr.insert(ihdr.end(), {8, 0, 0, 0, 0});  // depth 8, grayscale, deflate, no filter, no interlace
  chunk(out, "IHDR", ihdr);
  chunk(out, "IDAT", packed);
  chunk(out, "IEND", {});
  return out;
}

void write_gray_png(const std::filesystem::path& path, std::span<const std::uint8_t> pixels, std::uint32_t width,
                    std::uint32_t height) {
  const auto bytes = encode_gray_png(pixels, width, height);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace voxdenoise::cli
