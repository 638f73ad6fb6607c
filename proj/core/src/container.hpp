// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

// Shared layout of the binary containers: 4-byte magic, u32-LE header length,
// UTF-8 JSON header, raw little-endian payload.

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "voxdenoise/errors.hpp"

namespace voxdenoise::container {

struct Parsed {
  std::string header;
  std::span<const unsigned char> payload;
};

inline void put_u32_le(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f32_le(std::vector<unsigned char>& out, std::span<const float> values) {
  const std::size_t at = out.size();
  out.resize(at + 4 * values.size());
  unsigned char* p = out.data() + at;
  if constexpr (std::endian::native == std::endian::little) {
    if (!values.empty()) std::memcpy(p, values.data(), 4 * values.size());
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto v = std::bit_cast<std::uint32_t>(values[i]);
      for (int b = 0; b < 4; ++b) p[4 * i + b] = static_cast<unsigned char>((v >> (8 * b)) & 0xffu);
    }
  }
}

inline void get_f32_le(const unsigned char* p, std::span<float> out) {
  if constexpr (std::endian::native == std::endian::little) {
    if (!out.empty()) std::memcpy(out.data(), p, 4 * out.size());
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::bit_cast<float>(get_u32_le(p + 4 * i));
  }
}

inline std::vector<unsigned char> begin(std::string_view magic, const std::string& header) {
  std::vector<unsigned char> out(magic.begin(), magic.end());
  put_u32_le(out, static_cast<std::uint32_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  return out;
}

inline Parsed parse(std::span<const unsigned char> bytes, std::string_view magic, const std::string& origin) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), magic.data(), 4) != 0) {
    throw BadMagicError(origin + ": missing '" + std::string(magic) + "' magic");
  }
  if (bytes.size() < 8) throw TruncatedError(origin + ": truncated before header length");
  const std::uint32_t n = get_u32_le(bytes.data() + 4);
  if (bytes.size() - 8 < n) throw TruncatedError(origin + ": truncated inside JSON header");
  Parsed p;
  p.header.assign(reinterpret_cast<const char*>(bytes.data() + 8), n);
  p.payload = bytes.subspan(8 + n);
  return p;
}

std::vector<unsigned char> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const unsigned char> bytes);

}  // namespace voxdenoise::container
