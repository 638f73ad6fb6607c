// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace voxdenoise::cli {

/// 8-bit grayscale PNG, rows top to bottom.
std::vector<unsigned char> encode_gray_png(std::span<const std::uint8_t> pixels, std::uint32_t width,
                                           std::uint32_t height);
void write_gray_png(const std::filesystem::path& path, std::span<const std::uint8_t> pixels, std::uint32_t width,
                    std::uint32_t height);

}  // namespace voxdenoise::cli
