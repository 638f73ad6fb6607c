// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace voxdenoise {

struct VolumeShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t slices = 0;

  std::size_t voxels() const { return height * width * slices; }
  bool operator==(const VolumeShape&) const = default;
  std::string str() const;
};

/// Voxel intensities of shape (H, W, C), stored row-major with H outermost and
/// the slice index fastest.
class Volume {
 public:
  Volume() = default;
  explicit Volume(VolumeShape shape, float fill = 0.0f);
  Volume(VolumeShape shape, std::vector<float> voxels);

  const VolumeShape& shape() const { return shape_; }
  std::size_t height() const { return shape_.height; }
  std::size_t width() const { return shape_.width; }
  std::size_t slices() const { return shape_.slices; }
  std::size_t size() const { return voxels_.size(); }

  std::size_t index(std::size_t row, std::size_t col, std::size_t slice) const {
    return (row * shape_.width + col) * shape_.slices + slice;
  }
  float& at(std::size_t row, std::size_t col, std::size_t slice) { return voxels_[index(row, col, slice)]; }
  float at(std::size_t row, std::size_t col, std::size_t slice) const { return voxels_[index(row, col, slice)]; }

  std::span<const float> voxels() const { return voxels_; }
  std::span<float> voxels() { return voxels_; }

  float max() const;
  float min() const;

  bool operator==(const Volume&) const = default;

 private:
  VolumeShape shape_;
  std::vector<float> voxels_;
};

/// Writes the ".vol" container: magic "VOL1", u32-LE header length, JSON
/// header, then 4*H*W*C bytes of little-endian f32.
void save_volume(const Volume& volume, const std::filesystem::path& path);
Volume load_volume(const std::filesystem::path& path);

/// In-memory forms of the same container.
std::vector<unsigned char> encode_volume(const Volume& volume);
Volume decode_volume(std::span<const unsigned char> bytes, const std::string& origin = "<memory>");

}  // namespace voxdenoise
