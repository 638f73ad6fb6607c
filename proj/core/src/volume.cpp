// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxdenoise/volume.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <nlohmann/json.hpp>

#include "container.hpp"
#include "voxdenoise/errors.hpp"

namespace voxdenoise {

namespace container {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  if (size < 0) throw IoError("cannot determine the size of '" + path.string() + "'");
  in.seekg(0, std::ios::beg);
  std::vector<unsigned char> bytes(static_cast<std::size_t>(size));
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw IoError("read failure on '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace container

namespace {
constexpr std::string_view kVolumeMagic = "VOL1";
}

std::string VolumeShape::str() const {
  return std::to_string(height) + "x" + std::to_string(width) + "x" + std::to_string(slices);
}

Volume::Volume(VolumeShape shape, float fill) : shape_(shape), voxels_(shape.voxels(), fill) {}

Volume::Volume(VolumeShape shape, std::vector<float> voxels) : shape_(shape), voxels_(std::move(voxels)) {
  if (voxels_.size() != shape_.voxels()) {
    throw DimensionError("volume of shape " + shape_.str() + " needs " + std::to_string(shape_.voxels()) +
                         " voxels, got " + std::to_string(voxels_.size()));
  }
}

float Volume::max() const {
  return voxels_.empty() ? 0.0f : *std::max_element(voxels_.begin(), voxels_.end());
}

float Volume::min() const {
  return voxels_.empty() ? 0.0f : *std::min_element(voxels_.begin(), voxels_.end());
}

std::vector<unsigned char> encode_volume(const Volume& volume) {
  nlohmann::ordered_json header;
  header["dtype"] = "f32";
  header["shape"] = {volume.height(), volume.width(), volume.slices()};
  header["order"] = "row-major-HWC";
  auto out = container::begin(kVolumeMagic, header.dump());
  container::put_f32_le(out, volume.voxels());
  return out;
}

Volume decode_volume(std::span<const unsigned char> bytes, const std::string& origin) {
  const auto parsed = container::parse(bytes, kVolumeMagic, origin);
  VolumeShape shape;
  try {
    const auto header = nlohmann::json::parse(parsed.header);
    if (header.at("dtype").get<std::string>() != "f32") throw FormatError(origin + ": dtype must be f32");
    if (header.at("order").get<std::string>() != "row-major-HWC") {
      throw FormatError(origin + ": order must be row-major-HWC");
    }
    const auto& dims = header.at("shape");
    if (!dims.is_array() || dims.size() != 3) throw FormatError(origin + ": shape must list 3 dimensions");
    shape = {dims[0].get<std::size_t>(), dims[1].get<std::size_t>(), dims[2].get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(origin + ": malformed volume header: " + e.what());
  }
  if (shape.height == 0 || shape.width == 0 || shape.slices == 0) {
    throw FormatError(origin + ": zero-sized dimension in shape " + shape.str());
  }
  const std::size_t expected = 4 * shape.voxels();
  if (parsed.payload.size() < expected) {
    throw TruncatedError(origin + ": payload has " + std::to_string(parsed.payload.size()) + " bytes, shape " +
                         shape.str() + " needs " + std::to_string(expected));
  }
  if (parsed.payload.size() > expected) {
    throw LengthMismatchError(origin + ": payload has " + std::to_string(parsed.payload.size()) +
                              " bytes, shape " + shape.str() + " needs exactly " + std::to_string(expected));
  }
  std::vector<float> voxels(shape.voxels());
  container::get_f32_le(parsed.payload.data(), voxels);
  return Volume(shape, std::move(voxels));
}

void save_volume(const Volume& volume, const std::filesystem::path& path) {
  container::write_file(path, encode_volume(volume));
}

Volume load_volume(const std::filesystem::path& path) {
  const auto bytes = container::read_file(path);
  return decode_volume(bytes, path.string());
}

}  // namespace voxdenoise
