#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "spikebench/dataset.hpp"
#include "spikebench/error.hpp"

namespace spikebench {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// Raw IDX container of unsigned bytes: big-endian magic, one big-endian
// uint32 per dimension, then the payload.
struct IdxArray {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;

  friend bool operator==(const IdxArray&, const IdxArray&) = default;
};

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset) {
  if (offset + 4 > bytes.size()) throw FormatError("truncated IDX header", bytes.size());
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

inline void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace detail

inline IdxArray parse_idx(const std::vector<std::uint8_t>& bytes) {
  IdxArray arr;
  arr.magic = detail::read_be32(bytes, 0);
  if ((arr.magic & 0xFFFFFF00u) != 0x00000800u)
    throw FormatError("not an unsigned-byte IDX file (magic " + std::to_string(arr.magic) + ")", 0);
  const std::uint32_t ndim = arr.magic & 0xFFu;
  if (ndim == 0) throw FormatError("IDX file declares zero dimensions", 3);
  std::size_t payload = 1;
  for (std::uint32_t d = 0; d < ndim; ++d) {
    arr.dims.push_back(detail::read_be32(bytes, 4 + 4 * d));
    payload *= arr.dims.back();
  }
  const std::size_t start = 4 + 4 * static_cast<std::size_t>(ndim);
  if (bytes.size() < start + payload)
    throw FormatError("truncated IDX payload: expected " + std::to_string(payload) + " bytes", bytes.size());
  if (bytes.size() > start + payload) throw FormatError("trailing bytes after IDX payload", start + payload);
  arr.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.end());
  return arr;
}

inline IdxArray read_idx(const std::filesystem::path& path) { return parse_idx(detail::read_file(path)); }

inline std::vector<std::uint8_t> serialize_idx(const IdxArray& arr) {
  std::vector<std::uint8_t> out;
  detail::put_be32(out, arr.magic);
  for (auto d : arr.dims) detail::put_be32(out, d);
  out.insert(out.end(), arr.data.begin(), arr.data.end());
  return out;
}

inline void write_idx(const std::filesystem::path& path, const IdxArray& arr) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const auto bytes = serialize_idx(arr);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// Images (magic 0x803, n x rows x cols) and labels (magic 0x801, n) into a
// dataset with pixels scaled by 1/255.
inline Dataset to_dataset(const IdxArray& images, const IdxArray& labels) {
  if (images.magic != kIdxImagesMagic || images.dims.size() != 3)
    throw FormatError("image file must have magic 0x00000803 and 3 dimensions", 0);
  if (labels.magic != kIdxLabelsMagic || labels.dims.size() != 1)
    throw FormatError("label file must have magic 0x00000801 and 1 dimension", 0);
  if (images.dims[0] != labels.dims[0])
    throw FormatError("image count " + std::to_string(images.dims[0]) + " does not match label count " +
                          std::to_string(labels.dims[0]),
                      4);
  Dataset ds;
  ds.shape = {static_cast<int>(images.dims[1]), static_cast<int>(images.dims[2])};
  ds.pixels.reserve(images.data.size());
  for (auto b : images.data) ds.pixels.push_back(b / 255.0);
  ds.labels.assign(labels.data.begin(), labels.data.end());
  return ds;
}

inline Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  return to_dataset(read_idx(images), read_idx(labels));
}

// Label file next to an image file: "...images..." -> "...labels...",
// ".idx3" -> ".idx1".
inline std::filesystem::path default_labels_path(const std::filesystem::path& images) {
  std::string name = images.filename().string();
  if (auto pos = name.find("images"); pos != std::string::npos) name.replace(pos, 6, "labels");
  if (auto pos = name.find("idx3"); pos != std::string::npos) name.replace(pos, 4, "idx1");
  return images.parent_path() / name;
}

}  // namespace spikebench
