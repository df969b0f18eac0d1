#pragma once

// Reader/writer for the NPY v1.0 binary array layout.
//
//   0x93 'NUMPY' | 0x01 0x00 | uint16 LE header length | ASCII dict | payload
//
// The dict is `{'descr': '<f4', 'fortran_order': False, 'shape': (n, d), }`,
// space padded so that the payload starts on a 64-byte boundary and
// terminated by '\n'. Only little-endian C-order arrays with descr `<f4`,
// `<f8` or `<i8` are accepted.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace modalgauge::npy {

enum class Dtype { f4, f8, i8 };

std::string_view descr(Dtype dtype) noexcept;
std::size_t item_size(Dtype dtype) noexcept;

struct Header {
  Dtype dtype = Dtype::f4;
  std::vector<std::uint64_t> shape;

  std::uint64_t element_count() const noexcept;
};

/// Raw array: parsed header plus the little-endian payload bytes.
struct Array {
  Header header;
  std::vector<std::byte> payload;
};

/// Parses the header dict text (without magic/length prefix).
Header parse_header_dict(std::string_view dict);

/// Full serialized header (magic, version, length, padded dict).
std::string encode_header(const Header& header);

Array decode(std::span<const std::byte> bytes);
/// Same as above, reusing the buffer for the payload (no second copy).
Array decode(std::vector<std::byte>&& bytes);
std::vector<std::byte> encode(const Header& header,
                              std::span<const std::byte> payload);

Array read_file(const std::filesystem::path& path);

/// Writes atomically (temp file in the same directory, then rename).
void write_file(const std::filesystem::path& path, const Header& header,
                std::span<const std::byte> payload);

void write_f4(const std::filesystem::path& path, std::span<const float> values,
              std::uint64_t rows, std::uint64_t cols);
void write_i8(const std::filesystem::path& path,
              std::span<const std::int64_t> values);

}  // namespace modalgauge::npy
