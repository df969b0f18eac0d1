#include "modalgauge/npy.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <limits>

#include "modalgauge/errors.hpp"
#include "modalgauge/fileutil.hpp"

namespace modalgauge::npy {

static_assert(std::endian::native == std::endian::little,
              "payload decoding assumes a little-endian host");

namespace {

constexpr char kMagic[] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kPrefix = 10;  // magic + version + uint16 length
constexpr std::size_t kAlign = 64;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

// Returns the raw text of the value following `'key':` in the dict.
std::string_view find_value(std::string_view dict, std::string_view key) {
  const std::string quoted = "'" + std::string(key) + "'";
  const auto pos = dict.find(quoted);
  if (pos == std::string_view::npos) {
    throw FormatError("npy header missing key " + quoted);
  }
  auto rest = dict.substr(pos + quoted.size());
  rest = trim(rest);
  if (rest.empty() || rest.front() != ':') {
    throw FormatError("npy header: expected ':' after " + quoted);
  }
  rest = trim(rest.substr(1));
  if (rest.empty()) throw FormatError("npy header: empty value for " + quoted);
  if (rest.front() == '\'') {
    const auto end = rest.find('\'', 1);
    if (end == std::string_view::npos) throw FormatError("npy header: unterminated string");
    return rest.substr(0, end + 1);
  }
  if (rest.front() == '(') {
    const auto end = rest.find(')');
    if (end == std::string_view::npos) throw FormatError("npy header: unterminated shape tuple");
    return rest.substr(0, end + 1);
  }
  const auto end = rest.find_first_of(",}");
  return trim(rest.substr(0, end));
}

Dtype parse_descr(std::string_view quoted) {
  if (quoted.size() < 2 || quoted.front() != '\'' || quoted.back() != '\'') {
    throw FormatError("npy header: descr is not a string");
  }
  const auto d = quoted.substr(1, quoted.size() - 2);
  if (d == "<f4") return Dtype::f4;
  if (d == "<f8") return Dtype::f8;
  if (d == "<i8") return Dtype::i8;
  throw DtypeError("unsupported npy dtype '" + std::string(d) +
                   "' (accepted: <f4, <f8, <i8)");
}

std::vector<std::uint64_t> parse_shape(std::string_view tuple) {
  // "(n, d)" / "(n,)" / "()"
  std::vector<std::uint64_t> shape;
  auto body = tuple.substr(1, tuple.size() - 2);
  while (true) {
    body = trim(body);
    if (body.empty()) break;
    const auto comma = body.find(',');
    const auto item = trim(body.substr(0, comma));
    if (!item.empty()) {
      std::uint64_t value = 0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
      if (ec != std::errc{} || ptr != item.data() + item.size()) {
        throw FormatError("npy header: bad shape entry '" + std::string(item) + "'");
      }
      shape.push_back(value);
    }
    if (comma == std::string_view::npos) break;
    body = body.substr(comma + 1);
  }
  return shape;
}

}  // namespace

std::string_view descr(Dtype dtype) noexcept {
  switch (dtype) {
    case Dtype::f4: return "<f4";
    case Dtype::f8: return "<f8";
    case Dtype::i8: return "<i8";
  }
  return "?";
}

std::size_t item_size(Dtype dtype) noexcept {
  return dtype == Dtype::f4 ? 4 : 8;
}

std::uint64_t Header::element_count() const noexcept {
  std::uint64_t count = 1;
  for (auto s : shape) count *= s;
  return count;
}

Header parse_header_dict(std::string_view dict) {
  dict = trim(dict);
  if (dict.empty() || dict.front() != '{' || dict.back() != '}') {
    throw FormatError("npy header is not a dict literal");
  }
  Header header;
  header.dtype = parse_descr(find_value(dict, "descr"));
  const auto fortran = find_value(dict, "fortran_order");
  if (fortran == "True") {
    throw FormatError("npy arrays in fortran order are not supported");
  }
  if (fortran != "False") {
    throw FormatError("npy header: bad fortran_order value '" + std::string(fortran) + "'");
  }
  const auto shape = find_value(dict, "shape");
  if (shape.front() != '(') throw FormatError("npy header: shape is not a tuple");
  header.shape = parse_shape(shape);
  return header;
}

std::string encode_header(const Header& header) {
  std::string dict = "{'descr': '" + std::string(descr(header.dtype)) +
                     "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < header.shape.size(); ++i) {
    if (i > 0) dict += ", ";
    dict += std::to_string(header.shape[i]);
  }
  if (header.shape.size() == 1) dict += ",";
  dict += "), }";

  // Pad with spaces so prefix + dict + '\n' is a multiple of 64 bytes.
  const std::size_t unpadded = kPrefix + dict.size() + 1;
  const std::size_t total = (unpadded + kAlign - 1) / kAlign * kAlign;
  dict.append(total - unpadded, ' ');
  dict.push_back('\n');
  if (dict.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw FormatError("npy header too long for format version 1.0");
  }

  std::string out(kMagic, sizeof(kMagic));
  out.push_back('\x01');
  out.push_back('\x00');
  const auto len = static_cast<std::uint16_t>(dict.size());
  out.push_back(static_cast<char>(len & 0xff));
  out.push_back(static_cast<char>(len >> 8));
  out += dict;
  return out;
}

namespace {

// Validates prefix and header; returns the header and the payload offset.
std::pair<Header, std::size_t> decode_prefix(std::span<const std::byte> bytes) {
  if (bytes.size() < kPrefix ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not an npy file (bad magic bytes)");
  }
  const auto major = static_cast<unsigned>(bytes[6]);
  const auto minor = static_cast<unsigned>(bytes[7]);
  if (major != 1 || minor != 0) {
    throw FormatError("unsupported npy version " + std::to_string(major) + "." +
                      std::to_string(minor) + " (expected 1.0)");
  }
  const std::size_t header_len = static_cast<std::size_t>(bytes[8]) |
                                 (static_cast<std::size_t>(bytes[9]) << 8);
  if (bytes.size() < kPrefix + header_len) {
    throw TruncationError("npy file truncated inside header");
  }
  const std::string_view dict(reinterpret_cast<const char*>(bytes.data()) + kPrefix,
                              header_len);
  if (dict.empty() || dict.back() != '\n') {
    throw FormatError("npy header is not newline terminated");
  }

  Header header = parse_header_dict(dict);
  const std::size_t itemsize = item_size(header.dtype);
  std::uint64_t count = 1;
  for (auto s : header.shape) {
    if (__builtin_mul_overflow(count, s, &count) || count > (std::uint64_t{1} << 56)) {
      throw TruncationError("npy header declares an impossibly large shape");
    }
  }
  const std::size_t available = bytes.size() - kPrefix - header_len;
  if (count > available / itemsize) {
    throw TruncationError("npy payload truncated: header declares " +
                          std::to_string(count) + " elements, file holds " +
                          std::to_string(available / itemsize));
  }
  if (count * itemsize != available) {
    throw TruncationError("npy payload size mismatch: " + std::to_string(available) +
                          " bytes for " + std::to_string(count) + " elements");
  }
  return {std::move(header), kPrefix + header_len};
}

}  // namespace

Array decode(std::span<const std::byte> bytes) {
  auto [header, offset] = decode_prefix(bytes);
  Array array{std::move(header), {}};
  const auto payload = bytes.subspan(offset);
  array.payload.assign(payload.begin(), payload.end());
  return array;
}

Array decode(std::vector<std::byte>&& bytes) {
  auto [header, offset] = decode_prefix(bytes);
  bytes.erase(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(offset));
  return Array{std::move(header), std::move(bytes)};
}

std::vector<std::byte> encode(const Header& header, std::span<const std::byte> payload) {
  if (payload.size() != header.element_count() * item_size(header.dtype)) {
    throw FormatError("payload size does not match declared shape");
  }
  const auto head = encode_header(header);
  std::vector<std::byte> out(head.size() + payload.size());
  std::memcpy(out.data(), head.data(), head.size());
  if (!payload.empty()) {
    std::memcpy(out.data() + head.size(), payload.data(), payload.size());
  }
  return out;
}

Array read_file(const std::filesystem::path& path) {
  auto bytes = read_binary(path);
  try {
    return decode(std::move(bytes));
  } catch (const TruncationError& e) {
    throw TruncationError(path.string() + ": " + e.what());
  } catch (const DtypeError& e) {
    throw DtypeError(path.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const Header& header,
                std::span<const std::byte> payload) {
  write_atomic(path, encode(header, payload));
}

void write_f4(const std::filesystem::path& path, std::span<const float> values,
              std::uint64_t rows, std::uint64_t cols) {
  write_file(path, Header{Dtype::f4, {rows, cols}}, std::as_bytes(values));
}

void write_i8(const std::filesystem::path& path, std::span<const std::int64_t> values) {
  write_file(path, Header{Dtype::i8, {values.size()}}, std::as_bytes(values));
}

}  // namespace modalgauge::npy
