#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace modalgauge {

std::vector<std::byte> read_binary(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it over `path`, so readers
/// never observe a partially written file.
void write_atomic(const std::filesystem::path& path,
                  std::span<const std::byte> bytes);
void write_atomic(const std::filesystem::path& path, std::string_view text);

/// Lower-case hex SHA-256 of a byte buffer / file.
std::string sha256_hex(std::span<const std::byte> bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace modalgauge
