#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace tae::util {

// 64-bit FNV-1a. Stable across platforms and runs; used for cache keys,
// stub-completion file names and config hashes.
std::uint64_t fnv1a64(std::string_view data) noexcept;

// fnv1a64 rendered as 16 lowercase hex digits.
std::string hash_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string trim(std::string_view s);

}  // namespace tae::util
