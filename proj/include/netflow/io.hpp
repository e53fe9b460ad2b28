#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace netflow {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Parses a full-precision decimal; throws FormatError on trailing garbage.
double parse_double(std::string_view text);

/// 64-bit FNV-1a; stable across platforms, used for provenance digests.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace netflow
