#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ctindex {

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split(std::string_view s, char delimiter);

/// `MAJOR.MINOR.PATCH` with optional pre-release/build suffix.
bool is_semver(std::string_view s) noexcept;

/// Segmenter label grammar: `[a-z0-9_]+`.
bool is_label(std::string_view s) noexcept;

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// 64-bit FNV-1a; stable across platforms, used for seeding only.
std::uint64_t fnv1a64(std::string_view s) noexcept;

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace ctindex
