#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace binsonar {

/// Lowercase hex SHA-256 (64 chars).
std::string sha256_hex(std::span<const std::uint8_t> bytes);

/// Lowercase hex SHA-1 (40 chars).
std::string sha1_hex(std::span<const std::uint8_t> bytes);

}  // namespace binsonar
