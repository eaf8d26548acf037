#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace emdtex {

// Lower-case hex SHA-256.
std::string sha256_hex(std::span<const std::byte> bytes);

}  // namespace emdtex
