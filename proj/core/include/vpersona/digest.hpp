#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace vpersona {

/// Lowercase hex SHA-256 of `data`.
[[nodiscard]] std::string sha256_hex(std::string_view data);

/// First 8 bytes of SHA-256 as an integer; used to turn identifiers into seeds.
[[nodiscard]] std::uint64_t sha256_u64(std::string_view data);

} // namespace vpersona
