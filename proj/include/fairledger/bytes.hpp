#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fairledger {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

std::string to_hex(ByteView data);
Bytes from_hex(const std::string& hex);

inline Bytes to_bytes(const std::string& s) {
    return Bytes(s.begin(), s.end());
}

} // namespace fairledger
