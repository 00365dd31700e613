#pragma once

#include <array>
#include <cstdint>
#include <cstddef>

namespace fairledger::detail {

// RIPEMD-160 over a single buffer. Implemented locally: OpenSSL 3 moved
// RIPEMD-160 to the legacy provider, which is not loadable here.
std::array<uint8_t, 20> ripemd160(const uint8_t* data, size_t len);

} // namespace fairledger::detail
