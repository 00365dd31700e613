#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <string>

#include "fairledger/bytes.hpp"

namespace fairledger {

// Fixed-capacity digest. The active length depends on the configured hash
// (20 bytes for RIPEMD-160, 32 for SHA-256). The all-zero digest is the
// distinguished initial value of every hash chain.
struct Digest {
    std::array<uint8_t, 32> data{};
    uint8_t len = 20;

    static Digest zero(uint8_t n = 20) {
        Digest d;
        d.len = n;
        return d;
    }

    ByteView view() const { return ByteView(data.data(), len); }

    bool is_zero() const {
        for (uint8_t i = 0; i < len; ++i)
            if (data[i] != 0) return false;
        return true;
    }

    std::string hex() const { return to_hex(view()); }

    friend bool operator==(const Digest& a, const Digest& b) {
        return a.len == b.len && std::memcmp(a.data.data(), b.data.data(), a.len) == 0;
    }

    friend std::strong_ordering operator<=>(const Digest& a, const Digest& b) {
        if (auto c = a.len <=> b.len; c != 0) return c;
        int r = std::memcmp(a.data.data(), b.data.data(), a.len);
        return r < 0 ? std::strong_ordering::less
             : r > 0 ? std::strong_ordering::greater
                     : std::strong_ordering::equal;
    }
};

} // namespace fairledger
