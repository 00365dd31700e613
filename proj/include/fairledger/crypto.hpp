#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "fairledger/bytes.hpp"
#include "fairledger/digest.hpp"

namespace fairledger {

enum class HashKind : uint8_t {
    Ripemd160 = 0,
    Sha256 = 1,
};

constexpr uint8_t digest_len(HashKind kind) {
    return kind == HashKind::Ripemd160 ? 20 : 32;
}

// One-shot hash of a byte string.
Digest hash(HashKind kind, ByteView data);

// One link of the cumulative sequence hash: H(prev || value).
Digest chain_hash(HashKind kind, const Digest& prev, ByteView value);

// Fold of chain_hash over a whole sequence, starting from the zero digest.
template <typename Range>
Digest chain_fold(HashKind kind, const Range& values) {
    Digest h = Digest::zero(digest_len(kind));
    for (const auto& v : values) h = chain_hash(kind, h, ByteView(v));
    return h;
}

using PublicId = std::array<uint8_t, 32>;
using Signature = std::array<uint8_t, 64>;

struct KeyPair {
    PublicId public_id{};
    std::array<uint8_t, 64> secret{};

    // Deterministic keypair from a 32-byte seed; identical seeds give
    // identical keys across runs.
    static KeyPair from_seed(const std::array<uint8_t, 32>& seed);
    static KeyPair from_seed(uint64_t seed);
};

// Ed25519 detached signature. Deterministic: same key and message always
// produce the same signature bytes.
Signature sign(const KeyPair& key, ByteView message);

// False for any signature that does not verify, including malformed bytes.
bool verify(const PublicId& id, ByteView message, const Signature& sig);

std::string id_hex(const PublicId& id);

} // namespace fairledger
