#include "fairledger/crypto.hpp"

#include <sodium.h>

#include <mutex>
#include <stdexcept>

#include "ripemd160.hpp"

namespace fairledger {

namespace {

void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
    });
}

} // namespace

Digest hash(HashKind kind, ByteView data) {
    Digest d;
    d.len = digest_len(kind);
    if (kind == HashKind::Ripemd160) {
        auto out = detail::ripemd160(data.data(), data.size());
        std::memcpy(d.data.data(), out.data(), 20);
    } else {
        ensure_sodium();
        crypto_hash_sha256(d.data.data(), data.data(), data.size());
    }
    return d;
}

Digest chain_hash(HashKind kind, const Digest& prev, ByteView value) {
    Bytes buf;
    buf.reserve(prev.len + value.size());
    buf.insert(buf.end(), prev.data.begin(), prev.data.begin() + prev.len);
    buf.insert(buf.end(), value.begin(), value.end());
    return hash(kind, buf);
}

KeyPair KeyPair::from_seed(const std::array<uint8_t, 32>& seed) {
    ensure_sodium();
    KeyPair kp;
    crypto_sign_seed_keypair(kp.public_id.data(), kp.secret.data(), seed.data());
    return kp;
}

KeyPair KeyPair::from_seed(uint64_t seed) {
    std::array<uint8_t, 32> s{};
    for (int i = 0; i < 8; ++i) s[i] = static_cast<uint8_t>(seed >> (8 * i));
    return from_seed(s);
}

Signature sign(const KeyPair& key, ByteView message) {
    ensure_sodium();
    Signature sig{};
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                         key.secret.data());
    return sig;
}

bool verify(const PublicId& id, ByteView message, const Signature& sig) {
    ensure_sodium();
    return crypto_sign_verify_detached(sig.data(), message.data(), message.size(),
                                       id.data()) == 0;
}

std::string id_hex(const PublicId& id) {
    return to_hex(ByteView(id.data(), id.size()));
}

} // namespace fairledger
