#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "fairledger/bytes.hpp"
#include "fairledger/crypto.hpp"
#include "fairledger/digest.hpp"

namespace fairledger {

// Canonical encoding used for every hash and signature in the protocol:
// unsigned integers as 8-byte big-endian, byte strings as 4-byte big-endian
// length prefix + bytes, lists as 4-byte big-endian count + elements.
// Fields are written in declared order, so the encoding is injective over
// the protocol types.
class Encoder {
public:
    Encoder& u8(uint8_t v) {
        out_.push_back(v);
        return *this;
    }

    Encoder& u64(uint64_t v) {
        for (int i = 7; i >= 0; --i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
        return *this;
    }

    // Signed indexes (lastSent/lastConf start at -1) as two's complement.
    Encoder& i64(int64_t v) { return u64(static_cast<uint64_t>(v)); }

    Encoder& bytes(ByteView v) {
        u32(static_cast<uint32_t>(v.size()));
        out_.insert(out_.end(), v.begin(), v.end());
        return *this;
    }

    Encoder& raw(ByteView v) {
        out_.insert(out_.end(), v.begin(), v.end());
        return *this;
    }

    Encoder& count(size_t n) { return u32(static_cast<uint32_t>(n)); }

    Encoder& digest(const Digest& d) { return bytes(d.view()); }

    Encoder& id(const PublicId& v) { return raw(ByteView(v.data(), v.size())); }

    Encoder& signature(const Signature& v) { return raw(ByteView(v.data(), v.size())); }

    const Bytes& take() const { return out_; }
    Bytes&& move() { return std::move(out_); }

private:
    Encoder& u32(uint32_t v) {
        for (int i = 3; i >= 0; --i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
        return *this;
    }

    Bytes out_;
};

struct CodecError : std::runtime_error {
    explicit CodecError(const std::string& what) : std::runtime_error(what) {}
};

class Decoder {
public:
    explicit Decoder(ByteView data) : data_(data) {}

    uint8_t u8() {
        need(1);
        return data_[pos_++];
    }

    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = v << 8 | data_[pos_++];
        return v;
    }

    int64_t i64() { return static_cast<int64_t>(u64()); }

    Bytes bytes() {
        uint32_t n = u32();
        need(n);
        Bytes v(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        return v;
    }

    size_t count() { return u32(); }

    Digest digest() {
        Bytes b = bytes();
        if (b.size() > 32) throw CodecError("digest too long");
        Digest d;
        d.len = static_cast<uint8_t>(b.size());
        std::copy(b.begin(), b.end(), d.data.begin());
        return d;
    }

    PublicId id() {
        PublicId v{};
        need(v.size());
        std::copy(data_.begin() + pos_, data_.begin() + pos_ + v.size(), v.begin());
        pos_ += v.size();
        return v;
    }

    Signature signature() {
        Signature v{};
        need(v.size());
        std::copy(data_.begin() + pos_, data_.begin() + pos_ + v.size(), v.begin());
        pos_ += v.size();
        return v;
    }

    bool done() const { return pos_ == data_.size(); }

    void expect_done() const {
        if (!done()) throw CodecError("trailing bytes");
    }

private:
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_++];
        return v;
    }

    void need(size_t n) const {
        if (data_.size() - pos_ < n) throw CodecError("truncated input");
    }

    ByteView data_;
    size_t pos_ = 0;
};

} // namespace fairledger
