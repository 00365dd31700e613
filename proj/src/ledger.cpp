#include "fairledger/ledger.hpp"

#include <cassert>
#include <set>

namespace fairledger {

const char* reason_name(Reason r) {
    switch (r) {
        case Reason::None: return "None";
        case Reason::BadSignature: return "BadSignature";
        case Reason::InsufficientBalance: return "InsufficientBalance";
        case Reason::BadNonce: return "BadNonce";
        case Reason::Malformed: return "Malformed";
        case Reason::BadReceipt: return "BadReceipt";
        case Reason::Censored: return "Censored";
    }
    return "?";
}

Bytes encode_tx_body(const Transaction& tx) {
    Encoder e;
    e.u8(static_cast<uint8_t>(tx.kind));
    e.count(tx.inputs.size());
    for (const auto& in : tx.inputs) e.id(in.address).u64(in.amount).u64(in.nonce);
    e.count(tx.outputs.size());
    for (const auto& out : tx.outputs) e.id(out.address).u64(out.amount);
    e.bytes(tx.admin_payload);
    e.id(tx.admin_signer);
    return e.move();
}

Bytes encode_tx_core(const Transaction& tx) {
    Encoder e;
    e.raw(encode_tx_body(tx));
    e.count(tx.inputs.size());
    for (const auto& in : tx.inputs) e.signature(in.sig);
    e.signature(tx.admin_sig);
    return e.move();
}

static void encode_receipt(Encoder& e, const AcceptorReceipt& r) {
    e.id(r.acceptor_id).u64(r.acceptor_seq).signature(r.sig);
}

Bytes encode_tx(const Transaction& tx) {
    Encoder e;
    e.raw(encode_tx_core(tx));
    e.u8(tx.receipt ? 1 : 0);
    if (tx.receipt) encode_receipt(e, *tx.receipt);
    e.u8(tx.censorship ? 1 : 0);
    if (tx.censorship)
        e.id(tx.censorship->censor_id).bytes(tx.censorship->reason).signature(tx.censorship->sig);
    return e.move();
}

Transaction decode_tx(ByteView data) {
    Decoder d(data);
    Transaction tx;
    uint8_t kind = d.u8();
    if (kind > 1) throw CodecError("bad tx kind");
    tx.kind = static_cast<TxKind>(kind);
    size_t n_in = d.count();
    if (n_in > 1024) throw CodecError("too many inputs");
    tx.inputs.resize(n_in);
    for (auto& in : tx.inputs) {
        in.address = d.id();
        in.amount = d.u64();
        in.nonce = d.u64();
    }
    size_t n_out = d.count();
    if (n_out > 1024) throw CodecError("too many outputs");
    tx.outputs.resize(n_out);
    for (auto& out : tx.outputs) {
        out.address = d.id();
        out.amount = d.u64();
    }
    tx.admin_payload = d.bytes();
    tx.admin_signer = d.id();
    if (d.count() != n_in) throw CodecError("input signature count mismatch");
    for (auto& in : tx.inputs) in.sig = d.signature();
    tx.admin_sig = d.signature();
    if (d.u8()) {
        AcceptorReceipt r;
        r.acceptor_id = d.id();
        r.acceptor_seq = d.u64();
        r.sig = d.signature();
        tx.receipt = r;
    }
    if (d.u8()) {
        CensorshipMark m;
        m.censor_id = d.id();
        m.reason = d.bytes();
        m.sig = d.signature();
        tx.censorship = m;
    }
    d.expect_done();
    return tx;
}

Digest tx_digest(HashKind kind, const Transaction& tx) {
    Encoder e;
    e.raw(encode_tx_core(tx));
    e.u8(tx.receipt ? 1 : 0);
    if (tx.receipt) encode_receipt(e, *tx.receipt);
    return hash(kind, e.take());
}

Bytes receipt_message(const Transaction& tx, const PublicId& acceptor_id,
                      uint64_t acceptor_seq) {
    Encoder e;
    e.raw(encode_tx_core(tx)).id(acceptor_id).u64(acceptor_seq);
    return e.move();
}

Bytes censorship_message(const Transaction& tx, ByteView reason) {
    Encoder e;
    e.raw(encode_tx_core(tx)).bytes(reason);
    return e.move();
}

bool verify_receipt(const Transaction& tx) {
    if (!tx.receipt) return false;
    Bytes msg = receipt_message(tx, tx.receipt->acceptor_id, tx.receipt->acceptor_seq);
    return verify(tx.receipt->acceptor_id, msg, tx.receipt->sig);
}

// Structural checks shared by stateless and stateful validation.
static Validity check_well_formed(const Transaction& tx) {
    if (tx.kind == TxKind::Send) {
        if (tx.inputs.empty() || tx.outputs.empty()) return Validity::invalid(Reason::Malformed);
        if (!tx.admin_payload.empty()) return Validity::invalid(Reason::Malformed);
        std::set<Address> seen;
        uint64_t sum_in = 0, sum_out = 0;
        for (const auto& in : tx.inputs) {
            if (!seen.insert(in.address).second) return Validity::invalid(Reason::Malformed);
            if (in.amount > UINT64_MAX - sum_in) return Validity::invalid(Reason::Malformed);
            sum_in += in.amount;
        }
        for (const auto& out : tx.outputs) {
            if (out.amount > UINT64_MAX - sum_out) return Validity::invalid(Reason::Malformed);
            sum_out += out.amount;
        }
        // Fee policy constant is 0: inputs must exactly cover outputs.
        if (sum_in != sum_out) return Validity::invalid(Reason::Malformed);
    } else {
        if (!tx.inputs.empty() || !tx.outputs.empty())
            return Validity::invalid(Reason::Malformed);
        if (tx.admin_payload.empty()) return Validity::invalid(Reason::Malformed);
    }
    return Validity::ok();
}

static Validity check_signatures(const Transaction& tx) {
    Bytes body = encode_tx_body(tx);
    for (const auto& in : tx.inputs)
        if (!verify(in.address, body, in.sig)) return Validity::invalid(Reason::BadSignature);
    if (tx.kind == TxKind::Administrative)
        if (!verify(tx.admin_signer, body, tx.admin_sig))
            return Validity::invalid(Reason::BadSignature);
    return Validity::ok();
}

Validity validate_against_state(const Transaction& tx, const AccountMap& state) {
    if (auto v = check_well_formed(tx); !v.valid()) return v;
    if (auto v = check_signatures(tx); !v.valid()) return v;
    for (const auto& in : tx.inputs) {
        auto it = state.find(in.address);
        if (it == state.end()) return Validity::invalid(Reason::InsufficientBalance);
        if (it->second.balance < in.amount)
            return Validity::invalid(Reason::InsufficientBalance);
        if (in.nonce != it->second.next_nonce) return Validity::invalid(Reason::BadNonce);
    }
    return Validity::ok();
}

Validity check_submission(const Transaction& tx) {
    if (tx.receipt || tx.censorship) return Validity::invalid(Reason::Malformed);
    if (auto v = check_well_formed(tx); !v.valid()) return v;
    return check_signatures(tx);
}

Validity make_basic_check(const Transaction& tx) {
    if (auto v = check_well_formed(tx); !v.valid()) return v;
    if (auto v = check_signatures(tx); !v.valid()) return v;
    if (!verify_receipt(tx)) return Validity::invalid(Reason::BadReceipt);
    if (tx.censorship) {
        Bytes msg = censorship_message(tx, tx.censorship->reason);
        if (!verify(tx.censorship->censor_id, msg, tx.censorship->sig))
            return Validity::invalid(Reason::Malformed);
    }
    return Validity::ok();
}

AccountMap apply(const Transaction& tx, const AccountMap& state) {
    assert(validate_against_state(tx, state).valid());
    AccountMap next = state;
    for (const auto& in : tx.inputs) {
        Account& a = next[in.address];
        a.balance -= in.amount;
        a.next_nonce += 1;
    }
    for (const auto& out : tx.outputs) next[out.address].balance += out.amount;
    return next;
}

Bytes encode_block_unsigned(const Block& b) {
    Encoder e;
    e.u64(b.height).digest(b.prev_hash).id(b.proposer_id);
    e.count(b.txs.size());
    for (const auto& entry : b.txs) {
        e.bytes(encode_tx(entry.tx));
        e.u8(static_cast<uint8_t>(entry.disposition));
        e.u8(static_cast<uint8_t>(entry.reason));
    }
    e.digest(b.outqueue_root);
    e.bytes(b.prefix_disclosure);
    e.digest(b.state_root);
    return e.move();
}

Bytes encode_block(const Block& b) {
    Encoder e;
    e.raw(encode_block_unsigned(b)).signature(b.proposer_sig);
    return e.move();
}

Block decode_block(ByteView data) {
    Decoder d(data);
    Block b;
    b.height = d.u64();
    b.prev_hash = d.digest();
    b.proposer_id = d.id();
    size_t n = d.count();
    if (n > 1u << 20) throw CodecError("oversized block");
    b.txs.resize(n);
    for (auto& entry : b.txs) {
        entry.tx = decode_tx(d.bytes());
        uint8_t disp = d.u8();
        if (disp > 1) throw CodecError("bad disposition");
        entry.disposition = static_cast<Disposition>(disp);
        uint8_t reason = d.u8();
        if (reason > 6) throw CodecError("bad reason code");
        entry.reason = static_cast<Reason>(reason);
    }
    b.outqueue_root = d.digest();
    b.prefix_disclosure = d.bytes();
    b.state_root = d.digest();
    b.proposer_sig = d.signature();
    d.expect_done();
    return b;
}

Digest block_hash(HashKind kind, const Block& b) {
    return hash(kind, encode_block_unsigned(b));
}

bool verify_block_signature(const Block& b) {
    return verify(b.proposer_id, encode_block_unsigned(b), b.proposer_sig);
}

Bytes encode_state(const AccountMap& state) {
    Encoder e;
    e.count(state.size());
    for (const auto& [addr, acct] : state)
        e.id(addr).u64(acct.balance).u64(acct.next_nonce);
    return e.move();
}

AccountMap decode_state(ByteView data) {
    Decoder d(data);
    AccountMap state;
    size_t n = d.count();
    if (n > 1u << 20) throw CodecError("oversized state");
    for (size_t i = 0; i < n; ++i) {
        Address addr = d.id();
        Account a;
        a.balance = d.u64();
        a.next_nonce = d.u64();
        if (!state.emplace(addr, a).second) throw CodecError("duplicate account");
    }
    d.expect_done();
    return state;
}

Digest state_root(HashKind kind, const AccountMap& state) {
    return hash(kind, encode_state(state));
}

Bytes make_outage_payload(const PublicId& reporter, uint64_t down_from, uint64_t down_to) {
    Encoder e;
    e.u8(static_cast<uint8_t>(AdminKind::OutageReport));
    e.id(reporter).u64(down_from).u64(down_to);
    return e.move();
}

Bytes make_omission_payload(const PublicId& reporter, const PublicId& peer,
                            int64_t first_missing, int64_t last_missing) {
    Encoder e;
    e.u8(static_cast<uint8_t>(AdminKind::OmissionReport));
    e.id(reporter).id(peer).i64(first_missing).i64(last_missing);
    return e.move();
}

} // namespace fairledger
