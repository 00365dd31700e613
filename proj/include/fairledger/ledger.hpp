#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairledger/bytes.hpp"
#include "fairledger/codec.hpp"
#include "fairledger/crypto.hpp"
#include "fairledger/digest.hpp"

namespace fairledger {

using Address = PublicId;

struct Account {
    uint64_t balance = 0;
    uint64_t next_nonce = 0;

    friend bool operator==(const Account&, const Account&) = default;
};

using AccountMap = std::map<Address, Account>;

// Stable wire-contract reason codes.
enum class Reason : uint8_t {
    None = 0,
    BadSignature = 1,
    InsufficientBalance = 2,
    BadNonce = 3,
    Malformed = 4,
    BadReceipt = 5,
    Censored = 6,
};

const char* reason_name(Reason r);

struct Validity {
    Reason reason = Reason::None;
    bool valid() const { return reason == Reason::None; }

    static Validity ok() { return {}; }
    static Validity invalid(Reason r) { return {r}; }
};

struct TxInput {
    Address address{};
    uint64_t amount = 0;
    uint64_t nonce = 0;
    Signature sig{};
};

struct TxOutput {
    Address address{};
    uint64_t amount = 0;
};

enum class TxKind : uint8_t {
    Send = 0,
    Administrative = 1,
};

enum class AdminKind : uint8_t {
    OutageReport = 0,
    OmissionReport = 1,
};

struct AcceptorReceipt {
    PublicId acceptor_id{};
    uint64_t acceptor_seq = 0;
    Signature sig{};
};

struct CensorshipMark {
    PublicId censor_id{};
    Bytes reason;
    Signature sig{};
};

struct Transaction {
    TxKind kind = TxKind::Send;
    std::vector<TxInput> inputs;
    std::vector<TxOutput> outputs;

    // Administrative transactions carry a signed payload and move no tokens.
    Bytes admin_payload;
    PublicId admin_signer{};
    Signature admin_sig{};

    std::optional<AcceptorReceipt> receipt;
    std::optional<CensorshipMark> censorship;
};

// Encoding layers. The body (no signatures) is what input holders and the
// admin signer sign; the core adds those signatures and is what the acceptor
// receipt covers; the full form adds receipt and censorship mark.
Bytes encode_tx_body(const Transaction& tx);
Bytes encode_tx_core(const Transaction& tx);
Bytes encode_tx(const Transaction& tx);
Transaction decode_tx(ByteView data);

// Identity digest used for duplicate suppression and queue indexing. Covers
// the core and the acceptor receipt, but not the censorship mark, so a
// censored copy and a clean copy of one transaction share an identity.
Digest tx_digest(HashKind kind, const Transaction& tx);

// Message the acceptor signs: the transaction core plus its id and sequence
// number.
Bytes receipt_message(const Transaction& tx, const PublicId& acceptor_id,
                      uint64_t acceptor_seq);
Bytes censorship_message(const Transaction& tx, ByteView reason);

bool verify_receipt(const Transaction& tx);

// Full statefull validation: input signatures, balances, nonces.
Validity validate_against_state(const Transaction& tx, const AccountMap& state);

// Stateless gossip-level checks only: well-formedness, input signatures,
// receipt signature. Balances and nonces are deliberately not consulted.
Validity make_basic_check(const Transaction& tx);

// Stateless checks for a fresh client submission, which carries neither a
// receipt nor a censorship mark yet.
Validity check_submission(const Transaction& tx);

// Precondition: validate_against_state(tx, state) is Valid.
AccountMap apply(const Transaction& tx, const AccountMap& state);

enum class Disposition : uint8_t {
    Processed = 0,
    Rejected = 1,
};

struct BlockEntry {
    Transaction tx;
    Disposition disposition = Disposition::Processed;
    Reason reason = Reason::None; // set for Rejected entries
};

struct Block {
    uint64_t height = 0;
    Digest prev_hash;
    PublicId proposer_id{};
    std::vector<BlockEntry> txs;
    Digest outqueue_root;
    Bytes prefix_disclosure; // serialized PartialTree
    Digest state_root;       // commitment to the post-block account state
    Signature proposer_sig{};
};

Bytes encode_block_unsigned(const Block& b);
Bytes encode_block(const Block& b);
Block decode_block(ByteView data);
Digest block_hash(HashKind kind, const Block& b);
bool verify_block_signature(const Block& b);

Digest state_root(HashKind kind, const AccountMap& state);
Bytes encode_state(const AccountMap& state);
AccountMap decode_state(ByteView data);

// Administrative payload helpers.
Bytes make_outage_payload(const PublicId& reporter, uint64_t down_from, uint64_t down_to);
Bytes make_omission_payload(const PublicId& reporter, const PublicId& peer,
                            int64_t first_missing, int64_t last_missing);

} // namespace fairledger
