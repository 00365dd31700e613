#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairledger/ledger.hpp"
#include "fairledger/outqueue.hpp"

namespace fairledger {

// Proposal selection is a pure function of the queue snapshot and a
// genesis-fixed policy; the proposer has no discretion.
struct SelectionPolicy {
    enum class Mode : uint8_t { FixedCount = 0, MaxBytes = 1 };
    Mode mode = Mode::FixedCount;
    uint64_t value = 128;

    static SelectionPolicy fixed_count(uint64_t n) { return {Mode::FixedCount, n}; }
    static SelectionPolicy max_bytes(uint64_t b) { return {Mode::MaxBytes, b}; }
};

std::optional<SelectionPolicy> parse_policy(const std::string& text); // "fixed:N" | "bytes:N"
std::string format_policy(const SelectionPolicy& p);

struct OrderingSeed {
    uint64_t seed64 = 0;
};

// Previous block hash XOR the first selected transaction's acceptor
// signature, folded to 64 bits; zero folds are replaced with a fixed
// nonzero constant so the generator has a valid state.
inline constexpr uint64_t kZeroSeedSubstitute = 0x9E3779B97F4A7C15ULL;

OrderingSeed derive_seed(const Digest& prev_block_hash, const Signature& first_acceptor_sig);

// xorshift64 with the (13, 7, 17) shift triple. State must be nonzero.
uint64_t xorshift64(uint64_t state);

// In-place Fisher-Yates shuffle driven by xorshift64.
template <typename T>
void permute(std::vector<T>& items, OrderingSeed seed) {
    uint64_t s = seed.seed64;
    for (size_t i = items.size(); i-- > 1;) {
        s = xorshift64(s);
        size_t j = static_cast<size_t>(s % (i + 1));
        std::swap(items[i], items[j]);
    }
}

struct OrderingResult {
    std::vector<Transaction> processed;
    std::vector<std::pair<Transaction, Reason>> rejected;
    AccountMap end_state;
};

// Repeated passes in permutation order. A transaction whose nonce is out of
// order (or whose balance is not yet covered) is deferred, keeping its
// relative order; passes repeat until one makes no progress, and the
// unorderable remainder is explicitly rejected. Censored transactions are
// rejected outright.
OrderingResult order_with_deferral(const std::vector<Transaction>& permuted,
                                   const AccountMap& state);

struct OrderedProposal {
    std::vector<Transaction> processed;
    std::vector<std::pair<Transaction, Reason>> rejected;
    PartialTree disclosure;
    Digest outqueue_root;
};

// First k queue entries under the policy, in position order.
std::vector<QueueEntry> select_prefix(const MerkleQueue& q, const SelectionPolicy& policy);

OrderedProposal build_proposal(const MerkleQueue& q, const SelectionPolicy& policy,
                               const Digest& prev_block_hash, const AccountMap& state);

enum class ProposalError : uint8_t {
    None = 0,
    BadPrefix = 1,
    BadSelectionSize = 2,
    BadOrdering = 3,
    BadRoot = 4,
};

const char* proposal_error_name(ProposalError e);

// Recomputes every deterministic step from the disclosure and accepts iff
// the proposal matches exactly.
ProposalError verify_proposal(const OrderedProposal& p, const Digest& prev_block_hash,
                              const Digest& claimed_root, const SelectionPolicy& policy,
                              const AccountMap& state, HashKind kind);

// Block packaging: processed entries first in final order, then rejected
// entries. The disclosure is stored in block-index form.
Block proposal_to_block(const OrderedProposal& p, uint64_t height,
                        const Digest& prev_block_hash, const KeyPair& proposer,
                        const AccountMap& pre_state, HashKind kind);
OrderedProposal proposal_from_block(const Block& b);

ProposalError verify_proposal_block(const Block& b, const Digest& prev_block_hash,
                                    const SelectionPolicy& policy, const AccountMap& state,
                                    HashKind kind);

} // namespace fairledger
