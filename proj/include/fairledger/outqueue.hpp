#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fairledger/crypto.hpp"
#include "fairledger/digest.hpp"
#include "fairledger/ledger.hpp"

namespace fairledger {

struct QueueEntry {
    uint64_t position = 0;
    Transaction tx;
};

// Signed point-in-time snapshot of a node's outgoing queue.
struct QueueSummary {
    Digest root;
    uint64_t block_height = 0;
    Digest block_hash;
    uint64_t summary_seq = 0;
    PublicId node_id{};
    Signature sig{};
};

Bytes summary_message(const QueueSummary& s);
Bytes encode_summary(const QueueSummary& s);
QueueSummary decode_summary(ByteView data);
bool verify_summary(const QueueSummary& s);

struct ProofStep {
    Digest sibling;
    bool sibling_on_left = false;
};

struct MembershipProof {
    uint64_t position = 0;
    Transaction tx;
    std::vector<ProofStep> path; // leaf-to-root
};

// Pre-order node list. Inner nodes are followed by their two children;
// Pruned nodes stand in for undisclosed subtrees; Leaf nodes carry either
// an inline transaction or an index into an accompanying block's tx list.
struct PartialTree {
    enum Tag : uint8_t { Inner = 0, Leaf = 1, Pruned = 2 };

    struct Node {
        Tag tag = Inner;
        uint64_t position = 0;              // Leaf
        std::optional<Transaction> tx;      // Leaf, inline form
        std::optional<uint32_t> block_index; // Leaf, block-index form
        Digest digest;                      // Pruned
    };

    std::vector<Node> preorder;
};

Bytes encode_partial_tree(const PartialTree& pt);
PartialTree decode_partial_tree(ByteView data);

struct PartialTreeView {
    bool well_formed = false;
    Digest root;                    // recombined root
    std::vector<QueueEntry> leaves; // in disclosure (in-order) order
    bool leaves_form_left_frontier = false; // every leaf precedes every pruned node
    bool fully_disclosed = false;   // no pruned nodes at all
    size_t node_count = 0;
};

// Recombines a partial tree. Requires inline leaves; use inflate_partial_tree
// first for the block-index form.
PartialTreeView analyze_partial_tree(HashKind kind, const PartialTree& pt);

// Replace inline leaf transactions with their indexes in a block tx list,
// and back.
PartialTree deflate_partial_tree(const PartialTree& pt,
                                 const std::vector<BlockEntry>& block_txs,
                                 HashKind kind);
PartialTree inflate_partial_tree(const PartialTree& pt,
                                 const std::vector<BlockEntry>& block_txs);

bool verify_membership(HashKind kind, const Digest& root, const MembershipProof& proof);

// True iff pt recombines to root, its disclosed leaves form the left frontier
// of the tree, and they equal expected_txs in position order.
bool verify_prefix(HashKind kind, const Digest& root, const PartialTree& pt,
                   const std::vector<Transaction>& expected_txs);

struct AbsentError : std::runtime_error {
    AbsentError() : std::runtime_error("position not present") {}
};
struct RangeError : std::runtime_error {
    RangeError() : std::runtime_error("prefix length exceeds queue size") {}
};

// Authenticated map from queue position to transaction. Positions are
// assigned monotonically and never reused. The Merkle structure is a
// canonical balanced search tree over the present positions, so the root is
// a pure function of the queue contents and can be rebuilt from a full dump.
class MerkleQueue {
public:
    explicit MerkleQueue(HashKind kind = HashKind::Ripemd160) : kind_(kind) {}

    enum class EnqueueResult { Inserted, Duplicate };

    EnqueueResult enqueue(const Transaction& tx);

    // Deletes exactly the transactions appearing in the block, with either
    // disposition. Transactions merely invalidated by the new state remain.
    void remove_committed(const Block& block);

    QueueSummary summarize(const KeyPair& node_key, uint64_t block_height,
                           const Digest& block_hash, uint64_t summary_seq);

    MembershipProof prove_membership(uint64_t position) const;
    PartialTree disclose_prefix(size_t k) const;

    Digest root() const;
    size_t size() const { return entries_.size(); }
    uint64_t next_position() const { return next_position_; }
    const std::vector<QueueEntry>& entries() const { return entries_; }
    std::optional<uint64_t> position_of(const Digest& txd) const;

    // Fault-injection hooks for scripted Byzantine nodes. Honest code never
    // calls these.
    bool erase_by_digest(const Digest& txd);
    void swap_positions(uint64_t a, uint64_t b);

    HashKind hash_kind() const { return kind_; }

private:
    void invalidate() { root_cache_.reset(); }

    HashKind kind_;
    std::vector<QueueEntry> entries_; // sorted by position
    std::map<Digest, uint64_t> by_tx_;
    uint64_t next_position_ = 0;
    int64_t last_summary_seq_ = -1;
    mutable std::optional<Digest> root_cache_;
};

// Leaf and inner hashing, exposed for test oracles.
Digest queue_leaf_hash(HashKind kind, uint64_t position, const Transaction& tx);
Digest queue_inner_hash(HashKind kind, const Digest& left, const Digest& right);

} // namespace fairledger
