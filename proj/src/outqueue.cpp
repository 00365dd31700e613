#include "fairledger/outqueue.hpp"

#include <algorithm>
#include <cassert>

namespace fairledger {

Bytes summary_message(const QueueSummary& s) {
    Encoder e;
    e.digest(s.root).u64(s.block_height).digest(s.block_hash).u64(s.summary_seq).id(s.node_id);
    return e.move();
}

Bytes encode_summary(const QueueSummary& s) {
    Encoder e;
    e.raw(summary_message(s)).signature(s.sig);
    return e.move();
}

QueueSummary decode_summary(ByteView data) {
    Decoder d(data);
    QueueSummary s;
    s.root = d.digest();
    s.block_height = d.u64();
    s.block_hash = d.digest();
    s.summary_seq = d.u64();
    s.node_id = d.id();
    s.sig = d.signature();
    d.expect_done();
    return s;
}

bool verify_summary(const QueueSummary& s) {
    return verify(s.node_id, summary_message(s), s.sig);
}

Digest queue_leaf_hash(HashKind kind, uint64_t position, const Transaction& tx) {
    Encoder e;
    e.u8(0x00).u64(position).bytes(encode_tx(tx));
    return hash(kind, e.take());
}

Digest queue_inner_hash(HashKind kind, const Digest& left, const Digest& right) {
    Encoder e;
    e.u8(0x01).raw(left.view()).raw(right.view());
    return hash(kind, e.take());
}

namespace {

// Canonical shape: split [lo, hi) with the left subtree taking the larger
// half. The structure depends only on the number and order of entries.
Digest subtree_root(HashKind kind, const std::vector<QueueEntry>& es, size_t lo, size_t hi) {
    if (hi - lo == 1) return queue_leaf_hash(kind, es[lo].position, es[lo].tx);
    size_t mid = lo + (hi - lo + 1) / 2;
    return queue_inner_hash(kind, subtree_root(kind, es, lo, mid),
                            subtree_root(kind, es, mid, hi));
}

void subtree_prove(HashKind kind, const std::vector<QueueEntry>& es, size_t lo, size_t hi,
                   size_t target, MembershipProof& proof) {
    if (hi - lo == 1) return;
    size_t mid = lo + (hi - lo + 1) / 2;
    if (target < mid) {
        subtree_prove(kind, es, lo, mid, target, proof);
        proof.path.push_back({subtree_root(kind, es, mid, hi), false});
    } else {
        subtree_prove(kind, es, mid, hi, target, proof);
        proof.path.push_back({subtree_root(kind, es, lo, mid), true});
    }
}

void subtree_disclose(HashKind kind, const std::vector<QueueEntry>& es, size_t lo, size_t hi,
                      size_t k, PartialTree& pt) {
    if (lo >= k) {
        PartialTree::Node n;
        n.tag = PartialTree::Pruned;
        n.digest = subtree_root(kind, es, lo, hi);
        pt.preorder.push_back(std::move(n));
        return;
    }
    if (hi - lo == 1) {
        PartialTree::Node n;
        n.tag = PartialTree::Leaf;
        n.position = es[lo].position;
        n.tx = es[lo].tx;
        pt.preorder.push_back(std::move(n));
        return;
    }
    size_t mid = lo + (hi - lo + 1) / 2;
    PartialTree::Node inner;
    inner.tag = PartialTree::Inner;
    pt.preorder.push_back(inner);
    subtree_disclose(kind, es, lo, mid, k, pt);
    subtree_disclose(kind, es, mid, hi, k, pt);
}

} // namespace

MerkleQueue::EnqueueResult MerkleQueue::enqueue(const Transaction& tx) {
    Digest d = tx_digest(kind_, tx);
    if (by_tx_.count(d)) return EnqueueResult::Duplicate;
    entries_.push_back({next_position_, tx});
    by_tx_.emplace(d, next_position_);
    ++next_position_;
    invalidate();
    return EnqueueResult::Inserted;
}

void MerkleQueue::remove_committed(const Block& block) {
    for (const auto& entry : block.txs) {
        Digest d = tx_digest(kind_, entry.tx);
        auto it = by_tx_.find(d);
        if (it == by_tx_.end()) continue;
        uint64_t pos = it->second;
        by_tx_.erase(it);
        entries_.erase(std::find_if(entries_.begin(), entries_.end(),
                                    [&](const QueueEntry& qe) { return qe.position == pos; }));
    }
    invalidate();
}

QueueSummary MerkleQueue::summarize(const KeyPair& node_key, uint64_t block_height,
                                    const Digest& block_hash, uint64_t summary_seq) {
    assert(static_cast<int64_t>(summary_seq) > last_summary_seq_);
    last_summary_seq_ = static_cast<int64_t>(summary_seq);
    QueueSummary s;
    s.root = root();
    s.block_height = block_height;
    s.block_hash = block_hash;
    s.summary_seq = summary_seq;
    s.node_id = node_key.public_id;
    s.sig = sign(node_key, summary_message(s));
    return s;
}

Digest MerkleQueue::root() const {
    if (!root_cache_) {
        root_cache_ = entries_.empty() ? Digest::zero(digest_len(kind_))
                                       : subtree_root(kind_, entries_, 0, entries_.size());
    }
    return *root_cache_;
}

MembershipProof MerkleQueue::prove_membership(uint64_t position) const {
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const QueueEntry& qe) { return qe.position == position; });
    if (it == entries_.end()) throw AbsentError();
    MembershipProof proof;
    proof.position = position;
    proof.tx = it->tx;
    subtree_prove(kind_, entries_, 0, entries_.size(),
                  static_cast<size_t>(it - entries_.begin()), proof);
    return proof;
}

PartialTree MerkleQueue::disclose_prefix(size_t k) const {
    if (k > entries_.size()) throw RangeError();
    PartialTree pt;
    if (entries_.empty()) return pt;
    subtree_disclose(kind_, entries_, 0, entries_.size(), k, pt);
    return pt;
}

std::optional<uint64_t> MerkleQueue::position_of(const Digest& txd) const {
    auto it = by_tx_.find(txd);
    if (it == by_tx_.end()) return std::nullopt;
    return it->second;
}

bool MerkleQueue::erase_by_digest(const Digest& txd) {
    auto it = by_tx_.find(txd);
    if (it == by_tx_.end()) return false;
    uint64_t pos = it->second;
    by_tx_.erase(it);
    entries_.erase(std::find_if(entries_.begin(), entries_.end(),
                                [&](const QueueEntry& qe) { return qe.position == pos; }));
    invalidate();
    return true;
}

void MerkleQueue::swap_positions(uint64_t a, uint64_t b) {
    auto ia = std::find_if(entries_.begin(), entries_.end(),
                           [&](const QueueEntry& qe) { return qe.position == a; });
    auto ib = std::find_if(entries_.begin(), entries_.end(),
                           [&](const QueueEntry& qe) { return qe.position == b; });
    if (ia == entries_.end() || ib == entries_.end()) return;
    std::swap(ia->tx, ib->tx);
    by_tx_[tx_digest(kind_, ia->tx)] = ia->position;
    by_tx_[tx_digest(kind_, ib->tx)] = ib->position;
    invalidate();
}

bool verify_membership(HashKind kind, const Digest& root, const MembershipProof& proof) {
    Digest h = queue_leaf_hash(kind, proof.position, proof.tx);
    for (const auto& step : proof.path) {
        h = step.sibling_on_left ? queue_inner_hash(kind, step.sibling, h)
                                 : queue_inner_hash(kind, h, step.sibling);
    }
    return h == root;
}

Bytes encode_partial_tree(const PartialTree& pt) {
    Encoder e;
    e.count(pt.preorder.size());
    for (const auto& n : pt.preorder) {
        e.u8(n.tag);
        switch (n.tag) {
            case PartialTree::Inner:
                break;
            case PartialTree::Leaf:
                e.u64(n.position);
                if (n.tx) {
                    e.u8(0).bytes(encode_tx(*n.tx));
                } else {
                    e.u8(1).u64(n.block_index.value());
                }
                break;
            case PartialTree::Pruned:
                e.digest(n.digest);
                break;
        }
    }
    return e.move();
}

PartialTree decode_partial_tree(ByteView data) {
    Decoder d(data);
    PartialTree pt;
    size_t n = d.count();
    if (n > 1u << 20) throw CodecError("oversized partial tree");
    pt.preorder.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        PartialTree::Node node;
        uint8_t tag = d.u8();
        if (tag > 2) throw CodecError("bad partial tree tag");
        node.tag = static_cast<PartialTree::Tag>(tag);
        if (node.tag == PartialTree::Leaf) {
            node.position = d.u64();
            uint8_t form = d.u8();
            if (form == 0) {
                node.tx = decode_tx(d.bytes());
            } else if (form == 1) {
                node.block_index = static_cast<uint32_t>(d.u64());
            } else {
                throw CodecError("bad leaf form");
            }
        } else if (node.tag == PartialTree::Pruned) {
            node.digest = d.digest();
        }
        pt.preorder.push_back(std::move(node));
    }
    d.expect_done();
    return pt;
}

namespace {

struct Recombiner {
    HashKind kind;
    const std::vector<PartialTree::Node>& nodes;
    size_t pos = 0;
    PartialTreeView* out;
    bool seen_pruned = false;
    bool failed = false;

    Digest walk() {
        if (pos >= nodes.size()) {
            failed = true;
            return Digest::zero(digest_len(kind));
        }
        const auto& n = nodes[pos++];
        switch (n.tag) {
            case PartialTree::Inner: {
                Digest left = walk();
                Digest right = walk();
                return queue_inner_hash(kind, left, right);
            }
            case PartialTree::Leaf: {
                if (!n.tx) {
                    failed = true;
                    return Digest::zero(digest_len(kind));
                }
                if (seen_pruned) out->leaves_form_left_frontier = false;
                out->leaves.push_back({n.position, *n.tx});
                return queue_leaf_hash(kind, n.position, *n.tx);
            }
            default: // Pruned
                seen_pruned = true;
                out->fully_disclosed = false;
                return n.digest;
        }
    }
};

} // namespace

PartialTreeView analyze_partial_tree(HashKind kind, const PartialTree& pt) {
    PartialTreeView view;
    view.node_count = pt.preorder.size();
    view.leaves_form_left_frontier = true;
    view.fully_disclosed = true;
    if (pt.preorder.empty()) {
        view.well_formed = true;
        view.root = Digest::zero(digest_len(kind));
        return view;
    }
    Recombiner rec{kind, pt.preorder, 0, &view};
    Digest root = rec.walk();
    if (rec.failed || rec.pos != pt.preorder.size()) {
        view.well_formed = false;
        return view;
    }
    view.well_formed = true;
    view.root = root;
    return view;
}

PartialTree deflate_partial_tree(const PartialTree& pt,
                                 const std::vector<BlockEntry>& block_txs,
                                 HashKind kind) {
    PartialTree out = pt;
    for (auto& n : out.preorder) {
        if (n.tag != PartialTree::Leaf || !n.tx) continue;
        Digest d = tx_digest(kind, *n.tx);
        for (size_t i = 0; i < block_txs.size(); ++i) {
            if (tx_digest(kind, block_txs[i].tx) == d) {
                n.block_index = static_cast<uint32_t>(i);
                n.tx.reset();
                break;
            }
        }
    }
    return out;
}

PartialTree inflate_partial_tree(const PartialTree& pt,
                                 const std::vector<BlockEntry>& block_txs) {
    PartialTree out = pt;
    for (auto& n : out.preorder) {
        if (n.tag != PartialTree::Leaf || n.tx) continue;
        uint32_t idx = n.block_index.value();
        if (idx >= block_txs.size()) throw CodecError("block index out of range");
        n.tx = block_txs[idx].tx;
        n.block_index.reset();
    }
    return out;
}

bool verify_prefix(HashKind kind, const Digest& root, const PartialTree& pt,
                   const std::vector<Transaction>& expected_txs) {
    PartialTreeView view = analyze_partial_tree(kind, pt);
    if (!view.well_formed || !(view.root == root) || !view.leaves_form_left_frontier)
        return false;
    if (view.leaves.size() != expected_txs.size()) return false;
    for (size_t i = 0; i < view.leaves.size(); ++i) {
        if (i > 0 && view.leaves[i].position <= view.leaves[i - 1].position) return false;
        if (!(tx_digest(kind, view.leaves[i].tx) == tx_digest(kind, expected_txs[i])))
            return false;
    }
    return true;
}

} // namespace fairledger
