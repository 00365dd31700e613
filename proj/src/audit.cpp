#include "fairledger/audit.hpp"

#include <algorithm>
#include <string>

namespace fairledger {

namespace {

// Evidence layouts (all items are canonical encodings):
//   LostTx      [summary1, dump1, summary2, dump2, lost_tx, block...]
//   ReorderedTx [summary1, dump1, summary2, dump2, tx_a, tx_b]
//   BadPrefix   [block]
//   BadOrdering [prev_block, pre_state_dump, block]

std::optional<uint64_t> leaf_position(const PartialTreeView& view, const Digest& txd,
                                      HashKind kind) {
    for (const auto& leaf : view.leaves)
        if (tx_digest(kind, leaf.tx) == txd) return leaf.position;
    return std::nullopt;
}

// Both snapshots must be signed by the accused and backed by fully
// disclosed dumps matching their roots; the block list must hash-chain the
// earlier tip to the later tip.
struct SnapshotPairView {
    QueueSummary s1, s2;
    PartialTreeView v1, v2;
    bool ok = false;
};

SnapshotPairView open_snapshot_pair(const PublicId& accused, ByteView e_s1, ByteView e_d1,
                                    ByteView e_s2, ByteView e_d2, HashKind kind) {
    SnapshotPairView out;
    try {
        out.s1 = decode_summary(e_s1);
        out.s2 = decode_summary(e_s2);
        out.v1 = analyze_partial_tree(kind, decode_partial_tree(e_d1));
        out.v2 = analyze_partial_tree(kind, decode_partial_tree(e_d2));
    } catch (const CodecError&) {
        return out;
    }
    if (out.s1.node_id != accused || out.s2.node_id != accused) return out;
    if (!verify_summary(out.s1) || !verify_summary(out.s2)) return out;
    if (out.s2.summary_seq <= out.s1.summary_seq) return out;
    if (!out.v1.well_formed || !out.v1.fully_disclosed || !(out.v1.root == out.s1.root))
        return out;
    if (!out.v2.well_formed || !out.v2.fully_disclosed || !(out.v2.root == out.s2.root))
        return out;
    out.ok = true;
    return out;
}

bool chain_links(const std::vector<Block>& blocks, const QueueSummary& s1,
                 const QueueSummary& s2, HashKind kind) {
    if (blocks.size() != s2.block_height - s1.block_height) return false;
    Digest tip = s1.block_hash;
    uint64_t h = s1.block_height;
    for (const auto& b : blocks) {
        if (!verify_block_signature(b)) return false;
        if (!(b.prev_hash == tip) || b.height != h + 1) return false;
        tip = block_hash(kind, b);
        h = b.height;
    }
    return tip == s2.block_hash;
}

} // namespace

std::vector<ViolationReport> compare_summaries(const PublicId& reporter,
                                               const SummarySnapshot& earlier,
                                               const SummarySnapshot& later,
                                               const std::vector<Block>& interval_blocks,
                                               HashKind kind) {
    std::vector<ViolationReport> out;
    PartialTreeView v1 = analyze_partial_tree(kind, earlier.dump);
    PartialTreeView v2 = analyze_partial_tree(kind, later.dump);
    if (!v1.well_formed || !v1.fully_disclosed || !v2.well_formed || !v2.fully_disclosed)
        return out;

    std::map<Digest, uint64_t> pos2;
    for (const auto& leaf : v2.leaves) pos2[tx_digest(kind, leaf.tx)] = leaf.position;
    std::map<Digest, bool> committed;
    for (const auto& b : interval_blocks)
        for (const auto& entry : b.txs) committed[tx_digest(kind, entry.tx)] = true;

    Bytes base_evidence[4] = {encode_summary(earlier.summary), encode_partial_tree(earlier.dump),
                              encode_summary(later.summary), encode_partial_tree(later.dump)};
    auto base_report = [&](const char* rule) {
        ViolationReport r;
        r.kind = ReportKind::Proof;
        r.rule = rule;
        r.reporter = reporter;
        r.accused = earlier.summary.node_id;
        r.evidence.assign(base_evidence, base_evidence + 4);
        return r;
    };

    for (const auto& leaf : v1.leaves) {
        Digest txd = tx_digest(kind, leaf.tx);
        if (pos2.count(txd) || committed.count(txd)) continue;
        ViolationReport r = base_report(rules::kLostTx);
        r.evidence.push_back(encode_tx(leaf.tx));
        for (const auto& b : interval_blocks) r.evidence.push_back(encode_block(b));
        out.push_back(std::move(r));
    }

    // A pair surviving both snapshots must keep its relative order.
    for (size_t i = 0; i < v1.leaves.size(); ++i) {
        auto ai = pos2.find(tx_digest(kind, v1.leaves[i].tx));
        if (ai == pos2.end()) continue;
        for (size_t j = i + 1; j < v1.leaves.size(); ++j) {
            auto bj = pos2.find(tx_digest(kind, v1.leaves[j].tx));
            if (bj == pos2.end()) continue;
            if (ai->second > bj->second) {
                ViolationReport r = base_report(rules::kReorderedTx);
                r.evidence.push_back(encode_tx(v1.leaves[i].tx));
                r.evidence.push_back(encode_tx(v1.leaves[j].tx));
                out.push_back(std::move(r));
            }
        }
    }
    return out;
}

ViolationReport make_bad_prefix_report(const PublicId& reporter, const Block& block) {
    ViolationReport r;
    r.kind = ReportKind::Proof;
    r.rule = rules::kBadPrefix;
    r.reporter = reporter;
    r.accused = block.proposer_id;
    r.evidence.push_back(encode_block(block));
    return r;
}

ViolationReport make_bad_ordering_report(const PublicId& reporter, const Block& prev_block,
                                         const AccountMap& pre_state, const Block& block) {
    ViolationReport r;
    r.kind = ReportKind::Proof;
    r.rule = rules::kBadOrdering;
    r.reporter = reporter;
    r.accused = block.proposer_id;
    r.evidence.push_back(encode_block(prev_block));
    r.evidence.push_back(encode_state(pre_state));
    r.evidence.push_back(encode_block(block));
    return r;
}

bool verify_queue_proof(const ViolationReport& r, HashKind kind) {
    if (r.kind != ReportKind::Proof) return false;
    if (r.rule == rules::kLostTx) {
        if (r.evidence.size() < 5) return false;
        SnapshotPairView sv = open_snapshot_pair(r.accused, r.evidence[0], r.evidence[1],
                                                 r.evidence[2], r.evidence[3], kind);
        if (!sv.ok) return false;
        Transaction lost;
        std::vector<Block> blocks;
        try {
            lost = decode_tx(r.evidence[4]);
            for (size_t i = 5; i < r.evidence.size(); ++i)
                blocks.push_back(decode_block(r.evidence[i]));
        } catch (const CodecError&) {
            return false;
        }
        if (!chain_links(blocks, sv.s1, sv.s2, kind)) return false;
        Digest txd = tx_digest(kind, lost);
        if (!leaf_position(sv.v1, txd, kind)) return false;
        if (leaf_position(sv.v2, txd, kind)) return false;
        for (const auto& b : blocks)
            for (const auto& entry : b.txs)
                if (tx_digest(kind, entry.tx) == txd) return false;
        return true;
    }
    if (r.rule == rules::kReorderedTx) {
        if (r.evidence.size() != 6) return false;
        SnapshotPairView sv = open_snapshot_pair(r.accused, r.evidence[0], r.evidence[1],
                                                 r.evidence[2], r.evidence[3], kind);
        if (!sv.ok) return false;
        Transaction a, b;
        try {
            a = decode_tx(r.evidence[4]);
            b = decode_tx(r.evidence[5]);
        } catch (const CodecError&) {
            return false;
        }
        auto a1 = leaf_position(sv.v1, tx_digest(kind, a), kind);
        auto b1 = leaf_position(sv.v1, tx_digest(kind, b), kind);
        auto a2 = leaf_position(sv.v2, tx_digest(kind, a), kind);
        auto b2 = leaf_position(sv.v2, tx_digest(kind, b), kind);
        if (!a1 || !b1 || !a2 || !b2) return false;
        return (*a1 < *b1) != (*a2 < *b2);
    }
    return false;
}

bool verify_block_proof(const ViolationReport& r, HashKind kind,
                        const SelectionPolicy& policy) {
    if (r.kind != ReportKind::Proof) return false;
    if (r.rule == rules::kBadPrefix) {
        if (r.evidence.size() != 1) return false;
        Block b;
        try {
            b = decode_block(r.evidence[0]);
        } catch (const CodecError&) {
            return false;
        }
        if (b.proposer_id != r.accused || !verify_block_signature(b)) return false;
        PartialTreeView view;
        try {
            OrderedProposal p = proposal_from_block(b);
            view = analyze_partial_tree(kind, p.disclosure);
        } catch (const CodecError&) {
            return true; // signed block with an undecodable disclosure
        }
        if (!view.well_formed || !(view.root == b.outqueue_root)) return true;
        if (!view.leaves_form_left_frontier) return true;
        for (size_t i = 1; i < view.leaves.size(); ++i)
            if (view.leaves[i].position <= view.leaves[i - 1].position) return true;
        return false;
    }
    if (r.rule == rules::kBadOrdering) {
        if (r.evidence.size() != 3) return false;
        Block prev, b;
        AccountMap pre_state;
        try {
            prev = decode_block(r.evidence[0]);
            pre_state = decode_state(r.evidence[1]);
            b = decode_block(r.evidence[2]);
        } catch (const CodecError&) {
            return false;
        }
        if (b.proposer_id != r.accused || !verify_block_signature(b)) return false;
        if (!verify_block_signature(prev)) return false;
        if (!(b.prev_hash == block_hash(kind, prev))) return false;
        if (!(state_root(kind, pre_state) == prev.state_root)) return false;
        ProposalError e = verify_proposal_block(b, block_hash(kind, prev), policy,
                                                pre_state, kind);
        return e != ProposalError::None;
    }
    return false;
}

bool verify_any_proof(const ViolationReport& r, HashKind kind, const RulesFn& rules_hook,
                      const SelectionPolicy& policy) {
    if (r.kind != ReportKind::Proof) return false;
    if (r.rule == rules::kLostTx || r.rule == rules::kReorderedTx)
        return verify_queue_proof(r, kind);
    if (r.rule == rules::kBadPrefix || r.rule == rules::kBadOrdering)
        return verify_block_proof(r, kind, policy);
    return verify_proof(r, rules_hook);
}

void AuditLedger::record(const ViolationReport& r, uint64_t msg_index) {
    reports_.push_back(r);
    if (r.kind == ReportKind::Claim)
        claim_stamps_[r.accused].push_back(msg_index);
    else
        ++proof_counts_[r.accused];
}

uint64_t AuditLedger::claim_count(const PublicId& accused, uint64_t current) const {
    auto it = claim_stamps_.find(accused);
    if (it == claim_stamps_.end()) return 0;
    uint64_t lo = current >= window_ ? current - window_ + 1 : 0;
    return static_cast<uint64_t>(std::count_if(it->second.begin(), it->second.end(),
                                               [&](uint64_t s) { return s >= lo; }));
}

bool AuditLedger::flagged(const PublicId& accused, uint64_t current) const {
    return static_cast<double>(claim_count(accused, current)) >
           threshold_ * static_cast<double>(window_);
}

bool AuditLedger::proven(const PublicId& accused) const {
    return proof_counts_.count(accused) != 0;
}

} // namespace fairledger
