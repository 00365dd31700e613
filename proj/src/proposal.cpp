#include "fairledger/proposal.hpp"

#include <cassert>

namespace fairledger {

std::optional<SelectionPolicy> parse_policy(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) return std::nullopt;
    std::string mode = text.substr(0, colon);
    uint64_t value = 0;
    try {
        value = std::stoull(text.substr(colon + 1));
    } catch (...) {
        return std::nullopt;
    }
    if (mode == "fixed") return SelectionPolicy::fixed_count(value);
    if (mode == "bytes") return SelectionPolicy::max_bytes(value);
    return std::nullopt;
}

std::string format_policy(const SelectionPolicy& p) {
    return (p.mode == SelectionPolicy::Mode::FixedCount ? "fixed:" : "bytes:") +
           std::to_string(p.value);
}

OrderingSeed derive_seed(const Digest& prev_block_hash, const Signature& first_acceptor_sig) {
    size_t n = std::min<size_t>(prev_block_hash.len, first_acceptor_sig.size());
    uint64_t folded = 0;
    for (size_t w = 0; w < n; w += 8) {
        uint64_t word = 0;
        for (size_t i = 0; i < 8; ++i) {
            uint8_t byte = (w + i < n)
                               ? static_cast<uint8_t>(prev_block_hash.data[w + i] ^
                                                      first_acceptor_sig[w + i])
                               : 0;
            word = word << 8 | byte;
        }
        folded ^= word;
    }
    if (folded == 0) folded = kZeroSeedSubstitute;
    return {folded};
}

uint64_t xorshift64(uint64_t state) {
    assert(state != 0);
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
}

OrderingResult order_with_deferral(const std::vector<Transaction>& permuted,
                                   const AccountMap& state) {
    OrderingResult result;
    result.end_state = state;

    std::vector<Transaction> remaining = permuted;
    bool progressed = true;
    while (progressed && !remaining.empty()) {
        progressed = false;
        std::vector<Transaction> deferred;
        for (const auto& tx : remaining) {
            if (tx.censorship) {
                result.rejected.emplace_back(tx, Reason::Censored);
                progressed = true;
                continue;
            }
            Validity v = validate_against_state(tx, result.end_state);
            if (v.valid()) {
                result.end_state = fairledger::apply(tx, result.end_state);
                result.processed.push_back(tx);
                progressed = true;
            } else if (v.reason == Reason::BadNonce ||
                       v.reason == Reason::InsufficientBalance) {
                deferred.push_back(tx);
            } else {
                result.rejected.emplace_back(tx, v.reason);
                progressed = true;
            }
        }
        remaining = std::move(deferred);
    }
    // Unorderable remainder: explicitly rejected, with the reason each
    // transaction shows against the final state.
    for (const auto& tx : remaining) {
        Validity v = validate_against_state(tx, result.end_state);
        result.rejected.emplace_back(tx, v.valid() ? Reason::BadNonce : v.reason);
    }
    return result;
}

std::vector<QueueEntry> select_prefix(const MerkleQueue& q, const SelectionPolicy& policy) {
    const auto& entries = q.entries();
    std::vector<QueueEntry> selected;
    if (policy.mode == SelectionPolicy::Mode::FixedCount) {
        size_t k = std::min<size_t>(policy.value, entries.size());
        selected.assign(entries.begin(), entries.begin() + k);
    } else {
        uint64_t total = 0;
        for (const auto& entry : entries) {
            uint64_t sz = encode_tx(entry.tx).size();
            if (total + sz > policy.value) break;
            total += sz;
            selected.push_back(entry);
        }
    }
    return selected;
}

namespace {

// Number of leaves the disclosure must cover so a verifier can confirm the
// selection boundary: one past the prefix when the queue has more entries.
size_t disclosure_width(size_t selected, size_t queue_size) {
    return std::min(selected + 1, queue_size);
}

OrderedProposal build_from_selection(const std::vector<QueueEntry>& selected,
                                     const PartialTree& disclosure, const Digest& root,
                                     const Digest& prev_block_hash, const AccountMap& state) {
    OrderedProposal p;
    p.disclosure = disclosure;
    p.outqueue_root = root;
    if (selected.empty()) return p;

    std::vector<Transaction> txs;
    txs.reserve(selected.size());
    for (const auto& entry : selected) txs.push_back(entry.tx);

    assert(selected[0].tx.receipt);
    OrderingSeed seed = derive_seed(prev_block_hash, selected[0].tx.receipt->sig);
    permute(txs, seed);
    OrderingResult ordering = order_with_deferral(txs, state);
    p.processed = std::move(ordering.processed);
    p.rejected = std::move(ordering.rejected);
    return p;
}

} // namespace

OrderedProposal build_proposal(const MerkleQueue& q, const SelectionPolicy& policy,
                               const Digest& prev_block_hash, const AccountMap& state) {
    std::vector<QueueEntry> selected = select_prefix(q, policy);
    PartialTree disclosure = q.disclose_prefix(disclosure_width(selected.size(), q.size()));
    return build_from_selection(selected, disclosure, q.root(), prev_block_hash, state);
}

const char* proposal_error_name(ProposalError e) {
    switch (e) {
        case ProposalError::None: return "Valid";
        case ProposalError::BadPrefix: return "BadPrefix";
        case ProposalError::BadSelectionSize: return "BadSelectionSize";
        case ProposalError::BadOrdering: return "BadOrdering";
        case ProposalError::BadRoot: return "BadRoot";
    }
    return "?";
}

ProposalError verify_proposal(const OrderedProposal& p, const Digest& prev_block_hash,
                              const Digest& claimed_root, const SelectionPolicy& policy,
                              const AccountMap& state, HashKind kind) {
    if (!(p.outqueue_root == claimed_root)) return ProposalError::BadRoot;

    PartialTreeView view = analyze_partial_tree(kind, p.disclosure);
    if (!view.well_formed || !(view.root == claimed_root)) return ProposalError::BadRoot;
    if (!view.leaves_form_left_frontier) return ProposalError::BadPrefix;
    for (size_t i = 1; i < view.leaves.size(); ++i)
        if (view.leaves[i].position <= view.leaves[i - 1].position)
            return ProposalError::BadPrefix;

    // Re-derive the selection length from the disclosed leaves.
    size_t k = 0;
    if (policy.mode == SelectionPolicy::Mode::FixedCount) {
        if (view.leaves.size() >= policy.value) {
            k = static_cast<size_t>(policy.value);
            if (view.leaves.size() != k && !(view.leaves.size() == k + 1))
                return ProposalError::BadSelectionSize;
        } else {
            if (!view.fully_disclosed) return ProposalError::BadSelectionSize;
            k = view.leaves.size();
        }
    } else {
        uint64_t total = 0;
        while (k < view.leaves.size()) {
            uint64_t sz = encode_tx(view.leaves[k].tx).size();
            if (total + sz > policy.value) break;
            total += sz;
            ++k;
        }
        // Maximality is only visible if the first excluded entry is
        // disclosed or the whole queue is.
        if (k == view.leaves.size() && !view.fully_disclosed)
            return ProposalError::BadSelectionSize;
    }

    // Recompute the deterministic ordering and compare exactly.
    std::vector<Transaction> txs;
    for (size_t i = 0; i < k; ++i) txs.push_back(view.leaves[i].tx);

    std::vector<Transaction> expected_processed;
    std::vector<std::pair<Transaction, Reason>> expected_rejected;
    if (!txs.empty()) {
        if (!txs[0].receipt) return ProposalError::BadOrdering;
        OrderingSeed seed = derive_seed(prev_block_hash, txs[0].receipt->sig);
        permute(txs, seed);
        OrderingResult ordering = order_with_deferral(txs, state);
        expected_processed = std::move(ordering.processed);
        expected_rejected = std::move(ordering.rejected);
    }

    auto same_tx = [&](const Transaction& a, const Transaction& b) {
        return encode_tx(a) == encode_tx(b);
    };
    if (p.processed.size() != expected_processed.size() ||
        p.rejected.size() != expected_rejected.size())
        return ProposalError::BadOrdering;
    for (size_t i = 0; i < p.processed.size(); ++i)
        if (!same_tx(p.processed[i], expected_processed[i])) return ProposalError::BadOrdering;
    for (size_t i = 0; i < p.rejected.size(); ++i)
        if (!same_tx(p.rejected[i].first, expected_rejected[i].first) ||
            p.rejected[i].second != expected_rejected[i].second)
            return ProposalError::BadOrdering;
    return ProposalError::None;
}

Block proposal_to_block(const OrderedProposal& p, uint64_t height,
                        const Digest& prev_block_hash, const KeyPair& proposer,
                        const AccountMap& pre_state, HashKind kind) {
    Block b;
    b.height = height;
    b.prev_hash = prev_block_hash;
    b.proposer_id = proposer.public_id;
    AccountMap post = pre_state;
    for (const auto& tx : p.processed) {
        b.txs.push_back({tx, Disposition::Processed, Reason::None});
        post = fairledger::apply(tx, post);
    }
    for (const auto& [tx, reason] : p.rejected)
        b.txs.push_back({tx, Disposition::Rejected, reason});
    b.outqueue_root = p.outqueue_root;
    b.prefix_disclosure = encode_partial_tree(deflate_partial_tree(p.disclosure, b.txs, kind));
    b.state_root = state_root(kind, post);
    b.proposer_sig = sign(proposer, encode_block_unsigned(b));
    return b;
}

OrderedProposal proposal_from_block(const Block& b) {
    OrderedProposal p;
    for (const auto& entry : b.txs) {
        if (entry.disposition == Disposition::Processed)
            p.processed.push_back(entry.tx);
        else
            p.rejected.emplace_back(entry.tx, entry.reason);
    }
    p.disclosure = inflate_partial_tree(decode_partial_tree(b.prefix_disclosure), b.txs);
    p.outqueue_root = b.outqueue_root;
    return p;
}

ProposalError verify_proposal_block(const Block& b, const Digest& prev_block_hash,
                                    const SelectionPolicy& policy, const AccountMap& state,
                                    HashKind kind) {
    if (!(b.prev_hash == prev_block_hash)) return ProposalError::BadRoot;
    OrderedProposal p;
    try {
        p = proposal_from_block(b);
    } catch (const CodecError&) {
        return ProposalError::BadRoot;
    }
    return verify_proposal(p, prev_block_hash, b.outqueue_root, policy, state, kind);
}

} // namespace fairledger
