#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "fairledger/node.hpp"
#include "fairledger/outqueue.hpp"
#include "fairledger/owac.hpp"
#include "fairledger/proposal.hpp"

namespace fairledger {

// A node's signed queue summary together with the full queue dump backing
// it. The dump is a completely disclosed partial tree, so the summary's root
// can be recombined from it by anyone.
struct SummarySnapshot {
    QueueSummary summary;
    PartialTree dump;
};

// Cross-checks two snapshots of one node's queue against the blocks
// committed between them. Every disappearance must be explained by a
// committed block, and relative order of surviving entries must be
// preserved. Violations yield self-certifying proofs.
std::vector<ViolationReport> compare_summaries(const PublicId& reporter,
                                               const SummarySnapshot& earlier,
                                               const SummarySnapshot& later,
                                               const std::vector<Block>& interval_blocks,
                                               HashKind kind);

// Proof builders for misbehaving proposals. The previous block plus a state
// dump matching its state commitment pin the pre-state, so the proof needs
// no trusted context.
ViolationReport make_bad_prefix_report(const PublicId& reporter, const Block& block);
ViolationReport make_bad_ordering_report(const PublicId& reporter, const Block& prev_block,
                                         const AccountMap& pre_state, const Block& block);

// Proof checkers. Queue proofs are LostTx/ReorderedTx; block proofs are
// BadPrefix/BadOrdering. The selection policy is genesis-fixed public
// configuration, supplied by the verifier rather than carried as evidence.
// verify_any_proof dispatches across every proof rule, including the channel
// rules handled by verify_proof.
bool verify_queue_proof(const ViolationReport& r, HashKind kind);
bool verify_block_proof(const ViolationReport& r, HashKind kind,
                        const SelectionPolicy& policy = {});
bool verify_any_proof(const ViolationReport& r, HashKind kind, const RulesFn& rules = {},
                      const SelectionPolicy& policy = {});

// Rolling tally of unprovable claims. A node is flagged once claims against
// it exceed the threshold fraction of recent traffic.
class AuditLedger {
public:
    AuditLedger(uint64_t window = 1000, double threshold = 0.01)
        : window_(window), threshold_(threshold) {}

    // msg_index is the global count of channel messages observed so far.
    void record(const ViolationReport& r, uint64_t msg_index);

    bool flagged(const PublicId& accused, uint64_t current_msg_index) const;
    uint64_t claim_count(const PublicId& accused, uint64_t current_msg_index) const;
    bool proven(const PublicId& accused) const;

    const std::vector<ViolationReport>& reports() const { return reports_; }

private:
    uint64_t window_;
    double threshold_;
    std::vector<ViolationReport> reports_;
    std::map<PublicId, std::deque<uint64_t>> claim_stamps_;
    std::map<PublicId, uint64_t> proof_counts_;
};

} // namespace fairledger
