#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fairledger/audit.hpp"
#include "fairledger/node.hpp"

namespace fairledger {

// Scripted misbehavior. `node` is the misbehaving replica; `target` the peer
// on the affected channel (where one applies); `client` the affected client
// for censorship behaviors; `at` the tick the behavior fires.
struct Fault {
    std::string behavior;
    size_t node = 0;
    size_t target = 0;
    size_t client = 0;
    uint64_t at = 0;
};

struct Scenario {
    uint64_t seed = 1;
    size_t nodes = 4;
    size_t clients = 6;
    HashKind kind = HashKind::Ripemd160;
    uint64_t grace_period = 2;
    uint64_t confirm_batch = 16;
    SelectionPolicy policy = SelectionPolicy::fixed_count(128);
    uint64_t ticks = 40;
    uint64_t consensus_interval = 4;
    uint64_t submit_period = 2;
    uint64_t submit_stop = 0; // stop submitting at this tick; 0 = never stop
    uint64_t genesis_balance = 1'000'000;
    std::vector<Fault> faults;
};

Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& s);

// What an auditor should observe for each scripted behavior. nullopt means
// the behavior is policy-compliant and produces no violation report (overt,
// marked censorship).
struct ExpectedDetection {
    ReportKind kind = ReportKind::Claim;
    std::string rule;
};
std::optional<ExpectedDetection> expected_detection(const std::string& behavior);
std::vector<std::string> behavior_catalog();

struct ReportRecord {
    uint64_t tick = 0;
    ViolationReport report;
    bool proof_verified = false; // self-certifying check outcome (Proofs only)
};

struct SimResult {
    std::vector<std::string> trace; // deterministic json-lines event log
    std::vector<ReportRecord> records;
    std::vector<Block> blocks;
    std::vector<Digest> receipted; // identity digests of every stamped tx
    uint64_t messages_delivered = 0;
    uint64_t txs_submitted = 0;
    uint64_t censor_marks_committed = 0;
    AuditLedger audit;
};

SimResult run_scenario(const Scenario& s);

// True iff every scripted fault produced its expected detection (matching
// kind, rule, and accused; Proofs must also verify) and no report accuses a
// node that was never scripted to misbehave.
bool detections_match(const Scenario& s, const SimResult& r);

} // namespace fairledger
