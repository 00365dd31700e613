#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fairledger/codec.hpp"
#include "fairledger/crypto.hpp"
#include "fairledger/digest.hpp"

namespace fairledger {

struct ChannelConfig {
    Bytes conn_id;
    uint64_t grace_period = 2;
    PublicId sender_id{};
    PublicId receiver_id{};
};

struct OwacMessage {
    Bytes conn_id;
    int64_t index = 0;
    Bytes value;
    int64_t sender_last_conf = -1;
    Signature sig{};
};

struct Confirmation {
    Bytes conn_id;
    int64_t confirmed_index = 0;
    Digest conf_hash;
    Bytes data_summary;
    Signature sig{};
};

// Wire framing: 1-byte tag then the canonical field encoding.
inline constexpr uint8_t kFrameMessage = 0x01;
inline constexpr uint8_t kFrameConfirmation = 0x02;

Bytes owac_message_body(const OwacMessage& m);
Bytes encode_owac_message(const OwacMessage& m);
OwacMessage decode_owac_message(ByteView data);

Bytes confirmation_body(const Confirmation& c);
Bytes encode_confirmation(const Confirmation& c);
Confirmation decode_confirmation(ByteView data);

bool verify_message_sig(const PublicId& sender, const OwacMessage& m);
bool verify_confirmation_sig(const PublicId& receiver, const Confirmation& c);

namespace rules {
inline constexpr const char* kInvalidSignature = "invalid signature";
inline constexpr const char* kInvalidConnId = "invalid connection ID";
inline constexpr const char* kConfOutOfSequence = "confirmation out of sequence";
inline constexpr const char* kConfirmUnsent = "cannot confirm unsent values";
inline constexpr const char* kIncorrectConfHash = "incorrect hash confirmation";
inline constexpr const char* kAckOutOfSequence = "acknowledgement out of sequence";
inline constexpr const char* kInvalidAck = "invalid acknowledgement";
inline constexpr const char* kSkippedMessage = "skipped message";
inline constexpr const char* kDuplicateMessage = "duplicate message";
inline constexpr const char* kConflictingMessages = "conflicting messages";
inline constexpr const char* kTooFarAhead = "too far ahead";
inline constexpr const char* kRulesViolated = "rules violated";
// Queue-audit rules (summary comparison), not part of Fig-1 channel checks.
inline constexpr const char* kLostTx = "LostTx";
inline constexpr const char* kReorderedTx = "ReorderedTx";
inline constexpr const char* kBadPrefix = "BadPrefix";
inline constexpr const char* kBadOrdering = "BadOrdering";
} // namespace rules

enum class ReportKind : uint8_t { Claim = 0, Proof = 1 };

struct ViolationReport {
    ReportKind kind = ReportKind::Claim;
    std::string rule;
    PublicId reporter{};
    PublicId accused{};
    std::vector<Bytes> evidence;
    // Channel context for channel-rule proofs; public configuration.
    std::optional<ChannelConfig> channel;
};

Bytes encode_report(const ViolationReport& r);
ViolationReport decode_report(ByteView data);

// Deterministic rules hook over the channel's message history, evaluated at
// one index.
using RulesFn = std::function<bool(const std::map<int64_t, OwacMessage>&, int64_t)>;

// Self-certifying check of a Proof report: only the evidence, the public ids
// and channel parameters are consulted. Claims always return false. The
// rules hook is needed only for "rules violated" proofs and must be the
// genesis-fixed rules function.
bool verify_proof(const ViolationReport& report, const RulesFn& rules_hook = {});

// Sender half of the one-way accountable channel. Single logical owner;
// distinct channels are independent.
class OwacSender {
public:
    OwacSender(ChannelConfig cfg, KeyPair key, HashKind kind)
        : cfg_(std::move(cfg)), key_(std::move(key)), kind_(kind) {
        hash_cache_.emplace(-1, Digest::zero(digest_len(kind_)));
    }

    // Refuses (nullopt) while confirmations lag more than grace_period
    // messages behind, and permanently once frozen.
    std::optional<OwacMessage> send(const Bytes& value);

    // nullopt means the confirmation was accepted.
    std::optional<ViolationReport> on_confirmation(const Confirmation& c);

    int64_t last_sent() const { return last_sent_; }
    int64_t last_conf() const { return last_conf_; }
    const std::vector<Bytes>& vals_sent() const { return vals_sent_; }
    const std::map<int64_t, Confirmation>& confirmations() const { return confirmations_; }
    const ChannelConfig& config() const { return cfg_; }

    bool frozen() const { return frozen_; }
    void freeze() { frozen_ = true; }

    // Recomputed cumulative hash of vals_sent[0..k], for audits and tests.
    Digest fold_hash(int64_t k) const;

    // Fault-injection: sign an arbitrary message with this channel's key.
    OwacMessage craft(int64_t index, const Bytes& value, int64_t last_conf_field,
                      const Bytes& conn_id_override = {}) const;
    void force_advance(int64_t new_last_sent) { last_sent_ = new_last_sent; }

private:
    ChannelConfig cfg_;
    KeyPair key_;
    HashKind kind_;
    std::vector<Bytes> vals_sent_;
    int64_t last_sent_ = -1;
    int64_t last_conf_ = -1;
    std::map<int64_t, Digest> hash_cache_;
    std::map<int64_t, Confirmation> confirmations_;
    bool frozen_ = false;
};

struct ReceiverHooks {
    RulesFn respects_rules;
    std::function<void(const Bytes&)> process;
    std::function<Bytes()> summarize;
    std::function<bool(int64_t last_ackd, int64_t last_conf, int64_t last_rcvd)>
        send_conf_policy;
};

// Default confirmation policy: confirm once batch_size messages are
// unconfirmed. The host event (mock-consensus tick) forces a confirmation
// through maybe_confirm regardless of the batch threshold.
inline constexpr uint64_t kDefaultConfirmBatch = 16;

class OwacReceiver {
public:
    OwacReceiver(ChannelConfig cfg, KeyPair key, HashKind kind)
        : cfg_(std::move(cfg)), key_(std::move(key)), kind_(kind),
          seq_hash_(Digest::zero(digest_len(kind))) {}

    // All-or-nothing: on a violation report no receiver state changes.
    // A Proof freezes the channel; further messages are dropped.
    std::optional<ViolationReport> on_message(const OwacMessage& m, const ReceiverHooks& hooks);

    std::optional<Confirmation> maybe_confirm(const ReceiverHooks& hooks);

    int64_t last_rcvd() const { return last_rcvd_; }
    int64_t last_conf() const { return last_conf_; }
    int64_t last_ackd() const { return last_ackd_; }
    const Digest& seq_hash() const { return seq_hash_; }
    const std::map<int64_t, OwacMessage>& msgs() const { return msgs_; }
    const std::set<int64_t>& pending_confs() const { return pending_confs_; }
    const ChannelConfig& config() const { return cfg_; }

    bool frozen() const { return frozen_; }
    void freeze() { frozen_ = true; }

    // Fault-injection: sign an arbitrary confirmation with this channel's key.
    Confirmation craft_confirmation(int64_t index, const Digest& conf_hash,
                                    const Bytes& summary) const;

private:
    ViolationReport claim(const char* rule, std::vector<Bytes> evidence) const;
    ViolationReport proof(const char* rule, std::vector<Bytes> evidence);

    ChannelConfig cfg_;
    KeyPair key_;
    HashKind kind_;
    std::map<int64_t, OwacMessage> msgs_;
    int64_t last_rcvd_ = -1;
    int64_t last_conf_ = -1;
    int64_t last_ackd_ = -1;
    Digest seq_hash_;
    std::set<int64_t> pending_confs_;
    bool frozen_ = false;
};

} // namespace fairledger
