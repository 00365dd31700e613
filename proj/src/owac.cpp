#include "fairledger/owac.hpp"

namespace fairledger {

Bytes owac_message_body(const OwacMessage& m) {
    Encoder e;
    e.bytes(m.conn_id).i64(m.index).bytes(m.value).i64(m.sender_last_conf);
    return e.move();
}

Bytes encode_owac_message(const OwacMessage& m) {
    Encoder e;
    e.u8(kFrameMessage).raw(owac_message_body(m)).signature(m.sig);
    return e.move();
}

OwacMessage decode_owac_message(ByteView data) {
    Decoder d(data);
    if (d.u8() != kFrameMessage) throw CodecError("bad message frame tag");
    OwacMessage m;
    m.conn_id = d.bytes();
    m.index = d.i64();
    m.value = d.bytes();
    m.sender_last_conf = d.i64();
    m.sig = d.signature();
    d.expect_done();
    return m;
}

Bytes confirmation_body(const Confirmation& c) {
    Encoder e;
    e.bytes(c.conn_id).i64(c.confirmed_index).digest(c.conf_hash).bytes(c.data_summary);
    return e.move();
}

Bytes encode_confirmation(const Confirmation& c) {
    Encoder e;
    e.u8(kFrameConfirmation).raw(confirmation_body(c)).signature(c.sig);
    return e.move();
}

Confirmation decode_confirmation(ByteView data) {
    Decoder d(data);
    if (d.u8() != kFrameConfirmation) throw CodecError("bad confirmation frame tag");
    Confirmation c;
    c.conn_id = d.bytes();
    c.confirmed_index = d.i64();
    c.conf_hash = d.digest();
    c.data_summary = d.bytes();
    c.sig = d.signature();
    d.expect_done();
    return c;
}

bool verify_message_sig(const PublicId& sender, const OwacMessage& m) {
    return verify(sender, owac_message_body(m), m.sig);
}

bool verify_confirmation_sig(const PublicId& receiver, const Confirmation& c) {
    return verify(receiver, confirmation_body(c), c.sig);
}

Bytes encode_report(const ViolationReport& r) {
    Encoder e;
    e.u8(static_cast<uint8_t>(r.kind));
    e.bytes(to_bytes(r.rule));
    e.id(r.reporter).id(r.accused);
    e.count(r.evidence.size());
    for (const auto& ev : r.evidence) e.bytes(ev);
    e.u8(r.channel ? 1 : 0);
    if (r.channel) {
        e.bytes(r.channel->conn_id).u64(r.channel->grace_period);
        e.id(r.channel->sender_id).id(r.channel->receiver_id);
    }
    return e.move();
}

ViolationReport decode_report(ByteView data) {
    Decoder d(data);
    ViolationReport r;
    uint8_t kind = d.u8();
    if (kind > 1) throw CodecError("bad report kind");
    r.kind = static_cast<ReportKind>(kind);
    Bytes rule = d.bytes();
    r.rule = std::string(rule.begin(), rule.end());
    r.reporter = d.id();
    r.accused = d.id();
    size_t n = d.count();
    if (n > 1u << 16) throw CodecError("oversized report");
    r.evidence.resize(n);
    for (auto& ev : r.evidence) ev = d.bytes();
    if (d.u8()) {
        ChannelConfig cfg;
        cfg.conn_id = d.bytes();
        cfg.grace_period = d.u64();
        cfg.sender_id = d.id();
        cfg.receiver_id = d.id();
        r.channel = cfg;
    }
    d.expect_done();
    return r;
}

// --- Sender ---------------------------------------------------------------

std::optional<OwacMessage> OwacSender::send(const Bytes& value) {
    if (frozen_) return std::nullopt;
    if (last_sent_ > last_conf_ + static_cast<int64_t>(cfg_.grace_period))
        return std::nullopt; // confirmations too far behind
    ++last_sent_;
    vals_sent_.push_back(value);
    OwacMessage m;
    m.conn_id = cfg_.conn_id;
    m.index = last_sent_;
    m.value = value;
    m.sender_last_conf = last_conf_;
    m.sig = sign(key_, owac_message_body(m));
    return m;
}

Digest OwacSender::fold_hash(int64_t k) const {
    Digest h = Digest::zero(digest_len(kind_));
    for (int64_t j = 0; j <= k; ++j) h = chain_hash(kind_, h, vals_sent_[j]);
    return h;
}

std::optional<ViolationReport> OwacSender::on_confirmation(const Confirmation& c) {
    auto claim = [&](const char* rule) {
        ViolationReport r;
        r.kind = ReportKind::Claim;
        r.rule = rule;
        r.reporter = cfg_.sender_id;
        r.accused = cfg_.receiver_id;
        r.evidence.push_back(encode_confirmation(c));
        r.channel = cfg_;
        return r;
    };

    if (frozen_) return std::nullopt;
    if (!verify_confirmation_sig(cfg_.receiver_id, c))
        return claim(rules::kInvalidSignature);
    if (c.conn_id != cfg_.conn_id) return claim(rules::kInvalidConnId);
    int64_t k = c.confirmed_index;
    if (k <= last_conf_) return claim(rules::kConfOutOfSequence);
    if (k > last_sent_) return claim(rules::kConfirmUnsent);

    Digest h = hash_cache_.at(last_conf_);
    for (int64_t j = last_conf_ + 1; j <= k; ++j)
        h = chain_hash(kind_, h, vals_sent_[j]);
    if (!(h == c.conf_hash)) return claim(rules::kIncorrectConfHash);

    hash_cache_[k] = h;
    last_conf_ = k;
    confirmations_[k] = c;
    return std::nullopt;
}

OwacMessage OwacSender::craft(int64_t index, const Bytes& value, int64_t last_conf_field,
                              const Bytes& conn_id_override) const {
    OwacMessage m;
    m.conn_id = conn_id_override.empty() ? cfg_.conn_id : conn_id_override;
    m.index = index;
    m.value = value;
    m.sender_last_conf = last_conf_field;
    m.sig = sign(key_, owac_message_body(m));
    return m;
}

// --- Receiver -------------------------------------------------------------

ViolationReport OwacReceiver::claim(const char* rule, std::vector<Bytes> evidence) const {
    ViolationReport r;
    r.kind = ReportKind::Claim;
    r.rule = rule;
    r.reporter = cfg_.receiver_id;
    r.accused = cfg_.sender_id;
    r.evidence = std::move(evidence);
    r.channel = cfg_;
    return r;
}

ViolationReport OwacReceiver::proof(const char* rule, std::vector<Bytes> evidence) {
    ViolationReport r;
    r.kind = ReportKind::Proof;
    r.rule = rule;
    r.reporter = cfg_.receiver_id;
    r.accused = cfg_.sender_id;
    r.evidence = std::move(evidence);
    r.channel = cfg_;
    frozen_ = true; // channel fate after a proved violation
    return r;
}

std::optional<ViolationReport> OwacReceiver::on_message(const OwacMessage& m,
                                                        const ReceiverHooks& hooks) {
    if (frozen_) return std::nullopt;

    if (!verify_message_sig(cfg_.sender_id, m))
        return claim(rules::kInvalidSignature, {encode_owac_message(m)});
    if (m.conn_id != cfg_.conn_id)
        return claim(rules::kInvalidConnId, {encode_owac_message(m)});

    // Acknowledgement sequencing. An ack may cover several of our pending
    // confirmations at once when they arrived between two sends, so any
    // pending index is acceptable; smaller ones are implicitly acknowledged.
    int64_t k = m.sender_last_conf;
    int64_t new_last_ackd = last_ackd_;
    if (k < last_ackd_)
        return claim(rules::kAckOutOfSequence, {encode_owac_message(m)});
    if (k > last_ackd_) {
        if (!pending_confs_.count(k))
            return claim(rules::kInvalidAck, {encode_owac_message(m)});
        new_last_ackd = k;
    }

    int64_t i = m.index;
    if (i > last_rcvd_ + 1)
        return claim(rules::kSkippedMessage, {encode_owac_message(m)});
    if (i < last_rcvd_ + 1) {
        auto it = msgs_.find(i);
        if (it != msgs_.end() && encode_owac_message(it->second) == encode_owac_message(m))
            return claim(rules::kDuplicateMessage, {encode_owac_message(m)});
        if (it != msgs_.end())
            return proof(rules::kConflictingMessages,
                         {encode_owac_message(m), encode_owac_message(it->second)});
        // Index below a gap we never accepted; treat as skip evidence.
        return claim(rules::kSkippedMessage, {encode_owac_message(m)});
    }

    // Flow control: an honest sender never has more than grace_period + 1
    // messages outstanding, so only a gap beyond that is provable.
    if (i > new_last_ackd + static_cast<int64_t>(cfg_.grace_period) + 1)
        return proof(rules::kTooFarAhead, {encode_owac_message(m)});

    {
        auto msgs_with_m = msgs_;
        msgs_with_m.emplace(i, m);
        if (hooks.respects_rules && !hooks.respects_rules(msgs_with_m, i)) {
            std::vector<Bytes> log;
            for (const auto& [idx, stored] : msgs_with_m)
                log.push_back(encode_owac_message(stored));
            return proof(rules::kRulesViolated, std::move(log));
        }
    }

    // Commit.
    if (k > last_ackd_) {
        pending_confs_.erase(pending_confs_.begin(), pending_confs_.upper_bound(k));
        last_ackd_ = k;
    }
    last_rcvd_ = i;
    msgs_.emplace(i, m);
    seq_hash_ = chain_hash(kind_, seq_hash_, m.value);
    if (hooks.process) hooks.process(m.value);
    return std::nullopt;
}

std::optional<Confirmation> OwacReceiver::maybe_confirm(const ReceiverHooks& hooks) {
    if (frozen_) return std::nullopt;
    if (last_rcvd_ == last_conf_) return std::nullopt; // nothing new
    if (hooks.send_conf_policy && !hooks.send_conf_policy(last_ackd_, last_conf_, last_rcvd_))
        return std::nullopt;
    Confirmation c;
    c.conn_id = cfg_.conn_id;
    c.confirmed_index = last_rcvd_;
    c.conf_hash = seq_hash_;
    if (hooks.summarize) c.data_summary = hooks.summarize();
    c.sig = sign(key_, confirmation_body(c));
    last_conf_ = last_rcvd_;
    pending_confs_.insert(last_rcvd_);
    return c;
}

Confirmation OwacReceiver::craft_confirmation(int64_t index, const Digest& conf_hash,
                                              const Bytes& summary) const {
    Confirmation c;
    c.conn_id = cfg_.conn_id;
    c.confirmed_index = index;
    c.conf_hash = conf_hash;
    c.data_summary = summary;
    c.sig = sign(key_, confirmation_body(c));
    return c;
}

// --- Proof verification ---------------------------------------------------

bool verify_proof(const ViolationReport& report, const RulesFn& rules_hook) {
    if (report.kind != ReportKind::Proof) return false;
    if (!report.channel) return false;
    const ChannelConfig& cfg = *report.channel;

    try {
        if (report.rule == rules::kConflictingMessages) {
            if (report.evidence.size() != 2) return false;
            OwacMessage a = decode_owac_message(report.evidence[0]);
            OwacMessage b = decode_owac_message(report.evidence[1]);
            if (!verify_message_sig(cfg.sender_id, a)) return false;
            if (!verify_message_sig(cfg.sender_id, b)) return false;
            if (a.conn_id != cfg.conn_id || b.conn_id != cfg.conn_id) return false;
            if (a.index != b.index) return false;
            return report.evidence[0] != report.evidence[1];
        }

        if (report.rule == rules::kTooFarAhead) {
            if (report.evidence.size() != 1) return false;
            OwacMessage m = decode_owac_message(report.evidence[0]);
            if (!verify_message_sig(cfg.sender_id, m)) return false;
            if (m.conn_id != cfg.conn_id) return false;
            // The message itself shows the sender exceeded its send bound.
            return m.index >
                   m.sender_last_conf + static_cast<int64_t>(cfg.grace_period) + 1;
        }

        if (report.rule == rules::kRulesViolated) {
            if (!rules_hook) return false;
            if (report.evidence.empty()) return false;
            std::map<int64_t, OwacMessage> msgs;
            int64_t expect = 0;
            for (const auto& blob : report.evidence) {
                OwacMessage m = decode_owac_message(blob);
                if (!verify_message_sig(cfg.sender_id, m)) return false;
                if (m.conn_id != cfg.conn_id) return false;
                if (m.index != expect) return false;
                msgs.emplace(m.index, m);
                ++expect;
            }
            int64_t last = expect - 1;
            for (int64_t j = 0; j < last; ++j)
                if (!rules_hook(msgs, j)) return false; // violation must be at the end
            return !rules_hook(msgs, last);
        }
    } catch (const CodecError&) {
        return false;
    }
    return false;
}

} // namespace fairledger
