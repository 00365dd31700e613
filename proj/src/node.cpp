#include "fairledger/node.hpp"

#include <cstring>

namespace fairledger {

Bytes make_conn_id(const PublicId& sender, const PublicId& receiver) {
    Bytes id;
    id.insert(id.end(), sender.begin(), sender.end());
    id.insert(id.end(), receiver.begin(), receiver.end());
    return id;
}

RulesFn node_propagation_rules(HashKind) {
    return [](const std::map<int64_t, OwacMessage>& log, int64_t i) {
        auto it = log.find(i);
        if (it == log.end()) return false;
        const OwacMessage& m = it->second;
        Transaction tx;
        try {
            tx = decode_tx(m.value);
        } catch (const CodecError&) {
            return false;
        }
        if (!make_basic_check(tx).valid()) return false;
        // Transactions receipted by the channel's own sender must arrive in
        // strictly increasing acceptor-sequence order; relayed traffic from
        // other acceptors is exempt (paths may legitimately reorder it).
        if (tx.receipt && m.conn_id.size() >= 32 &&
            std::memcmp(m.conn_id.data(), tx.receipt->acceptor_id.data(), 32) == 0) {
            for (auto jt = log.begin(); jt != log.end() && jt->first < i; ++jt) {
                Transaction prev;
                try {
                    prev = decode_tx(jt->second.value);
                } catch (const CodecError&) {
                    continue;
                }
                if (prev.receipt &&
                    prev.receipt->acceptor_id == tx.receipt->acceptor_id &&
                    prev.receipt->acceptor_seq >= tx.receipt->acceptor_seq)
                    return false;
            }
        }
        return true;
    };
}

Node::Node(NodeConfig cfg)
    : cfg_(std::move(cfg)), queue_(cfg_.kind),
      tip_hash_(Digest::zero(digest_len(cfg_.kind))) {}

void Node::connect_peer(const PublicId& peer) {
    if (senders_.count(peer)) return;
    ChannelConfig out;
    out.conn_id = make_conn_id(id(), peer);
    out.grace_period = cfg_.grace_period;
    out.sender_id = id();
    out.receiver_id = peer;
    senders_.emplace(peer, OwacSender(out, cfg_.key, cfg_.kind));

    ChannelConfig in;
    in.conn_id = make_conn_id(peer, id());
    in.grace_period = cfg_.grace_period;
    in.sender_id = peer;
    in.receiver_id = id();
    receivers_.emplace(peer, OwacReceiver(in, cfg_.key, cfg_.kind));
    outbox_[peer];
}

OwacSender& Node::sender_to(const PublicId& peer) { return senders_.at(peer); }
OwacReceiver& Node::receiver_from(const PublicId& peer) { return receivers_.at(peer); }
std::deque<Transaction>& Node::outbox_for(const PublicId& peer) { return outbox_.at(peer); }

std::vector<PublicId> Node::peers() const {
    std::vector<PublicId> out;
    for (const auto& [peer, _] : senders_) out.push_back(peer);
    return out;
}

void Node::ingest(const Transaction& tx, const PublicId* from_peer) {
    Digest txd = tx_digest(cfg_.kind, tx);
    if (!seen_.insert(txd).second) return;
    queue_.enqueue(tx);
    for (auto& [peer, box] : outbox_) {
        if (from_peer && peer == *from_peer) continue;
        box.push_back(tx);
    }
}

Node::AcceptResult Node::accept_tx(const Transaction& tx) {
    if (Validity v = check_submission(tx); !v.valid()) return {std::nullopt, v.reason};
    Transaction stamped = tx;

    bool censored = false;
    for (const auto& in : stamped.inputs)
        if (cfg_.blacklist.count(in.address)) censored = true;
    if (censored) {
        CensorshipMark mark;
        mark.censor_id = id();
        mark.reason = to_bytes("blacklisted sender");
        mark.sig = sign(cfg_.key, censorship_message(stamped, mark.reason));
        stamped.censorship = mark;
    }

    AcceptorReceipt r;
    r.acceptor_id = id();
    r.acceptor_seq = acceptor_seq_++;
    r.sig = sign(cfg_.key, receipt_message(stamped, r.acceptor_id, r.acceptor_seq));
    stamped.receipt = r;

    ingest(stamped, nullptr);
    return {stamped, Reason::None};
}

std::vector<OwacMessage> Node::pump_channel(const PublicId& peer) {
    OwacSender& s = senders_.at(peer);
    auto& box = outbox_.at(peer);
    std::vector<OwacMessage> out;
    while (!box.empty()) {
        auto msg = s.send(encode_tx(box.front()));
        if (!msg) break;
        out.push_back(*msg);
        box.pop_front();
    }
    return out;
}

ReceiverHooks Node::hooks_for(const PublicId& peer) {
    ReceiverHooks hooks;
    hooks.respects_rules = node_propagation_rules(cfg_.kind);
    PublicId from = peer;
    hooks.process = [this, from](const Bytes& value) {
        Transaction tx = decode_tx(value); // rules hook already vetted it
        ingest(tx, &from);
    };
    hooks.summarize = [this]() { return encode_summary(summarize()); };
    uint64_t batch = cfg_.confirm_batch;
    hooks.send_conf_policy = [batch](int64_t, int64_t last_conf, int64_t last_rcvd) {
        return last_rcvd - last_conf >= static_cast<int64_t>(batch);
    };
    return hooks;
}

std::optional<ViolationReport> Node::on_channel_message(const PublicId& peer,
                                                        const OwacMessage& m) {
    return receivers_.at(peer).on_message(m, hooks_for(peer));
}

std::optional<ViolationReport> Node::on_confirmation(const PublicId& peer,
                                                     const Confirmation& c) {
    return senders_.at(peer).on_confirmation(c);
}

std::optional<Confirmation> Node::tick_confirm(const PublicId& peer) {
    ReceiverHooks hooks = hooks_for(peer);
    hooks.send_conf_policy = [](int64_t, int64_t, int64_t) { return true; };
    return receivers_.at(peer).maybe_confirm(hooks);
}

Block Node::propose(const SelectionPolicy& policy) const {
    OrderedProposal p = build_proposal(queue_, policy, tip_hash_, state_);
    return proposal_to_block(p, height_ + 1, tip_hash_, cfg_.key, state_, cfg_.kind);
}

bool Node::on_commit(const Block& b) {
    if (!verify_block_signature(b)) return false;
    if (!(b.prev_hash == tip_hash_) || b.height != height_ + 1) return false;
    AccountMap next = state_;
    for (const auto& entry : b.txs) {
        if (entry.disposition != Disposition::Processed) continue;
        if (!validate_against_state(entry.tx, next).valid()) return false;
        next = fairledger::apply(entry.tx, next);
    }
    if (!(state_root(cfg_.kind, next) == b.state_root)) return false;
    state_ = std::move(next);
    // Mark committed transactions as seen so copies still in transit are not
    // re-queued and re-proposed after the commit.
    for (const auto& entry : b.txs) seen_.insert(tx_digest(cfg_.kind, entry.tx));
    queue_.remove_committed(b);
    height_ = b.height;
    tip_hash_ = block_hash(cfg_.kind, b);
    return true;
}

QueueSummary Node::summarize() {
    return queue_.summarize(cfg_.key, height_, tip_hash_, summary_seq_++);
}

Node::AcceptResult Node::report_omission(const PublicId& peer, int64_t first_missing,
                                         int64_t last_missing) {
    Transaction tx;
    tx.kind = TxKind::Administrative;
    tx.admin_payload = make_omission_payload(id(), peer, first_missing, last_missing);
    tx.admin_signer = id();
    tx.admin_sig = sign(cfg_.key, encode_tx_body(tx));
    return accept_tx(tx);
}

} // namespace fairledger
