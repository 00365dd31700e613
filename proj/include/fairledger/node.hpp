#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "fairledger/ledger.hpp"
#include "fairledger/outqueue.hpp"
#include "fairledger/owac.hpp"
#include "fairledger/proposal.hpp"

namespace fairledger {

struct NodeConfig {
    KeyPair key;
    HashKind kind = HashKind::Ripemd160;
    uint64_t grace_period = 2;
    uint64_t confirm_batch = kDefaultConfirmBatch;
    // Senders this node refuses to serve. Their transactions are still
    // propagated, but stamped with a signed censorship mark.
    std::set<Address> blacklist;
};

// Channel id binds both endpoints: sender public id followed by receiver
// public id. Rules functions recover the sender identity from it.
Bytes make_conn_id(const PublicId& sender, const PublicId& receiver);

// The genesis-fixed propagation rules every channel message must satisfy:
// the value decodes as a transaction, passes the stateless checks, and
// transactions receipted by the channel's own sender arrive in strictly
// increasing acceptor-sequence order.
RulesFn node_propagation_rules(HashKind kind);

// One replica: accepts client transactions, relays them to peers over
// accountable channels, maintains the authenticated outgoing queue, and
// takes proposer turns.
class Node {
public:
    explicit Node(NodeConfig cfg);

    const PublicId& id() const { return cfg_.key.public_id; }
    HashKind hash_kind() const { return cfg_.kind; }

    struct AcceptResult {
        std::optional<Transaction> stamped; // receipted (possibly marked) copy
        Reason reason = Reason::None;       // set when refused outright
    };

    // Client-facing entry point. Stamps a receipt (and a censorship mark for
    // blacklisted senders), queues the transaction, and schedules it for
    // every peer channel.
    AcceptResult accept_tx(const Transaction& tx);

    void connect_peer(const PublicId& peer);

    // Drains this node's send buffer for one peer, honouring the channel's
    // confirmation back-pressure. Returns the messages to deliver.
    std::vector<OwacMessage> pump_channel(const PublicId& peer);

    // Inbound channel traffic. A returned report is a detected violation.
    std::optional<ViolationReport> on_channel_message(const PublicId& peer,
                                                      const OwacMessage& m);
    std::optional<ViolationReport> on_confirmation(const PublicId& peer,
                                                   const Confirmation& c);

    // Forces a confirmation opportunity on the receiving half of the peer's
    // channel (host consensus tick).
    std::optional<Confirmation> tick_confirm(const PublicId& peer);

    Block propose(const SelectionPolicy& policy) const;
    // Applies a committed block: prunes the queue and advances account state.
    // Returns false (and changes nothing) if the block does not verify.
    bool on_commit(const Block& b);

    QueueSummary summarize();

    // Administrative transaction accusing a peer of withholding channel
    // traffic; self-accepted like any client transaction.
    AcceptResult report_omission(const PublicId& peer, int64_t first_missing,
                                 int64_t last_missing);

    const AccountMap& state() const { return state_; }
    AccountMap& state_mut() { return state_; }
    const MerkleQueue& queue() const { return queue_; }
    MerkleQueue& queue_mut() { return queue_; }
    uint64_t height() const { return height_; }
    const Digest& tip_hash() const { return tip_hash_; }
    uint64_t acceptor_seq() const { return acceptor_seq_; }
    const KeyPair& key() const { return cfg_.key; }
    const NodeConfig& config() const { return cfg_; }
    void add_blacklist(const Address& a) { cfg_.blacklist.insert(a); }

    OwacSender& sender_to(const PublicId& peer);
    OwacReceiver& receiver_from(const PublicId& peer);
    std::deque<Transaction>& outbox_for(const PublicId& peer);
    std::vector<PublicId> peers() const;

    bool has_seen(const Digest& txd) const { return seen_.count(txd) != 0; }

private:
    void ingest(const Transaction& tx, const PublicId* from_peer);
    ReceiverHooks hooks_for(const PublicId& peer);

    NodeConfig cfg_;
    AccountMap state_;
    MerkleQueue queue_;
    uint64_t acceptor_seq_ = 0;
    uint64_t summary_seq_ = 0;
    uint64_t height_ = 0;
    Digest tip_hash_;
    std::set<Digest> seen_;
    std::map<PublicId, OwacSender> senders_;
    std::map<PublicId, OwacReceiver> receivers_;
    std::map<PublicId, std::deque<Transaction>> outbox_;
};

} // namespace fairledger
