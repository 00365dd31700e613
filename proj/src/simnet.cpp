#include "fairledger/simnet.hpp"

#include <algorithm>
#include <memory>
#include <set>

#include <json.hpp>

namespace fairledger {

using nlohmann::json;

namespace {

uint64_t node_key_seed(const Scenario& s, size_t i) { return s.seed * 1009 + 17 + i; }
uint64_t client_key_seed(const Scenario& s, size_t c) { return s.seed * 2003 + 101 + c; }

HashKind kind_from_name(const std::string& name) {
    if (name == "sha256") return HashKind::Sha256;
    return HashKind::Ripemd160;
}

std::string kind_name(HashKind k) {
    return k == HashKind::Sha256 ? "sha256" : "ripemd160";
}

} // namespace

Scenario scenario_from_json(const std::string& text) {
    json j = json::parse(text);
    Scenario s;
    s.seed = j.value("seed", s.seed);
    s.nodes = j.value("nodes", s.nodes);
    s.clients = j.value("clients", s.clients);
    s.kind = kind_from_name(j.value("hash", std::string("ripemd160")));
    s.grace_period = j.value("grace_period", s.grace_period);
    s.confirm_batch = j.value("confirm_batch", s.confirm_batch);
    if (j.contains("policy")) {
        auto p = parse_policy(j["policy"].get<std::string>());
        if (!p) throw std::runtime_error("bad policy string");
        s.policy = *p;
    }
    s.ticks = j.value("ticks", s.ticks);
    s.consensus_interval = j.value("consensus_interval", s.consensus_interval);
    s.submit_period = j.value("submit_period", s.submit_period);
    s.submit_stop = j.value("submit_stop", s.submit_stop);
    s.genesis_balance = j.value("genesis_balance", s.genesis_balance);
    for (const auto& f : j.value("faults", json::array())) {
        Fault fault;
        fault.behavior = f.at("behavior").get<std::string>();
        fault.node = f.value("node", 0);
        fault.target = f.value("target", 0);
        fault.client = f.value("client", 0);
        fault.at = f.value("at", 0);
        s.faults.push_back(fault);
    }
    return s;
}

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["seed"] = s.seed;
    j["nodes"] = s.nodes;
    j["clients"] = s.clients;
    j["hash"] = kind_name(s.kind);
    j["grace_period"] = s.grace_period;
    j["confirm_batch"] = s.confirm_batch;
    j["policy"] = format_policy(s.policy);
    j["ticks"] = s.ticks;
    j["consensus_interval"] = s.consensus_interval;
    j["submit_period"] = s.submit_period;
    j["submit_stop"] = s.submit_stop;
    j["genesis_balance"] = s.genesis_balance;
    j["faults"] = json::array();
    for (const auto& f : s.faults) {
        json jf;
        jf["behavior"] = f.behavior;
        jf["node"] = f.node;
        jf["target"] = f.target;
        jf["client"] = f.client;
        jf["at"] = f.at;
        j["faults"].push_back(jf);
    }
    return j.dump();
}

std::vector<std::string> behavior_catalog() {
    return {
        "bad-signature",      "wrong-conn-id",    "skip-message",
        "duplicate-message",  "conflicting-messages",
        "too-far-ahead",      "rules-violation",  "bad-ack-sequence",
        "invalid-ack",        "stale-confirmation",
        "over-confirm",       "wrong-conf-hash",  "bad-conf-signature",
        "lose-tx",            "reorder-tx",       "bad-prefix-proposal",
        "front-run",          "silent-censor",    "overt-censor",
    };
}

std::optional<ExpectedDetection> expected_detection(const std::string& b) {
    auto claim = [](const char* rule) {
        return ExpectedDetection{ReportKind::Claim, rule};
    };
    auto proof = [](const char* rule) {
        return ExpectedDetection{ReportKind::Proof, rule};
    };
    if (b == "bad-signature") return claim(rules::kInvalidSignature);
    if (b == "wrong-conn-id") return claim(rules::kInvalidConnId);
    if (b == "skip-message") return claim(rules::kSkippedMessage);
    if (b == "duplicate-message") return claim(rules::kDuplicateMessage);
    if (b == "conflicting-messages") return proof(rules::kConflictingMessages);
    if (b == "too-far-ahead") return proof(rules::kTooFarAhead);
    if (b == "rules-violation") return proof(rules::kRulesViolated);
    if (b == "bad-ack-sequence") return claim(rules::kAckOutOfSequence);
    if (b == "invalid-ack") return claim(rules::kInvalidAck);
    if (b == "stale-confirmation") return claim(rules::kConfOutOfSequence);
    if (b == "over-confirm") return claim(rules::kConfirmUnsent);
    if (b == "wrong-conf-hash") return claim(rules::kIncorrectConfHash);
    if (b == "bad-conf-signature") return claim(rules::kInvalidSignature);
    if (b == "lose-tx") return proof(rules::kLostTx);
    if (b == "reorder-tx") return proof(rules::kReorderedTx);
    if (b == "bad-prefix-proposal") return proof(rules::kBadPrefix);
    if (b == "front-run") return proof(rules::kBadOrdering);
    if (b == "silent-censor") return ExpectedDetection{ReportKind::Claim, rules::kLostTx};
    if (b == "overt-censor") return std::nullopt; // marked, policy-compliant
    return std::nullopt;
}

namespace {

struct Pipe {
    std::deque<OwacMessage> msgs;
    std::deque<Confirmation> confs;
};

struct NodeSnapshot {
    SummarySnapshot snap;
    size_t blocks_seen = 0;
    bool valid = false;
};

class Runner {
public:
    explicit Runner(const Scenario& sc) : sc_(sc), rng_(sc.seed ? sc.seed : 1) {}

    SimResult run() {
        setup();
        for (t_ = 0; t_ < sc_.ticks; ++t_) {
            deliver_all();
            apply_faults();
            submissions();
            pump_all();
            if (sc_.consensus_interval && (t_ + 1) % sc_.consensus_interval == 0)
                consensus_round();
            audit_snapshots();
        }
        return std::move(res_);
    }

private:
    uint64_t rnd() {
        rng_ = xorshift64(rng_);
        return rng_;
    }

    void trace(json j) {
        j["t"] = t_;
        res_.trace.push_back(j.dump());
    }

    void setup() {
        AccountMap genesis;
        for (size_t c = 0; c < sc_.clients; ++c) {
            clients_.push_back(KeyPair::from_seed(client_key_seed(sc_, c)));
            genesis[clients_.back().public_id] = {sc_.genesis_balance, 0};
        }
        client_nonce_.assign(sc_.clients, 0);
        for (size_t i = 0; i < sc_.nodes; ++i) {
            NodeConfig cfg;
            cfg.key = KeyPair::from_seed(node_key_seed(sc_, i));
            cfg.kind = sc_.kind;
            cfg.grace_period = sc_.grace_period;
            cfg.confirm_batch = sc_.confirm_batch;
            nodes_.push_back(std::make_unique<Node>(cfg));
            nodes_.back()->state_mut() = genesis;
        }
        for (size_t i = 0; i < sc_.nodes; ++i)
            for (size_t j = 0; j < sc_.nodes; ++j)
                if (i != j) nodes_[i]->connect_peer(nodes_[j]->id());
        tip_ = Digest::zero(digest_len(sc_.kind));
        height_ = 0;
        auditor_state_ = genesis;
        snapshots_.resize(sc_.nodes);
    }

    size_t node_index(const PublicId& id) const {
        for (size_t i = 0; i < nodes_.size(); ++i)
            if (nodes_[i]->id() == id) return i;
        return nodes_.size();
    }

    void record_report(const ViolationReport& rep) {
        ReportRecord rec;
        rec.tick = t_;
        rec.report = rep;
        if (rep.kind == ReportKind::Proof)
            rec.proof_verified =
                verify_any_proof(rep, sc_.kind, node_propagation_rules(sc_.kind), sc_.policy);
        res_.audit.record(rep, res_.messages_delivered);
        trace({{"ev", "report"},
               {"kind", rep.kind == ReportKind::Proof ? "proof" : "claim"},
               {"rule", rep.rule},
               {"accused", node_index(rep.accused)},
               {"verified", rec.proof_verified}});
        res_.records.push_back(std::move(rec));
    }

    void deliver_pipe(size_t from, size_t to) {
        Pipe& p = pipes_[{from, to}];
        while (!p.msgs.empty()) {
            OwacMessage m = std::move(p.msgs.front());
            p.msgs.pop_front();
            ++res_.messages_delivered;
            if (auto rep = nodes_[to]->on_channel_message(nodes_[from]->id(), m))
                record_report(*rep);
        }
        while (!p.confs.empty()) {
            Confirmation c = std::move(p.confs.front());
            p.confs.pop_front();
            if (auto rep = nodes_[to]->on_confirmation(nodes_[from]->id(), c))
                record_report(*rep);
        }
    }

    void deliver_all() {
        for (size_t from = 0; from < sc_.nodes; ++from)
            for (size_t to = 0; to < sc_.nodes; ++to)
                if (from != to) deliver_pipe(from, to);
    }

    Transaction make_client_tx(size_t c) {
        uint64_t amount = 1 + rnd() % 10;
        size_t to = (c + 1 + rnd() % (sc_.clients > 1 ? sc_.clients - 1 : 1)) % sc_.clients;
        Transaction tx;
        TxInput in;
        in.address = clients_[c].public_id;
        in.amount = amount;
        in.nonce = client_nonce_[c];
        tx.inputs.push_back(in);
        tx.outputs.push_back({clients_[to].public_id, amount});
        tx.inputs[0].sig = sign(clients_[c], encode_tx_body(tx));
        return tx;
    }

    // Returns true when the node accepted (and the client nonce advanced).
    bool submit(size_t c, size_t node) {
        const Address& addr = clients_[c].public_id;
        Transaction tx = make_client_tx(c);
        auto censored = silent_censor_.find(node);
        if (censored != silent_censor_.end() && censored->second.count(addr)) {
            trace({{"ev", "drop"}, {"node", node}, {"client", c}});
            if (censor_claimed_.insert({node, c}).second) {
                ViolationReport rep;
                rep.kind = ReportKind::Claim;
                rep.rule = rules::kLostTx;
                rep.reporter = addr;
                rep.accused = nodes_[node]->id();
                rep.evidence.push_back(encode_tx(tx));
                record_report(rep);
                size_t witness = (node + 1) % sc_.nodes;
                nodes_[witness]->report_omission(nodes_[node]->id(), -1, -1);
            }
            return false;
        }
        auto result = nodes_[node]->accept_tx(tx);
        if (!result.stamped) return false;
        ++client_nonce_[c];
        ++res_.txs_submitted;
        res_.receipted.push_back(tx_digest(sc_.kind, *result.stamped));
        trace({{"ev", "submit"}, {"node", node}, {"client", c},
               {"seq", result.stamped->receipt->acceptor_seq}});
        return true;
    }

    void submissions() {
        if (sc_.submit_stop && t_ >= sc_.submit_stop) return;
        if (sc_.submit_period == 0 || t_ % sc_.submit_period != 0) return;
        for (size_t c = 0; c < sc_.clients; ++c) submit(c, c % sc_.nodes);
    }

    void pump_all() {
        for (size_t i = 0; i < sc_.nodes; ++i) {
            for (size_t j = 0; j < sc_.nodes; ++j) {
                if (i == j) continue;
                for (auto& m : nodes_[i]->pump_channel(nodes_[j]->id())) {
                    last_msg_[{i, j}] = m;
                    pipes_[{i, j}].msgs.push_back(std::move(m));
                }
            }
        }
    }

    // --- fault machinery ---------------------------------------------------

    // Generates fresh accepted traffic at `from` and flushes the from->to
    // channel synchronously, so channel fault setups have live state to
    // work against.
    void ensure_traffic(size_t from, size_t to) {
        for (size_t c = 0; c < sc_.clients; ++c) {
            auto censored = silent_censor_.find(from);
            if (censored != silent_censor_.end() &&
                censored->second.count(clients_[c].public_id))
                continue;
            if (submit(c, from)) break;
        }
        for (auto& m : nodes_[from]->pump_channel(nodes_[to]->id())) {
            last_msg_[{from, to}] = m;
            pipes_[{from, to}].msgs.push_back(std::move(m));
        }
        deliver_pipe(from, to);
    }

    // Runs one full confirm/ack cycle on the from->to channel so the
    // receiver's last-acknowledged index becomes nonnegative.
    void ensure_ack_cycle(size_t from, size_t to) {
        OwacReceiver& rv = nodes_[to]->receiver_from(nodes_[from]->id());
        if (rv.last_ackd() >= 0) return;
        if (rv.last_rcvd() < 0) ensure_traffic(from, to);
        if (auto c = nodes_[to]->tick_confirm(nodes_[from]->id())) {
            last_conf_[{to, from}] = *c;
            pipes_[{to, from}].confs.push_back(*c);
            deliver_pipe(to, from);
        }
        ensure_traffic(from, to); // next message carries the new ack
    }

    void inject_msg(size_t from, size_t to, OwacMessage m) {
        pipes_[{from, to}].msgs.push_back(std::move(m));
    }

    void apply_channel_fault(const Fault& f) {
        size_t from = f.node, to = f.target;
        Node& n = *nodes_[from];
        const PublicId to_id = nodes_[to]->id();
        OwacSender& s = n.sender_to(to_id);
        OwacReceiver& rv = nodes_[to]->receiver_from(n.id());
        Bytes filler = to_bytes("filler");

        if (f.behavior == "bad-signature") {
            OwacMessage m = s.craft(rv.last_rcvd() + 1, filler, rv.last_ackd());
            m.sig[0] ^= 1;
            inject_msg(from, to, m);
        } else if (f.behavior == "wrong-conn-id") {
            inject_msg(from, to,
                       s.craft(rv.last_rcvd() + 1, filler, rv.last_ackd(),
                               to_bytes("bogus-conn")));
        } else if (f.behavior == "skip-message") {
            inject_msg(from, to, s.craft(rv.last_rcvd() + 2, filler, rv.last_ackd()));
        } else if (f.behavior == "duplicate-message") {
            if (!last_msg_.count({from, to})) ensure_traffic(from, to);
            inject_msg(from, to, last_msg_.at({from, to}));
        } else if (f.behavior == "conflicting-messages") {
            if (rv.last_rcvd() < 0) ensure_traffic(from, to);
            inject_msg(from, to,
                       s.craft(rv.last_rcvd(), to_bytes("conflict"), rv.last_ackd()));
        } else if (f.behavior == "bad-ack-sequence") {
            ensure_ack_cycle(from, to);
            inject_msg(from, to, s.craft(rv.last_rcvd() + 1, filler, rv.last_ackd() - 1));
        } else if (f.behavior == "invalid-ack") {
            inject_msg(from, to, s.craft(rv.last_rcvd() + 1, filler, rv.last_rcvd() + 5));
        } else if (f.behavior == "rules-violation") {
            // Drain the confirmation pipeline first so the tampered message
            // sits inside the flow-control window and only the rules check
            // can reject it.
            if (auto c = nodes_[to]->tick_confirm(n.id())) {
                last_conf_[{to, from}] = *c;
                pipes_[{to, from}].confs.push_back(*c);
                deliver_pipe(to, from);
            }
            // A transaction with a forged receipt fails the propagation rules.
            Transaction tx = make_client_tx(0);
            AcceptorReceipt r;
            r.acceptor_id = n.id();
            r.acceptor_seq = n.acceptor_seq() + 1000;
            r.sig = sign(n.key(), receipt_message(tx, r.acceptor_id, r.acceptor_seq));
            r.sig[0] ^= 1;
            tx.receipt = r;
            inject_msg(from, to, s.craft(rv.last_rcvd() + 1, encode_tx(tx), s.last_conf()));
            s.freeze();
        } else if (f.behavior == "too-far-ahead") {
            // Flood contiguous indexes past the flow-control bound, ignoring
            // back-pressure. Sub-threshold messages must be rule-clean.
            int64_t limit = rv.last_ackd() + static_cast<int64_t>(sc_.grace_period) + 2;
            auto& box = n.outbox_for(to_id);
            while (static_cast<int64_t>(box.size()) <
                   limit - rv.last_rcvd())
                if (!submit(0, from) && !submit(1 % sc_.clients, from)) break;
            for (int64_t idx = rv.last_rcvd() + 1; idx <= limit && !box.empty(); ++idx) {
                inject_msg(from, to,
                           s.craft(idx, encode_tx(box.front()), rv.last_ackd()));
                box.pop_front();
            }
            s.force_advance(limit);
            s.freeze();
        } else if (f.behavior == "stale-confirmation") {
            // Receiver-side: replay an old confirmation on the to->from
            // channel direction (f.node is the receiver there).
            OwacReceiver& own = n.receiver_from(to_id);
            if (!last_conf_.count({from, to})) {
                if (own.last_rcvd() < 0) ensure_traffic(to, from);
                if (auto c = nodes_[from]->tick_confirm(to_id)) {
                    last_conf_[{from, to}] = *c;
                    pipes_[{from, to}].confs.push_back(*c);
                    deliver_pipe(from, to);
                }
            }
            if (last_conf_.count({from, to}))
                pipes_[{from, to}].confs.push_back(last_conf_.at({from, to}));
        } else if (f.behavior == "over-confirm") {
            OwacReceiver& own = n.receiver_from(to_id);
            OwacSender& peer_s = nodes_[to]->sender_to(n.id());
            pipes_[{from, to}].confs.push_back(own.craft_confirmation(
                peer_s.last_sent() + 5, own.seq_hash(), {}));
        } else if (f.behavior == "wrong-conf-hash") {
            OwacSender& peer_s = nodes_[to]->sender_to(n.id());
            if (peer_s.last_sent() <= peer_s.last_conf()) ensure_traffic(to, from);
            OwacReceiver& own = n.receiver_from(to_id);
            Digest wrong = own.seq_hash();
            wrong.data[0] ^= 1;
            pipes_[{from, to}].confs.push_back(
                own.craft_confirmation(peer_s.last_sent(), wrong, {}));
        } else if (f.behavior == "bad-conf-signature") {
            OwacReceiver& own = n.receiver_from(to_id);
            OwacSender& peer_s = nodes_[to]->sender_to(n.id());
            Confirmation c =
                own.craft_confirmation(peer_s.last_sent(), own.seq_hash(), {});
            c.sig[0] ^= 1;
            pipes_[{from, to}].confs.push_back(c);
        }
    }

    void apply_faults() {
        for (const auto& f : sc_.faults) {
            if (f.at != t_) continue;
            trace({{"ev", "fault"}, {"behavior", f.behavior}, {"node", f.node}});
            if (f.behavior == "lose-tx") {
                MerkleQueue& q = nodes_[f.node]->queue_mut();
                if (q.size() > 0)
                    q.erase_by_digest(tx_digest(sc_.kind, q.entries().front().tx));
            } else if (f.behavior == "reorder-tx") {
                MerkleQueue& q = nodes_[f.node]->queue_mut();
                if (q.size() >= 2)
                    q.swap_positions(q.entries()[0].position, q.entries()[1].position);
            } else if (f.behavior == "bad-prefix-proposal" || f.behavior == "front-run") {
                proposal_tamper_[f.node] = f.behavior;
            } else if (f.behavior == "silent-censor") {
                silent_censor_[f.node].insert(clients_[f.client].public_id);
            } else if (f.behavior == "overt-censor") {
                nodes_[f.node]->add_blacklist(clients_[f.client].public_id);
            } else {
                apply_channel_fault(f);
            }
        }
    }

    // --- consensus & audit -------------------------------------------------

    static bool sequence_valid(const std::vector<Transaction>& txs, AccountMap st) {
        for (const auto& tx : txs) {
            if (!validate_against_state(tx, st).valid()) return false;
            st = fairledger::apply(tx, st);
        }
        return true;
    }

    Block tampered_block(size_t proposer, const std::string& behavior) {
        Node& p = *nodes_[proposer];
        Block honest = p.propose(sc_.policy);
        OrderedProposal op = proposal_from_block(honest);
        if (behavior == "bad-prefix-proposal") {
            for (auto& node : op.disclosure.preorder) {
                if (node.tag != PartialTree::Leaf) continue;
                Digest d = queue_leaf_hash(sc_.kind, node.position, *node.tx);
                node.tag = PartialTree::Pruned;
                node.digest = d;
                node.tx.reset();
                break;
            }
        } else { // front-run
            auto& txs = op.processed;
            if (txs.size() >= 2) {
                std::vector<Transaction> cand(txs);
                std::rotate(cand.begin(), cand.begin() + cand.size() - 1, cand.end());
                if (sequence_valid(cand, p.state())) {
                    txs = cand;
                } else {
                    for (size_t i = 0; i + 1 < txs.size(); ++i) {
                        cand = txs;
                        std::swap(cand[i], cand[i + 1]);
                        if (sequence_valid(cand, p.state())) {
                            txs = cand;
                            break;
                        }
                    }
                }
            }
        }
        return proposal_to_block(op, honest.height, honest.prev_hash, p.key(),
                                 p.state(), sc_.kind);
    }

    void consensus_round() {
        size_t proposer = height_ % sc_.nodes;
        Block b;
        auto tamper = proposal_tamper_.find(proposer);
        if (tamper != proposal_tamper_.end()) {
            b = tampered_block(proposer, tamper->second);
            proposal_tamper_.erase(tamper);
        } else {
            b = nodes_[proposer]->propose(sc_.policy);
        }

        ProposalError err =
            verify_proposal_block(b, tip_, sc_.policy, auditor_state_, sc_.kind);
        if (err != ProposalError::None) {
            const PublicId auditor = nodes_[0]->id();
            if (err == ProposalError::BadPrefix) {
                record_report(make_bad_prefix_report(auditor, b));
            } else if (!res_.blocks.empty()) {
                record_report(make_bad_ordering_report(auditor, res_.blocks.back(),
                                                       auditor_state_, b));
            }
        }

        size_t processed = 0, rejected = 0, censored = 0;
        for (const auto& entry : b.txs) {
            if (entry.disposition == Disposition::Processed) {
                ++processed;
                auditor_state_ = fairledger::apply(entry.tx, auditor_state_);
            } else {
                ++rejected;
                if (entry.reason == Reason::Censored) ++censored;
            }
        }
        res_.censor_marks_committed += censored;

        for (auto& node : nodes_) node->on_commit(b);
        tip_ = block_hash(sc_.kind, b);
        height_ = b.height;
        res_.blocks.push_back(b);
        trace({{"ev", "commit"}, {"height", b.height}, {"proposer", proposer},
               {"processed", processed}, {"rejected", rejected},
               {"censored", censored}, {"hash", tip_.hex()}});

        // Confirmation opportunity on every receiving channel.
        for (size_t i = 0; i < sc_.nodes; ++i) {
            for (size_t j = 0; j < sc_.nodes; ++j) {
                if (i == j) continue;
                if (auto c = nodes_[i]->tick_confirm(nodes_[j]->id())) {
                    trace({{"ev", "confirm"}, {"node", i}, {"peer", j},
                           {"index", c->confirmed_index}});
                    last_conf_[{i, j}] = *c;
                    pipes_[{i, j}].confs.push_back(std::move(*c));
                }
            }
        }
    }

    void audit_snapshots() {
        for (size_t i = 0; i < sc_.nodes; ++i) {
            NodeSnapshot next;
            next.snap.summary = nodes_[i]->summarize();
            next.snap.dump = nodes_[i]->queue().disclose_prefix(nodes_[i]->queue().size());
            next.blocks_seen = res_.blocks.size();
            next.valid = true;
            if (snapshots_[i].valid) {
                std::vector<Block> interval(res_.blocks.begin() + snapshots_[i].blocks_seen,
                                            res_.blocks.end());
                for (auto& rep : compare_summaries(nodes_[0]->id(), snapshots_[i].snap,
                                                   next.snap, interval, sc_.kind))
                    record_report(rep);
            }
            snapshots_[i] = std::move(next);
        }
    }

    Scenario sc_;
    SimResult res_;
    uint64_t rng_;
    uint64_t t_ = 0;
    std::vector<std::unique_ptr<Node>> nodes_;
    std::vector<KeyPair> clients_;
    std::vector<uint64_t> client_nonce_;
    std::map<std::pair<size_t, size_t>, Pipe> pipes_;
    std::map<std::pair<size_t, size_t>, OwacMessage> last_msg_;
    std::map<std::pair<size_t, size_t>, Confirmation> last_conf_;
    std::map<size_t, std::set<Address>> silent_censor_;
    std::set<std::pair<size_t, size_t>> censor_claimed_;
    std::map<size_t, std::string> proposal_tamper_;
    std::vector<NodeSnapshot> snapshots_;
    Digest tip_;
    uint64_t height_ = 0;
    AccountMap auditor_state_;
};

} // namespace

SimResult run_scenario(const Scenario& s) { return Runner(s).run(); }

bool detections_match(const Scenario& s, const SimResult& r) {
    std::set<PublicId> scripted;
    for (const auto& f : s.faults)
        scripted.insert(KeyPair::from_seed(node_key_seed(s, f.node)).public_id);

    for (const auto& rec : r.records) {
        if (!scripted.count(rec.report.accused)) return false;
        if (rec.report.kind == ReportKind::Proof && !rec.proof_verified) return false;
    }

    for (const auto& f : s.faults) {
        auto expected = expected_detection(f.behavior);
        if (!expected) continue;
        PublicId accused = KeyPair::from_seed(node_key_seed(s, f.node)).public_id;
        bool found = false;
        for (const auto& rec : r.records) {
            if (rec.report.kind != expected->kind) continue;
            if (rec.report.rule != expected->rule) continue;
            if (!(rec.report.accused == accused)) continue;
            if (expected->kind == ReportKind::Proof && !rec.proof_verified) continue;
            found = true;
            break;
        }
        if (!found) return false;
    }
    return true;
}

} // namespace fairledger
