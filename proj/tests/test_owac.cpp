#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "fairledger/node.hpp"
#include "fairledger/owac.hpp"

using namespace fairledger;

namespace {

std::vector<std::string> read_lines(const std::string& name) {
    std::ifstream in(std::string(TESTDATA_DIR) + "/" + name);
    REQUIRE(in.good());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

struct Channel {
    ChannelConfig cfg;
    OwacSender s;
    OwacReceiver r;
    ReceiverHooks hooks; // default: no rules, no process, confirm on demand

    static Channel make(uint64_t sender_seed = 7, uint64_t receiver_seed = 8,
                        uint64_t grace = 2, HashKind kind = HashKind::Ripemd160) {
        KeyPair sk = KeyPair::from_seed(sender_seed);
        KeyPair rk = KeyPair::from_seed(receiver_seed);
        ChannelConfig cfg;
        cfg.conn_id = make_conn_id(sk.public_id, rk.public_id);
        cfg.grace_period = grace;
        cfg.sender_id = sk.public_id;
        cfg.receiver_id = rk.public_id;
        return Channel{cfg, OwacSender(cfg, sk, kind), OwacReceiver(cfg, rk, kind), {}};
    }

    // Push one value across without confirmation; must be silently accepted.
    void relay(const Bytes& value) {
        auto m = s.send(value);
        REQUIRE(m.has_value());
        REQUIRE_FALSE(r.on_message(*m, hooks).has_value());
    }

    // Confirm everything outstanding and feed it back to the sender.
    Confirmation confirm() {
        ReceiverHooks always = hooks;
        always.send_conf_policy = [](int64_t, int64_t, int64_t) { return true; };
        auto c = r.maybe_confirm(always);
        REQUIRE(c.has_value());
        REQUIRE_FALSE(s.on_confirmation(*c).has_value());
        return *c;
    }
};

struct ReceiverSnapshot {
    int64_t last_rcvd, last_conf, last_ackd;
    Digest seq_hash;
    size_t msg_count, pending_count;

    static ReceiverSnapshot of(const OwacReceiver& r) {
        return {r.last_rcvd(), r.last_conf(), r.last_ackd(), r.seq_hash(),
                r.msgs().size(), r.pending_confs().size()};
    }
    bool operator==(const ReceiverSnapshot&) const = default;
};

} // namespace

TEST_CASE("frame golden vectors reproduce byte for byte") {
    auto lines = read_lines("owac_frames.txt");
    REQUIRE(lines.size() == 4);
    Channel ch = Channel::make();
    for (int i = 0; i < 3; ++i) {
        auto m = ch.s.send(to_bytes("payload-" + std::to_string(i)));
        REQUIRE(m.has_value());
        CHECK(to_hex(encode_owac_message(*m)) == lines[i]);
        ch.r.on_message(*m, ch.hooks);
    }
    ReceiverHooks always;
    always.send_conf_policy = [](int64_t, int64_t, int64_t) { return true; };
    auto c = ch.r.maybe_confirm(always);
    REQUIRE(c.has_value());
    CHECK(to_hex(encode_confirmation(*c)) == lines[3]);
}

TEST_CASE("message and confirmation wire round-trips, tag discipline") {
    Channel ch = Channel::make();
    auto m = ch.s.send(to_bytes("x"));
    Bytes enc = encode_owac_message(*m);
    CHECK(enc[0] == kFrameMessage);
    OwacMessage back = decode_owac_message(enc);
    CHECK(encode_owac_message(back) == enc);
    CHECK(verify_message_sig(ch.cfg.sender_id, back));

    ch.r.on_message(*m, ch.hooks);
    Confirmation c = ch.confirm();
    Bytes cenc = encode_confirmation(c);
    CHECK(cenc[0] == kFrameConfirmation);
    Confirmation cback = decode_confirmation(cenc);
    CHECK(encode_confirmation(cback) == cenc);
    CHECK(verify_confirmation_sig(ch.cfg.receiver_id, cback));

    // Swapped tags are rejected outright.
    Bytes wrong = enc;
    wrong[0] = kFrameConfirmation;
    CHECK_THROWS_AS(decode_confirmation(wrong), CodecError);
    CHECK_THROWS_AS(decode_owac_message(cenc), CodecError);
}

TEST_CASE("honest randomized exchange stays silent and hashes agree") {
    Channel ch = Channel::make(21, 22, /*grace=*/3);
    std::mt19937_64 rng(2024);
    int confirmations = 0;
    for (int i = 0; i < 200; ++i) {
        Bytes v;
        size_t len = rng() % 9;
        for (size_t b = 0; b < len; ++b) v.push_back(static_cast<uint8_t>(rng()));
        // Drain the window when it is full so the sender never refuses.
        bool window_full = ch.s.last_sent() == ch.s.last_conf() + 3;
        ch.relay(v);
        if (window_full || rng() % 3 == 0) {
            Confirmation c = ch.confirm();
            // Receiver's running hash must equal the sender's recomputation.
            CHECK(c.conf_hash == ch.s.fold_hash(c.confirmed_index));
            CHECK(ch.r.seq_hash() == ch.s.fold_hash(ch.s.last_sent()));
            ++confirmations;
        }
    }
    CHECK(confirmations > 30);
    CHECK(ch.s.last_sent() == 199);
    CHECK(ch.r.last_rcvd() == 199);
}

TEST_CASE("sender flow control refuses past the grace window") {
    for (uint64_t grace : {0ULL, 1ULL, 2ULL, 5ULL}) {
        CAPTURE(grace);
        Channel ch = Channel::make(1, 2, grace);
        // Exactly grace + 1 messages fit before a confirmation is required.
        for (uint64_t i = 0; i <= grace; ++i)
            CHECK(ch.s.send(to_bytes("v")).has_value());
        CHECK_FALSE(ch.s.send(to_bytes("v")).has_value());
        CHECK(ch.s.last_sent() == static_cast<int64_t>(grace));
    }
}

TEST_CASE("sender: each confirmation rejection path") {
    Channel ch = Channel::make();
    ch.relay(to_bytes("a"));
    ch.relay(to_bytes("b"));
    Confirmation good = ch.confirm(); // last_conf is now 1

    SUBCASE("invalid signature") {
        Confirmation bad = ch.r.craft_confirmation(1, ch.s.fold_hash(1), {});
        bad.sig[10] ^= 1;
        auto rep = ch.s.on_confirmation(bad);
        REQUIRE(rep.has_value());
        CHECK(rep->rule == rules::kInvalidSignature);
        CHECK(rep->kind == ReportKind::Claim);
    }
    SUBCASE("invalid connection id") {
        Confirmation bad = good;
        bad.conn_id = to_bytes("someone else");
        // Re-sign so the signature check passes first.
        KeyPair rk = KeyPair::from_seed(uint64_t{8});
        bad.sig = sign(rk, confirmation_body(bad));
        auto rep = ch.s.on_confirmation(bad);
        REQUIRE(rep.has_value());
        CHECK(rep->rule == rules::kInvalidConnId);
    }
    SUBCASE("stale confirmation is out of sequence") {
        auto rep = ch.s.on_confirmation(good); // replay
        REQUIRE(rep.has_value());
        CHECK(rep->rule == rules::kConfOutOfSequence);
        CHECK(ch.s.last_conf() == 1); // unchanged
    }
    SUBCASE("confirming unsent values") {
        Confirmation bad = ch.r.craft_confirmation(9, ch.s.fold_hash(1), {});
        auto rep = ch.s.on_confirmation(bad);
        REQUIRE(rep.has_value());
        CHECK(rep->rule == rules::kConfirmUnsent);
    }
    SUBCASE("incorrect cumulative hash") {
        ch.relay(to_bytes("c"));
        Confirmation bad = ch.r.craft_confirmation(2, ch.s.fold_hash(1), {});
        auto rep = ch.s.on_confirmation(bad);
        REQUIRE(rep.has_value());
        CHECK(rep->rule == rules::kIncorrectConfHash);
        CHECK(ch.s.last_conf() == 1);
        // The honest confirmation for the same index still goes through.
        Confirmation ok = ch.r.craft_confirmation(2, ch.s.fold_hash(2), {});
        CHECK_FALSE(ch.s.on_confirmation(ok).has_value());
        CHECK(ch.s.last_conf() == 2);
    }
}

TEST_CASE("receiver: claim paths leave state untouched") {
    Channel ch = Channel::make();
    ch.relay(to_bytes("a"));
    ch.relay(to_bytes("b"));
    ReceiverSnapshot before = ReceiverSnapshot::of(ch.r);

    auto expect_claim = [&](const OwacMessage& m, const char* rule) {
        auto rep = ch.r.on_message(m, ch.hooks);
        REQUIRE(rep.has_value());
        CHECK(rep->rule == rule);
        CHECK(rep->kind == ReportKind::Claim);
        CHECK(rep->accused == ch.cfg.sender_id);
        CHECK(ReceiverSnapshot::of(ch.r) == before); // all-or-nothing
        CHECK_FALSE(ch.r.frozen());                  // claims never freeze
        CHECK_FALSE(verify_proof(*rep));             // claims are not proofs
    };

    SUBCASE("invalid signature") {
        OwacMessage m = ch.s.craft(2, to_bytes("c"), -1);
        m.sig[0] ^= 1;
        expect_claim(m, rules::kInvalidSignature);
    }
    SUBCASE("invalid connection id") {
        OwacMessage m = ch.s.craft(2, to_bytes("c"), -1, to_bytes("other-conn"));
        expect_claim(m, rules::kInvalidConnId);
    }
    SUBCASE("skipped message") {
        expect_claim(ch.s.craft(4, to_bytes("e"), -1), rules::kSkippedMessage);
    }
    SUBCASE("duplicate message") {
        const OwacMessage& stored = ch.r.msgs().at(0);
        expect_claim(stored, rules::kDuplicateMessage);
    }
    SUBCASE("invalid acknowledgement") {
        // Acks an index the receiver never confirmed.
        expect_claim(ch.s.craft(2, to_bytes("c"), 1), rules::kInvalidAck);
    }
}

TEST_CASE("receiver: acknowledgement ordering across confirmations") {
    Channel ch = Channel::make();
    ch.relay(to_bytes("a"));
    ch.relay(to_bytes("b"));
    ch.confirm(); // pending confirmation for index 1

    // The next honest send acks index 1 and clears the pending set.
    auto m2 = ch.s.send(to_bytes("c"));
    REQUIRE(m2->sender_last_conf == 1);
    CHECK_FALSE(ch.r.on_message(*m2, ch.hooks).has_value());
    CHECK(ch.r.last_ackd() == 1);
    CHECK(ch.r.pending_confs().empty());

    // Regressing below the acknowledged point is a violation.
    auto rep = ch.r.on_message(ch.s.craft(3, to_bytes("d"), -1), ch.hooks);
    REQUIRE(rep.has_value());
    CHECK(rep->rule == rules::kAckOutOfSequence);

    // One ack may cover several pending confirmations at once.
    ch.relay(to_bytes("d"));
    Channel* c = &ch;
    (void)c;
    ch.confirm();
    ch.relay(to_bytes("e"));
    ch.confirm();
    auto m = ch.s.send(to_bytes("f")); // acks the latest confirmation
    CHECK_FALSE(ch.r.on_message(*m, ch.hooks).has_value());
    CHECK(ch.r.pending_confs().empty());
}

TEST_CASE("conflicting messages: proved, frozen, portable") {
    Channel ch = Channel::make();
    ch.relay(to_bytes("a"));
    ch.relay(to_bytes("b"));

    OwacMessage twin = ch.s.craft(1, to_bytes("B'"), -1);
    auto rep = ch.r.on_message(twin, ch.hooks);
    REQUIRE(rep.has_value());
    CHECK(rep->rule == rules::kConflictingMessages);
    CHECK(rep->kind == ReportKind::Proof);
    CHECK(verify_proof(*rep));
    CHECK(ch.r.frozen());

    // Frozen channel drops everything afterwards, silently.
    CHECK_FALSE(ch.r.on_message(ch.s.craft(2, to_bytes("c"), -1), ch.hooks).has_value());
    ReceiverHooks always;
    always.send_conf_policy = [](int64_t, int64_t, int64_t) { return true; };
    CHECK_FALSE(ch.r.maybe_confirm(always).has_value());

    // Portability: the encoded report alone carries the conviction.
    ViolationReport wire = decode_report(encode_report(*rep));
    CHECK(verify_proof(wire));

    // Soundness: two identical copies prove nothing, and any byte flip in
    // either evidence blob (body or signature) kills the proof.
    ViolationReport same = wire;
    same.evidence[1] = same.evidence[0];
    CHECK_FALSE(verify_proof(same));
    for (size_t e = 0; e < wire.evidence.size(); ++e)
        for (size_t i = 0; i < wire.evidence[e].size(); i += 5) {
            ViolationReport flipped = wire;
            flipped.evidence[e][i] ^= 1;
            CHECK_FALSE(verify_proof(flipped));
        }
}

TEST_CASE("too far ahead: proved from the message alone") {
    Channel ch = Channel::make(); // grace 2
    ch.relay(to_bytes("a"));
    ch.relay(to_bytes("b"));
    ch.relay(to_bytes("c")); // window now full, nothing acknowledged

    OwacMessage over = ch.s.craft(3, to_bytes("d"), -1);
    auto rep = ch.r.on_message(over, ch.hooks);
    REQUIRE(rep.has_value());
    CHECK(rep->rule == rules::kTooFarAhead);
    CHECK(rep->kind == ReportKind::Proof);
    CHECK(ch.r.frozen());
    CHECK(verify_proof(*rep));
    CHECK(verify_proof(decode_report(encode_report(*rep))));

    // An in-window message is not convictable even if presented as one.
    Channel ch2 = Channel::make();
    OwacMessage fine = ch2.s.craft(2, to_bytes("x"), -1);
    ViolationReport framed = *rep;
    framed.evidence = {encode_owac_message(fine)};
    CHECK_FALSE(verify_proof(framed));

    // The claimed bound depends on the channel's grace period, which is
    // public configuration: a looser channel does not convict.
    ViolationReport loose = *rep;
    loose.channel->grace_period = 10;
    CHECK_FALSE(verify_proof(loose));
}

TEST_CASE("rules violated: contiguous signed log convicts exactly once") {
    // Genesis-fixed rule for this channel: a message's value is its own
    // index as a single byte.
    RulesFn rule = [](const std::map<int64_t, OwacMessage>& msgs, int64_t i) {
        return msgs.at(i).value == Bytes{static_cast<uint8_t>(i)};
    };
    Channel ch = Channel::make();
    ch.hooks.respects_rules = rule;
    ch.relay(Bytes{0});
    ch.relay(Bytes{1});

    auto rep = ch.r.on_message(ch.s.craft(2, Bytes{9}, -1), ch.hooks);
    REQUIRE(rep.has_value());
    CHECK(rep->rule == rules::kRulesViolated);
    CHECK(rep->kind == ReportKind::Proof);
    CHECK(rep->evidence.size() == 3); // the full log, violation last
    CHECK(ch.r.frozen());
    CHECK(verify_proof(*rep, rule));
    CHECK(verify_proof(decode_report(encode_report(*rep)), rule));

    // Without the rules hook nothing can be checked.
    CHECK_FALSE(verify_proof(*rep));

    // An honest log convicts nobody.
    Channel ch2 = Channel::make();
    ViolationReport framed = *rep;
    framed.evidence = {encode_owac_message(ch2.s.craft(0, Bytes{0}, -1)),
                       encode_owac_message(ch2.s.craft(1, Bytes{1}, -1))};
    CHECK_FALSE(verify_proof(framed, rule));

    // A log whose violation is not at the end proves nothing either: the
    // receiver should have stopped at the first offence.
    ViolationReport padded = *rep;
    padded.evidence.push_back(encode_owac_message(ch2.s.craft(3, Bytes{3}, -1)));
    CHECK_FALSE(verify_proof(padded, rule));

    // Gaps in the log break the conviction.
    ViolationReport gappy = *rep;
    gappy.evidence.erase(gappy.evidence.begin() + 1);
    CHECK_FALSE(verify_proof(gappy, rule));
}

TEST_CASE("proofs signed by the wrong key or channel never verify") {
    Channel ch = Channel::make();
    ch.relay(to_bytes("a"));
    OwacMessage twin = ch.s.craft(0, to_bytes("A'"), -1);
    auto rep = ch.r.on_message(twin, ch.hooks);
    REQUIRE(rep.has_value());
    REQUIRE(verify_proof(*rep));

    ViolationReport wrong_key = *rep;
    wrong_key.channel->sender_id = KeyPair::from_seed(uint64_t{99}).public_id;
    CHECK_FALSE(verify_proof(wrong_key));

    ViolationReport wrong_conn = *rep;
    wrong_conn.channel->conn_id = to_bytes("not this channel");
    CHECK_FALSE(verify_proof(wrong_conn));

    ViolationReport no_channel = *rep;
    no_channel.channel.reset();
    CHECK_FALSE(verify_proof(no_channel));

    ViolationReport unknown_rule = *rep;
    unknown_rule.rule = "some new rule";
    CHECK_FALSE(verify_proof(unknown_rule));
}

TEST_CASE("confirmation policy gates maybe_confirm") {
    Channel ch = Channel::make(3, 4, /*grace=*/8);
    ReceiverHooks batchy;
    batchy.send_conf_policy = [](int64_t, int64_t last_conf, int64_t last_rcvd) {
        return last_rcvd - last_conf >= 3;
    };
    CHECK_FALSE(ch.r.maybe_confirm(batchy).has_value()); // nothing received
    ch.relay(to_bytes("a"));
    ch.relay(to_bytes("b"));
    CHECK_FALSE(ch.r.maybe_confirm(batchy).has_value()); // below batch
    ch.relay(to_bytes("c"));
    auto c = ch.r.maybe_confirm(batchy);
    REQUIRE(c.has_value());
    CHECK(c->confirmed_index == 2);
    CHECK_FALSE(ch.r.maybe_confirm(batchy).has_value()); // nothing new
}

TEST_CASE("report encoding round-trips with and without channel context") {
    Channel ch = Channel::make();
    ViolationReport r;
    r.kind = ReportKind::Claim;
    r.rule = rules::kLostTx;
    r.reporter = ch.cfg.receiver_id;
    r.accused = ch.cfg.sender_id;
    r.evidence = {to_bytes("one"), {}, to_bytes("three")};
    Bytes enc = encode_report(r);
    ViolationReport back = decode_report(enc);
    CHECK(back.rule == r.rule);
    CHECK(back.evidence == r.evidence);
    CHECK_FALSE(back.channel.has_value());
    CHECK(encode_report(back) == enc);

    r.kind = ReportKind::Proof;
    r.channel = ch.cfg;
    ViolationReport back2 = decode_report(encode_report(r));
    REQUIRE(back2.channel.has_value());
    CHECK(back2.channel->conn_id == ch.cfg.conn_id);
    CHECK(back2.channel->grace_period == ch.cfg.grace_period);
    CHECK(encode_report(back2) == encode_report(r));
}
