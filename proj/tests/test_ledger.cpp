#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#include "fairledger/ledger.hpp"

using namespace fairledger;

namespace {

const HashKind kKind = HashKind::Ripemd160;

KeyPair key(uint64_t n) { return KeyPair::from_seed(n); }

Transaction make_send(const KeyPair& from, const KeyPair& to, uint64_t amount,
                      uint64_t nonce) {
    Transaction tx;
    tx.inputs.push_back({from.public_id, amount, nonce, {}});
    tx.outputs.push_back({to.public_id, amount});
    tx.inputs[0].sig = sign(from, encode_tx_body(tx));
    return tx;
}

Transaction stamp(Transaction tx, const KeyPair& acceptor, uint64_t seq) {
    AcceptorReceipt r;
    r.acceptor_id = acceptor.public_id;
    r.acceptor_seq = seq;
    r.sig = sign(acceptor, receipt_message(tx, r.acceptor_id, seq));
    tx.receipt = r;
    return tx;
}

Transaction mark(Transaction tx, const KeyPair& censor, const std::string& why) {
    CensorshipMark m;
    m.censor_id = censor.public_id;
    m.reason = to_bytes(why);
    m.sig = sign(censor, censorship_message(tx, m.reason));
    tx.censorship = m;
    return tx;
}

Transaction make_admin(const KeyPair& signer, const Bytes& payload) {
    Transaction tx;
    tx.kind = TxKind::Administrative;
    tx.admin_payload = payload;
    tx.admin_signer = signer.public_id;
    tx.admin_sig = sign(signer, encode_tx_body(tx));
    return tx;
}

// Independent re-statement of the validation contract, used as an oracle.
Reason oracle_validate(const Transaction& tx, const AccountMap& st) {
    auto malformed = Reason::Malformed;
    if (tx.kind == TxKind::Send) {
        if (tx.inputs.empty() || tx.outputs.empty() || !tx.admin_payload.empty())
            return malformed;
        std::set<Address> addrs;
        unsigned __int128 in_sum = 0, out_sum = 0;
        for (const auto& in : tx.inputs) {
            if (!addrs.insert(in.address).second) return malformed;
            in_sum += in.amount;
        }
        for (const auto& out : tx.outputs) out_sum += out.amount;
        if (in_sum > UINT64_MAX || out_sum > UINT64_MAX) return malformed;
        if (in_sum != out_sum) return malformed; // zero-fee invariant
    } else {
        if (!tx.inputs.empty() || !tx.outputs.empty() || tx.admin_payload.empty())
            return malformed;
    }
    Bytes body = encode_tx_body(tx);
    for (const auto& in : tx.inputs)
        if (!verify(in.address, body, in.sig)) return Reason::BadSignature;
    if (tx.kind == TxKind::Administrative &&
        !verify(tx.admin_signer, body, tx.admin_sig))
        return Reason::BadSignature;
    for (const auto& in : tx.inputs) {
        auto it = st.find(in.address);
        uint64_t balance = it == st.end() ? 0 : it->second.balance;
        uint64_t nonce = it == st.end() ? 0 : it->second.next_nonce;
        if (it == st.end() || balance < in.amount) return Reason::InsufficientBalance;
        if (in.nonce != nonce) return Reason::BadNonce;
    }
    return Reason::None;
}

} // namespace

TEST_CASE("transaction encoding round-trips in every shape") {
    KeyPair a = key(1), b = key(2), acc = key(3), cen = key(4);
    std::vector<Transaction> shapes;
    shapes.push_back(make_send(a, b, 10, 0));
    shapes.push_back(stamp(make_send(a, b, 10, 0), acc, 7));
    shapes.push_back(mark(stamp(make_send(a, b, 10, 0), acc, 7), cen, "blocked"));
    shapes.push_back(make_admin(a, make_outage_payload(a.public_id, 5, 9)));
    shapes.push_back(
        stamp(make_admin(a, make_omission_payload(a.public_id, b.public_id, 0, 3)), acc, 8));
    for (const auto& tx : shapes) {
        Bytes enc = encode_tx(tx);
        Transaction back = decode_tx(enc);
        CHECK(encode_tx(back) == enc);
        CHECK(tx_digest(kKind, back) == tx_digest(kKind, tx));
    }
}

TEST_CASE("identity digest covers the receipt but not the censorship mark") {
    KeyPair a = key(1), b = key(2), acc = key(3), cen = key(4);
    Transaction plain = stamp(make_send(a, b, 5, 0), acc, 1);
    Transaction censored = mark(plain, cen, "blacklisted");
    CHECK(tx_digest(kKind, plain) == tx_digest(kKind, censored));

    Transaction other_receipt = stamp(make_send(a, b, 5, 0), acc, 2);
    CHECK(tx_digest(kKind, plain) != tx_digest(kKind, other_receipt));
    CHECK(encode_tx(plain) != encode_tx(censored)); // full wire form still differs
}

TEST_CASE("receipts bind acceptor, sequence, and transaction core") {
    KeyPair a = key(1), b = key(2), acc = key(3);
    Transaction tx = stamp(make_send(a, b, 5, 0), acc, 1);
    CHECK(verify_receipt(tx));

    Transaction wrong_seq = tx;
    wrong_seq.receipt->acceptor_seq = 2;
    CHECK_FALSE(verify_receipt(wrong_seq));

    Transaction wrong_acceptor = tx;
    wrong_acceptor.receipt->acceptor_id = key(9).public_id;
    CHECK_FALSE(verify_receipt(wrong_acceptor));

    // The receipt covers the input signatures (the core), so re-signing the
    // same body with different randomness is not possible and mutating a
    // signature invalidates the receipt.
    Transaction tampered = tx;
    tampered.inputs[0].sig[0] ^= 1;
    CHECK_FALSE(verify_receipt(tampered));
}

TEST_CASE("well-formedness rejections") {
    KeyPair a = key(1), b = key(2);
    AccountMap st{{a.public_id, {100, 0}}};

    Transaction no_out = make_send(a, b, 10, 0);
    no_out.outputs.clear();
    no_out.inputs[0].sig = sign(a, encode_tx_body(no_out));
    CHECK(validate_against_state(no_out, st).reason == Reason::Malformed);

    Transaction dup = make_send(a, b, 10, 0);
    dup.inputs.push_back(dup.inputs[0]);
    CHECK(validate_against_state(dup, st).reason == Reason::Malformed);

    Transaction fee = make_send(a, b, 10, 0);
    fee.outputs[0].amount = 9; // would leave a fee, which the policy forbids
    fee.inputs[0].sig = sign(a, encode_tx_body(fee));
    CHECK(validate_against_state(fee, st).reason == Reason::Malformed);

    Transaction overflow;
    overflow.inputs.push_back({a.public_id, UINT64_MAX, 0, {}});
    overflow.inputs.push_back({b.public_id, 2, 0, {}});
    overflow.outputs.push_back({b.public_id, 1});
    CHECK(validate_against_state(overflow, st).reason == Reason::Malformed);

    Transaction admin_with_io = make_admin(a, make_outage_payload(a.public_id, 1, 2));
    admin_with_io.outputs.push_back({b.public_id, 1});
    CHECK(validate_against_state(admin_with_io, st).reason == Reason::Malformed);

    Transaction empty_admin = make_admin(a, Bytes{});
    CHECK(validate_against_state(empty_admin, st).reason == Reason::Malformed);
}

TEST_CASE("stateful validation: balances and exact nonces") {
    KeyPair a = key(1), b = key(2);
    AccountMap st{{a.public_id, {50, 3}}};

    CHECK(validate_against_state(make_send(a, b, 50, 3), st).valid());
    CHECK(validate_against_state(make_send(a, b, 51, 3), st).reason ==
          Reason::InsufficientBalance);
    CHECK(validate_against_state(make_send(b, a, 1, 0), st).reason ==
          Reason::InsufficientBalance); // unknown account
    CHECK(validate_against_state(make_send(a, b, 10, 2), st).reason == Reason::BadNonce);
    CHECK(validate_against_state(make_send(a, b, 10, 4), st).reason == Reason::BadNonce);

    Transaction forged = make_send(a, b, 10, 3);
    forged.inputs[0].sig = sign(b, encode_tx_body(forged));
    CHECK(validate_against_state(forged, st).reason == Reason::BadSignature);
}

TEST_CASE("validation agrees with an independent oracle over a generated corpus") {
    std::vector<KeyPair> keys = {key(1), key(2), key(3)};
    AccountMap st;
    st[keys[0].public_id] = {30, 1};
    st[keys[1].public_id] = {0, 0};
    // keys[2] deliberately absent.

    std::vector<Transaction> corpus;
    for (size_t from = 0; from < 3; ++from)
        for (size_t to = 0; to < 3; ++to)
            for (uint64_t amount : {0ull, 1ull, 30ull, 31ull})
                for (uint64_t nonce : {0ull, 1ull, 2ull})
                    corpus.push_back(make_send(keys[from], keys[to], amount, nonce));
    corpus.push_back(make_admin(keys[0], make_outage_payload(keys[0].public_id, 1, 2)));
    {
        Transaction bad_sig = make_send(keys[0], keys[1], 1, 1);
        bad_sig.inputs[0].sig[10] ^= 1;
        corpus.push_back(bad_sig);
        Transaction two_in;
        two_in.inputs.push_back({keys[0].public_id, 10, 1, {}});
        two_in.inputs.push_back({keys[1].public_id, 0, 0, {}});
        two_in.outputs.push_back({keys[2].public_id, 10});
        Bytes body = encode_tx_body(two_in);
        two_in.inputs[0].sig = sign(keys[0], body);
        two_in.inputs[1].sig = sign(keys[1], body);
        corpus.push_back(two_in);
    }
    for (const auto& tx : corpus) {
        CAPTURE(to_hex(encode_tx_body(tx)));
        CHECK(validate_against_state(tx, st).reason == oracle_validate(tx, st));
    }
}

TEST_CASE("apply conserves total supply and advances nonces") {
    KeyPair a = key(1), b = key(2), c = key(3);
    AccountMap st{{a.public_id, {100, 0}}, {b.public_id, {20, 5}}};

    Transaction tx;
    tx.inputs.push_back({a.public_id, 40, 0, {}});
    tx.inputs.push_back({b.public_id, 5, 5, {}});
    tx.outputs.push_back({c.public_id, 44});
    tx.outputs.push_back({a.public_id, 1});
    Bytes body = encode_tx_body(tx);
    tx.inputs[0].sig = sign(a, body);
    tx.inputs[1].sig = sign(b, body);
    REQUIRE(validate_against_state(tx, st).valid());

    AccountMap next = fairledger::apply(tx, st);
    CHECK(next[a.public_id].balance == 61);
    CHECK(next[a.public_id].next_nonce == 1);
    CHECK(next[b.public_id].balance == 15);
    CHECK(next[b.public_id].next_nonce == 6);
    CHECK(next[c.public_id].balance == 44);
    uint64_t before = 0, after = 0;
    for (auto& [_, acct] : st) before += acct.balance;
    for (auto& [_, acct] : next) after += acct.balance;
    CHECK(before == after);
}

TEST_CASE("basic check gates receipts and censorship-mark signatures") {
    KeyPair a = key(1), b = key(2), acc = key(3), cen = key(4);
    Transaction bare = make_send(a, b, 5, 0);
    CHECK(make_basic_check(bare).reason == Reason::BadReceipt);

    Transaction ok = stamp(bare, acc, 0);
    CHECK(make_basic_check(ok).valid());

    Transaction marked = mark(ok, cen, "why");
    CHECK(make_basic_check(marked).valid());
    marked.censorship->sig[0] ^= 1;
    CHECK(make_basic_check(marked).reason == Reason::Malformed);

    // Submission checks reject anything already stamped.
    CHECK(check_submission(bare).valid());
    CHECK(check_submission(ok).reason == Reason::Malformed);
}

TEST_CASE("block encoding, hash, and proposer signature") {
    KeyPair a = key(1), b = key(2), acc = key(3), prop = key(5);
    Block blk;
    blk.height = 4;
    blk.prev_hash = hash(kKind, to_bytes("prev"));
    blk.proposer_id = prop.public_id;
    blk.txs.push_back({stamp(make_send(a, b, 5, 0), acc, 0), Disposition::Processed,
                       Reason::None});
    blk.txs.push_back({stamp(make_send(b, a, 1, 0), acc, 1), Disposition::Rejected,
                       Reason::InsufficientBalance});
    blk.outqueue_root = hash(kKind, to_bytes("root"));
    blk.prefix_disclosure = to_bytes("pt");
    blk.state_root = hash(kKind, to_bytes("state"));
    blk.proposer_sig = sign(prop, encode_block_unsigned(blk));

    CHECK(verify_block_signature(blk));
    Bytes enc = encode_block(blk);
    Block back = decode_block(enc);
    CHECK(encode_block(back) == enc);
    CHECK(block_hash(kKind, back) == block_hash(kKind, blk));

    Block tweaked = blk;
    tweaked.height = 5;
    CHECK(block_hash(kKind, tweaked) != block_hash(kKind, blk));
    CHECK_FALSE(verify_block_signature(tweaked));
}

TEST_CASE("account state round-trips and its root is canonical") {
    KeyPair a = key(1), b = key(2);
    AccountMap st{{a.public_id, {7, 1}}, {b.public_id, {9, 0}}};
    CHECK(decode_state(encode_state(st)) == st);
    // std::map iteration is address-ordered, so the root is insertion-order
    // independent by construction.
    AccountMap st2;
    st2[b.public_id] = {9, 0};
    st2[a.public_id] = {7, 1};
    CHECK(state_root(kKind, st) == state_root(kKind, st2));
    st2[a.public_id].balance = 8;
    CHECK(state_root(kKind, st) != state_root(kKind, st2));
}

TEST_CASE("reason codes are wire-stable") {
    CHECK(static_cast<int>(Reason::BadSignature) == 1);
    CHECK(static_cast<int>(Reason::InsufficientBalance) == 2);
    CHECK(static_cast<int>(Reason::BadNonce) == 3);
    CHECK(static_cast<int>(Reason::Malformed) == 4);
    CHECK(static_cast<int>(Reason::BadReceipt) == 5);
    CHECK(static_cast<int>(Reason::Censored) == 6);
    CHECK(reason_name(Reason::Censored) == std::string("Censored"));
}

TEST_CASE("malformed transaction bytes fail to decode") {
    KeyPair a = key(1), b = key(2);
    Bytes enc = encode_tx(make_send(a, b, 5, 0));
    CHECK_THROWS_AS(decode_tx(ByteView(enc.data(), enc.size() - 1)), CodecError);
    Bytes trailing = enc;
    trailing.push_back(0);
    CHECK_THROWS_AS(decode_tx(trailing), CodecError);
    Bytes bad_kind = enc;
    bad_kind[0] = 9;
    CHECK_THROWS_AS(decode_tx(bad_kind), CodecError);
}
