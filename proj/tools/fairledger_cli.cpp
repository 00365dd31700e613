// Command-line front end: scenario runner, audit summary, proof checking,
// and golden-vector generation.
//
// Exit codes: 0 success / property holds, 1 violation or failed check,
// 2 usage or input error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fairledger/audit.hpp"
#include "fairledger/simnet.hpp"

using namespace fairledger;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << data;
}

std::string pretty_record(const ReportRecord& rec) {
    std::ostringstream os;
    os << "t=" << rec.tick
       << (rec.report.kind == ReportKind::Proof ? " PROOF " : " claim ")
       << rec.report.rule << " accused=" << id_hex(rec.report.accused).substr(0, 12);
    if (rec.report.kind == ReportKind::Proof)
        os << (rec.proof_verified ? " [verified]" : " [UNVERIFIED]");
    return os.str();
}

Scenario load_scenario(const std::string& path, uint64_t seed_override,
                       const std::string& policy_override) {
    Scenario sc = path.empty() ? Scenario{} : scenario_from_json(read_file(path));
    if (seed_override) sc.seed = seed_override;
    if (!policy_override.empty()) {
        auto p = parse_policy(policy_override);
        if (!p) throw std::runtime_error("bad policy: " + policy_override);
        sc.policy = *p;
    }
    return sc;
}

void dump_reports(const SimResult& res, const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (size_t i = 0; i < res.records.size(); ++i) {
        Bytes enc = encode_report(res.records[i].report);
        write_file(dir + "/report_" + std::to_string(i) + ".bin",
                   std::string(enc.begin(), enc.end()));
    }
}

// Golden vectors are generated from fixed seeds so they can be regenerated
// bit-identically and diffed against the committed copies.
std::string gen_chain_vectors(HashKind kind) {
    std::ostringstream os;
    uint64_t s = kind == HashKind::Sha256 ? 0xC0FFEEULL : 0xBEEFULL;
    Digest h = Digest::zero(digest_len(kind));
    for (int i = 0; i < 32; ++i) {
        Bytes input;
        size_t len = 1 + i % 7;
        for (size_t b = 0; b < len; ++b) {
            s = xorshift64(s);
            input.push_back(static_cast<uint8_t>(s));
        }
        h = chain_hash(kind, h, input);
        os << to_hex(input) << " " << h.hex() << "\n";
    }
    return os.str();
}

std::string gen_owac_vectors() {
    std::ostringstream os;
    ChannelConfig cfg;
    KeyPair sender = KeyPair::from_seed(uint64_t{7});
    KeyPair receiver = KeyPair::from_seed(uint64_t{8});
    cfg.conn_id = make_conn_id(sender.public_id, receiver.public_id);
    cfg.grace_period = 2;
    cfg.sender_id = sender.public_id;
    cfg.receiver_id = receiver.public_id;
    OwacSender s(cfg, sender, HashKind::Ripemd160);
    OwacReceiver r(cfg, receiver, HashKind::Ripemd160);
    ReceiverHooks hooks;
    for (int i = 0; i < 3; ++i) {
        auto m = s.send(to_bytes("payload-" + std::to_string(i)));
        os << to_hex(encode_owac_message(*m)) << "\n";
        r.on_message(*m, hooks);
    }
    hooks.send_conf_policy = [](int64_t, int64_t, int64_t) { return true; };
    auto c = r.maybe_confirm(hooks);
    os << to_hex(encode_confirmation(*c)) << "\n";
    return os.str();
}

int cmd_gen_vectors(const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir + "/chain_ripemd160.txt", gen_chain_vectors(HashKind::Ripemd160));
    write_file(out_dir + "/chain_sha256.txt", gen_chain_vectors(HashKind::Sha256));
    write_file(out_dir + "/owac_frames.txt", gen_owac_vectors());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairledger: accountable-channel ledger simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_path, reports_dir, format = "json-lines";
    std::string policy_override, report_path, vectors_dir = "tests/testdata";
    uint64_t seed_override = 0;
    std::string hash_name = "ripemd160";

    auto* run = app.add_subcommand("run", "run a scenario and emit its trace");
    run->add_option("--scenario", scenario_path, "scenario JSON file");
    run->add_option("--out", out_path, "trace output file (default stdout)");
    run->add_option("--seed", seed_override, "override scenario seed");
    run->add_option("--policy", policy_override, "override policy (fixed:N | bytes:N)");
    run->add_option("--format", format)
        ->check(CLI::IsMember({"json-lines", "pretty"}));
    run->add_option("--reports-dir", reports_dir, "write encoded reports here");

    auto* audit = app.add_subcommand("audit", "run a scenario and summarize detections");
    audit->add_option("--scenario", scenario_path);
    audit->add_option("--seed", seed_override);
    audit->add_option("--policy", policy_override);
    audit->add_option("--reports-dir", reports_dir);

    auto* verify = app.add_subcommand("verify-proof", "check a self-certifying report");
    verify->add_option("report", report_path, "encoded report file")->required();
    verify->add_option("--hash", hash_name)->check(CLI::IsMember({"ripemd160", "sha256"}));
    verify->add_option("--policy", policy_override,
                       "genesis selection policy (default fixed:128)");

    auto* gen = app.add_subcommand("gen-vectors", "regenerate golden test vectors");
    gen->add_option("--out", vectors_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            Scenario sc = load_scenario(scenario_path, seed_override, policy_override);
            SimResult res = run_scenario(sc);
            std::ostringstream os;
            if (format == "pretty") {
                os << "blocks=" << res.blocks.size()
                   << " delivered=" << res.messages_delivered
                   << " submitted=" << res.txs_submitted
                   << " reports=" << res.records.size()
                   << " censor_marks=" << res.censor_marks_committed << "\n";
                for (const auto& rec : res.records) os << pretty_record(rec) << "\n";
            } else {
                for (const auto& line : res.trace) os << line << "\n";
            }
            if (out_path.empty())
                std::cout << os.str();
            else
                write_file(out_path, os.str());
            if (!reports_dir.empty()) dump_reports(res, reports_dir);
            return detections_match(sc, res) ? 0 : 1;
        }
        if (audit->parsed()) {
            Scenario sc = load_scenario(scenario_path, seed_override, policy_override);
            SimResult res = run_scenario(sc);
            for (const auto& rec : res.records)
                std::cout << pretty_record(rec) << "\n";
            if (!reports_dir.empty()) dump_reports(res, reports_dir);
            return res.records.empty() ? 0 : 1;
        }
        if (verify->parsed()) {
            std::string blob = read_file(report_path);
            ViolationReport rep =
                decode_report(Bytes(blob.begin(), blob.end()));
            HashKind kind =
                hash_name == "sha256" ? HashKind::Sha256 : HashKind::Ripemd160;
            SelectionPolicy policy;
            if (!policy_override.empty()) {
                auto p = parse_policy(policy_override);
                if (!p) throw std::runtime_error("bad policy: " + policy_override);
                policy = *p;
            }
            bool ok = verify_any_proof(rep, kind, node_propagation_rules(kind), policy);
            std::cout << (rep.kind == ReportKind::Proof ? "proof " : "claim ")
                      << rep.rule << ": " << (ok ? "VALID" : "NOT SELF-CERTIFYING")
                      << "\n";
            return ok ? 0 : 1;
        }
        if (gen->parsed()) return cmd_gen_vectors(vectors_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
