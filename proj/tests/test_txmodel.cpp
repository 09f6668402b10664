// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include <esspi/sighash.hpp>
#include <esspi/taproot.hpp>
#include <esspi/tx.hpp>

#include "fixture_util.hpp"

using namespace esspi;

static Tx random_tx(std::mt19937_64& rng)
{
    Tx tx;
    tx.version = static_cast<uint32_t>(rng() % 3);
    tx.locktime = static_cast<uint32_t>(rng() % 1000);
    size_t nin = 1 + rng() % 3, nout = 1 + rng() % 4;
    for (size_t i = 0; i < nin; ++i) {
        TxIn in;
        for (auto& b : in.prevout.txid.b) b = static_cast<uint8_t>(rng());
        in.prevout.vout = static_cast<uint32_t>(rng() % 5);
        in.sequence = static_cast<uint32_t>(rng());
        if (rng() % 2) {
            in.script_sig.resize(rng() % 20);
            for (auto& b : in.script_sig) b = static_cast<uint8_t>(rng());
        }
        size_t items = rng() % 3;
        for (size_t k = 0; k < items; ++k) {
            Bytes item(rng() % 16);
            for (auto& b : item) b = static_cast<uint8_t>(rng());
            in.witness.push_back(item);
        }
        tx.inputs.push_back(std::move(in));
    }
    for (size_t i = 0; i < nout; ++i) {
        TxOut out;
        out.amount = rng() % 1'000'000;
        out.script_pubkey.resize(1 + rng() % 40);
        for (auto& b : out.script_pubkey) b = static_cast<uint8_t>(rng());
        tx.outputs.push_back(std::move(out));
    }
    return tx;
}

TEST_CASE("serialization roundtrip on randomized transactions", "[txmodel]")
{
    std::mt19937_64 rng(41);
    for (int i = 0; i < 50; ++i) {
        Tx tx = random_tx(rng);
        CHECK(parse_tx(serialize_tx(tx, true)) == tx);
        Tx no_wit = tx;
        for (auto& in : no_wit.inputs) in.witness.clear();
        CHECK(parse_tx(serialize_tx(tx, false)) == no_wit);
    }
}

TEST_CASE("txid fixtures from independent serializer", "[txmodel]")
{
    auto j = load_fixture("txid_vectors.json");
    for (const auto& v : j["vectors"]) {
        Tx tx = parse_tx(jhex(v["tx"]));
        CHECK(serialize_tx(tx, false) == jhex(v["tx"]));
        CHECK(txid(tx).hex() == v["txid"].get<std::string>());

        Tx wtx = parse_tx(jhex(v["tx_with_witness"]));
        CHECK(serialize_tx(wtx, true) == jhex(v["tx_with_witness"]));
        CHECK(txid(wtx).hex() == v["witness_txid"].get<std::string>());
    }
}

TEST_CASE("txid ignores witness, covers outputs", "[txmodel]")
{
    std::mt19937_64 rng(43);
    Tx tx = random_tx(rng);
    Digest32 id = txid(tx);

    Tx mutated_witness = tx;
    mutated_witness.inputs[0].witness.push_back(str_bytes("extra"));
    CHECK(txid(mutated_witness) == id);

    Tx mutated_out = tx;
    mutated_out.outputs[0].amount += 1;
    CHECK_FALSE(txid(mutated_out) == id);
}

TEST_CASE("legacy signed message fixtures", "[txmodel]")
{
    auto j = load_fixture("legacy_sighash_vectors.json");
    REQUIRE(j["vectors"].size() >= 5);
    for (const auto& v : j["vectors"]) {
        Tx tx = parse_tx(jhex(v["tx"]));
        Bytes script_code = jhex(v["script_code"]);
        SighashFlag flag = SighashFlag::from_byte(v["hash_type"].get<uint8_t>());
        Bytes dprime = legacy_signed_message(tx, v["input_index"].get<uint32_t>(), script_code, flag);
        CHECK(hex(dprime) == v["d_prime"].get<std::string>());
        CHECK(sha256(dprime).hex() == v["v"].get<std::string>());
        CHECK(sha256d(dprime).hex() == v["sighash"].get<std::string>());
    }
}

TEST_CASE("legacy message structure", "[txmodel]")
{
    std::mt19937_64 rng(44);
    Tx tx = random_tx(rng);
    while (tx.inputs.size() < 2) tx.inputs.push_back(tx.inputs[0]);
    Bytes code = {0x51, 0x52, 0x53};

    Bytes d0 = legacy_signed_message(tx, 0, code, kSighashAll);
    // input 0 carries the script code, input 1 an empty script
    Tx parsed = parse_tx(ByteSpan(d0.data(), d0.size() - 4));
    CHECK(parsed.inputs[0].script_sig == code);
    CHECK(parsed.inputs[1].script_sig.empty());
    CHECK(read_le32(d0.data() + d0.size() - 4) == 0x01);

    CHECK_THROWS_AS(legacy_signed_message(tx, 99, code, kSighashAll), std::out_of_range);
}

TEST_CASE("taproot signature message fixtures", "[txmodel]")
{
    auto j = load_fixture("taproot_sighash_vectors.json");
    REQUIRE(j["vectors"].size() >= 5);
    for (const auto& v : j["vectors"]) {
        Tx tx = parse_tx(jhex(v["tx"]));
        std::vector<TxOut> spent;
        for (const auto& s : v["spent_outputs"])
            spent.push_back(TxOut{s["amount"].get<uint64_t>(), jhex(s["script_pubkey"])});
        uint8_t ht = v["hash_type"].get<uint8_t>();
        SighashFlag flag = SighashFlag::from_byte(ht);
        std::optional<TapScriptExt> ext;
        if (!v["tapleaf_hash"].is_null())
            ext = TapScriptExt{Digest32::from_bytes(jhex(v["tapleaf_hash"])), 0, 0xffffffff};
        std::optional<Bytes> annex;
        if (!v["annex"].is_null()) annex = jhex(v["annex"]);

        Bytes msg = taproot_sigmsg(tx, v["input_index"].get<uint32_t>(), spent, flag, ext, annex, ht);
        CHECK(hex(msg) == v["sigmsg"].get<std::string>());
        CHECK(taproot_sighash_from_msg(msg).hex() == v["sighash"].get<std::string>());
    }
}

TEST_CASE("field inclusion matrix matches the flag annotations", "[txmodel]")
{
    std::mt19937_64 rng(45);
    Tx tx = random_tx(rng);
    while (tx.outputs.size() <= tx.inputs.size()) tx.outputs.push_back(tx.outputs[0]);
    std::vector<TxOut> spent(tx.inputs.size(), TxOut{1000, {0x51}});

    for (uint8_t base : {0x01, 0x02, 0x03}) {
        for (bool acp : {false, true}) {
            for (bool with_ext : {false, true}) {
                for (bool with_annex : {false, true}) {
                    SighashFlag flag{static_cast<SighashBase>(base), acp};
                    std::optional<TapScriptExt> ext;
                    if (with_ext) ext = TapScriptExt{Digest32{}, 0, 0xffffffff};
                    std::optional<Bytes> annex;
                    if (with_annex) annex = Bytes{0x50};
                    CommonSigMsg m = build_common_sigmsg(tx, 0, spent, flag, ext, annex);
                    auto fields = m.present_fields();
                    auto has = [&](const std::string& name) {
                        return std::find(fields.begin(), fields.end(), name) != fields.end();
                    };
                    // ~SIGHASH_ANYONECANPAY rows
                    CHECK(has("sha_prevouts") == !acp);
                    CHECK(has("sha_amounts") == !acp);
                    CHECK(has("sha_scriptPubkeys") == !acp);
                    CHECK(has("sha_sequences") == !acp);
                    CHECK(has("input_index") == !acp);
                    // per-input rows only for ANYONECANPAY
                    CHECK(has("outpoint") == acp);
                    CHECK(has("amount") == acp);
                    CHECK(has("scriptPubKey") == acp);
                    CHECK(has("nSequence") == acp);
                    // ~(NONE or SINGLE)
                    CHECK(has("sha_outputs") == (base == 0x01));
                    CHECK(has("sha_single_output") == (base == 0x03));
                    CHECK(has("sha_annex") == with_annex);
                    CHECK(has("tapleaf_hash") == with_ext);
                    CHECK(m.spend_type == (with_ext ? 2 : 0) + (with_annex ? 1 : 0));

                    // row order is Table order: serialization length must add up
                    CHECK(m.serialize().size() ==
                          1 + 4 + 4 + (acp ? 0 : 4 * 32) + (base == 0x01 ? 32 : 0) + 1 +
                              (acp ? 36 + 8 + 1 + spent[0].script_pubkey.size() + 4 : 4) +
                              (with_annex ? 32 : 0) + (base == 0x03 ? 32 : 0) +
                              (with_ext ? 37 : 0));
                }
            }
        }
    }
}

TEST_CASE("sha_outputs equals sha_single_output iff single output", "[txmodel]")
{
    std::mt19937_64 rng(46);
    for (size_t nout = 1; nout <= 4; ++nout) {
        Tx tx = random_tx(rng);
        tx.outputs.resize(1);
        for (size_t i = 1; i < nout; ++i) tx.outputs.push_back(TxOut{100 + i, {0x51}});
        std::vector<TxOut> spent(tx.inputs.size(), TxOut{1000, {0x51}});

        CommonSigMsg all = build_common_sigmsg(tx, 0, spent, kSighashAll);
        CommonSigMsg single =
            build_common_sigmsg(tx, 0, spent, SighashFlag{SighashBase::single, false});
        REQUIRE(all.sha_outputs.has_value());
        REQUIRE(single.sha_single_output.has_value());
        CHECK((*all.sha_outputs == *single.sha_single_output) == (nout == 1));
    }
}

TEST_CASE("SIGHASH_SINGLE with no matching output is an error", "[txmodel]")
{
    std::mt19937_64 rng(47);
    Tx tx = random_tx(rng);
    tx.outputs.resize(1);
    while (tx.inputs.size() < 2) tx.inputs.push_back(tx.inputs[0]);
    std::vector<TxOut> spent(tx.inputs.size(), TxOut{1000, {0x51}});
    CHECK_THROWS_AS(build_common_sigmsg(tx, 1, spent, SighashFlag{SighashBase::single, false}),
                    std::out_of_range);
}

TEST_CASE("taproot tree fixtures", "[txmodel]")
{
    auto j = load_fixture("taptree_vectors.json");
    for (const auto& v : j["vectors"]) {
        std::vector<TapLeaf> leaves;
        for (const auto& s : v["scripts"]) leaves.push_back(TapLeaf{kTapLeafVersion, jhex(s)});
        TaprootAddress addr = taproot_address(leaves);
        for (size_t i = 0; i < leaves.size(); ++i)
            CHECK(addr.tree.leaf_hash(i).hex() == v["leaf_hashes"][i].get<std::string>());
        CHECK(addr.tree.root().hex() == v["root"].get<std::string>());
        CHECK(hex(addr.key.output_x) == v["output_key"].get<std::string>());
        CHECK(addr.key.parity == v["parity"].get<int>());
        for (size_t i = 0; i < leaves.size(); ++i) {
            const auto& path = v["paths"][i];
            const auto& got = addr.tree.merkle_path(i);
            REQUIRE(got.size() == path.size());
            for (size_t k = 0; k < path.size(); ++k)
                CHECK(got[k].hex() == path[k].get<std::string>());
            // control block verifies back to the output key
            CHECK(verify_control_block(addr.key.output_x, addr.tree.leaf_hash(i),
                                       addr.control_block(i)));
        }
    }
}

TEST_CASE("taproot tree canonical ordering and basics", "[txmodel]")
{
    TapLeaf a{kTapLeafVersion, {0x51}};
    TapLeaf b{kTapLeafVersion, {0x52}};

    TaprootAddress single = taproot_address({a});
    CHECK(single.tree.root() == tapleaf_hash(a));

    TaprootAddress ab = taproot_address({a, b});
    TaprootAddress ba = taproot_address({b, a});
    CHECK(ab.tree.root() == ba.tree.root());
    CHECK(ab.key.output_x == ba.key.output_x);

    CHECK_THROWS_AS(taproot_address({}), std::invalid_argument);

    // tampered control block fails
    Bytes control = ab.control_block(0);
    control[10] ^= 0x01;
    CHECK_FALSE(verify_control_block(ab.key.output_x, ab.tree.leaf_hash(0), control));
}
