// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <catch2/catch_amalgamated.hpp>

#include <esspi/ledger.hpp>

using namespace esspi;

namespace {

DagParams& params()
{
    static DagParams p = DagParams::generate(Bytes(32, 0x17));
    return p;
}

// A taproot output with a single CSIGV(A.Y) leaf and a CSEQV timeout leaf.
struct TwoPathOutput {
    TaprootAddress addr;
    Script spend_leaf;
    Script timeout_leaf;

    static TwoPathOutput make(uint32_t timelock)
    {
        Script spend;
        spend.ops.push_back(op_csigv(params().key("A.Y").pub));
        Script timeout;
        timeout.ops.push_back(op_cseqv(timelock));
        timeout.ops.push_back(op_csigv(params().key("B.cov").pub));
        TaprootAddress addr = taproot_address({TapLeaf{kTapLeafVersion, spend.serialize()},
                                               TapLeaf{kTapLeafVersion, timeout.serialize()}});
        return {addr, spend, timeout};
    }

    size_t leaf_index(const Script& s) const
    {
        return *addr.tree.find_leaf(s.serialize());
    }
};

Tx make_spend(const OutPoint& prev, uint64_t amount, uint32_t sequence = 0xfffffffe)
{
    Tx tx;
    TxIn in;
    in.prevout = prev;
    in.sequence = sequence;
    tx.inputs.push_back(in);
    tx.outputs.push_back(TxOut{amount, Bytes{0x51}});
    return tx;
}

void sign_taproot_input(Tx& tx, uint32_t index, const std::vector<TxOut>& spent,
                        const TwoPathOutput& out, const Script& leaf, const Bytes& secret)
{
    Bytes script_bytes = leaf.serialize();
    Digest32 lh = tapleaf_hash(TapLeaf{kTapLeafVersion, script_bytes});
    Digest32 digest = taproot_sighash(tx, index, spent, kSighashAll,
                                      TapScriptExt{lh, 0, 0xffffffff});
    Bytes sig = schnorr_sign(secret, digest);
    sig.push_back(0x01);
    tx.inputs[index].witness = {sig, script_bytes, out.addr.control_block(out.leaf_index(leaf))};
}

} // namespace

TEST_CASE("submit, mine and conservation", "[ledger]")
{
    Ledger ledger;
    TwoPathOutput out = TwoPathOutput::make(10);
    OutPoint fund = ledger.fund(TxOut{100'000, out.addr.script_pubkey()});
    ledger.mine();

    Tx spend = make_spend(fund, 90'000);
    sign_taproot_input(spend, 0, {*ledger.utxo(fund)}, out, out.spend_leaf,
                       params().key("A.Y").secret);
    SubmitResult r = ledger.submit(spend);
    REQUIRE(r.accepted);
    CHECK(ledger.mempool_size() == 1);
    ledger.mine();

    CHECK(ledger.is_unspent(OutPoint{r.tx_id, 0}));
    CHECK_FALSE(ledger.is_unspent(fund));
    CHECK(ledger.total_fees() == 10'000);

    // conservation: funded = utxo sum + fees
    CHECK(ledger.total_funded() == 90'000 + ledger.total_fees());
}

TEST_CASE("relative timelock maturity boundary", "[ledger]")
{
    const uint32_t T = 10;
    Ledger ledger;
    TwoPathOutput out = TwoPathOutput::make(T);
    // fund() confirms at the current height; 0 blocks on top yet
    OutPoint fund = ledger.fund(TxOut{100'000, out.addr.script_pubkey()});

    Tx punish = make_spend(fund, 90'000, T);
    sign_taproot_input(punish, 0, {*ledger.utxo(fund)}, out, out.timeout_leaf,
                       params().key("B.cov").secret);

    ledger.mine(T - 1);
    CHECK(ledger.confirmations(fund) == T - 1);
    SubmitResult early = ledger.submit(punish);
    CHECK_FALSE(early.accepted);
    CHECK(early.reason.find("mature") != std::string::npos);

    ledger.mine(1);
    CHECK(ledger.confirmations(fund) == T);
    CHECK(ledger.submit(punish).accepted);
}

TEST_CASE("double spends are rejected", "[ledger]")
{
    Ledger ledger;
    TwoPathOutput out = TwoPathOutput::make(10);
    OutPoint fund = ledger.fund(TxOut{100'000, out.addr.script_pubkey()});
    ledger.mine();
    std::vector<TxOut> spent = {*ledger.utxo(fund)};

    Tx first = make_spend(fund, 90'000);
    sign_taproot_input(first, 0, spent, out, out.spend_leaf, params().key("A.Y").secret);
    Tx second = make_spend(fund, 80'000);
    sign_taproot_input(second, 0, spent, out, out.spend_leaf, params().key("A.Y").secret);

    REQUIRE(ledger.submit(first).accepted);
    CHECK_FALSE(ledger.submit(second).accepted); // mempool conflict
    ledger.mine();
    CHECK_FALSE(ledger.submit(second).accepted); // prevout gone
}

TEST_CASE("replacement exposes both signatures", "[ledger]")
{
    Ledger ledger;
    TwoPathOutput out = TwoPathOutput::make(10);
    OutPoint fund = ledger.fund(TxOut{100'000, out.addr.script_pubkey()});
    ledger.mine();
    std::vector<TxOut> spent = {*ledger.utxo(fund)};

    Tx first = make_spend(fund, 90'000);
    sign_taproot_input(first, 0, spent, out, out.spend_leaf, params().key("A.Y").secret);
    Tx variant = make_spend(fund, 85'000);
    sign_taproot_input(variant, 0, spent, out, out.spend_leaf, params().key("A.Y").secret);

    REQUIRE(ledger.submit(first).accepted);
    SubmitResult r = ledger.replace(txid(first), variant);
    REQUIRE(r.accepted);
    REQUIRE(ledger.replaced().size() == 1);
    // both signatures observable for a grinding proof
    CHECK(ledger.replaced()[0].inputs[0].witness[0] != variant.inputs[0].witness[0]);

    CHECK_FALSE(ledger.replace(txid(first), variant).accepted); // no longer there
}

TEST_CASE("script failures reject with reasons", "[ledger]")
{
    Ledger ledger;
    TwoPathOutput out = TwoPathOutput::make(10);
    OutPoint fund = ledger.fund(TxOut{100'000, out.addr.script_pubkey()});
    ledger.mine();
    std::vector<TxOut> spent = {*ledger.utxo(fund)};

    // wrong key
    Tx bad = make_spend(fund, 90'000);
    sign_taproot_input(bad, 0, spent, out, out.spend_leaf, params().key("A.W").secret);
    CHECK_FALSE(ledger.submit(bad).accepted);

    // tampered control block
    Tx bad2 = make_spend(fund, 90'000);
    sign_taproot_input(bad2, 0, spent, out, out.spend_leaf, params().key("A.Y").secret);
    bad2.inputs[0].witness[2][5] ^= 1;
    SubmitResult r2 = ledger.submit(bad2);
    CHECK_FALSE(r2.accepted);
    CHECK(r2.reason.find("control block") != std::string::npos);

    // outputs exceeding inputs
    Tx greedy = make_spend(fund, 200'000);
    sign_taproot_input(greedy, 0, spent, out, out.spend_leaf, params().key("A.Y").secret);
    CHECK_FALSE(ledger.submit(greedy).accepted);

    // unknown prevout
    Tx orphan = make_spend(OutPoint{sha256(str_bytes("nope")), 0}, 1000);
    CHECK_FALSE(ledger.submit(orphan).accepted);
}

TEST_CASE("identical submission sequences give identical ledgers", "[ledger]")
{
    auto run = [] {
        Ledger ledger;
        TwoPathOutput out = TwoPathOutput::make(5);
        OutPoint fund = ledger.fund(TxOut{100'000, out.addr.script_pubkey()});
        ledger.mine();
        Tx spend = make_spend(fund, 90'000);
        sign_taproot_input(spend, 0, {*ledger.utxo(fund)}, out, out.spend_leaf,
                           params().key("A.Y").secret);
        ledger.submit(spend);
        ledger.mine(3);
        return ledger.dump().dump();
    };
    CHECK(run() == run());
}

TEST_CASE("dump/restore roundtrip", "[ledger]")
{
    Ledger ledger;
    TwoPathOutput out = TwoPathOutput::make(5);
    ledger.fund(TxOut{50'000, out.addr.script_pubkey()});
    ledger.mine(2);
    nlohmann::json snapshot = ledger.dump();
    Ledger copy = Ledger::restore(snapshot);
    CHECK(copy.dump() == snapshot);
    CHECK(copy.height() == ledger.height());
    CHECK(copy.utxo_count() == ledger.utxo_count());
}
