// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_DAG_HPP
#define ESSPI_DAG_HPP

#include <optional>
#include <set>

#include <esspi/cpu.hpp>
#include <esspi/ledger.hpp>
#include <esspi/scriptvm.hpp>

namespace esspi {

enum class DagVariant { simple, ecdsa, envelope };

// How one input of a template is meant to be spent. leaf_name refers to the
// named script committed by the prevout (taproot leaf or bare script);
// covenant inputs carry both parties' signatures. Bare-script spends that go
// through an IF/ELSE path prepend the branch selector.
struct InputPlan {
    std::string leaf_name;
    bool covenant = false;
    bool taproot = true;
    std::optional<Bytes> selector;
};

struct TxTemplate {
    Tx tx;
    std::vector<InputPlan> inputs;
    bool final = true; // false: txid undefined until instantiation
};

struct DaDag {
    DagVariant variant;
    DagParams params;
    std::map<std::string, Script> scripts;
    std::map<std::string, TaprootAddress> addresses; // "KA.o1", "KA.o2", "K.o3"
    std::map<std::string, TxTemplate> txs;
    // script leaves committed by outputs of not-yet-instantiated templates
    std::vector<std::string> planned_commitments;
    OutPoint funding;
    OutPoint alice_extra; // side UTXO used by the extra-input tamper
    Bytes handle_script;  // bare handle program (simple/ecdsa variants)
    Bytes commit_script;  // bare commit-output program (ecdsa variant)

    const TxTemplate& tmpl(const std::string& name) const
    {
        auto it = txs.find(name);
        if (it == txs.end()) throw std::invalid_argument("DaDag: unknown transaction " + name);
        return it->second;
    }

    // txid of a named transaction. Templates that depend on data unknown at
    // setup (the commit/reveal pair) have no txid yet; asking for one is the
    // failed-envelope construction.
    Digest32 final_txid(const std::string& name) const
    {
        const TxTemplate& t = tmpl(name);
        if (!t.final)
            throw std::logic_error("DaDag: " + name +
                                   " cannot be pre-created: its txid depends on a transaction "
                                   "that does not exist at setup time");
        return txid(t.tx);
    }
};

namespace detail_dag {

inline Bytes op_true_script()
{
    return Bytes{0x51};
}

inline Tx sweep_to_anyone(uint64_t amount)
{
    Tx tx;
    tx.outputs.push_back(TxOut{amount, op_true_script()});
    return tx;
}

inline Bytes schnorr_sig_with_type(const Bytes& secret, const Digest32& digest, uint8_t hash_type)
{
    Bytes sig = schnorr_sign(secret, digest);
    sig.push_back(hash_type);
    return sig;
}

inline Digest32 leaf_hash_of(const Script& s)
{
    return tapleaf_hash(TapLeaf{kTapLeafVersion, s.serialize()});
}

} // namespace detail_dag

// ---------------------------------------------------------------------------
// Enveloping DA-DAG

inline DaDag build_envelope_dag(const DagParams& params, const OutPoint& funding,
                                const OutPoint& alice_extra)
{
    DaDag dag;
    dag.variant = DagVariant::envelope;
    dag.params = params;
    dag.funding = funding;
    dag.alice_extra = alice_extra;
    dag.scripts = compile_named_scripts(params);

    auto leaf = [&](const std::string& name) {
        return TapLeaf{kTapLeafVersion, dag.scripts.at(name).serialize()};
    };

    dag.addresses.emplace("KA.o1", taproot_address({leaf("script_KA_O1_CA"),
                                                    leaf("script_KA_O1_PBC")}));
    dag.addresses.emplace(
        "KA.o2", taproot_address({leaf("script_KA_O2_PBC"), leaf("script_KA_O2_PBR"),
                                  leaf("script_KA_O2_KB1"), leaf("script_F1"), leaf("script_F2"),
                                  leaf("script_F3"), leaf("script_F4")}));

    // kick-off
    TxTemplate ka;
    ka.tx.inputs.push_back(TxIn{funding, {}, 0xfffffffe, {}});
    ka.tx.outputs.push_back(TxOut{params.handle_amount, dag.addresses.at("KA.o1").script_pubkey()});
    ka.tx.outputs.push_back(TxOut{params.signal_amount, dag.addresses.at("KA.o2").script_pubkey()});
    ka.inputs.push_back({"funding", false, false});
    dag.txs["KA"] = ka;
    Digest32 ka_id = txid(ka.tx);

    // commit/reveal: placeholders until instantiation
    TxTemplate ca;
    ca.tx.inputs.push_back(TxIn{OutPoint{ka_id, 0}, {}, 0xfffffffe, {}});
    ca.tx.outputs.push_back(TxOut{params.x_amount, {}});
    ca.inputs.push_back({"script_KA_O1_CA", false, true});
    ca.final = false;
    dag.txs["CA"] = ca;

    TxTemplate ra;
    ra.inputs.push_back({"script_U", false, true});
    ra.final = false;
    dag.txs["RA"] = ra;

    TxTemplate pbr;
    pbr.inputs.push_back({"script_CA_O1_PBR", false, true});
    pbr.inputs.push_back({"script_KA_O2_PBR", false, true});
    pbr.final = false;
    dag.txs["PBR"] = pbr;

    // continuation and challenge kick-offs
    TxTemplate kb1;
    kb1.tx.inputs.push_back(TxIn{OutPoint{ka_id, 1}, {}, 0xfffffffe, {}});
    kb1.tx.outputs.push_back(TxOut{params.x_amount, detail_dag::op_true_script()});
    kb1.inputs.push_back({"script_KA_O2_KB1", false, true});
    dag.txs["KB1"] = kb1;

    TxTemplate kb2;
    kb2.tx.inputs.push_back(TxIn{OutPoint{ka_id, 1}, {}, 0xfffffffe, {}});
    kb2.tx.outputs.push_back(TxOut{params.x_amount, detail_dag::op_true_script()});
    kb2.inputs.push_back({"script_F*", false, true});
    dag.txs["KB2"] = kb2;

    // penalization for a missing commit
    TxTemplate pbc;
    pbc.tx.inputs.push_back(TxIn{OutPoint{ka_id, 0}, {}, params.timelock, {}});
    pbc.tx.inputs.push_back(TxIn{OutPoint{ka_id, 1}, {}, 0xfffffffe, {}});
    pbc.tx.outputs.push_back(TxOut{params.sweep_amount, detail_dag::op_true_script()});
    pbc.inputs.push_back({"script_KA_O1_PBC", true, true});
    pbc.inputs.push_back({"script_KA_O2_PBC", true, true});
    dag.txs["PBC"] = pbc;

    // the commit's output commits the envelope leaf and the reveal timeout
    dag.planned_commitments.push_back("script_CA_O1_PBR");

    return dag;
}

// Every covenant-marked input gets both parties' signatures over the final
// template. Mutating a template afterwards invalidates them.
inline void presign_covenants(DaDag& dag)
{
    auto find_spent = [&](const Tx& tx) {
        std::vector<TxOut> spent;
        for (const TxIn& in : tx.inputs) {
            bool found = false;
            for (const auto& [tname, t] : dag.txs) {
                if (!t.final) continue;
                if (txid(t.tx) == in.prevout.txid) {
                    spent.push_back(t.tx.outputs.at(in.prevout.vout));
                    found = true;
                    break;
                }
            }
            if (!found) throw std::logic_error("presign_covenants: unknown prevout");
        }
        return spent;
    };

    for (auto& [name, tmpl] : dag.txs) {
        if (!tmpl.final) continue;
        for (uint32_t i = 0; i < tmpl.inputs.size(); ++i) {
            if (!tmpl.inputs[i].covenant) continue;
            const std::string& leaf_name = tmpl.inputs[i].leaf_name;
            const Script& script = dag.scripts.at(leaf_name);
            Bytes script_bytes = script.serialize();

            if (tmpl.inputs[i].taproot) {
                const TaprootAddress* addr = nullptr;
                size_t leaf_index = 0;
                for (const auto& [aname, a] : dag.addresses) {
                    if (auto idx = a.tree.find_leaf(script_bytes)) {
                        addr = &a;
                        leaf_index = *idx;
                        break;
                    }
                }
                if (!addr)
                    throw std::logic_error("presign_covenants: leaf not committed: " + leaf_name);

                Digest32 digest = taproot_sighash(
                    tmpl.tx, i, find_spent(tmpl.tx), kSighashAll,
                    TapScriptExt{detail_dag::leaf_hash_of(script), 0, 0xffffffff});
                std::vector<Bytes> witness;
                witness.push_back(
                    detail_dag::schnorr_sig_with_type(dag.params.key("A.cov").secret, digest, 0x01));
                witness.push_back(
                    detail_dag::schnorr_sig_with_type(dag.params.key("B.cov").secret, digest, 0x01));
                witness.push_back(script_bytes);
                witness.push_back(addr->control_block(leaf_index));
                tmpl.tx.inputs[i].witness = witness;
            } else {
                // bare-script prevout: legacy signing rules over the full
                // program, branch selector first on the stack
                Digest32 digest = sha256d(
                    legacy_signed_message(tmpl.tx, i, script_bytes, kSighashAll));
                std::vector<Bytes> witness;
                if (tmpl.inputs[i].selector) witness.push_back(*tmpl.inputs[i].selector);
                witness.push_back(
                    detail_dag::schnorr_sig_with_type(dag.params.key("A.cov").secret, digest, 0x01));
                witness.push_back(
                    detail_dag::schnorr_sig_with_type(dag.params.key("B.cov").secret, digest, 0x01));
                tmpl.tx.inputs[i].witness = witness;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Commit/reveal instantiation

struct CommitReveal {
    Script script_u;
    Bytes script_u_bytes;
    Bytes m;            // tapleaf message: the program input of the envelope scheme
    Digest32 v;         // tapleaf hash of the envelope leaf
    Bytes v_committed;  // the value actually OT-signed (differs under bad_V)
    TaprootAddress x;
    Tx commit;
    Tx reveal;
    std::optional<Tx> reveal_variant; // second signed reveal for the grinding case
    Tx punish_reveal;                 // P^B_R with the commit-dependent prevout filled in
    Bytes w_sig;                      // 64-byte signature carried in the commit witness
    Bytes s1_sig, s2_sig;             // 65-byte signatures from the commit witness
    std::optional<Bytes> annex;
    Bytes user_input;                 // as embedded (tampers may reshape it)
    TamperKind tamper = TamperKind::none;
};

// Builds the grammar-breaking envelope script: same serialized length as the
// honest one, but the user input is split across the conditional and a stray
// opcode trails the ENDIF.
inline Script make_malformed_envelope_script(const DagParams& params, ByteSpan user_input)
{
    if (user_input.size() < 2)
        throw std::invalid_argument("make_malformed_envelope_script: input too short");
    Bytes shortened(user_input.begin(), user_input.end() - 1);
    Script u;
    u.ops.push_back(op_csigv(params.key("A.Y").pub));
    u.ops.push_back(op_push({}));
    u.ops.push_back(op_simple(OpKind::op_if));
    u.ops.push_back(op_push(shortened));
    u.ops.push_back(op_simple(OpKind::op_endif));
    u.ops.push_back(op_push({})); // stray opcode after the envelope
    return u;
}

inline CommitReveal instantiate_commit_reveal(const DaDag& dag, ByteSpan user_input,
                                              TamperKind tamper = TamperKind::none)
{
    if (dag.variant != DagVariant::envelope)
        throw std::invalid_argument("instantiate_commit_reveal: needs the envelope DAG");
    if (user_input.empty() || user_input.size() > StoragePolicy{}.envelope_cap)
        throw std::invalid_argument("instantiate_commit_reveal: bad user input length");

    const DagParams& p = dag.params;
    CommitReveal cr;
    cr.tamper = tamper;
    cr.user_input = to_bytes(user_input);

    // envelope leaf
    cr.script_u = tamper == TamperKind::bad_script_U
                      ? make_malformed_envelope_script(p, user_input)
                      : make_envelope_script(p, user_input);
    cr.script_u_bytes = cr.script_u.serialize();
    TapLeaf u_leaf{kTapLeafVersion, cr.script_u_bytes};
    cr.m = tapleaf_message(u_leaf);
    cr.v = tapleaf_hash(u_leaf);
    cr.v_committed = cr.v.bytes();
    if (tamper == TamperKind::bad_V) cr.v_committed[7] ^= 0x40;

    // address X
    TapLeaf timeout_leaf{kTapLeafVersion, dag.scripts.at("script_CA_O1_PBR").serialize()};
    switch (tamper) {
    case TamperKind::wrong_taptree: {
        Script evil;
        evil.ops.push_back(op_csigv(p.key("A.Y").pub));
        cr.x = taproot_address({u_leaf, TapLeaf{kTapLeafVersion, evil.serialize()}});
        break;
    }
    case TamperKind::spendable_internal_key:
        cr.x = taproot_address({u_leaf, timeout_leaf}, p.key("A.Y").pub);
        break;
    default: cr.x = taproot_address({u_leaf, timeout_leaf});
    }

    // commit transaction
    Tx commit = dag.tmpl("CA").tx;
    commit.outputs[0].script_pubkey = cr.x.script_pubkey();
    if (tamper == TamperKind::extra_output)
        commit.outputs.push_back(TxOut{5'000, detail_dag::op_true_script()});
    if (tamper == TamperKind::extra_input)
        commit.inputs.push_back(TxIn{dag.alice_extra, {}, 0xfffffffe, {}});
    if (tamper == TamperKind::with_annex) cr.annex = Bytes{0x50, 0xca, 0xfe};

    Digest32 commit_id = txid(commit);

    // punishment template, now that the commit txid exists
    Tx pbr;
    pbr.inputs.push_back(TxIn{OutPoint{commit_id, 0}, {}, p.timelock, {}});
    pbr.inputs.push_back(TxIn{OutPoint{dag.final_txid("KA"), 1}, {}, 0xfffffffe, {}});
    pbr.outputs.push_back(TxOut{p.sweep_amount, detail_dag::op_true_script()});
    cr.punish_reveal = pbr;

    // W: Alice's signature for the punishment spend of the continue/stop
    // signal. Committing it in the commit witness hands Bob the missing
    // piece should the reveal never appear.
    std::vector<TxOut> pbr_spent = {TxOut{p.x_amount, cr.x.script_pubkey()},
                                    dag.tmpl("KA").tx.outputs[1]};
    Digest32 w_digest = taproot_sighash(
        pbr, 1, pbr_spent, kSighashAll,
        TapScriptExt{detail_dag::leaf_hash_of(dag.scripts.at("script_KA_O2_PBR")), 0, 0xffffffff});
    cr.w_sig = schnorr_sign(p.key("A.W").secret, w_digest);
    if (tamper == TamperKind::bad_W) {
        cr.w_sig = sha256(str_bytes("not a signature")).bytes();
        Bytes more = sha256(cr.w_sig).bytes();
        cr.w_sig.insert(cr.w_sig.end(), more.begin(), more.end());
    }

    // commit witness: S1 (ALL), S2 (SINGLE|ANYONECANPAY), OT(V), OT(W), own txid
    const Script& gate = dag.scripts.at("script_KA_O1_CA");
    std::vector<TxOut> commit_spent = {dag.tmpl("KA").tx.outputs[0]};
    if (tamper == TamperKind::extra_input) commit_spent.push_back(TxOut{20'000, detail_dag::op_true_script()});
    TapScriptExt gate_ext{detail_dag::leaf_hash_of(gate), 0, 0xffffffff};

    uint8_t s2_type = tamper == TamperKind::wrong_sighash ? 0x01 : kSighashSingleAcp.byte();
    cr.s1_sig = detail_dag::schnorr_sig_with_type(
        p.key("A.S1").secret,
        taproot_sighash_from_msg(taproot_sigmsg(commit, 0, commit_spent,
                                                SighashFlag::from_byte(0x01), gate_ext, cr.annex,
                                                0x01)),
        0x01);
    cr.s2_sig = detail_dag::schnorr_sig_with_type(
        p.key("A.S2").secret,
        taproot_sighash_from_msg(taproot_sigmsg(commit, 0, commit_spent,
                                                SighashFlag::from_byte(s2_type), gate_ext,
                                                cr.annex, s2_type)),
        s2_type);

    std::vector<Bytes> witness = {cr.s1_sig, cr.s2_sig};
    const Op& ot_v = gate.ops.at(2);
    const Op& ot_w = gate.ops.at(3);
    for (const Bytes& item :
         build_ot_witness(ot_v, cr.v_committed, {ot_sign(p.ot_key("A.V").sk, cr.v_committed)}))
        witness.push_back(item);
    for (const Bytes& item :
         build_ot_witness(ot_w, cr.w_sig, {ot_sign(p.ot_key("A.W").sk, cr.w_sig)}))
        witness.push_back(item);
    witness.push_back(commit_id.bytes()); // a transaction may carry its own txid
    const TaprootAddress& ka_o1 = dag.addresses.at("KA.o1");
    witness.push_back(gate.serialize());
    witness.push_back(ka_o1.control_block(*ka_o1.tree.find_leaf(gate.serialize())));
    if (cr.annex) witness.push_back(*cr.annex);
    commit.inputs[0].witness = witness;
    if (tamper == TamperKind::extra_input) commit.inputs[1].witness = {};
    cr.commit = commit;

    // reveal transaction
    auto build_reveal = [&](const Bytes& dummy_script, bool extra_out) {
        Tx reveal;
        reveal.inputs.push_back(TxIn{OutPoint{commit_id, 0}, {}, 0xfffffffe, {}});
        reveal.outputs.push_back(TxOut{0, dummy_script});
        if (extra_out) reveal.outputs.push_back(TxOut{1'000, detail_dag::op_true_script()});
        Digest32 y_digest = taproot_sighash(reveal, 0, {TxOut{p.x_amount, cr.x.script_pubkey()}},
                                            kSighashAll, TapScriptExt{cr.v, 0, 0xffffffff});
        Bytes y = detail_dag::schnorr_sig_with_type(p.key("A.Y").secret, y_digest, 0x01);
        size_t u_index = *cr.x.tree.find_leaf(cr.script_u_bytes);
        reveal.inputs[0].witness = {y, cr.script_u_bytes, cr.x.control_block(u_index)};
        return reveal;
    };
    cr.reveal = build_reveal(Bytes{0x6a}, tamper == TamperKind::bad_R_template);
    if (tamper == TamperKind::grind_R)
        cr.reveal_variant = build_reveal(Bytes{0x6a, 0x01, 0x67}, false);

    return cr;
}

// What an observer reads off a published commit transaction's witness.
struct CommitWitness {
    Bytes s1, s2;          // 65-byte signatures
    Bytes v;               // OT-signed program-input hash
    OtSignature v_sig;     // Alice's one-time signature of v
    Bytes w;               // 64-byte punishment signature
    OtSignature w_sig;
    Bytes carried_txid;    // the txid the transaction carries as witness data
};

inline CommitWitness harvest_commit_witness(const DaDag& dag, const Tx& commit)
{
    const Script& gate = dag.scripts.at("script_KA_O1_CA");
    const std::vector<Bytes>& w = commit.inputs.at(0).witness;
    CommitWitness out;
    out.s1 = w.at(0);
    out.s2 = w.at(1);
    size_t pos = 2;
    OtWitnessGroup gv = parse_ot_witness(gate.ops.at(2), w, pos);
    out.v = gv.value;
    out.v_sig = gv.sigs.at(0);
    OtWitnessGroup gw = parse_ot_witness(gate.ops.at(3), w, pos);
    out.w = gw.value;
    out.w_sig = gw.sigs.at(0);
    out.carried_txid = w.at(pos);
    return out;
}

// ---------------------------------------------------------------------------
// Bob's runtime spends

// Continue with the primary instance: spends the signal via sver_V, carrying
// V one-time-signed by both parties (Alice's harvested from the commit).
inline Tx make_kb1(const DaDag& dag, ByteSpan v_value, const OtSignature& alice_sig)
{
    Tx tx = dag.tmpl("KB1").tx;
    const Script& s = dag.scripts.at("script_KA_O2_KB1");
    OtSignature bob_sig = ot_sign(dag.params.ot_key("B.V").sk, v_value);
    std::vector<Bytes> witness = build_ot_witness(s.ops.at(0), v_value, {alice_sig, bob_sig});
    const TaprootAddress& addr = dag.addresses.at("KA.o2");
    Bytes script_bytes = s.serialize();
    witness.push_back(script_bytes);
    witness.push_back(addr.control_block(*addr.tree.find_leaf(script_bytes)));
    tx.inputs[0].witness = witness;
    return tx;
}

// Challenge kick-off: spends the signal through script_F(index), one-time
// signing the fraud index and each listed argument with Bob's keys (plus the
// harvested co-signatures where the leaf demands both parties).
struct FraudArg {
    Bytes value;
    std::vector<OtSignature> sigs; // one per key in the sver component
};

inline Tx make_kb2(const DaDag& dag, int fraud_index, const std::vector<FraudArg>& args)
{
    if (fraud_index < 1 || fraud_index > 4)
        throw std::invalid_argument("make_kb2: fraud index must be 1..4");
    Tx tx = dag.tmpl("KB2").tx;
    std::string leaf_name = "script_F" + std::to_string(fraud_index);
    const Script& s = dag.scripts.at(leaf_name);
    if (args.size() + 1 != s.ops.size())
        throw std::invalid_argument("make_kb2: argument count does not match the leaf");

    std::vector<Bytes> witness;
    Bytes f_value{static_cast<uint8_t>(fraud_index)};
    for (const Bytes& item :
         build_ot_witness(s.ops.at(0), f_value, {ot_sign(dag.params.ot_key("B.F").sk, f_value)}))
        witness.push_back(item);
    for (size_t i = 0; i < args.size(); ++i) {
        for (const Bytes& item : build_ot_witness(s.ops.at(i + 1), args[i].value, args[i].sigs))
            witness.push_back(item);
    }
    const TaprootAddress& addr = dag.addresses.at("KA.o2");
    Bytes script_bytes = s.serialize();
    witness.push_back(script_bytes);
    witness.push_back(addr.control_block(*addr.tree.find_leaf(script_bytes)));
    tx.inputs[0].witness = witness;
    return tx;
}

// Punishment for a withheld reveal: Bob signs Q1/Q2 himself and replays the
// W signature harvested from the commit witness.
inline Tx make_pbr(const DaDag& dag, const CommitReveal& cr)
{
    const DagParams& p = dag.params;
    Tx tx = cr.punish_reveal;
    std::vector<TxOut> spent = {TxOut{p.x_amount, cr.x.script_pubkey()},
                                dag.tmpl("KA").tx.outputs[1]};

    const Script& leaf0 = dag.scripts.at("script_CA_O1_PBR");
    Digest32 d0 = taproot_sighash(tx, 0, spent, kSighashAll,
                                  TapScriptExt{detail_dag::leaf_hash_of(leaf0), 0, 0xffffffff});
    Bytes q2 = detail_dag::schnorr_sig_with_type(p.key("B.Q2").secret, d0, 0x01);
    size_t idx0 = *cr.x.tree.find_leaf(leaf0.serialize());
    tx.inputs[0].witness = {q2, leaf0.serialize(), cr.x.control_block(idx0)};

    const Script& leaf1 = dag.scripts.at("script_KA_O2_PBR");
    Digest32 d1 = taproot_sighash(tx, 1, spent, kSighashAll,
                                  TapScriptExt{detail_dag::leaf_hash_of(leaf1), 0, 0xffffffff});
    Bytes q1 = detail_dag::schnorr_sig_with_type(p.key("B.Q1").secret, d1, 0x01);
    Bytes w = cr.w_sig;
    w.push_back(0x01);
    const TaprootAddress& ka_o2 = dag.addresses.at("KA.o2");
    tx.inputs[1].witness = {q1, w, leaf1.serialize(),
                            ka_o2.control_block(*ka_o2.tree.find_leaf(leaf1.serialize()))};
    return tx;
}

// ---------------------------------------------------------------------------
// Structural property: each named script appears exactly twice in the DAG,
// once committed in an output tree and once referenced by a spending input.

struct ScriptUsage {
    int committed = 0;
    int referenced = 0;
};

inline std::map<std::string, ScriptUsage> script_appearances(const DaDag& dag)
{
    std::map<std::string, ScriptUsage> usage;
    std::map<Bytes, std::string> by_bytes;
    for (const auto& [name, script] : dag.scripts) {
        if (name == "script_U" || name.starts_with("sver")) continue; // components, not leaves
        by_bytes[script.serialize()] = name;
        usage[name];
    }
    for (const auto& [aname, addr] : dag.addresses) {
        for (const TapLeaf& leaf : addr.tree.leaves()) {
            auto it = by_bytes.find(leaf.script);
            if (it != by_bytes.end()) ++usage[it->second].committed;
        }
    }
    for (const std::string& name : dag.planned_commitments)
        if (usage.count(name)) ++usage[name].committed;
    for (const auto& [tname, tmpl] : dag.txs) {
        for (const InputPlan& plan : tmpl.inputs) {
            if (plan.leaf_name == "script_F*") {
                // the challenge kick-off may take any of the four fraud leaves
                for (int i = 1; i <= 4; ++i) ++usage["script_F" + std::to_string(i)].referenced;
            } else if (usage.count(plan.leaf_name)) {
                ++usage[plan.leaf_name].referenced;
            }
        }
    }
    return usage;
}

// ---------------------------------------------------------------------------
// Simple publication scheme

inline DaDag build_simple_dag(const DagParams& params, const OutPoint& funding)
{
    DaDag dag;
    dag.variant = DagVariant::simple;
    dag.params = params;
    dag.funding = funding;

    // handle: Alice's path now, co-signed punishment after the timelock
    Script handle;
    handle.ops.push_back(op_simple(OpKind::op_if));
    handle.ops.push_back(op_csigv(params.alice_ecdsa.pub));
    handle.ops.push_back(op_simple(OpKind::op_else));
    handle.ops.push_back(op_cseqv(params.timelock));
    handle.ops.push_back(op_csigv(params.key("A.cov").pub));
    handle.ops.push_back(op_csigv(params.key("B.cov").pub));
    handle.ops.push_back(op_simple(OpKind::op_endif));
    dag.scripts["handle"] = handle;
    dag.handle_script = handle.serialize();

    // continue/stop signal
    Script signal;
    signal.ops.push_back(op_simple(OpKind::op_if));
    signal.ops.push_back(op_csigv(params.key("A.cov").pub));
    signal.ops.push_back(op_csigv(params.key("B.cov").pub));
    signal.ops.push_back(op_simple(OpKind::op_else));
    signal.ops.push_back(op_cseqv(params.timelock));
    signal.ops.push_back(op_csigv(params.key("A.cov").pub));
    signal.ops.push_back(op_csigv(params.key("B.cov").pub));
    signal.ops.push_back(op_simple(OpKind::op_endif));
    dag.scripts["signal"] = signal;

    TxTemplate k;
    k.tx.inputs.push_back(TxIn{funding, {}, 0xfffffffe, {}});
    k.tx.outputs.push_back(TxOut{params.handle_amount, handle.serialize()});
    k.tx.outputs.push_back(TxOut{params.signal_amount, signal.serialize()});
    k.inputs.push_back({"funding", false, false});
    dag.txs["K"] = k;
    Digest32 k_id = txid(k.tx);

    TxTemplate da;
    da.inputs.push_back({"handle", false, false});
    da.final = false; // data outputs decided when the input is published
    dag.txs["DA"] = da;

    TxTemplate pbd;
    pbd.tx.inputs.push_back(TxIn{OutPoint{k_id, 0}, {}, params.timelock, {}});
    pbd.tx.inputs.push_back(TxIn{OutPoint{k_id, 1}, {}, params.timelock, {}});
    pbd.tx.outputs.push_back(TxOut{params.sweep_amount, detail_dag::op_true_script()});
    pbd.inputs.push_back({"handle", true, false, Bytes{}});
    pbd.inputs.push_back({"signal", true, false, Bytes{}});
    dag.txs["PBD"] = pbd;

    TxTemplate eb;
    eb.tx.inputs.push_back(TxIn{OutPoint{k_id, 1}, {}, 0xfffffffe, {}});
    eb.tx.outputs.push_back(TxOut{params.x_amount, detail_dag::op_true_script()});
    eb.inputs.push_back({"signal", true, false, Bytes{0x01}});
    dag.txs["EB"] = eb;

    return dag;
}

// The failed construction: splitting the data transaction into commit and
// reveal under the simple scheme requires pre-signing a punishment that
// spends the commit, whose txid does not exist yet.
inline void attempt_presign_reveal_punishment(const DagParams& params, const OutPoint& funding)
{
    DaDag dag = build_simple_dag(params, funding);
    TxTemplate commit;
    commit.tx.inputs.push_back(TxIn{OutPoint{dag.final_txid("K"), 0}, {}, 0xfffffffe, {}});
    commit.tx.outputs.push_back(TxOut{params.x_amount, {}}); // envelope address unknown
    commit.final = false;
    dag.txs["CA"] = commit;
    dag.final_txid("CA"); // throws: nothing to connect the punishment to
}

// ---------------------------------------------------------------------------
// ECDSA / timelock scheme

inline DaDag build_ecdsa_dag(const DagParams& params, const OutPoint& funding)
{
    DaDag dag;
    dag.variant = DagVariant::ecdsa;
    dag.params = params;
    dag.funding = funding;

    // legacy handle: Alice's ECDSA key now, covenant punishment after T
    Script handle;
    handle.ops.push_back(op_simple(OpKind::op_if));
    handle.ops.push_back(op_csigv(params.alice_ecdsa.pub));
    handle.ops.push_back(op_simple(OpKind::op_else));
    handle.ops.push_back(op_cseqv(params.timelock));
    handle.ops.push_back(op_csigv(params.key("A.cov").pub));
    handle.ops.push_back(op_csigv(params.key("B.cov").pub));
    handle.ops.push_back(op_simple(OpKind::op_endif));
    dag.scripts["handle"] = handle;
    dag.handle_script = handle.serialize();

    // commit output: Alice commits the hash V under a one-time key, or the
    // timelocked covenant path punishes her
    Script commit_gate;
    commit_gate.ops.push_back(op_simple(OpKind::op_if));
    commit_gate.ops.push_back(op_csigv(params.key("A.S1").pub));
    commit_gate.ops.push_back(op_ot_csigv({params.ot_key("A.V").pk}));
    commit_gate.ops.push_back(op_simple(OpKind::op_else));
    commit_gate.ops.push_back(op_cseqv(params.timelock));
    commit_gate.ops.push_back(op_csigv(params.key("A.cov").pub));
    commit_gate.ops.push_back(op_csigv(params.key("B.cov").pub));
    commit_gate.ops.push_back(op_simple(OpKind::op_endif));
    dag.scripts["commit_gate"] = commit_gate;
    dag.commit_script = commit_gate.serialize();

    // continue/stop signal with the secondary-instance challenge leaf
    Script cont;
    cont.ops.push_back(op_csigv(params.key("A.cov").pub));
    cont.ops.push_back(op_csigv(params.key("B.cov").pub));
    dag.scripts["signal_continue"] = cont;
    Script chal;
    chal.append(make_sver(params, {"A.V", "B.V"}));
    chal.append(make_sver(params, {"B.S"}));
    chal.append(make_sver(params, {"B.L"}));
    dag.scripts["signal_challenge"] = chal;
    Script stop;
    stop.ops.push_back(op_cseqv(params.timelock));
    stop.ops.push_back(op_csigv(params.key("A.cov").pub));
    stop.ops.push_back(op_csigv(params.key("B.cov").pub));
    dag.scripts["signal_stop"] = stop;

    dag.addresses.emplace("K.o3",
                          taproot_address({TapLeaf{kTapLeafVersion, cont.serialize()},
                                           TapLeaf{kTapLeafVersion, chal.serialize()},
                                           TapLeaf{kTapLeafVersion, stop.serialize()}}));

    TxTemplate k;
    k.tx.inputs.push_back(TxIn{funding, {}, 0xfffffffe, {}});
    k.tx.outputs.push_back(TxOut{params.handle_amount, handle.serialize()});
    k.tx.outputs.push_back(TxOut{params.signal_amount, commit_gate.serialize()});
    k.tx.outputs.push_back(TxOut{params.signal_amount, dag.addresses.at("K.o3").script_pubkey()});
    k.inputs.push_back({"funding", false, false});
    dag.txs["KA"] = k;
    Digest32 k_id = txid(k.tx);

    TxTemplate da;
    da.inputs.push_back({"handle", false, false});
    da.final = false;
    dag.txs["DA"] = da;

    TxTemplate ca;
    ca.inputs.push_back({"commit_gate", false, false});
    ca.final = false;
    dag.txs["CA"] = ca;

    TxTemplate kb1;
    kb1.tx.inputs.push_back(TxIn{OutPoint{k_id, 2}, {}, 0xfffffffe, {}});
    kb1.tx.outputs.push_back(TxOut{params.x_amount, detail_dag::op_true_script()});
    kb1.inputs.push_back({"signal_continue", true, true});
    dag.txs["KB1"] = kb1;

    TxTemplate kb2;
    kb2.tx.inputs.push_back(TxIn{OutPoint{k_id, 2}, {}, 0xfffffffe, {}});
    kb2.tx.outputs.push_back(TxOut{params.x_amount, detail_dag::op_true_script()});
    kb2.inputs.push_back({"signal_challenge", false, true});
    dag.txs["KB2"] = kb2;

    TxTemplate pbd;
    pbd.tx.inputs.push_back(TxIn{OutPoint{k_id, 0}, {}, params.timelock, {}});
    pbd.tx.outputs.push_back(TxOut{params.x_amount, detail_dag::op_true_script()});
    pbd.inputs.push_back({"handle", true, false, Bytes{}});
    dag.txs["PBD"] = pbd;

    TxTemplate pbc;
    pbc.tx.inputs.push_back(TxIn{OutPoint{k_id, 1}, {}, params.timelock, {}});
    pbc.tx.inputs.push_back(TxIn{OutPoint{k_id, 2}, {}, params.timelock, {}});
    pbc.tx.outputs.push_back(TxOut{params.sweep_amount, detail_dag::op_true_script()});
    pbc.inputs.push_back({"commit_gate", true, false, Bytes{}});
    pbc.inputs.push_back({"signal_stop", true, true});
    dag.txs["PBC"] = pbc;

    return dag;
}

// The ECDSA-signed data transaction: carries the user input in an OP_RETURN
// output, spending the handle with Alice's key. The payload is padded so the
// signed message D' lands on a hash-block boundary.
struct EcdsaData {
    Tx tx;
    Bytes d_prime; // the program input
    Digest32 v;    // sha256(D')
    Bytes s;       // 64-byte raw ECDSA signature from the witness
    Bytes payload; // padded user input
};

inline EcdsaData make_ecdsa_data_tx(const DaDag& dag, ByteSpan user_input)
{
    if (dag.variant != DagVariant::ecdsa)
        throw std::invalid_argument("make_ecdsa_data_tx: needs the ECDSA DAG");
    const DagParams& p = dag.params;
    Digest32 k_id = dag.final_txid("KA");

    for (size_t pad = 0; pad < 64; ++pad) {
        Bytes payload = to_bytes(user_input);
        payload.resize(user_input.size() + pad, 0x00);

        Tx tx;
        tx.inputs.push_back(TxIn{OutPoint{k_id, 0}, {}, 0xfffffffe, {}});
        Bytes script{0x6a};
        Bytes push = detail_storage::push_data(payload);
        script.insert(script.end(), push.begin(), push.end());
        tx.outputs.push_back(TxOut{0, script});

        Bytes d_prime = legacy_signed_message(tx, 0, dag.handle_script, kSighashAll);
        if (d_prime.size() % 64 != 0) continue;

        EcdsaData out;
        out.tx = tx;
        out.d_prime = d_prime;
        out.v = sha256(d_prime);
        out.s = ecdsa_sign(p.alice_ecdsa.secret, sha256d(d_prime));
        out.payload = payload;
        Bytes sig = out.s;
        sig.push_back(0x01);
        out.tx.inputs[0].witness = {Bytes{0x01}, sig};
        return out;
    }
    throw std::logic_error("make_ecdsa_data_tx: could not align the signed message");
}

// Alice's commit of V in the ECDSA scheme (honest or with a wrong V).
inline Tx make_ecdsa_commit(const DaDag& dag, ByteSpan v_value)
{
    const DagParams& p = dag.params;
    Tx tx;
    tx.inputs.push_back(TxIn{OutPoint{dag.final_txid("KA"), 1}, {}, 0xfffffffe, {}});
    tx.outputs.push_back(TxOut{p.x_amount, detail_dag::op_true_script()});

    // legacy context: CSIGV pops a 65-byte signature over sha256d(D')
    Bytes d = legacy_signed_message(tx, 0, dag.commit_script, kSighashAll);
    Bytes s1 = schnorr_sign(p.key("A.S1").secret, sha256d(d));
    s1.push_back(0x01);
    std::vector<Bytes> witness = {Bytes{0x01}, s1};
    const Script& gate = dag.scripts.at("commit_gate");
    for (const Bytes& item :
         build_ot_witness(gate.ops.at(2), v_value, {ot_sign(p.ot_key("A.V").sk, v_value)}))
        witness.push_back(item);
    tx.inputs[0].witness = witness;
    return tx;
}

// Bob's secondary-instance kick-off for the ECDSA scheme, one-time signing
// (V, S, L).
inline Tx make_ecdsa_kb2(const DaDag& dag, ByteSpan v_value, const OtSignature& alice_v_sig,
                         ByteSpan s_value, ByteSpan l_value)
{
    const DagParams& p = dag.params;
    Tx tx = dag.tmpl("KB2").tx;
    const Script& chal = dag.scripts.at("signal_challenge");
    std::vector<Bytes> witness;
    OtSignature bob_v = ot_sign(p.ot_key("B.V").sk, v_value);
    for (const Bytes& item : build_ot_witness(chal.ops.at(0), v_value, {alice_v_sig, bob_v}))
        witness.push_back(item);
    for (const Bytes& item :
         build_ot_witness(chal.ops.at(1), s_value, {ot_sign(p.ot_key("B.S").sk, s_value)}))
        witness.push_back(item);
    for (const Bytes& item :
         build_ot_witness(chal.ops.at(2), l_value, {ot_sign(p.ot_key("B.L").sk, l_value)}))
        witness.push_back(item);
    const TaprootAddress& addr = dag.addresses.at("K.o3");
    Bytes script_bytes = chal.serialize();
    witness.push_back(script_bytes);
    witness.push_back(addr.control_block(*addr.tree.find_leaf(script_bytes)));
    tx.inputs[0].witness = witness;
    return tx;
}

} // namespace esspi

#endif // ESSPI_DAG_HPP
