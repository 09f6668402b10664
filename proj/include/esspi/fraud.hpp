// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_FRAUD_HPP
#define ESSPI_FRAUD_HPP

#include <esspi/dag.hpp>

namespace esspi {

// Outcome of a fraud-proof program. Deterministic for a fixed claim: the
// verifier wins only when the specific fraud condition holds, the prover
// wins when the claim's own prerequisites fail (claim rejected) or every
// check passes.
struct Verdict {
    enum class Winner { prover, verifier };
    Winner winner = Winner::prover;
    std::string failed_check;
    std::string detail;

    bool verifier_wins() const { return winner == Winner::verifier; }

    static Verdict verifier(std::string check, std::string detail = "")
    {
        return {Winner::verifier, std::move(check), std::move(detail)};
    }
    static Verdict prover(std::string check = "", std::string detail = "")
    {
        return {Winner::prover, std::move(check), std::move(detail)};
    }
};

// ---------------------------------------------------------------------------
// Secondary instance of the ECDSA scheme: the three ordered checks. Check 1
// (the one-time signatures over V, S and L) is enforced by script when the
// challenge kick-off spends its leaf, so this function starts at check 2.
inline Verdict verify_secondary_ecdsa(ByteSpan v, ByteSpan s, ByteSpan l, ByteSpan alice_pub33)
{
    if (v.size() != 32 || l.size() != 32 || s.size() != 64)
        return Verdict::prover("claim-shape", "malformed argument sizes");
    // check 2: S must be a valid raw ECDSA signature of G = sha256(L)
    Digest32 g = sha256(l);
    if (!ecdsa_verify(alice_pub33, g, s))
        return Verdict::prover("check2-signature", "S does not verify against sha256(L)");
    // check 3: fraud iff L differs from the committed V
    if (!std::equal(l.begin(), l.end(), v.begin()))
        return Verdict::verifier("check3-mismatch", "committed V differs from sha256(D')");
    return Verdict::prover("check3-mismatch", "V matches the program input hash");
}

// ---------------------------------------------------------------------------
// Challenge 1: invalid commit transaction. E_C is given as the two rebuilt
// signed messages (S1 with SIGHASH_ALL, S2 with SIGHASH_SINGLE |
// SIGHASH_ANYONECANPAY) plus the preimage of the single claimed output.
struct Challenge1Claim {
    CommonSigMsg msg1;
    CommonSigMsg msg2;
    Bytes s1, s2;        // 65-byte signatures
    Bytes v;             // 32 bytes, the one-time-signed program input hash
    TxOut single_output; // preimage of the CTxOut behind sha_single_output
    // Leaf hash of the envelope script, taken from the published reveal when
    // available; falls back to the committed V otherwise.
    std::optional<Digest32> revealed_leaf;
};

inline Verdict challenge1_invalid_c(const Challenge1Claim& c, const DagParams& params)
{
    // establish the messages: both signatures must verify or the claim fails
    Digest32 d1 = taproot_sighash_from_msg(c.msg1.serialize());
    Digest32 d2 = taproot_sighash_from_msg(c.msg2.serialize());
    if (c.s1.size() != 65 || c.s2.size() != 65 || c.s1.back() != c.msg1.hash_type ||
        c.s2.back() != c.msg2.hash_type)
        return Verdict::prover("claim-signatures", "signature encoding does not match messages");
    if (!schnorr_verify(params.key("A.S1").pub, d1, ByteSpan(c.s1.data(), 64)))
        return Verdict::prover("claim-signatures", "S1 does not verify against E_C");
    if (!schnorr_verify(params.key("A.S2").pub, d2, ByteSpan(c.s2.data(), 64)))
        return Verdict::prover("claim-signatures", "S2 does not verify against E_C");

    // wrong sighash flags are provable from the hash_type bytes alone
    if (c.msg1.hash_type != kSighashAll.byte())
        return Verdict::verifier("hash-type", "S1 did not sign with SIGHASH_ALL");
    if (c.msg2.hash_type != kSighashSingleAcp.byte())
        return Verdict::verifier("hash-type",
                                 "S2 did not sign with SIGHASH_SINGLE|SIGHASH_ANYONECANPAY");
    if (!c.msg1.sha_outputs || !c.msg2.sha_single_output || !c.msg1.sha_prevouts ||
        !c.msg2.outpoint)
        return Verdict::prover("claim-shape", "messages do not carry the required fields");

    // output count: with a single output the all-outputs hash equals the
    // single-output hash
    if (!(*c.msg1.sha_outputs == *c.msg2.sha_single_output))
        return Verdict::verifier("output-count", "sha_outputs differs from sha_single_output");

    // the claimed output preimage must be the committed one
    if (!(sha256(c.single_output.serialized()) == *c.msg2.sha_single_output))
        return Verdict::prover("claim-output", "output preimage does not hash to the message");

    // input count: the all-prevouts hash must cover exactly the S2 outpoint
    {
        ByteWriter w;
        c.msg2.outpoint->serialize(w);
        if (!(sha256(w.out) == *c.msg1.sha_prevouts))
            return Verdict::verifier("input-count", "sha_prevouts covers more than one outpoint");
    }

    // the output must be the expected P2TR address: NUMS internal key over
    // exactly {envelope leaf, reveal-timeout leaf}
    if (!is_p2tr_script(c.single_output.script_pubkey))
        return Verdict::verifier("taptree", "single output is not a taproot address");
    Digest32 u_leaf = c.revealed_leaf.value_or(Digest32::from_bytes(c.v));
    Script timeout;
    timeout.ops.push_back(op_cseqv(params.timelock));
    timeout.ops.push_back(op_csigv(params.key("B.Q2").pub));
    Digest32 timeout_leaf = tapleaf_hash(TapLeaf{kTapLeafVersion, timeout.serialize()});
    Digest32 root = tapbranch_hash(u_leaf, timeout_leaf);
    TweakResult expect = taproot_tweak(params.nums_x, root);
    if (!std::equal(expect.output_x.begin(), expect.output_x.end(),
                    c.single_output.script_pubkey.begin() + 2))
        return Verdict::verifier("taptree", "address does not recompute from the NUMS key and "
                                            "the expected two leaves");

    // the hardcoded template amount
    if (c.single_output.amount != params.x_amount)
        return Verdict::verifier("amount", "output amount differs from the template value");

    // an annex would change spend_type and add sha_annex
    if ((c.msg1.spend_type & 1) != 0 || c.msg1.sha_annex || c.msg2.sha_annex)
        return Verdict::verifier("annex", "unexpected annex committed by the signatures");

    return Verdict::prover("all-checks", "commit transaction is well formed");
}

// Alternative output-count method: prove the bit count embedded in the final
// padding block of a hashed stream. Relies on SHA-256 being free-start
// collision resistant.
inline Verdict challenge1_padding_method(const Midstate& midstate, ByteSpan final_block,
                                         const Digest32& claimed_digest,
                                         uint64_t expected_bitcount)
{
    if (final_block.size() != 64) return Verdict::prover("claim-shape", "final block must be 64 bytes");
    if (!(owcf_compress(midstate, final_block).digest() == claimed_digest))
        return Verdict::prover("digest", "midstate and block do not reproduce the digest");
    uint64_t embedded = 0;
    for (int i = 0; i < 8; ++i) embedded = embedded << 8 | final_block[56 + i];
    if (embedded != expected_bitcount)
        return Verdict::verifier("bitcount", "embedded bit count " + std::to_string(embedded) +
                                                 " does not match expected " +
                                                 std::to_string(expected_bitcount));
    return Verdict::prover("bitcount", "embedded bit count matches");
}

// ---------------------------------------------------------------------------
// Challenge 2: the committed V does not match the envelope leaf. The signed
// message of the reveal spend carries the leaf hash in its script-path
// extension; the signature authenticates it.
struct Challenge2Claim {
    CommonSigMsg reveal_msg; // what Y signed
    Bytes y;                 // 65-byte signature
    Bytes v;                 // the one-time-signed value
};

inline Verdict challenge2_invalid_v(const Challenge2Claim& c, const DagParams& params)
{
    Digest32 digest = taproot_sighash_from_msg(c.reveal_msg.serialize());
    if (c.y.size() != 65 || c.y.back() != c.reveal_msg.hash_type)
        return Verdict::prover("claim-signatures", "signature encoding does not match message");
    if (!schnorr_verify(params.key("A.Y").pub, digest, ByteSpan(c.y.data(), 64)))
        return Verdict::prover("claim-signatures", "Y does not verify against the reveal message");
    if (!c.reveal_msg.ext)
        return Verdict::prover("claim-shape", "reveal message carries no script-path extension");
    const Digest32& leaf = c.reveal_msg.ext->tapleaf_hash;
    if (c.v.size() != 32 || !std::equal(c.v.begin(), c.v.end(), leaf.b.begin()))
        return Verdict::verifier("leaf-mismatch", "committed V differs from the envelope leaf");
    return Verdict::prover("leaf-mismatch", "committed V matches the envelope leaf");
}

// ---------------------------------------------------------------------------
// Challenge 3: the W carried in the commit witness is not a valid signature
// for the punishment transaction. The punishment template is hardcoded; only
// its first prevout comes from the commit's txid, which is why the raw
// commit bytes travel with the claim.
struct Challenge3Claim {
    Bytes commit_bytes; // non-witness serialization of the commit
    Bytes s1;           // 65-byte signature binding those bytes
    Bytes w;            // the 64-byte value one-time-signed as W
    std::optional<Bytes> annex; // annex observed in the commit spend, if any
};

inline Verdict challenge3_invalid_w(const Challenge3Claim& c, const DaDag& dag)
{
    const DagParams& params = dag.params;
    Tx commit;
    try {
        commit = parse_tx(c.commit_bytes);
    } catch (const std::exception& e) {
        return Verdict::prover("claim-shape", std::string("commit bytes do not parse: ") + e.what());
    }
    if (commit.outputs.empty() || c.w.size() != 64 || c.s1.size() != 65)
        return Verdict::prover("claim-shape", "malformed claim");
    if (commit.inputs.size() != 1)
        return Verdict::prover("claim-shape",
                               "commit is not well formed; the previous challenge applies");

    // S1 authenticates the provided bytes as the real commit
    const Script& gate = dag.scripts.at("script_KA_O1_CA");
    std::vector<TxOut> spent = {dag.tmpl("KA").tx.outputs[0]};
    Digest32 d1;
    try {
        d1 = taproot_sighash(commit, 0, spent, kSighashAll,
                             TapScriptExt{detail_dag::leaf_hash_of(gate), 0, 0xffffffff},
                             c.annex);
    } catch (const std::exception& e) {
        return Verdict::prover("claim-shape", e.what());
    }
    if (c.s1.back() != kSighashAll.byte() ||
        !schnorr_verify(params.key("A.S1").pub, d1, ByteSpan(c.s1.data(), 64)))
        return Verdict::prover("claim-signatures", "S1 does not bind the provided commit bytes");

    // rebuild the punishment transaction from the hardcoded template
    Digest32 commit_id = sha256d(c.commit_bytes);
    Tx pbr;
    pbr.inputs.push_back(TxIn{OutPoint{commit_id, 0}, {}, params.timelock, {}});
    pbr.inputs.push_back(TxIn{OutPoint{dag.final_txid("KA"), 1}, {}, 0xfffffffe, {}});
    pbr.outputs.push_back(TxOut{params.sweep_amount, Bytes{0x51}});
    std::vector<TxOut> pbr_spent = {TxOut{params.x_amount, commit.outputs[0].script_pubkey},
                                    dag.tmpl("KA").tx.outputs[1]};
    Digest32 w_digest = taproot_sighash(
        pbr, 1, pbr_spent, kSighashAll,
        TapScriptExt{detail_dag::leaf_hash_of(dag.scripts.at("script_KA_O2_PBR")), 0, 0xffffffff});
    if (!schnorr_verify(params.key("A.W").pub, w_digest, c.w))
        return Verdict::verifier("w-signature",
                                 "W does not sign the punishment built on this commit");
    return Verdict::prover("w-signature", "W signs the punishment transaction");
}

// ---------------------------------------------------------------------------
// Challenge 4: the reveal deviates from the fixed template (one input, one
// dummy unspendable output, SIGHASH_ALL).
struct Challenge4Claim {
    CommonSigMsg reveal_msg;
    Bytes y;                        // 65-byte signature
    std::vector<OutPoint> prevouts; // preimage of sha_prevouts
    std::vector<TxOut> outputs;     // preimage of sha_outputs
};

inline Verdict challenge4_invalid_r(const Challenge4Claim& c, const DagParams& params)
{
    Digest32 digest = taproot_sighash_from_msg(c.reveal_msg.serialize());
    if (c.y.size() != 65 || c.y.back() != c.reveal_msg.hash_type)
        return Verdict::prover("claim-signatures", "signature encoding does not match message");
    if (!schnorr_verify(params.key("A.Y").pub, digest, ByteSpan(c.y.data(), 64)))
        return Verdict::prover("claim-signatures", "Y does not verify against the reveal message");

    if (c.reveal_msg.hash_type != kSighashAll.byte())
        return Verdict::verifier("hash-type", "reveal not signed with SIGHASH_ALL");
    if (!c.reveal_msg.sha_prevouts || !c.reveal_msg.sha_outputs)
        return Verdict::prover("claim-shape", "message lacks aggregate hashes");

    {
        ByteWriter w;
        for (const OutPoint& op : c.prevouts) op.serialize(w);
        if (!(sha256(w.out) == *c.reveal_msg.sha_prevouts))
            return Verdict::prover("claim-prevouts", "prevout preimage does not match message");
    }
    {
        ByteWriter w;
        for (const TxOut& out : c.outputs) out.serialize(w);
        if (!(sha256(w.out) == *c.reveal_msg.sha_outputs))
            return Verdict::prover("claim-outputs", "output preimage does not match message");
    }
    if (c.prevouts.size() != 1)
        return Verdict::verifier("template", "reveal consumes more than one input");
    if (c.outputs.size() != 1 || c.outputs[0].amount != 0 ||
        c.outputs[0].script_pubkey != Bytes{0x6a})
        return Verdict::verifier("template", "reveal outputs deviate from the dummy template");
    return Verdict::prover("template", "reveal matches the fixed template");
}

// Grinding proof: two valid raw-Schnorr signatures by the reveal key over
// two different signed-message digests.
inline Verdict grinding_proof(const Digest32& g1, const Digest32& g2, ByteSpan y1, ByteSpan y2,
                              const DagParams& params)
{
    const Bytes& pk = params.key("A.Y").pub;
    if (y1.size() != 64 || y2.size() != 64)
        return Verdict::prover("claim-shape", "raw signatures must be 64 bytes");
    if (!schnorr_verify(pk, g1, y1) || !schnorr_verify(pk, g2, y2))
        return Verdict::prover("claim-signatures", "one of the signatures is invalid");
    if (!(g1 == g2))
        return Verdict::verifier("grinding", "two distinct reveal variants signed");
    return Verdict::prover("grinding", "both signatures cover the same message");
}

// ---------------------------------------------------------------------------
// Claim assembly from observed chain data (what Bob can actually see).

inline Challenge1Claim build_challenge1_claim(const DaDag& dag, const Tx& commit,
                                              const std::vector<TxOut>& commit_spent,
                                              const std::optional<Tx>& reveal)
{
    CommitWitness cw = harvest_commit_witness(dag, commit);
    std::optional<Bytes> annex;
    const auto& witness = commit.inputs.at(0).witness;
    if (!witness.empty() && !witness.back().empty() && witness.back()[0] == 0x50)
        annex = witness.back();

    const Script& gate = dag.scripts.at("script_KA_O1_CA");
    TapScriptExt ext{detail_dag::leaf_hash_of(gate), 0, 0xffffffff};

    Challenge1Claim claim;
    claim.s1 = cw.s1;
    claim.s2 = cw.s2;
    claim.v = cw.v;
    uint8_t t1 = cw.s1.back(), t2 = cw.s2.back();
    claim.msg1 = build_common_sigmsg(commit, 0, commit_spent, SighashFlag::from_byte(t1), ext,
                                     annex, t1);
    claim.msg2 = build_common_sigmsg(commit, 0, commit_spent, SighashFlag::from_byte(t2), ext,
                                     annex, t2);
    claim.single_output = commit.outputs.at(0);
    if (reveal && !reveal->inputs.empty() && reveal->inputs[0].witness.size() >= 2) {
        const Bytes& script = reveal->inputs[0].witness[reveal->inputs[0].witness.size() - 2];
        claim.revealed_leaf = tapleaf_hash(TapLeaf{kTapLeafVersion, script});
    }
    return claim;
}

// The reveal-spend message fields as the verifier reconstructs them.
inline CommonSigMsg reveal_sigmsg_fields(const DaDag& dag, const Tx& reveal, const TxOut& x_out)
{
    const auto& witness = reveal.inputs.at(0).witness;
    if (witness.size() < 2) throw std::invalid_argument("reveal_sigmsg_fields: bad witness");
    const Bytes& script = witness[witness.size() - 2];
    TapScriptExt ext{tapleaf_hash(TapLeaf{kTapLeafVersion, script}), 0, 0xffffffff};
    uint8_t t = witness.at(0).back();
    return build_common_sigmsg(reveal, 0, {x_out}, SighashFlag::from_byte(t), ext, std::nullopt, t);
}

inline Challenge2Claim build_challenge2_claim(const DaDag& dag, const Tx& commit, const Tx& reveal)
{
    CommitWitness cw = harvest_commit_witness(dag, commit);
    Challenge2Claim claim;
    claim.reveal_msg = reveal_sigmsg_fields(dag, reveal, commit.outputs.at(0));
    claim.y = reveal.inputs.at(0).witness.at(0);
    claim.v = cw.v;
    return claim;
}

inline Challenge3Claim build_challenge3_claim(const DaDag& dag, const Tx& commit)
{
    CommitWitness cw = harvest_commit_witness(dag, commit);
    Challenge3Claim claim;
    claim.commit_bytes = serialize_tx(commit, false);
    claim.s1 = cw.s1;
    claim.w = cw.w;
    const auto& witness = commit.inputs.at(0).witness;
    if (!witness.empty() && !witness.back().empty() && witness.back()[0] == 0x50)
        claim.annex = witness.back();
    return claim;
}

inline Challenge4Claim build_challenge4_claim(const DaDag& dag, const Tx& commit, const Tx& reveal)
{
    Challenge4Claim claim;
    claim.reveal_msg = reveal_sigmsg_fields(dag, reveal, commit.outputs.at(0));
    claim.y = reveal.inputs.at(0).witness.at(0);
    for (const TxIn& in : reveal.inputs) claim.prevouts.push_back(in.prevout);
    claim.outputs = reveal.outputs;
    return claim;
}

} // namespace esspi

#endif // ESSPI_FRAUD_HPP
