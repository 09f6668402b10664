// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <catch2/catch_amalgamated.hpp>

#include <esspi/scriptvm.hpp>

using namespace esspi;

namespace {

DagParams& params()
{
    static DagParams p = DagParams::generate(Bytes(32, 0x42));
    return p;
}

struct Harness {
    Tx tx;
    ExecContext ctx;

    explicit Harness(ExecContext::Mode mode = ExecContext::Mode::taproot)
    {
        TxIn in;
        in.prevout.txid = sha256(str_bytes("harness-prev"));
        in.prevout.vout = 0;
        in.sequence = 100;
        tx.inputs.push_back(in);
        tx.outputs.push_back(TxOut{1000, Bytes{0x51}});
        ctx.tx = &tx;
        ctx.input_index = 0;
        ctx.mode = mode;
        ctx.spent_output = TxOut{2000, Bytes{0x51}};
        ctx.spent_outputs = {ctx.spent_output};
        ctx.script_code = Bytes{0x51};
        ctx.confirmations_of_prevout = 100;
    }

    Bytes sign_schnorr(const Bytes& secret, uint8_t hash_type = 0x01) const
    {
        Bytes sig = schnorr_sign(secret, ctx.sig_digest(hash_type));
        sig.push_back(hash_type);
        return sig;
    }
    Bytes sign_ecdsa(const Bytes& secret, uint8_t hash_type = 0x01) const
    {
        Bytes sig = ecdsa_sign(secret, ctx.sig_digest(hash_type));
        sig.push_back(hash_type);
        return sig;
    }
};

} // namespace

TEST_CASE("CSIGV verifies schnorr in taproot context", "[scriptvm]")
{
    Harness h;
    const auto& key = params().key("A.Y");
    Script s;
    s.ops.push_back(op_csigv(key.pub));

    CHECK(eval(s, {h.sign_schnorr(key.secret)}, h.ctx).ok);
    CHECK_FALSE(eval(s, {h.sign_schnorr(params().key("A.W").secret)}, h.ctx).ok);

    Bytes truncated = h.sign_schnorr(key.secret);
    truncated.pop_back();
    CHECK_FALSE(eval(s, {truncated}, h.ctx).ok);
    CHECK_FALSE(eval(s, {}, h.ctx).ok); // stack underflow rejects
}

TEST_CASE("CSIGV verifies ecdsa in legacy context", "[scriptvm]")
{
    Harness h(ExecContext::Mode::legacy);
    Script s;
    s.ops.push_back(op_csigv(params().alice_ecdsa.pub));
    CHECK(eval(s, {h.sign_ecdsa(params().alice_ecdsa.secret)}, h.ctx).ok);
    Bytes wrong = h.sign_ecdsa(params().alice_ecdsa.secret, 0x03); // signed SINGLE, claims ALL
    wrong[64] = 0x01;
    CHECK_FALSE(eval(s, {wrong}, h.ctx).ok);
}

TEST_CASE("CSEQV boundary", "[scriptvm]")
{
    Harness h;
    Script s;
    s.ops.push_back(op_cseqv(10));

    h.ctx.confirmations_of_prevout = 9;
    CHECK_FALSE(eval(s, {}, h.ctx).ok);
    h.ctx.confirmations_of_prevout = 10;
    CHECK(eval(s, {}, h.ctx).ok);

    // sequence must also encode the lock
    h.tx.inputs[0].sequence = 9;
    CHECK_FALSE(eval(s, {}, h.ctx).ok);

    CHECK_THROWS_AS(op_cseqv(0x80000000u), std::invalid_argument);
}

TEST_CASE("OT_CSIGV verifies against its key list", "[scriptvm]")
{
    Harness h;
    const OtKeyPair& ka = params().ot_key("A.V");
    const OtKeyPair& kb = params().ot_key("B.V");
    Script s;
    s.ops.push_back(op_ot_csigv({ka.pk, kb.pk}));

    Bytes value(32, 0x5c);
    OtSignature sa = ot_sign(ka.sk, value);
    OtSignature sb = ot_sign(kb.sk, value);
    auto witness = build_ot_witness(s.ops[0], value, {sa, sb});
    CHECK(eval(s, witness, h.ctx).ok);

    // decoded group returns the pushed value
    size_t pos = 0;
    OtWitnessGroup g = parse_ot_witness(s.ops[0], witness, pos);
    CHECK(g.value == value);
    CHECK(pos == witness.size());

    // one signature invalid -> reject
    OtSignature bad = sb;
    bad.chains[3][0] ^= 1;
    auto bad_witness = build_ot_witness(s.ops[0], value, {sa, bad});
    CHECK_FALSE(eval(s, bad_witness, h.ctx).ok);

    CHECK_THROWS_AS(op_ot_csigv({}), std::invalid_argument);
}

TEST_CASE("hashed OT binding commits long structures", "[scriptvm]")
{
    Harness h;
    const OtKeyPair& key = params().ot_key("B.EC");
    Script s;
    s.ops.push_back(op_ot_csigv({key.pk}, OtBind::hashed));

    Bytes structure(211, 0xe1);
    OtSignature sig = ot_sign(key.sk, sha256(structure).bytes());
    auto witness = build_ot_witness(s.ops[0], structure, {sig});
    CHECK(eval(s, witness, h.ctx).ok);

    // value mutated after signing -> digit commitment no longer matches
    auto tampered = witness;
    tampered[0][5] ^= 1;
    CHECK_FALSE(eval(s, tampered, h.ctx).ok);

    size_t pos = 0;
    CHECK(parse_ot_witness(s.ops[0], witness, pos).value == structure);
}

TEST_CASE("envelope data block is dead code", "[scriptvm]")
{
    Harness h;
    Bytes user_input(151, 0xaa);
    Script u = make_envelope_script(params(), user_input);

    auto result = eval(u, {h.sign_schnorr(params().key("A.Y").secret)}, h.ctx);
    CHECK(result.ok);
    // the user-input push is skipped, never executed
    CHECK(result.dead_push_bytes == user_input.size());

    CHECK_FALSE(eval(u, {h.sign_schnorr(params().key("A.W").secret)}, h.ctx).ok);
}

TEST_CASE("IF/ELSE selects spending paths", "[scriptvm]")
{
    Harness h;
    const auto& alice = params().key("A.Y");
    const auto& cov_a = params().key("A.cov");
    const auto& cov_b = params().key("B.cov");

    Script handle;
    handle.ops.push_back(op_simple(OpKind::op_if));
    handle.ops.push_back(op_csigv(alice.pub));
    handle.ops.push_back(op_simple(OpKind::op_else));
    handle.ops.push_back(op_cseqv(10));
    handle.ops.push_back(op_csigv(cov_a.pub));
    handle.ops.push_back(op_csigv(cov_b.pub));
    handle.ops.push_back(op_simple(OpKind::op_endif));

    // path 1: selector true + Alice signature
    CHECK(eval(handle, {Bytes{0x01}, h.sign_schnorr(alice.secret)}, h.ctx).ok);
    // path 2: selector false + covenant pair after maturity
    CHECK(eval(handle,
               {Bytes{}, h.sign_schnorr(cov_a.secret), h.sign_schnorr(cov_b.secret)}, h.ctx)
              .ok);
    h.ctx.confirmations_of_prevout = 3;
    CHECK_FALSE(
        eval(handle, {Bytes{}, h.sign_schnorr(cov_a.secret), h.sign_schnorr(cov_b.secret)}, h.ctx)
            .ok);
}

TEST_CASE("unbalanced conditionals and RETURN reject", "[scriptvm]")
{
    Harness h;
    Script bad;
    bad.ops.push_back(op_simple(OpKind::op_if));
    CHECK_FALSE(eval(bad, {Bytes{0x01}}, h.ctx).ok);

    Script stray;
    stray.ops.push_back(op_simple(OpKind::op_endif));
    CHECK_FALSE(eval(stray, {}, h.ctx).ok);

    Script ret;
    ret.ops.push_back(op_simple(OpKind::op_return));
    CHECK_FALSE(eval(ret, {}, h.ctx).ok);
}

TEST_CASE("script serialization roundtrip and disassembly", "[scriptvm]")
{
    auto scripts = compile_named_scripts(params());
    for (const auto& [name, script] : scripts) {
        CHECK(Script::parse(script.serialize()) == script);
        CHECK_FALSE(script.disassemble().empty());
    }
    Script env = make_envelope_script(params(), Bytes(151, 0xab));
    CHECK(Script::parse(env.serialize()) == env);
}

TEST_CASE("named script structure follows the formal listing", "[scriptvm]")
{
    auto m = compile_named_scripts(params());

    // script_F2 = sver_F, sver_C', sver_V in order
    const Script& f2 = m["script_F2"];
    REQUIRE(f2.ops.size() == 3);
    CHECK(f2.ops[0] == m["sver_F"].ops[0]);
    CHECK(f2.ops[1] == m["sver_Cp"].ops[0]);
    CHECK(f2.ops[2] == m["sver_V"].ops[0]);

    // kick-off spend: S1 and S2 key checks plus OT checks for V and W
    const Script& c = m["script_KA_O1_CA"];
    REQUIRE(c.ops.size() == 4);
    CHECK(c.ops[0].kind == OpKind::csigv);
    CHECK(c.ops[0].data == params().key("A.S1").pub);
    CHECK(c.ops[1].data == params().key("A.S2").pub);
    CHECK(c.ops[2].kind == OpKind::ot_csigv);
    CHECK(c.ops[2].ot_keys[0].params.msg_len_bytes == 32);
    CHECK(c.ops[3].ot_keys[0].params.msg_len_bytes == 64);

    // sver_V carries both parties' keys
    CHECK(m["sver_V"].ops[0].ot_keys.size() == 2);

    // missing keys raise
    DagParams empty;
    CHECK_THROWS_AS(compile_named_scripts(empty), std::invalid_argument);
}
