// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_SCRIPTVM_HPP
#define ESSPI_SCRIPTVM_HPP

#include <deque>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <esspi/dag_params.hpp>
#include <esspi/sighash.hpp>
#include <esspi/storage.hpp>

namespace esspi {

// The small script vocabulary the transaction DAGs use. CSIGV embeds the
// public key push, CSEQV the timelock push, OT_CSIGV the one-time key list.
enum class OpKind : uint8_t {
    push,     // data push; empty payload is OP_0
    op_true,  // OP_1
    op_if,
    op_else,
    op_endif,
    op_return,
    csigv,    // <pk> CHECKSIGVERIFY
    cseqv,    // <t> CHECKSEQUENCEVERIFY DROP
    ot_csigv, // <keylist> OT-CHECKSIGVERIFY
};

// How OT_CSIGV binds the message: short fixed-size values are signed
// directly; long structures are pushed raw and committed through their
// SHA-256 digest.
enum class OtBind : uint8_t { direct = 0, hashed = 1 };

struct Op {
    OpKind kind = OpKind::push;
    Bytes data;                        // push payload / public key
    uint32_t num = 0;                  // cseqv timelock
    OtBind bind = OtBind::direct;      // ot_csigv
    std::vector<OtPublicKey> ot_keys;  // ot_csigv

    bool operator==(const Op&) const = default;
};

struct Script {
    std::vector<Op> ops;

    bool operator==(const Script&) const = default;

    Script& append(const Script& other)
    {
        ops.insert(ops.end(), other.ops.begin(), other.ops.end());
        return *this;
    }

    Bytes serialize() const;
    static Script parse(ByteSpan bytes);
    std::string disassemble() const;
};

inline Op op_push(ByteSpan data)
{
    Op o;
    o.kind = OpKind::push;
    o.data = to_bytes(data);
    return o;
}

inline Op op_csigv(ByteSpan pubkey)
{
    if (pubkey.size() != 32 && pubkey.size() != 33)
        throw std::invalid_argument("op_csigv: key must be 32 (schnorr) or 33 (ecdsa) bytes");
    Op o;
    o.kind = OpKind::csigv;
    o.data = to_bytes(pubkey);
    return o;
}

inline Op op_cseqv(uint32_t t)
{
    if (t >= 0x80000000u) throw std::invalid_argument("op_cseqv: timelock not encodable");
    Op o;
    o.kind = OpKind::cseqv;
    o.num = t;
    return o;
}

inline Op op_ot_csigv(std::vector<OtPublicKey> keys, OtBind bind = OtBind::direct)
{
    if (keys.empty()) throw std::invalid_argument("op_ot_csigv: empty key list");
    for (size_t i = 1; i < keys.size(); ++i)
        if (!(keys[i].params == keys[0].params))
            throw std::invalid_argument("op_ot_csigv: mismatched key parameters");
    Op o;
    o.kind = OpKind::ot_csigv;
    o.bind = bind;
    o.ot_keys = std::move(keys);
    return o;
}

inline Op op_simple(OpKind kind)
{
    Op o;
    o.kind = kind;
    return o;
}

namespace detail_script {

inline void write_push(ByteWriter& w, ByteSpan data)
{
    if (data.empty()) {
        w.u8(0x00);
    } else if (data.size() <= 75) {
        w.u8(static_cast<uint8_t>(data.size()));
        w.raw(data);
    } else if (data.size() <= 0xff) {
        w.u8(0x4c);
        w.u8(static_cast<uint8_t>(data.size()));
        w.raw(data);
    } else if (data.size() <= 0xffff) {
        w.u8(0x4d);
        w.u16le(static_cast<uint16_t>(data.size()));
        w.raw(data);
    } else {
        w.u8(0x4e);
        w.u32le(static_cast<uint32_t>(data.size()));
        w.raw(data);
    }
}

inline Bytes minimal_num(uint32_t v)
{
    Bytes out;
    while (v) {
        out.push_back(static_cast<uint8_t>(v & 0xff));
        v >>= 8;
    }
    if (!out.empty() && (out.back() & 0x80)) out.push_back(0x00);
    return out;
}

inline uint32_t parse_num(ByteSpan b)
{
    uint32_t v = 0;
    for (size_t i = 0; i < b.size() && i < 5; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

} // namespace detail_script

inline Bytes Script::serialize() const
{
    ByteWriter w;
    for (const Op& op : ops) {
        switch (op.kind) {
        case OpKind::push: detail_script::write_push(w, op.data); break;
        case OpKind::op_true: w.u8(0x51); break;
        case OpKind::op_if: w.u8(0x63); break;
        case OpKind::op_else: w.u8(0x67); break;
        case OpKind::op_endif: w.u8(0x68); break;
        case OpKind::op_return: w.u8(0x6a); break;
        case OpKind::csigv:
            detail_script::write_push(w, op.data);
            w.u8(0xad); // OP_CHECKSIGVERIFY
            break;
        case OpKind::cseqv:
            detail_script::write_push(w, detail_script::minimal_num(op.num));
            w.u8(0xb2); // OP_CHECKSEQUENCEVERIFY
            w.u8(0x75); // OP_DROP
            break;
        case OpKind::ot_csigv: {
            ByteWriter kw;
            kw.u8(static_cast<uint8_t>(op.bind));
            kw.compact_size(op.ot_keys.size());
            for (const OtPublicKey& pk : op.ot_keys) kw.var_bytes(pk.serialize());
            detail_script::write_push(w, kw.out);
            w.u8(0xba); // OT-CHECKSIGVERIFY (lab opcode)
            break;
        }
        }
    }
    return w.out;
}

inline Script Script::parse(ByteSpan bytes)
{
    Script s;
    size_t pos = 0;
    std::optional<Bytes> pending_push;
    auto flush = [&] {
        if (pending_push) {
            s.ops.push_back(op_push(*pending_push));
            pending_push.reset();
        }
    };
    while (pos < bytes.size()) {
        uint8_t op = bytes[pos];
        if (op == 0x00 || (op >= 0x01 && op <= 0x4e)) {
            flush();
            if (op == 0x00) {
                pending_push = Bytes{};
                ++pos;
            } else {
                pending_push = detail_storage::read_push(bytes, pos);
            }
            continue;
        }
        ++pos;
        switch (op) {
        case 0x51: flush(); s.ops.push_back(op_simple(OpKind::op_true)); break;
        case 0x63: flush(); s.ops.push_back(op_simple(OpKind::op_if)); break;
        case 0x67: flush(); s.ops.push_back(op_simple(OpKind::op_else)); break;
        case 0x68: flush(); s.ops.push_back(op_simple(OpKind::op_endif)); break;
        case 0x6a: flush(); s.ops.push_back(op_simple(OpKind::op_return)); break;
        case 0xad: {
            if (!pending_push) throw std::invalid_argument("Script::parse: CSIGV without key");
            s.ops.push_back(op_csigv(*pending_push));
            pending_push.reset();
            break;
        }
        case 0xb2: {
            if (!pending_push) throw std::invalid_argument("Script::parse: CSEQV without value");
            if (pos >= bytes.size() || bytes[pos] != 0x75)
                throw std::invalid_argument("Script::parse: CSEQV without DROP");
            ++pos;
            s.ops.push_back(op_cseqv(detail_script::parse_num(*pending_push)));
            pending_push.reset();
            break;
        }
        case 0xba: {
            if (!pending_push) throw std::invalid_argument("Script::parse: OT_CSIGV without keys");
            ByteReader r(*pending_push);
            OtBind bind = static_cast<OtBind>(r.u8());
            uint64_t count = r.compact_size();
            std::vector<OtPublicKey> keys;
            for (uint64_t i = 0; i < count; ++i) keys.push_back(OtPublicKey::parse(r.var_bytes()));
            s.ops.push_back(op_ot_csigv(std::move(keys), bind));
            pending_push.reset();
            break;
        }
        default: throw std::invalid_argument("Script::parse: unknown opcode");
        }
    }
    flush();
    return s;
}

inline std::string Script::disassemble() const
{
    std::ostringstream out;
    bool first = true;
    for (const Op& op : ops) {
        if (!first) out << " ";
        first = false;
        switch (op.kind) {
        case OpKind::push:
            if (op.data.empty())
                out << "PUSH(0)";
            else if (op.data.size() <= 8)
                out << "PUSH(" << hex(op.data) << ")";
            else
                out << "PUSH(" << op.data.size() << "B)";
            break;
        case OpKind::op_true: out << "TRUE"; break;
        case OpKind::op_if: out << "IF"; break;
        case OpKind::op_else: out << "ELSE"; break;
        case OpKind::op_endif: out << "ENDIF"; break;
        case OpKind::op_return: out << "RETURN"; break;
        case OpKind::csigv: out << "CSIGV(" << hex(op.data).substr(0, 8) << ")"; break;
        case OpKind::cseqv: out << "CSEQV(" << op.num << ")"; break;
        case OpKind::ot_csigv:
            out << "OT_CSIGV[" << op.ot_keys.size() << " keys," << op.ot_keys[0].params.msg_len_bytes
                << "B" << (op.bind == OtBind::hashed ? ",hashed" : "") << "]";
            break;
        }
    }
    return out.str();
}

// Execution context: which transaction input is being validated and how its
// signature message is built.
struct ExecContext {
    enum class Mode { legacy, taproot };

    const Tx* tx = nullptr;
    uint32_t input_index = 0;
    TxOut spent_output;
    int64_t confirmations_of_prevout = 0;
    Mode mode = Mode::taproot;

    Bytes script_code;                // legacy signed-message insertion
    std::vector<TxOut> spent_outputs; // taproot aggregate hashes
    std::optional<Digest32> leaf_hash;
    std::optional<Bytes> annex;

    SigScheme scheme() const
    {
        return mode == Mode::legacy ? SigScheme::ecdsa : SigScheme::schnorr;
    }

    Digest32 sig_digest(uint8_t hash_type) const
    {
        if (!tx) throw std::logic_error("ExecContext: no transaction");
        SighashFlag flag = SighashFlag::from_byte(hash_type);
        if (mode == Mode::legacy) return legacy_sighash(*tx, input_index, script_code, flag);
        std::optional<TapScriptExt> ext;
        if (leaf_hash) ext = TapScriptExt{*leaf_hash, 0, 0xffffffff};
        return taproot_sighash_from_msg(
            taproot_sigmsg(*tx, input_index, spent_outputs, flag, ext, annex, hash_type));
    }
};

struct EvalResult {
    bool ok = false;
    std::string reason;
    size_t dead_push_bytes = 0; // bytes of push data skipped in false branches

    static EvalResult accept() { return {true, "", 0}; }
    static EvalResult reject(std::string why) { return {false, std::move(why), 0}; }
};

// Witness helpers for OT_CSIGV. Items are listed in consumption order: for
// hashed binding the raw value first, then one item per message digit, then
// each signature's chain elements.
inline std::vector<Bytes> build_ot_witness(const Op& op, ByteSpan value,
                                           const std::vector<OtSignature>& sigs)
{
    if (op.kind != OpKind::ot_csigv) throw std::invalid_argument("build_ot_witness: wrong op");
    if (sigs.size() != op.ot_keys.size())
        throw std::invalid_argument("build_ot_witness: need one signature per key");
    const OtParams& params = op.ot_keys[0].params;
    std::vector<Bytes> items;
    Bytes msg;
    if (op.bind == OtBind::hashed) {
        items.push_back(to_bytes(value));
        msg = sha256(value).bytes();
    } else {
        msg = to_bytes(value);
    }
    if (msg.size() != params.msg_len_bytes)
        throw std::invalid_argument("build_ot_witness: message length mismatch");
    std::vector<uint32_t> digits = ot_digits(params, msg);
    for (uint32_t i = 0; i < params.msg_digit_count(); ++i)
        items.push_back(Bytes{static_cast<uint8_t>(digits[i])});
    for (const OtSignature& sig : sigs) {
        if (sig.chains.size() != params.total_digits())
            throw std::invalid_argument("build_ot_witness: bad signature size");
        for (const Bytes& elem : sig.chains) items.push_back(elem);
    }
    return items;
}

namespace detail_script {

// Reconstructs message bytes from per-digit stack items.
inline Bytes msg_from_digit_items(const OtParams& params, const std::vector<Bytes>& items)
{
    uint32_t per_byte = 8 / params.digit_bits;
    Bytes msg(params.msg_len_bytes, 0);
    for (uint32_t i = 0; i < params.msg_digit_count(); ++i) {
        if (items[i].size() != 1 || items[i][0] > params.digit_max())
            throw std::invalid_argument("bad digit item");
        uint32_t shift = 8 - params.digit_bits * (i % per_byte + 1);
        msg[i / per_byte] |= static_cast<uint8_t>(items[i][0] << shift);
    }
    return msg;
}

} // namespace detail_script

// Parses an OT_CSIGV witness group back into (value, signatures). Used by
// observers that harvest published one-time signatures from the chain.
struct OtWitnessGroup {
    Bytes value;
    std::vector<OtSignature> sigs;
};

inline OtWitnessGroup parse_ot_witness(const Op& op, const std::vector<Bytes>& items, size_t& pos)
{
    const OtParams& params = op.ot_keys[0].params;
    OtWitnessGroup g;
    if (op.bind == OtBind::hashed) g.value = items.at(pos++);
    std::vector<Bytes> digit_items;
    for (uint32_t i = 0; i < params.msg_digit_count(); ++i) digit_items.push_back(items.at(pos++));
    Bytes msg = detail_script::msg_from_digit_items(params, digit_items);
    if (op.bind == OtBind::direct) g.value = msg;
    for (size_t k = 0; k < op.ot_keys.size(); ++k) {
        OtSignature sig;
        sig.params = params;
        for (uint32_t i = 0; i < params.total_digits(); ++i) sig.chains.push_back(items.at(pos++));
        g.sigs.push_back(std::move(sig));
    }
    return g;
}

// Deterministic, total interpreter. The witness is consumed front to back in
// script-op order; script pushes go to the front of the same queue.
inline EvalResult eval(const Script& script, const std::vector<Bytes>& witness,
                       const ExecContext& ctx)
{
    std::deque<Bytes> stack(witness.begin(), witness.end());
    EvalResult result = EvalResult::accept();

    // branch state: exec flag per nested IF
    std::vector<bool> exec_stack;
    auto executing = [&] {
        for (bool e : exec_stack)
            if (!e) return false;
        return true;
    };
    auto pop = [&](const char* what) {
        if (stack.empty()) throw std::invalid_argument(std::string("stack underflow at ") + what);
        Bytes top = std::move(stack.front());
        stack.pop_front();
        return top;
    };
    auto truthy = [](const Bytes& b) {
        for (size_t i = 0; i < b.size(); ++i) {
            if (b[i] != 0) {
                // negative zero is false
                return !(i == b.size() - 1 && b[i] == 0x80);
            }
        }
        return false;
    };

    try {
        for (const Op& op : script.ops) {
            if (op.kind == OpKind::op_if) {
                bool cond = false;
                if (executing()) cond = truthy(pop("IF"));
                exec_stack.push_back(cond);
                continue;
            }
            if (op.kind == OpKind::op_else) {
                if (exec_stack.empty()) return EvalResult::reject("unbalanced ELSE");
                exec_stack.back() = !exec_stack.back();
                continue;
            }
            if (op.kind == OpKind::op_endif) {
                if (exec_stack.empty()) return EvalResult::reject("unbalanced ENDIF");
                exec_stack.pop_back();
                continue;
            }
            if (!executing()) {
                if (op.kind == OpKind::push) result.dead_push_bytes += op.data.size();
                continue;
            }
            switch (op.kind) {
            case OpKind::push: stack.push_front(op.data); break;
            case OpKind::op_true: stack.push_front(Bytes{0x01}); break;
            case OpKind::op_return: return EvalResult::reject("RETURN: unspendable");
            case OpKind::csigv: {
                Bytes sig = pop("CSIGV");
                if (sig.size() != 65) return EvalResult::reject("CSIGV: bad signature length");
                uint8_t hash_type = sig[64];
                Digest32 digest;
                try {
                    digest = ctx.sig_digest(hash_type);
                } catch (const std::exception& e) {
                    return EvalResult::reject(std::string("CSIGV: ") + e.what());
                }
                bool ok = sig_verify_raw(
                    op.data.size() == 32 ? SigScheme::schnorr : SigScheme::ecdsa, op.data, digest,
                    ByteSpan(sig.data(), 64));
                if (!ok) return EvalResult::reject("CSIGV: signature verification failed");
                break;
            }
            case OpKind::cseqv: {
                if (!ctx.tx) return EvalResult::reject("CSEQV: no transaction");
                uint32_t seq = ctx.tx->inputs.at(ctx.input_index).sequence;
                if (seq < op.num) return EvalResult::reject("CSEQV: sequence below timelock");
                if (ctx.confirmations_of_prevout < static_cast<int64_t>(op.num))
                    return EvalResult::reject("CSEQV: prevout not mature");
                break;
            }
            case OpKind::ot_csigv: {
                const OtParams& params = op.ot_keys[0].params;
                Bytes msg;
                Bytes raw_value;
                if (op.bind == OtBind::hashed) {
                    raw_value = pop("OT_CSIGV value");
                    msg = sha256(raw_value).bytes();
                }
                std::vector<Bytes> digit_items;
                for (uint32_t i = 0; i < params.msg_digit_count(); ++i)
                    digit_items.push_back(pop("OT_CSIGV digit"));
                Bytes digit_msg = detail_script::msg_from_digit_items(params, digit_items);
                if (op.bind == OtBind::hashed) {
                    if (digit_msg != msg)
                        return EvalResult::reject("OT_CSIGV: digits do not match value digest");
                } else {
                    msg = digit_msg;
                }
                for (const OtPublicKey& pk : op.ot_keys) {
                    OtSignature sig;
                    sig.params = params;
                    for (uint32_t i = 0; i < params.total_digits(); ++i)
                        sig.chains.push_back(pop("OT_CSIGV chain"));
                    if (!ot_verify(pk, msg, sig))
                        return EvalResult::reject("OT_CSIGV: one-time signature invalid");
                }
                break;
            }
            default: break;
            }
        }
    } catch (const std::exception& e) {
        return EvalResult::reject(e.what());
    }
    if (!exec_stack.empty()) return EvalResult::reject("unbalanced IF");
    return result;
}

// ---------------------------------------------------------------------------
// Named scripts of the enveloping DA-DAG.

inline Script make_sver(const DagParams& p, std::initializer_list<const char*> slots,
                        OtBind bind = OtBind::direct)
{
    std::vector<OtPublicKey> keys;
    for (const char* slot : slots) keys.push_back(p.ot_key(slot).pk);
    Script s;
    s.ops.push_back(op_ot_csigv(std::move(keys), bind));
    return s;
}

inline Script make_envelope_script(const DagParams& p, ByteSpan user_input)
{
    Script u;
    u.ops.push_back(op_csigv(p.key("A.Y").pub));
    u.ops.push_back(op_push({})); // PUSH 0
    u.ops.push_back(op_simple(OpKind::op_if));
    u.ops.push_back(op_push(user_input));
    u.ops.push_back(op_simple(OpKind::op_endif));
    return u;
}

// Every script of the formal DA-DAG listing, by name. script_U is compiled
// from a zero placeholder of the configured user-input length; instantiation
// replaces it with the real input.
inline std::map<std::string, Script> compile_named_scripts(const DagParams& p)
{
    std::map<std::string, Script> m;

    Script kao1ca;
    kao1ca.ops.push_back(op_csigv(p.key("A.S1").pub));
    kao1ca.ops.push_back(op_csigv(p.key("A.S2").pub));
    kao1ca.append(make_sver(p, {"A.V"}));
    kao1ca.append(make_sver(p, {"A.W"}));
    m["script_KA_O1_CA"] = kao1ca;

    Script kao1pbc;
    kao1pbc.ops.push_back(op_cseqv(p.timelock));
    kao1pbc.ops.push_back(op_csigv(p.key("A.cov").pub));
    kao1pbc.ops.push_back(op_csigv(p.key("B.cov").pub));
    m["script_KA_O1_PBC"] = kao1pbc;

    m["sver_V"] = make_sver(p, {"A.V", "B.V"});
    m["sver_F"] = make_sver(p, {"B.F"});
    m["sver_EC"] = make_sver(p, {"B.EC"}, OtBind::hashed);
    m["sver_W"] = make_sver(p, {"A.W", "B.W"});
    m["sver_S1"] = make_sver(p, {"B.S1"});
    m["sver_S2"] = make_sver(p, {"B.S2"});
    m["sver_Cp"] = make_sver(p, {"B.Cp"}, OtBind::hashed);
    m["sver_CA"] = make_sver(p, {"B.C"}, OtBind::hashed);
    m["sver_X"] = make_sver(p, {"B.X"});
    m["sver_L"] = make_sver(p, {"B.L"});
    m["sver_RAp"] = make_sver(p, {"B.RAp"}, OtBind::hashed);
    m["sver_ER"] = make_sver(p, {"B.ER"}, OtBind::hashed);
    m["sver_Y"] = make_sver(p, {"B.Y"});

    Script f1;
    f1.append(m["sver_F"]).append(m["sver_EC"]).append(m["sver_W"]).append(m["sver_S1"])
        .append(m["sver_S2"]);
    m["script_F1"] = f1;
    Script f2;
    f2.append(m["sver_F"]).append(m["sver_Cp"]).append(m["sver_V"]);
    m["script_F2"] = f2;
    Script f3;
    f3.append(m["sver_F"]).append(m["sver_W"]).append(m["sver_S1"]).append(m["sver_CA"]);
    m["script_F3"] = f3;
    Script f4;
    f4.append(m["sver_F"]).append(m["sver_RAp"]).append(m["sver_Y"]).append(m["sver_ER"]);
    m["script_F4"] = f4;

    m["script_KA_O2_KB1"] = m["sver_V"];

    Script kao2pbc;
    kao2pbc.ops.push_back(op_csigv(p.key("A.cov").pub));
    kao2pbc.ops.push_back(op_csigv(p.key("B.cov").pub));
    m["script_KA_O2_PBC"] = kao2pbc;

    Script kao2pbr;
    kao2pbr.ops.push_back(op_csigv(p.key("B.Q1").pub));
    kao2pbr.ops.push_back(op_csigv(p.key("A.W").pub));
    m["script_KA_O2_PBR"] = kao2pbr;

    Script cao1pbr;
    cao1pbr.ops.push_back(op_cseqv(p.timelock));
    cao1pbr.ops.push_back(op_csigv(p.key("B.Q2").pub));
    m["script_CA_O1_PBR"] = cao1pbr;

    m["script_U"] = make_envelope_script(p, Bytes(p.user_input_len, 0));
    return m;
}

} // namespace esspi

#endif // ESSPI_SCRIPTVM_HPP
