// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_SIGHASH_HPP
#define ESSPI_SIGHASH_HPP

#include <optional>
#include <string>
#include <vector>

#include <esspi/tx.hpp>

namespace esspi {

enum class SighashBase : uint8_t { all = 1, none = 2, single = 3 };

struct SighashFlag {
    SighashBase base = SighashBase::all;
    bool anyonecanpay = false;

    uint8_t byte() const
    {
        return static_cast<uint8_t>(base) | (anyonecanpay ? 0x80 : 0x00);
    }
    static SighashFlag from_byte(uint8_t b)
    {
        uint8_t base = b & 0x03;
        if (b == 0x00) base = 0x01; // SIGHASH_DEFAULT behaves as ALL
        if (base < 1 || base > 3 || (b & 0x7c) != 0)
            throw std::invalid_argument("SighashFlag: invalid hash_type byte");
        return SighashFlag{static_cast<SighashBase>(base), (b & 0x80) != 0};
    }
    bool operator==(const SighashFlag&) const = default;
};

inline const SighashFlag kSighashAll{SighashBase::all, false};
inline const SighashFlag kSighashSingleAcp{SighashBase::single, true};

// The byte string D' actually covered by a legacy signature: scripts removed
// from all inputs other than the signed one, the script code inserted there,
// and the 4-byte hash type appended. The single-SHA256 of this message is the
// program-input hash V; the double-SHA256 is what ECDSA signs.
inline Bytes legacy_signed_message(const Tx& tx, uint32_t input_index, ByteSpan script_code,
                                   SighashFlag flag)
{
    if (input_index >= tx.inputs.size())
        throw std::out_of_range("legacy_signed_message: input index out of range");
    if (flag.base == SighashBase::single && input_index >= tx.outputs.size())
        throw std::out_of_range("legacy_signed_message: SIGHASH_SINGLE with no matching output");

    ByteWriter w;
    w.u32le(tx.version);
    std::vector<uint32_t> ins;
    for (uint32_t i = 0; i < tx.inputs.size(); ++i)
        if (!flag.anyonecanpay || i == input_index) ins.push_back(i);
    w.compact_size(ins.size());
    for (uint32_t i : ins) {
        const TxIn& in = tx.inputs[i];
        in.prevout.serialize(w);
        if (i == input_index) {
            w.var_bytes(script_code);
        } else {
            w.compact_size(0);
        }
        uint32_t seq = in.sequence;
        if (i != input_index && flag.base != SighashBase::all) seq = 0;
        w.u32le(seq);
    }
    if (flag.base == SighashBase::none) {
        w.compact_size(0);
    } else if (flag.base == SighashBase::single) {
        w.compact_size(input_index + 1);
        for (uint32_t i = 0; i < input_index; ++i) {
            w.u64le(0xffffffffffffffffull);
            w.compact_size(0);
        }
        tx.outputs[input_index].serialize(w);
    } else {
        w.compact_size(tx.outputs.size());
        for (const TxOut& out : tx.outputs) out.serialize(w);
    }
    w.u32le(tx.locktime);
    w.u32le(flag.byte());
    return w.out;
}

inline Digest32 legacy_sighash(const Tx& tx, uint32_t input_index, ByteSpan script_code,
                               SighashFlag flag)
{
    return sha256d(legacy_signed_message(tx, input_index, script_code, flag));
}

struct TapScriptExt {
    Digest32 tapleaf_hash;
    uint8_t key_version = 0;
    uint32_t codesep_pos = 0xffffffff;

    bool operator==(const TapScriptExt&) const = default;
};

// The taproot common signature message, one named field per row. Field
// presence follows the sighash flag; serialization order is row order.
struct CommonSigMsg {
    uint8_t hash_type = 0x01;
    uint32_t n_version = 2;
    uint32_t n_locktime = 0;
    std::optional<Digest32> sha_prevouts;
    std::optional<Digest32> sha_amounts;
    std::optional<Digest32> sha_script_pubkeys;
    std::optional<Digest32> sha_sequences;
    std::optional<Digest32> sha_outputs;
    uint8_t spend_type = 0;
    std::optional<OutPoint> outpoint;     // ANYONECANPAY only
    std::optional<uint64_t> amount;       // ANYONECANPAY only
    std::optional<Bytes> script_pubkey;   // ANYONECANPAY only
    std::optional<uint32_t> n_sequence;   // ANYONECANPAY only
    std::optional<uint32_t> input_index;  // without ANYONECANPAY
    std::optional<Digest32> sha_annex;
    std::optional<Digest32> sha_single_output; // SIGHASH_SINGLE only
    std::optional<TapScriptExt> ext;           // script path spend extension

    bool operator==(const CommonSigMsg&) const = default;

    Bytes serialize() const
    {
        ByteWriter w;
        w.u8(hash_type);
        w.u32le(n_version);
        w.u32le(n_locktime);
        if (sha_prevouts) w.raw(sha_prevouts->span());
        if (sha_amounts) w.raw(sha_amounts->span());
        if (sha_script_pubkeys) w.raw(sha_script_pubkeys->span());
        if (sha_sequences) w.raw(sha_sequences->span());
        if (sha_outputs) w.raw(sha_outputs->span());
        w.u8(spend_type);
        if (outpoint) outpoint->serialize(w);
        if (amount) w.u64le(*amount);
        if (script_pubkey) w.var_bytes(*script_pubkey);
        if (n_sequence) w.u32le(*n_sequence);
        if (input_index) w.u32le(*input_index);
        if (sha_annex) w.raw(sha_annex->span());
        if (sha_single_output) w.raw(sha_single_output->span());
        if (ext) {
            w.raw(ext->tapleaf_hash.span());
            w.u8(ext->key_version);
            w.u32le(ext->codesep_pos);
        }
        return w.out;
    }

    // Field names in serialization order, for inclusion-matrix tests.
    std::vector<std::string> present_fields() const
    {
        std::vector<std::string> f = {"hash_type", "nVersion", "nLockTime"};
        if (sha_prevouts) f.push_back("sha_prevouts");
        if (sha_amounts) f.push_back("sha_amounts");
        if (sha_script_pubkeys) f.push_back("sha_scriptPubkeys");
        if (sha_sequences) f.push_back("sha_sequences");
        if (sha_outputs) f.push_back("sha_outputs");
        f.push_back("spend_type");
        if (outpoint) f.push_back("outpoint");
        if (amount) f.push_back("amount");
        if (script_pubkey) f.push_back("scriptPubKey");
        if (n_sequence) f.push_back("nSequence");
        if (input_index) f.push_back("input_index");
        if (sha_annex) f.push_back("sha_annex");
        if (sha_single_output) f.push_back("sha_single_output");
        if (ext) {
            f.push_back("tapleaf_hash");
            f.push_back("key_version");
            f.push_back("codesep_pos");
        }
        return f;
    }
};

inline CommonSigMsg build_common_sigmsg(const Tx& tx, uint32_t input_index,
                                        const std::vector<TxOut>& spent_outputs,
                                        SighashFlag flag,
                                        const std::optional<TapScriptExt>& ext = std::nullopt,
                                        const std::optional<Bytes>& annex = std::nullopt,
                                        std::optional<uint8_t> hash_type_byte = std::nullopt)
{
    if (input_index >= tx.inputs.size())
        throw std::out_of_range("build_common_sigmsg: input index out of range");
    if (spent_outputs.size() != tx.inputs.size())
        throw std::invalid_argument("build_common_sigmsg: need one spent output per input");

    CommonSigMsg m;
    m.hash_type = hash_type_byte.value_or(flag.byte());
    m.n_version = tx.version;
    m.n_locktime = tx.locktime;
    if (!flag.anyonecanpay) {
        {
            ByteWriter w;
            for (const TxIn& in : tx.inputs) in.prevout.serialize(w);
            m.sha_prevouts = sha256(w.out);
        }
        {
            ByteWriter w;
            for (const TxOut& o : spent_outputs) w.u64le(o.amount);
            m.sha_amounts = sha256(w.out);
        }
        {
            ByteWriter w;
            for (const TxOut& o : spent_outputs) w.var_bytes(o.script_pubkey);
            m.sha_script_pubkeys = sha256(w.out);
        }
        {
            ByteWriter w;
            for (const TxIn& in : tx.inputs) w.u32le(in.sequence);
            m.sha_sequences = sha256(w.out);
        }
    }
    if (flag.base == SighashBase::all) {
        ByteWriter w;
        for (const TxOut& o : tx.outputs) o.serialize(w);
        m.sha_outputs = sha256(w.out);
    }
    m.spend_type = static_cast<uint8_t>((ext ? 2 : 0) + (annex ? 1 : 0));
    if (flag.anyonecanpay) {
        m.outpoint = tx.inputs[input_index].prevout;
        m.amount = spent_outputs[input_index].amount;
        m.script_pubkey = spent_outputs[input_index].script_pubkey;
        m.n_sequence = tx.inputs[input_index].sequence;
    } else {
        m.input_index = input_index;
    }
    if (annex) {
        ByteWriter w;
        w.var_bytes(*annex);
        m.sha_annex = sha256(w.out);
    }
    if (flag.base == SighashBase::single) {
        if (input_index >= tx.outputs.size())
            throw std::out_of_range("build_common_sigmsg: SIGHASH_SINGLE with no matching output");
        m.sha_single_output = sha256(tx.outputs[input_index].serialized());
    }
    m.ext = ext;
    return m;
}

// The message M' over which the taproot signature digest is computed
// (common signature message plus extension, without the sighash epoch).
inline Bytes taproot_sigmsg(const Tx& tx, uint32_t input_index,
                            const std::vector<TxOut>& spent_outputs, SighashFlag flag,
                            const std::optional<TapScriptExt>& ext = std::nullopt,
                            const std::optional<Bytes>& annex = std::nullopt,
                            std::optional<uint8_t> hash_type_byte = std::nullopt)
{
    return build_common_sigmsg(tx, input_index, spent_outputs, flag, ext, annex, hash_type_byte)
        .serialize();
}

// tag_hash || tag_hash || epoch || message: the fixed-size structure whose
// single SHA-256 is the value signed by raw Schnorr. This is the C'/R' form
// fraud proofs are rebuilt from.
inline Bytes taproot_signed_struct(ByteSpan sigmsg)
{
    static const Digest32 tag = sha256(str_bytes("TapSighash"));
    ByteWriter w;
    w.raw(tag.span());
    w.raw(tag.span());
    w.u8(0x00);
    w.raw(sigmsg);
    return w.out;
}

inline Digest32 taproot_sighash_from_msg(ByteSpan sigmsg)
{
    return sha256(taproot_signed_struct(sigmsg));
}

inline Digest32 taproot_sighash(const Tx& tx, uint32_t input_index,
                                const std::vector<TxOut>& spent_outputs, SighashFlag flag,
                                const std::optional<TapScriptExt>& ext = std::nullopt,
                                const std::optional<Bytes>& annex = std::nullopt)
{
    return taproot_sighash_from_msg(taproot_sigmsg(tx, input_index, spent_outputs, flag, ext, annex));
}

} // namespace esspi

#endif // ESSPI_SIGHASH_HPP
