// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_OTS_HPP
#define ESSPI_OTS_HPP

#include <cstdint>
#include <vector>

#include <esspi/bytes.hpp>
#include <esspi/hashcore.hpp>

namespace esspi {

// Winternitz one-time signatures over truncated SHA-256 chains. Used for
// message linking between protocol transactions and for committing the
// program-input hash V. digit_bits is the classic Winternitz w expressed as
// bits per digit.
struct OtParams {
    uint32_t hash_len_bytes = 20;
    uint32_t digit_bits = 4;
    uint32_t msg_len_bytes = 32;

    void validate() const
    {
        if (digit_bits != 1 && digit_bits != 2 && digit_bits != 4 && digit_bits != 8)
            throw std::invalid_argument("OtParams: digit_bits must be 1, 2, 4 or 8");
        if (hash_len_bytes == 0 || hash_len_bytes > 32)
            throw std::invalid_argument("OtParams: hash_len_bytes must be in [1,32]");
        if (msg_len_bytes == 0) throw std::invalid_argument("OtParams: msg_len_bytes must be > 0");
    }

    uint32_t digit_max() const { return (1u << digit_bits) - 1; }
    uint32_t msg_digit_count() const { return msg_len_bytes * 8 / digit_bits; }

    // Digits needed to encode the maximal checksum value in base 2^w.
    uint32_t checksum_digit_count() const
    {
        uint64_t max_sum = static_cast<uint64_t>(msg_digit_count()) * digit_max();
        uint32_t count = 1;
        while (max_sum >= (1ull << digit_bits)) {
            max_sum >>= digit_bits;
            ++count;
        }
        return count;
    }

    uint32_t total_digits() const { return msg_digit_count() + checksum_digit_count(); }

    bool operator==(const OtParams&) const = default;
};

struct OtPublicKey {
    OtParams params;
    std::vector<Bytes> chains;

    bool operator==(const OtPublicKey&) const = default;

    Bytes serialize() const
    {
        ByteWriter w;
        w.u8(static_cast<uint8_t>(params.hash_len_bytes));
        w.u8(static_cast<uint8_t>(params.digit_bits));
        w.u32le(params.msg_len_bytes);
        w.compact_size(chains.size());
        for (const Bytes& c : chains) w.raw(c);
        return w.out;
    }
    static OtPublicKey parse(ByteSpan data)
    {
        ByteReader r(data);
        OtPublicKey pk;
        pk.params.hash_len_bytes = r.u8();
        pk.params.digit_bits = r.u8();
        pk.params.msg_len_bytes = r.u32le();
        pk.params.validate();
        uint64_t count = r.compact_size();
        for (uint64_t i = 0; i < count; ++i) pk.chains.push_back(r.take(pk.params.hash_len_bytes));
        return pk;
    }
};

struct OtSecretKey {
    OtParams params;
    std::vector<Bytes> chains;
};

struct OtSignature {
    OtParams params;
    std::vector<Bytes> chains;

    bool operator==(const OtSignature&) const = default;

    Bytes serialize() const
    {
        ByteWriter w;
        w.u8(static_cast<uint8_t>(params.hash_len_bytes));
        w.u8(static_cast<uint8_t>(params.digit_bits));
        w.u32le(params.msg_len_bytes);
        w.compact_size(chains.size());
        for (const Bytes& c : chains) w.raw(c);
        return w.out;
    }
    static OtSignature parse(ByteSpan data)
    {
        ByteReader r(data);
        OtSignature sig;
        sig.params.hash_len_bytes = r.u8();
        sig.params.digit_bits = r.u8();
        sig.params.msg_len_bytes = r.u32le();
        sig.params.validate();
        uint64_t count = r.compact_size();
        for (uint64_t i = 0; i < count; ++i)
            sig.chains.push_back(r.take(sig.params.hash_len_bytes));
        return sig;
    }
};

namespace detail_ots {

inline Bytes chain_hash(ByteSpan elem, uint32_t hash_len)
{
    Digest32 d = sha256(elem);
    return Bytes(d.b.begin(), d.b.begin() + hash_len);
}

inline Bytes chain_iterate(Bytes elem, uint32_t steps, uint32_t hash_len)
{
    for (uint32_t i = 0; i < steps; ++i) elem = chain_hash(elem, hash_len);
    return elem;
}

} // namespace detail_ots

// Message digits followed by checksum digits, most significant bits first.
inline std::vector<uint32_t> ot_digits(const OtParams& params, ByteSpan msg)
{
    params.validate();
    if (msg.size() != params.msg_len_bytes)
        throw std::invalid_argument("ot_digits: message length mismatch");
    std::vector<uint32_t> digits;
    digits.reserve(params.total_digits());
    uint32_t per_byte = 8 / params.digit_bits;
    for (uint8_t byte : msg) {
        for (uint32_t k = 0; k < per_byte; ++k) {
            uint32_t shift = 8 - params.digit_bits * (k + 1);
            digits.push_back((byte >> shift) & params.digit_max());
        }
    }
    uint64_t checksum = 0;
    for (uint32_t d : digits) checksum += params.digit_max() - d;
    uint32_t cd = params.checksum_digit_count();
    for (uint32_t k = 0; k < cd; ++k) {
        uint32_t shift = params.digit_bits * (cd - 1 - k);
        digits.push_back(static_cast<uint32_t>(checksum >> shift) & params.digit_max());
    }
    return digits;
}

inline OtPublicKey ot_public_from_secret(const OtSecretKey& sk)
{
    OtPublicKey pk;
    pk.params = sk.params;
    pk.chains.reserve(sk.chains.size());
    for (const Bytes& s : sk.chains)
        pk.chains.push_back(detail_ots::chain_iterate(s, sk.params.digit_max(),
                                                      sk.params.hash_len_bytes));
    return pk;
}

inline std::pair<OtSecretKey, OtPublicKey> ot_keygen(const OtParams& params, ByteSpan seed)
{
    params.validate();
    OtSecretKey sk;
    sk.params = params;
    uint32_t total = params.total_digits();
    sk.chains.reserve(total);
    for (uint32_t i = 0; i < total; ++i) {
        Sha256 h;
        uint8_t idx[4];
        write_be32(idx, i);
        h.update(seed).update(str_bytes("ots-chain")).update(ByteSpan(idx, 4));
        Digest32 d = h.finalize();
        sk.chains.emplace_back(d.b.begin(), d.b.begin() + params.hash_len_bytes);
    }
    return {sk, ot_public_from_secret(sk)};
}

inline OtSignature ot_sign(const OtSecretKey& sk, ByteSpan msg)
{
    std::vector<uint32_t> digits = ot_digits(sk.params, msg);
    OtSignature sig;
    sig.params = sk.params;
    sig.chains.reserve(digits.size());
    for (size_t i = 0; i < digits.size(); ++i)
        sig.chains.push_back(detail_ots::chain_iterate(sk.chains[i], digits[i],
                                                       sk.params.hash_len_bytes));
    return sig;
}

inline bool ot_verify(const OtPublicKey& pk, ByteSpan msg, const OtSignature& sig)
{
    if (sig.params != pk.params) return false;
    if (msg.size() != pk.params.msg_len_bytes) return false;
    std::vector<uint32_t> digits = ot_digits(pk.params, msg);
    if (sig.chains.size() != digits.size() || pk.chains.size() != digits.size()) return false;
    for (size_t i = 0; i < digits.size(); ++i) {
        if (sig.chains[i].size() != pk.params.hash_len_bytes) return false;
        Bytes walked = detail_ots::chain_iterate(sig.chains[i], pk.params.digit_max() - digits[i],
                                                 pk.params.hash_len_bytes);
        if (walked != pk.chains[i]) return false;
    }
    return true;
}

// On-chain cost model for one Winternitz-signed message, in vbytes.
//
// Per digit the witness carries the chain element plus its push prefix and a
// one-byte digit value; the script carries the public chain element push and
// a fixed opcode budget for the chain walk and comparison. The opcode budget
// and the per-message script overhead are calibration constants, frozen so
// that the default parameters land on ~25 vbytes per signed bit (6400 vbytes
// for a 32-byte digest). The per-bit figure holds for messages of 8 bytes
// and up; below that the checksum digits dominate.
inline constexpr uint64_t kOtPerDigitOpcodeBudget = 52;
inline constexpr uint64_t kOtScriptFixedOverhead = 35;

struct OtCostBreakdown {
    uint64_t msg_digits = 0;
    uint64_t checksum_digits = 0;
    uint64_t signature_vbytes = 0; // witness side: chain elements + digit values
    uint64_t script_vbytes = 0;    // script side: pubkey pushes + opcode budget
    uint64_t total_vbytes = 0;
    double per_bit = 0.0;
};

inline OtCostBreakdown ot_witness_cost(const OtParams& params, uint64_t msg_bits)
{
    params.validate();
    if (msg_bits == 0) throw std::invalid_argument("ot_witness_cost: msg_bits must be > 0");
    OtCostBreakdown c;
    c.msg_digits = (msg_bits + params.digit_bits - 1) / params.digit_bits;
    uint64_t max_sum = c.msg_digits * params.digit_max();
    c.checksum_digits = 1;
    while (max_sum >= (1ull << params.digit_bits)) {
        max_sum >>= params.digit_bits;
        ++c.checksum_digits;
    }
    uint64_t digits = c.msg_digits + c.checksum_digits;
    c.signature_vbytes = digits * (params.hash_len_bytes + 1 + 1);
    c.script_vbytes = digits * (params.hash_len_bytes + 1 + kOtPerDigitOpcodeBudget) +
                      kOtScriptFixedOverhead;
    c.total_vbytes = c.signature_vbytes + c.script_vbytes;
    c.per_bit = static_cast<double>(c.total_vbytes) / static_cast<double>(msg_bits);
    return c;
}

} // namespace esspi

#endif // ESSPI_OTS_HPP
