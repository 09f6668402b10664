// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_DAG_PARAMS_HPP
#define ESSPI_DAG_PARAMS_HPP

#include <map>
#include <string>

#include <esspi/ots.hpp>
#include <esspi/sig.hpp>
#include <esspi/taproot.hpp>

namespace esspi {

struct SchnorrKeyPair {
    Bytes secret; // 32
    Bytes pub;    // 32, x-only
};

struct EcdsaKeyPair {
    Bytes secret; // 32
    Bytes pub;    // 33, compressed
};

struct OtKeyPair {
    OtSecretKey sk;
    OtPublicKey pk;
};

// One deliberate malformation of the commit/reveal instantiation. Each kind
// maps 1:1 to an attack vector from the security analysis.
enum class TamperKind {
    none,
    extra_output,           // C carries a second output
    wrong_sighash,          // S2 signed with the wrong hash_type
    wrong_taptree,          // X committed to an unexpected leaf set
    spendable_internal_key, // X tweaks a key Alice controls instead of NUMS
    extra_input,            // C spends an extra input
    with_annex,             // C's spend carries an annex
    bad_V,                  // OT-signed V does not match the envelope leaf
    bad_W,                  // W is not a valid signature for the punishment tx
    bad_R_template,         // R deviates from the fixed template
    bad_script_U,           // envelope script violates the expected grammar
    grind_R,                // two distinct signed reveal variants
};

inline const char* tamper_kind_name(TamperKind k)
{
    switch (k) {
    case TamperKind::none: return "none";
    case TamperKind::extra_output: return "extra_output";
    case TamperKind::wrong_sighash: return "wrong_sighash";
    case TamperKind::wrong_taptree: return "wrong_taptree";
    case TamperKind::spendable_internal_key: return "spendable_internal_key";
    case TamperKind::extra_input: return "extra_input";
    case TamperKind::with_annex: return "with_annex";
    case TamperKind::bad_V: return "bad_V";
    case TamperKind::bad_W: return "bad_W";
    case TamperKind::bad_R_template: return "bad_R_template";
    case TamperKind::bad_script_U: return "bad_script_U";
    case TamperKind::grind_R: return "grind_R";
    }
    return "?";
}

// Keys, amounts and the relative timelock shared by all three DAG variants.
//
// Schnorr keys (x-only): A.W, A.Y, A.S1, A.S2, A.cov, B.Q1, B.Q2, B.cov.
// One-time keys by slot: A.V/B.V commit the program-input hash, A.W/B.W the
// punishment signature, B.S1/B.S2 the commit signatures, B.F the fraud
// index, B.X/B.L auxiliary digests, B.Y the reveal signature, B.S the legacy
// ECDSA signature, and B.Cp/B.C/B.EC/B.ER/B.RAp commit signed-message
// structures through their SHA-256 digest.
struct DagParams {
    std::map<std::string, SchnorrKeyPair> schnorr;
    EcdsaKeyPair alice_ecdsa;
    std::map<std::string, OtKeyPair> ot;

    uint32_t timelock = 10;          // relative timelock T, blocks
    uint64_t funding_amount = 200'000;
    uint64_t handle_amount = 60'000; // K output 1
    uint64_t signal_amount = 60'000; // K output 2
    uint64_t x_amount = 50'000;      // C output, hardcoded template value
    uint64_t sweep_amount = 100'000; // penalization/continuation outputs
    Bytes nums_x = nums_internal_key();
    uint32_t user_input_len = 151;   // keeps the envelope message block-aligned

    const SchnorrKeyPair& key(const std::string& name) const
    {
        auto it = schnorr.find(name);
        if (it == schnorr.end()) throw std::invalid_argument("DagParams: missing key " + name);
        return it->second;
    }
    const OtKeyPair& ot_key(const std::string& slot) const
    {
        auto it = ot.find(slot);
        if (it == ot.end()) throw std::invalid_argument("DagParams: missing OT key " + slot);
        return it->second;
    }

    static DagParams generate(ByteSpan seed)
    {
        DagParams p;
        auto derive32 = [&](const std::string& label) {
            for (uint32_t ctr = 0;; ++ctr) {
                Sha256 h;
                uint8_t cb[4];
                write_be32(cb, ctr);
                h.update(seed).update(str_bytes(label)).update(ByteSpan(cb, 4));
                Digest32 d = h.finalize();
                secp::Num num = secp::Num::from_bytes(d.span());
                if (!num.is_zero() && num < secp::order_n()) return d.bytes();
            }
        };
        for (const char* name : {"A.W", "A.Y", "A.S1", "A.S2", "A.cov", "B.Q1", "B.Q2", "B.cov"}) {
            Bytes sec = derive32(std::string("schnorr/") + name);
            p.schnorr[name] = SchnorrKeyPair{sec, schnorr_pubkey(sec)};
        }
        {
            Bytes sec = derive32("ecdsa/A.D");
            p.alice_ecdsa = EcdsaKeyPair{sec, ecdsa_pubkey(sec)};
        }
        struct Slot {
            const char* name;
            uint32_t msg_len;
        };
        static const Slot slots[] = {
            {"A.V", 32}, {"B.V", 32},  {"A.W", 64}, {"B.W", 64},  {"B.S1", 65}, {"B.S2", 65},
            {"B.F", 1},  {"B.X", 32},  {"B.L", 32}, {"B.Y", 64},  {"B.S", 64},  {"B.Cp", 32},
            {"B.C", 32}, {"B.EC", 32}, {"B.ER", 32}, {"B.RAp", 32},
        };
        for (const Slot& s : slots) {
            Bytes ot_seed = derive32(std::string("ot/") + s.name);
            OtParams op{20, 4, s.msg_len};
            auto [sk, pk] = ot_keygen(op, ot_seed);
            p.ot[s.name] = OtKeyPair{std::move(sk), std::move(pk)};
        }
        return p;
    }
};

} // namespace esspi

#endif // ESSPI_DAG_PARAMS_HPP
