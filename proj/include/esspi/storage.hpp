// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_STORAGE_HPP
#define ESSPI_STORAGE_HPP

#include <cmath>
#include <string>
#include <vector>

#include <esspi/taproot.hpp>
#include <esspi/tx.hpp>

namespace esspi {

enum class StorageMethod { op_return, envelope, p2wsh_addr, p2pk, bare_multisig };

inline const char* storage_method_name(StorageMethod m)
{
    switch (m) {
    case StorageMethod::op_return: return "op_return";
    case StorageMethod::envelope: return "envelope";
    case StorageMethod::p2wsh_addr: return "p2wsh_addr";
    case StorageMethod::p2pk: return "p2pk";
    case StorageMethod::bare_multisig: return "bare_multisig";
    }
    return "?";
}

inline StorageMethod storage_method_from_name(const std::string& name)
{
    for (StorageMethod m : {StorageMethod::op_return, StorageMethod::envelope,
                            StorageMethod::p2wsh_addr, StorageMethod::p2pk,
                            StorageMethod::bare_multisig})
        if (name == storage_method_name(m)) return m;
    throw std::invalid_argument("unknown storage method: " + name);
}

// Node-configurable standardness knobs.
struct StoragePolicy {
    bool standard = true;
    uint64_t op_return_cap = 80;
    uint32_t max_outputs_per_tx = 2500;
    uint64_t envelope_cap = 400'000;
    bool permit_bare_multisig = true;

    static StoragePolicy standard_policy() { return {}; }
    static StoragePolicy nonstandard_policy()
    {
        StoragePolicy p;
        p.standard = false;
        p.op_return_cap = 1'000'000;
        p.envelope_cap = 4'000'000;
        return p;
    }
};

// Dust model from Bitcoin Core's estimator: the spender of a segwit output
// pays for 67.75 additional vbytes, a non-segwit one for 148. Dust rate is
// fixed at 3 sat/vB.
inline constexpr double kSegwitSpendVbytes = 67.75;
inline constexpr double kNonSegwitSpendVbytes = 148.0;
inline constexpr double kDustRate = 3.0;

inline bool is_segwit_spk(ByteSpan spk)
{
    if (spk.size() < 4 || spk.size() > 42) return false;
    uint8_t ver = spk[0];
    bool ver_ok = ver == 0x00 || (ver >= 0x51 && ver <= 0x60);
    return ver_ok && spk[1] == spk.size() - 2;
}

inline bool is_op_return_spk(ByteSpan spk)
{
    return !spk.empty() && spk[0] == 0x6a;
}

inline uint64_t dust_threshold(const TxOut& out)
{
    if (is_op_return_spk(out.script_pubkey)) return 0;
    double size = static_cast<double>(out.serialized().size());
    double spend = is_segwit_spk(out.script_pubkey) ? kSegwitSpendVbytes : kNonSegwitSpendVbytes;
    return static_cast<uint64_t>(std::ceil(kDustRate * (size + spend)));
}

namespace detail_storage {

inline Bytes push_data(ByteSpan data)
{
    ByteWriter w;
    if (data.size() <= 75) {
        w.u8(static_cast<uint8_t>(data.size()));
    } else if (data.size() <= 0xff) {
        w.u8(0x4c);
        w.u8(static_cast<uint8_t>(data.size()));
    } else if (data.size() <= 0xffff) {
        w.u8(0x4d);
        w.u16le(static_cast<uint16_t>(data.size()));
    } else {
        w.u8(0x4e);
        w.u32le(static_cast<uint32_t>(data.size()));
    }
    w.raw(data);
    return w.out;
}

// Reads one push at `pos`; returns payload and advances pos.
inline Bytes read_push(ByteSpan script, size_t& pos)
{
    if (pos >= script.size()) throw std::invalid_argument("read_push: at end");
    uint8_t op = script[pos++];
    size_t len = 0;
    if (op <= 75) {
        len = op;
    } else if (op == 0x4c) {
        len = script[pos];
        pos += 1;
    } else if (op == 0x4d) {
        len = script[pos] | script[pos + 1] << 8;
        pos += 2;
    } else if (op == 0x4e) {
        len = read_le32(script.data() + pos);
        pos += 4;
    } else {
        throw std::invalid_argument("read_push: not a push opcode");
    }
    if (pos + len > script.size()) throw std::invalid_argument("read_push: truncated");
    Bytes out(script.begin() + pos, script.begin() + pos + len);
    pos += len;
    return out;
}

inline TxIn funding_placeholder(uint32_t index)
{
    TxIn in;
    in.prevout = OutPoint{Digest32{}, index};
    return in;
}

inline Tx skeleton(uint32_t funding_index)
{
    Tx tx;
    tx.inputs.push_back(funding_placeholder(funding_index));
    return tx;
}

} // namespace detail_storage

// A set of transaction templates that carry the user input on-chain, plus
// everything needed to read it back.
struct StoragePlan {
    StorageMethod method;
    StoragePolicy policy;
    std::vector<Tx> txs;     // envelope: [commit, reveal]
    uint64_t data_len = 0;
    uint64_t output_count = 0; // data-carrying outputs
};

inline StoragePlan encode_user_input(StorageMethod method, ByteSpan data,
                                     const StoragePolicy& policy = StoragePolicy{})
{
    using namespace detail_storage;
    if (data.empty()) throw std::invalid_argument("encode_user_input: data must be nonempty");

    StoragePlan plan;
    plan.method = method;
    plan.policy = policy;
    plan.data_len = data.size();

    auto chunks = [&](uint64_t cap) {
        std::vector<ByteSpan> out;
        for (size_t off = 0; off < data.size(); off += cap)
            out.push_back(data.subspan(off, std::min<size_t>(cap, data.size() - off)));
        return out;
    };

    switch (method) {
    case StorageMethod::op_return: {
        // one OP_RETURN output per transaction
        uint32_t fund = 0;
        for (ByteSpan chunk : chunks(policy.op_return_cap)) {
            Tx tx = skeleton(fund++);
            Bytes script;
            script.push_back(0x6a);
            Bytes push = push_data(chunk);
            script.insert(script.end(), push.begin(), push.end());
            tx.outputs.push_back(TxOut{0, script});
            plan.txs.push_back(std::move(tx));
            ++plan.output_count;
        }
        break;
    }
    case StorageMethod::p2wsh_addr:
    case StorageMethod::p2pk:
    case StorageMethod::bare_multisig: {
        if (method == StorageMethod::bare_multisig && !policy.permit_bare_multisig)
            throw std::invalid_argument("bare multisig not permitted by policy");
        uint64_t per_output = method == StorageMethod::p2wsh_addr ? 32
                              : method == StorageMethod::p2pk    ? 64
                                                                 : 192;
        uint32_t fund = 0;
        Tx tx = skeleton(fund++);
        for (ByteSpan chunk : chunks(per_output)) {
            Bytes padded = to_bytes(chunk);
            padded.resize(per_output, 0);
            Bytes script;
            if (method == StorageMethod::p2wsh_addr) {
                script.push_back(0x00);
                script.push_back(0x20);
                script.insert(script.end(), padded.begin(), padded.end());
            } else if (method == StorageMethod::p2pk) {
                Bytes key;
                key.push_back(0x04);
                key.insert(key.end(), padded.begin(), padded.end());
                script = push_data(key);
                script.push_back(0xac); // OP_CHECKSIG
            } else {
                script.push_back(0x51); // OP_1
                for (int k = 0; k < 3; ++k) {
                    Bytes key;
                    key.push_back(0x04);
                    key.insert(key.end(), padded.begin() + 64 * k, padded.begin() + 64 * (k + 1));
                    Bytes push = push_data(key);
                    script.insert(script.end(), push.begin(), push.end());
                }
                script.push_back(0x53); // OP_3
                script.push_back(0xae); // OP_CHECKMULTISIG
            }
            TxOut out{0, script};
            out.amount = dust_threshold(out);
            tx.outputs.push_back(std::move(out));
            ++plan.output_count;
            if (tx.outputs.size() == policy.max_outputs_per_tx) {
                plan.txs.push_back(std::move(tx));
                tx = skeleton(fund++);
            }
        }
        if (!tx.outputs.empty()) plan.txs.push_back(std::move(tx));
        break;
    }
    case StorageMethod::envelope: {
        if (data.size() > policy.envelope_cap)
            throw std::invalid_argument("encode_user_input: data exceeds policy cap");
        // skipping conditional: the data push is dead code behind PUSH 0 / IF
        Bytes script;
        script.push_back(0x00); // OP_0
        script.push_back(0x63); // OP_IF
        Bytes push = push_data(data);
        script.insert(script.end(), push.begin(), push.end());
        script.push_back(0x68); // OP_ENDIF
        script.push_back(0x51); // OP_1 so the script succeeds when executed

        TaprootAddress addr = taproot_address({TapLeaf{kTapLeafVersion, script}});
        Tx commit = skeleton(0);
        TxOut commit_out{0, addr.script_pubkey()};
        commit_out.amount = dust_threshold(commit_out);
        commit.outputs.push_back(commit_out);

        Tx reveal;
        TxIn in;
        in.prevout = OutPoint{txid(commit), 0};
        in.witness.push_back(script);
        in.witness.push_back(addr.control_block(0));
        reveal.inputs.push_back(std::move(in));
        reveal.outputs.push_back(TxOut{0, Bytes{0x6a}}); // dummy unspendable output

        plan.txs.push_back(std::move(commit));
        plan.txs.push_back(std::move(reveal));
        plan.output_count = 1;
        break;
    }
    }
    return plan;
}

inline Bytes decode_plan(const StoragePlan& plan)
{
    using namespace detail_storage;
    Bytes out;
    switch (plan.method) {
    case StorageMethod::op_return: {
        for (const Tx& tx : plan.txs) {
            for (const TxOut& o : tx.outputs) {
                if (!is_op_return_spk(o.script_pubkey)) continue;
                size_t pos = 1;
                Bytes chunk = read_push(o.script_pubkey, pos);
                out.insert(out.end(), chunk.begin(), chunk.end());
            }
        }
        break;
    }
    case StorageMethod::p2wsh_addr: {
        for (const Tx& tx : plan.txs)
            for (const TxOut& o : tx.outputs)
                out.insert(out.end(), o.script_pubkey.begin() + 2, o.script_pubkey.end());
        break;
    }
    case StorageMethod::p2pk: {
        for (const Tx& tx : plan.txs)
            for (const TxOut& o : tx.outputs) {
                size_t pos = 0;
                Bytes key = read_push(o.script_pubkey, pos);
                out.insert(out.end(), key.begin() + 1, key.end());
            }
        break;
    }
    case StorageMethod::bare_multisig: {
        for (const Tx& tx : plan.txs)
            for (const TxOut& o : tx.outputs) {
                size_t pos = 1;
                for (int k = 0; k < 3; ++k) {
                    Bytes key = read_push(o.script_pubkey, pos);
                    out.insert(out.end(), key.begin() + 1, key.end());
                }
            }
        break;
    }
    case StorageMethod::envelope: {
        const Tx& reveal = plan.txs.at(1);
        ByteSpan script = reveal.inputs.at(0).witness.at(0);
        size_t pos = 2; // OP_0 OP_IF
        out = read_push(script, pos);
        break;
    }
    }
    out.resize(plan.data_len);
    return out;
}

// Cost model for the expansion factor. Costs are measured in weight units
// per user-input byte: non-witness bytes weigh 4, witness bytes weigh 1, and
// dust locked into unspendable storage outputs converts to weight at the
// matching 3 sat/vB fee rate. The per-tx funding input is priced at the
// 160-vbyte prevout reference and transactions carry a 10-byte skeleton.
inline constexpr double kInputRefVbytes = 160.0;
inline constexpr double kTxSkeletonBytes = 10.0;

struct ExpansionBreakdown {
    StorageMethod method;
    uint64_t data_len = 0;
    uint64_t tx_count = 0;
    uint64_t output_count = 0;
    double outputs_weight = 0;  // 4 x data-carrying output bytes
    double overhead_weight = 0; // 4 x (skeletons + funding input refs + non-data outputs)
    double witness_weight = 0;  // 1 x witness bytes (envelope reveal)
    double dust_sats = 0;
    double dust_weight = 0;     // dust converted at the documented fee rate
    double total_weight = 0;
    double factor = 0;          // total_weight / data_len
};

inline ExpansionBreakdown expansion_factor(StorageMethod method, uint64_t data_len,
                                           const StoragePolicy& policy = StoragePolicy{})
{
    if (data_len == 0) throw std::invalid_argument("expansion_factor: data_len must be > 0");
    ExpansionBreakdown e;
    e.method = method;
    e.data_len = data_len;

    auto outputs_for = [&](uint64_t per_output) { return (data_len + per_output - 1) / per_output; };
    auto txs_for = [&](uint64_t outputs) {
        return (outputs + policy.max_outputs_per_tx - 1) / policy.max_outputs_per_tx;
    };
    auto per_tx_overhead = [&](uint64_t txs) {
        return 4.0 * (kTxSkeletonBytes + kInputRefVbytes) * static_cast<double>(txs);
    };

    switch (method) {
    case StorageMethod::op_return: {
        uint64_t cap = policy.op_return_cap;
        uint64_t txs = outputs_for(cap);
        e.tx_count = txs;
        e.output_count = txs;
        double out_bytes = 0;
        for (uint64_t off = 0; off < data_len; off += cap) {
            uint64_t chunk = std::min(cap, data_len - off);
            uint64_t script = 1 + (chunk <= 75 ? 1 : chunk <= 255 ? 2 : chunk <= 65535 ? 3 : 5) + chunk;
            out_bytes += 8.0 + static_cast<double>(compact_size_len(script)) + static_cast<double>(script);
        }
        e.outputs_weight = 4.0 * out_bytes;
        e.overhead_weight = per_tx_overhead(txs);
        break;
    }
    case StorageMethod::p2wsh_addr:
    case StorageMethod::p2pk:
    case StorageMethod::bare_multisig: {
        uint64_t per_output = method == StorageMethod::p2wsh_addr ? 32
                              : method == StorageMethod::p2pk    ? 64
                                                                 : 192;
        uint64_t txout_bytes = method == StorageMethod::p2wsh_addr ? 43
                               : method == StorageMethod::p2pk    ? 76
                                                                  : 210;
        double spend = method == StorageMethod::p2wsh_addr ? kSegwitSpendVbytes
                                                           : kNonSegwitSpendVbytes;
        uint64_t outputs = outputs_for(per_output);
        uint64_t txs = txs_for(outputs);
        e.tx_count = txs;
        e.output_count = outputs;
        e.outputs_weight = 4.0 * static_cast<double>(outputs * txout_bytes);
        e.dust_sats = kDustRate * (static_cast<double>(txout_bytes) + spend) *
                      static_cast<double>(outputs);
        e.dust_weight = e.dust_sats * 4.0 / kDustRate; // sats at 3 sat/vB = 0.75 sat/WU
        e.overhead_weight = per_tx_overhead(txs);
        break;
    }
    case StorageMethod::envelope: {
        uint64_t pairs = (data_len + policy.envelope_cap - 1) / policy.envelope_cap;
        e.tx_count = 2 * pairs;
        e.output_count = pairs;
        // commit: skeleton + funding input + P2TR output (43 bytes, spent by
        // the reveal so its sats come back)
        e.overhead_weight = per_tx_overhead(pairs) + 4.0 * 43.0 * static_cast<double>(pairs);
        // reveal: skeleton + prevout (41 bytes) + dummy output (10 bytes),
        // data rides in the witness with ~60 bytes of envelope/control/push
        // overhead per pair
        e.overhead_weight += 4.0 * (kTxSkeletonBytes + 41.0 + 10.0) * static_cast<double>(pairs);
        e.witness_weight = static_cast<double>(data_len) + 60.0 * static_cast<double>(pairs);
        break;
    }
    }
    e.total_weight = e.outputs_weight + e.overhead_weight + e.witness_weight + e.dust_weight;
    e.factor = e.total_weight / static_cast<double>(data_len);
    return e;
}

} // namespace esspi

#endif // ESSPI_STORAGE_HPP
