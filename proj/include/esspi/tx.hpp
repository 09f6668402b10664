// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_TX_HPP
#define ESSPI_TX_HPP

#include <vector>

#include <esspi/bytes.hpp>
#include <esspi/hashcore.hpp>

namespace esspi {

struct OutPoint {
    Digest32 txid;
    uint32_t vout = 0;

    auto operator<=>(const OutPoint&) const = default;

    void serialize(ByteWriter& w) const
    {
        w.raw(txid.span());
        w.u32le(vout);
    }
    static OutPoint parse(ByteReader& r)
    {
        OutPoint o;
        o.txid = Digest32::from_bytes(r.take(32));
        o.vout = r.u32le();
        return o;
    }
    std::string to_string() const { return txid.hex() + ":" + std::to_string(vout); }
};

struct TxIn {
    OutPoint prevout;
    Bytes script_sig;
    uint32_t sequence = 0xffffffff;
    std::vector<Bytes> witness;

    bool operator==(const TxIn&) const = default;
};

struct TxOut {
    uint64_t amount = 0;
    Bytes script_pubkey;

    bool operator==(const TxOut&) const = default;

    void serialize(ByteWriter& w) const
    {
        w.u64le(amount);
        w.var_bytes(script_pubkey);
    }
    static TxOut parse(ByteReader& r)
    {
        TxOut o;
        o.amount = r.u64le();
        o.script_pubkey = r.var_bytes();
        return o;
    }
    Bytes serialized() const
    {
        ByteWriter w;
        serialize(w);
        return w.out;
    }
};

struct Tx {
    uint32_t version = 2;
    std::vector<TxIn> inputs;
    std::vector<TxOut> outputs;
    uint32_t locktime = 0;

    bool operator==(const Tx&) const = default;
    bool has_witness() const
    {
        for (const TxIn& in : inputs)
            if (!in.witness.empty()) return true;
        return false;
    }
};

inline Bytes serialize_tx(const Tx& tx, bool with_witness = false)
{
    ByteWriter w;
    bool segwit = with_witness && tx.has_witness();
    w.u32le(tx.version);
    if (segwit) {
        w.u8(0x00); // marker
        w.u8(0x01); // flag
    }
    w.compact_size(tx.inputs.size());
    for (const TxIn& in : tx.inputs) {
        in.prevout.serialize(w);
        w.var_bytes(in.script_sig);
        w.u32le(in.sequence);
    }
    w.compact_size(tx.outputs.size());
    for (const TxOut& out : tx.outputs) out.serialize(w);
    if (segwit) {
        for (const TxIn& in : tx.inputs) {
            w.compact_size(in.witness.size());
            for (const Bytes& item : in.witness) w.var_bytes(item);
        }
    }
    w.u32le(tx.locktime);
    return w.out;
}

inline Tx parse_tx(ByteSpan data)
{
    ByteReader r(data);
    Tx tx;
    tx.version = r.u32le();
    uint64_t in_count = r.compact_size();
    bool segwit = false;
    if (in_count == 0 && r.remaining() > 0) {
        // marker/flag form
        uint8_t flag = r.u8();
        if (flag != 0x01) throw std::invalid_argument("parse_tx: bad segwit flag");
        segwit = true;
        in_count = r.compact_size();
    }
    for (uint64_t i = 0; i < in_count; ++i) {
        TxIn in;
        in.prevout = OutPoint::parse(r);
        in.script_sig = r.var_bytes();
        in.sequence = r.u32le();
        tx.inputs.push_back(std::move(in));
    }
    uint64_t out_count = r.compact_size();
    for (uint64_t i = 0; i < out_count; ++i) tx.outputs.push_back(TxOut::parse(r));
    if (segwit) {
        for (TxIn& in : tx.inputs) {
            uint64_t items = r.compact_size();
            for (uint64_t k = 0; k < items; ++k) in.witness.push_back(r.var_bytes());
        }
    }
    tx.locktime = r.u32le();
    if (!r.done()) throw std::invalid_argument("parse_tx: trailing bytes");
    return tx;
}

// Witness data is excluded from the txid.
inline Digest32 txid(const Tx& tx)
{
    return sha256d(serialize_tx(tx, false));
}

} // namespace esspi

#endif // ESSPI_TX_HPP
