// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_LEDGER_HPP
#define ESSPI_LEDGER_HPP

#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include <esspi/scriptvm.hpp>

namespace esspi {

struct SubmitResult {
    bool accepted = false;
    std::string reason;
    Digest32 tx_id;
};

// Deterministic simulated chain: a UTXO set, script execution on submit,
// relative-timelock maturity, block advancement and unconditional
// replacement of unconfirmed transactions (a strict superset of RBF, which
// keeps replacement-attack tests conservative).
class Ledger {
public:
    struct Entry {
        TxOut out;
        int64_t conf_height = 0; // height at which the creating tx confirmed
    };

    int64_t height() const { return height_; }
    uint64_t total_fees() const { return total_fees_; }
    uint64_t total_funded() const { return total_funded_; }
    size_t utxo_count() const { return utxos_.size(); }
    size_t mempool_size() const { return mempool_.size(); }
    const std::vector<Tx>& mempool() const { return mempool_; }
    const std::vector<Tx>& replaced() const { return replaced_; }

    // Secondary validation knob: when false, submit() checks structure and
    // amounts but skips script execution (never used by protocol flows).
    bool validate_scripts = true;

    // Mints a spendable output outside validation, like a faucet.
    OutPoint fund(TxOut out)
    {
        Sha256 h;
        uint8_t ctr[4];
        write_be32(ctr, fund_counter_++);
        h.update(str_bytes("ledger-fund")).update(ByteSpan(ctr, 4));
        OutPoint op{h.finalize(), 0};
        utxos_[op] = Entry{out, height_};
        total_funded_ += out.amount;
        return op;
    }

    bool is_unspent(const OutPoint& op) const { return utxos_.count(op) > 0; }

    // Blocks elapsed since the creating transaction confirmed; 0 right at
    // confirmation, so a CSEQV(t) input matures once t blocks were mined on
    // top. Unconfirmed prevouts report -1.
    int64_t confirmations(const OutPoint& op) const
    {
        auto it = utxos_.find(op);
        if (it == utxos_.end()) return -1;
        return height_ - it->second.conf_height;
    }

    std::optional<TxOut> utxo(const OutPoint& op) const
    {
        auto it = utxos_.find(op);
        if (it == utxos_.end()) return std::nullopt;
        return it->second.out;
    }

    SubmitResult submit(const Tx& tx)
    {
        SubmitResult res;
        res.tx_id = txid(tx);
        std::string reason;
        if (!validate(tx, reason)) {
            res.reason = reason;
            return res;
        }
        mempool_.push_back(tx);
        res.accepted = true;
        history_.push_back({res.tx_id, -1});
        return res;
    }

    void mine(int64_t blocks = 1)
    {
        if (blocks < 1) throw std::invalid_argument("mine: need at least one block");
        int64_t at = height_ + 1;
        for (const Tx& tx : mempool_) confirm(tx, at);
        mempool_.clear();
        height_ += blocks;
    }

    // Swaps an unconfirmed transaction (and anything chained on it) for a
    // replacement. Models the replacement-cycling surface.
    SubmitResult replace(const Digest32& old_txid, const Tx& new_tx)
    {
        bool found = false;
        std::vector<Tx> kept;
        std::vector<OutPoint> dropped_outs;
        for (const Tx& tx : mempool_) {
            bool drop = txid(tx) == old_txid;
            if (!drop) {
                for (const TxIn& in : tx.inputs)
                    for (const OutPoint& gone : dropped_outs)
                        if (in.prevout == gone) drop = true;
            }
            if (drop) {
                found = true;
                replaced_.push_back(tx);
                Digest32 id = txid(tx);
                for (uint32_t i = 0; i < tx.outputs.size(); ++i)
                    dropped_outs.push_back(OutPoint{id, i});
            } else {
                kept.push_back(tx);
            }
        }
        if (!found) return SubmitResult{false, "replace: transaction not in mempool", txid(new_tx)};
        mempool_ = std::move(kept);
        return submit(new_tx);
    }

    nlohmann::json dump() const
    {
        nlohmann::json j;
        j["height"] = height_;
        j["total_fees"] = total_fees_;
        j["total_funded"] = total_funded_;
        j["fund_counter"] = fund_counter_;
        nlohmann::json utxos = nlohmann::json::array();
        for (const auto& [op, entry] : utxos_) {
            utxos.push_back({{"txid", op.txid.hex()},
                             {"vout", op.vout},
                             {"amount", entry.out.amount},
                             {"script_pubkey", hex(entry.out.script_pubkey)},
                             {"conf_height", entry.conf_height}});
        }
        j["utxos"] = utxos;
        nlohmann::json pool = nlohmann::json::array();
        for (const Tx& tx : mempool_) pool.push_back(hex(serialize_tx(tx, true)));
        j["mempool"] = pool;
        return j;
    }

    static Ledger restore(const nlohmann::json& j)
    {
        Ledger l;
        l.height_ = j["height"].get<int64_t>();
        l.total_fees_ = j["total_fees"].get<uint64_t>();
        l.total_funded_ = j["total_funded"].get<uint64_t>();
        l.fund_counter_ = j["fund_counter"].get<uint32_t>();
        for (const auto& u : j["utxos"]) {
            OutPoint op{Digest32::from_hex(u["txid"].get<std::string>()),
                        u["vout"].get<uint32_t>()};
            l.utxos_[op] = Entry{TxOut{u["amount"].get<uint64_t>(),
                                       unhex(u["script_pubkey"].get<std::string>())},
                                 u["conf_height"].get<int64_t>()};
        }
        for (const auto& t : j["mempool"]) l.mempool_.push_back(parse_tx(unhex(t.get<std::string>())));
        return l;
    }

private:
    struct HistoryItem {
        Digest32 id;
        int64_t height; // -1 while unconfirmed
    };

    // Locates the spent output among confirmed UTXOs or mempool outputs.
    std::optional<std::pair<TxOut, int64_t>> find_spendable(const OutPoint& op,
                                                            const std::vector<OutPoint>& consumed)
    {
        for (const OutPoint& c : consumed)
            if (c == op) return std::nullopt;
        auto it = utxos_.find(op);
        if (it != utxos_.end()) {
            // already claimed by a mempool tx?
            for (const Tx& m : mempool_)
                for (const TxIn& in : m.inputs)
                    if (in.prevout == op) return std::nullopt;
            return std::make_pair(it->second.out, height_ - it->second.conf_height);
        }
        for (const Tx& m : mempool_) {
            Digest32 mid = txid(m);
            if (mid == op.txid && op.vout < m.outputs.size()) {
                // not yet confirmed: zero blocks on top
                for (const Tx& other : mempool_)
                    for (const TxIn& in : other.inputs)
                        if (in.prevout == op) return std::nullopt;
                return std::make_pair(m.outputs[op.vout], int64_t{0});
            }
        }
        return std::nullopt;
    }

    bool validate(const Tx& tx, std::string& reason)
    {
        if (tx.inputs.empty() || tx.outputs.empty()) {
            reason = "transaction needs inputs and outputs";
            return false;
        }
        std::vector<TxOut> spent;
        std::vector<int64_t> confs;
        std::vector<OutPoint> consumed;
        uint64_t in_sum = 0, out_sum = 0;
        for (const TxIn& in : tx.inputs) {
            auto found = find_spendable(in.prevout, consumed);
            if (!found) {
                reason = "missing or double-spent prevout " + in.prevout.to_string();
                return false;
            }
            consumed.push_back(in.prevout);
            spent.push_back(found->first);
            confs.push_back(found->second);
            in_sum += found->first.amount;
        }
        for (const TxOut& out : tx.outputs) out_sum += out.amount;
        if (out_sum > in_sum) {
            reason = "outputs exceed inputs";
            return false;
        }
        if (!validate_scripts) return true;
        for (uint32_t i = 0; i < tx.inputs.size(); ++i) {
            if (!validate_input(tx, i, spent, confs[i], reason)) return false;
        }
        return true;
    }

    bool validate_input(const Tx& tx, uint32_t index, const std::vector<TxOut>& spent,
                        int64_t confirmations, std::string& reason)
    {
        const TxIn& in = tx.inputs[index];
        const TxOut& prev = spent[index];

        ExecContext ctx;
        ctx.tx = &tx;
        ctx.input_index = index;
        ctx.spent_output = prev;
        ctx.confirmations_of_prevout = confirmations;

        if (is_p2tr_script(prev.script_pubkey)) {
            std::vector<Bytes> stack = in.witness;
            std::optional<Bytes> annex;
            if (stack.size() >= 2 && !stack.back().empty() && stack.back()[0] == 0x50) {
                annex = stack.back();
                stack.pop_back();
            }
            if (stack.size() < 2) {
                reason = "taproot input needs script and control block";
                return false;
            }
            Bytes control = stack.back();
            stack.pop_back();
            Bytes script_bytes = stack.back();
            stack.pop_back();

            Script leaf;
            try {
                leaf = Script::parse(script_bytes);
            } catch (const std::exception& e) {
                reason = std::string("leaf script: ") + e.what();
                return false;
            }
            Digest32 lh = tapleaf_hash(TapLeaf{kTapLeafVersion, script_bytes});
            ByteSpan spk(prev.script_pubkey);
            if (!verify_control_block(spk.subspan(2), lh, control)) {
                reason = "control block does not commit the leaf";
                return false;
            }
            ctx.mode = ExecContext::Mode::taproot;
            ctx.spent_outputs = spent;
            ctx.leaf_hash = lh;
            ctx.annex = annex;
            EvalResult r = eval(leaf, stack, ctx);
            if (!r.ok) {
                reason = "input " + std::to_string(index) + ": " + r.reason;
                return false;
            }
            return true;
        }

        // bare script output: the scriptPubKey is the program, the witness
        // stack carries its arguments (legacy signing rules apply)
        Script program;
        try {
            program = Script::parse(prev.script_pubkey);
        } catch (const std::exception& e) {
            reason = std::string("script_pubkey: ") + e.what();
            return false;
        }
        ctx.mode = ExecContext::Mode::legacy;
        ctx.script_code = prev.script_pubkey;
        EvalResult r = eval(program, in.witness, ctx);
        if (!r.ok) {
            reason = "input " + std::to_string(index) + ": " + r.reason;
            return false;
        }
        return true;
    }

    // Mempool confirms in submission order, so same-block chains resolve
    // through the UTXO map directly.
    void confirm(const Tx& tx, int64_t at_height)
    {
        uint64_t in_sum = 0, out_sum = 0;
        for (const TxIn& in : tx.inputs) {
            auto it = utxos_.find(in.prevout);
            if (it == utxos_.end()) throw std::logic_error("confirm: validated prevout vanished");
            in_sum += it->second.out.amount;
            utxos_.erase(it);
        }
        Digest32 id = txid(tx);
        for (uint32_t i = 0; i < tx.outputs.size(); ++i)
            utxos_[OutPoint{id, i}] = Entry{tx.outputs[i], at_height};
        for (const TxOut& out : tx.outputs) out_sum += out.amount;
        total_fees_ += in_sum - out_sum;
    }

    int64_t height_ = 0;
    uint64_t total_fees_ = 0;
    uint64_t total_funded_ = 0;
    uint32_t fund_counter_ = 0;
    std::map<OutPoint, Entry> utxos_;
    std::vector<Tx> mempool_;
    std::vector<Tx> replaced_;
    std::vector<HistoryItem> history_;
};

} // namespace esspi

#endif // ESSPI_LEDGER_HPP
