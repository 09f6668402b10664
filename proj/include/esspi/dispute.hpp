// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_DISPUTE_HPP
#define ESSPI_DISPUTE_HPP

#include <random>

#include <esspi/cpu.hpp>
#include <esspi/ledger.hpp>

namespace esspi {

// A party's view of one execution: full traces plus the step-hash chain.
class TraceSource {
public:
    virtual ~TraceSource() = default;
    virtual size_t size() const = 0;
    virtual FullTraceRecord trace(size_t i) const = 0;
    virtual Digest32 hash(size_t i) const = 0;
    // MEB content at the time a given step executes, reconstructed from this
    // source's own write records.
    virtual Bytes meb_at(size_t step) const = 0;
};

// Replays write records to recover the MEB snapshot before each step.
inline std::vector<std::array<uint8_t, 64>> reconstruct_meb_history(
    const std::vector<FullTraceRecord>& traces, const MemLayout& layout)
{
    std::vector<std::array<uint8_t, 64>> history(traces.size());
    std::array<uint8_t, 64> meb{};
    for (size_t i = 0; i < traces.size(); ++i) {
        history[i] = meb;
        const TraceRecord& t = traces[i].trace;
        if (t.opcode == static_cast<uint32_t>(Opcode::Lssw) && layout.in_upi(t.write_addr)) {
            write_le32(meb.data() + (t.write_addr - layout.upi_base) % 64, t.write_value);
        } else if (t.opcode == static_cast<uint32_t>(Opcode::Sw) && layout.in_meb(t.write_addr)) {
            write_le32(meb.data() + (t.write_addr - layout.meb_base), t.write_value);
        }
    }
    return history;
}

class VectorSource : public TraceSource {
public:
    VectorSource(std::vector<FullTraceRecord> traces, std::vector<Digest32> hashes,
                 MemLayout layout = MemLayout{})
        : traces_(std::move(traces)), hashes_(std::move(hashes)),
          meb_(reconstruct_meb_history(traces_, layout))
    {
    }
    explicit VectorSource(const RunResult& run)
        : VectorSource(run.traces, run.step_hashes, run.final_state.layout)
    {
    }

    size_t size() const override { return traces_.size(); }
    FullTraceRecord trace(size_t i) const override { return traces_.at(i); }
    Digest32 hash(size_t i) const override { return hashes_.at(i); }
    Bytes meb_at(size_t step) const override
    {
        const auto& m = meb_.at(step);
        return Bytes(m.begin(), m.end());
    }

protected:
    std::vector<FullTraceRecord> traces_;
    std::vector<Digest32> hashes_;
    std::vector<std::array<uint8_t, 64>> meb_;
};

// Single-step corruptions of an honest run, with the hash chain recomputed
// from the corrupted step so the lie is internally consistent.
enum class TraceTamper {
    write_value,      // store lie, MEB claims stay honest
    write_value_meb,  // same lie carried into the MEB claims
    mib,              // midstate flipped at one step
    opcode,           // claimed opcode changed
    pc_next,          // control-flow lie
    chain_break,      // step hash incoherent with the trace
    meb_snapback,     // forged MEB/MIB window that rejoins the honest chain
};

inline const char* trace_tamper_name(TraceTamper t)
{
    switch (t) {
    case TraceTamper::write_value: return "write_value";
    case TraceTamper::write_value_meb: return "write_value_meb";
    case TraceTamper::mib: return "mib";
    case TraceTamper::opcode: return "opcode";
    case TraceTamper::pc_next: return "pc_next";
    case TraceTamper::chain_break: return "chain_break";
    case TraceTamper::meb_snapback: return "meb_snapback";
    }
    return "?";
}

class TamperedSource : public TraceSource {
public:
    TamperedSource(const RunResult& base, size_t step, TraceTamper kind)
        : layout_(base.final_state.layout), traces_(base.traces), hashes_(base.step_hashes)
    {
        TraceRecord& t = traces_.at(step).trace;
        bool meb_from_tampered = false;
        switch (kind) {
        case TraceTamper::write_value: t.write_value ^= 0x1; break;
        case TraceTamper::write_value_meb:
            t.write_value ^= 0x1;
            meb_from_tampered = true;
            break;
        case TraceTamper::mib: t.mib[0] ^= 0x01; break;
        case TraceTamper::opcode:
            t.opcode = t.opcode == static_cast<uint32_t>(Opcode::Nop)
                           ? static_cast<uint32_t>(Opcode::Add)
                           : static_cast<uint32_t>(Opcode::Nop);
            break;
        case TraceTamper::pc_next: t.pc_next ^= 0x1; break;
        case TraceTamper::chain_break: break; // hashes mutated below
        case TraceTamper::meb_snapback:
            apply_snapback(step);
            meb_from_tampered = true;
            break;
        }

        if (kind == TraceTamper::chain_break) {
            hashes_.at(step).b[0] ^= 0x01;
            for (size_t i = step + 1; i < traces_.size(); ++i)
                hashes_[i] = step_hash(hashes_[i - 1], traces_[i].trace);
        } else {
            for (size_t i = step; i < traces_.size(); ++i)
                hashes_[i] = step_hash(i == 0 ? Digest32{} : hashes_[i - 1], traces_[i].trace);
        }

        meb_ = reconstruct_meb_history(meb_from_tampered ? traces_ : base.traces, layout_);
    }

    size_t size() const override { return traces_.size(); }
    FullTraceRecord trace(size_t i) const override { return traces_.at(i); }
    Digest32 hash(size_t i) const override { return hashes_.at(i); }
    Bytes meb_at(size_t step) const override
    {
        const auto& m = meb_.at(step);
        return Bytes(m.begin(), m.end());
    }

private:
    // Lie at an LSSW step, recompute the MIB across the next hash window so
    // the compression is self-consistent, then rejoin the honest midstates.
    // The discontinuity survives only as an unanswerable preimage demand.
    void apply_snapback(size_t step)
    {
        TraceRecord& lie = traces_.at(step).trace;
        if (lie.opcode != static_cast<uint32_t>(Opcode::Lssw))
            throw std::invalid_argument("meb_snapback: needs an LSSW step");
        lie.write_value ^= 0x1;
        // the hash step that consumes the lie, and the one after it
        size_t x = step + 1;
        while (x < traces_.size() && !is_hashing_opcode(traces_[x].trace.opcode)) ++x;
        if (x == traces_.size()) throw std::invalid_argument("meb_snapback: no following hash step");
        size_t x2 = x + 1;
        while (x2 < traces_.size() && !is_hashing_opcode(traces_[x2].trace.opcode)) ++x2;

        auto forged_meb = reconstruct_meb_history(traces_, layout_);
        Midstate before = Midstate::from_digest(
            Digest32::from_bytes(x == 0 ? Midstate::iv().digest().b : traces_[x - 1].trace.mib), 0);
        Digest32 forged = owcf_compress(before, ByteSpan(forged_meb[x].data(), 64)).digest();
        for (size_t i = x; i < x2 && i < traces_.size(); ++i) traces_[i].trace.mib = forged.b;
        // from x2 on the honest midstates resume
    }

    MemLayout layout_;
    std::vector<FullTraceRecord> traces_;
    std::vector<Digest32> hashes_;
    std::vector<std::array<uint8_t, 64>> meb_;
};

// ---------------------------------------------------------------------------
// Session

struct DisputeConfig {
    uint32_t arity = 2;          // partition fan-out
    uint32_t round_timeout = 5;  // blocks a party has to answer
    size_t max_rounds = 512;
    uint64_t channel_amount = 40'000;
};

struct DisputeContext {
    Digest32 v;      // the one-time-signed program input hash
    uint32_t ab = 0; // section boundary
    MemLayout layout;
};

struct ProverBehavior {
    std::optional<size_t> silent_after;  // stop answering after this many responses
    std::optional<size_t> equivocate_at; // re-sign an earlier slot with a new value
};

struct VerifierBehavior {
    bool adversarial = false; // ignore the truth, harass an honest prover
    uint64_t seed = 0;
};

struct RoundLogEntry {
    size_t round;
    char actor; // 'P' or 'V'
    std::string kind;
    std::string payload_digest;
    std::string ledger_txid;
};

struct DisputeOutcome {
    enum class Verdict { prover_wins, verifier_wins };
    Verdict verdict = Verdict::prover_wins;
    std::string reason;
    size_t prover_rounds = 0; // prover response messages
    size_t total_rounds = 0;
    size_t partition_rounds = 0;               // partition replies
    std::optional<size_t> first_disagreement;  // the r the search isolated
    bool protocol_failure = false; // a preimage demand was answered against an honest verifier
    std::vector<RoundLogEntry> log;

    bool verifier_wins() const { return verdict == Verdict::verifier_wins; }
    // rounds beyond the kickoff commitment
    size_t challenge_rounds() const { return prover_rounds > 0 ? prover_rounds - 1 : 0; }
};

namespace detail_dispute {

// The on-chain leg of the session: one authenticated transaction per
// message, a relative-timelock escape hatch per round.
class Channel {
public:
    Channel(Ledger& ledger, const DisputeConfig& cfg, ByteSpan seed)
        : ledger_(ledger), cfg_(cfg), seed_(to_bytes(seed))
    {
        chan_ = ledger_.fund(TxOut{cfg.channel_amount, script_for_round(0).serialize()});
    }

    // Publishes one round message carrying sha256(payload) under the round's
    // one-time key; the raw payload rides in the witness.
    Digest32 send(size_t round, ByteSpan payload)
    {
        OtKeyPair key = round_key(round);
        Digest32 digest = sha256(payload);
        Tx tx;
        tx.inputs.push_back(TxIn{chan_, {}, 0xfffffffe, {}});
        tx.outputs.push_back(TxOut{cfg_.channel_amount, script_for_round(round + 1).serialize()});
        Script gate = script_for_round(round);
        std::vector<Bytes> witness = {Bytes{0x01}};
        for (const Bytes& item :
             build_ot_witness(gate.ops.at(1), digest.bytes(), {ot_sign(key.sk, digest.bytes())}))
            witness.push_back(item);
        witness.push_back(to_bytes(payload));
        tx.inputs[0].witness = witness;
        SubmitResult r = ledger_.submit(tx);
        if (!r.accepted) throw std::logic_error("dispute channel: " + r.reason);
        ledger_.mine();
        chan_ = OutPoint{r.tx_id, 0};
        last_txid_ = r.tx_id;
        return digest;
    }

    // The waiting party claims the channel once the opponent's deadline lapses.
    void claim_timeout()
    {
        ledger_.mine(cfg_.round_timeout);
        Tx tx;
        tx.inputs.push_back(TxIn{chan_, {}, cfg_.round_timeout, {}});
        tx.outputs.push_back(TxOut{cfg_.channel_amount, Bytes{0x51}});
        tx.inputs[0].witness = {Bytes{}};
        SubmitResult r = ledger_.submit(tx);
        if (!r.accepted) throw std::logic_error("dispute timeout claim: " + r.reason);
        ledger_.mine();
        last_txid_ = r.tx_id;
    }

    Digest32 last_txid() const { return last_txid_; }

private:
    Script script_for_round(size_t round)
    {
        OtKeyPair key = round_key(round);
        Script s;
        s.ops.push_back(op_simple(OpKind::op_if));
        s.ops.push_back(op_ot_csigv({key.pk}));
        s.ops.push_back(op_simple(OpKind::op_else));
        s.ops.push_back(op_cseqv(cfg_.round_timeout));
        s.ops.push_back(op_simple(OpKind::op_endif));
        return s;
    }

    OtKeyPair round_key(size_t round)
    {
        auto it = keys_.find(round);
        if (it != keys_.end()) return it->second;
        Sha256 h;
        uint8_t rb[4];
        write_be32(rb, static_cast<uint32_t>(round));
        h.update(seed_).update(str_bytes("round-key")).update(ByteSpan(rb, 4));
        auto [sk, pk] = ot_keygen(OtParams{20, 4, 32}, h.finalize().span());
        return keys_.emplace(round, OtKeyPair{std::move(sk), std::move(pk)}).first->second;
    }

    Ledger& ledger_;
    DisputeConfig cfg_;
    Bytes seed_;
    OutPoint chan_;
    Digest32 last_txid_;
    std::map<size_t, OtKeyPair> keys_;
};

} // namespace detail_dispute

// Runs the whole dispute: partition search over the step-hash chain, then
// the hashing-core dispatch with its OWCF, MEB-write and midstate-search
// challenges. Every message becomes a ledger transaction.
//
// The regular instruction and read challenges of the host protocol are stood
// in for by a trusted referee over the non-hashing trace fields; the hashing
// path (store values feeding the MEB, and the MIB itself) is resolved by the
// script-checkable challenges only.
class DisputeSession {
public:
    DisputeSession(Ledger& ledger, const DisputeContext& ctx, const TraceSource& prover,
                   ProverBehavior prover_behavior, const TraceSource& truth,
                   VerifierBehavior verifier_behavior, DisputeConfig cfg = {})
        : ctx_(ctx), prover_(prover), pb_(prover_behavior), truth_(truth), vb_(verifier_behavior),
          cfg_(cfg), rng_(verifier_behavior.seed ^ 0x9e3779b97f4a7c15ull),
          channel_(ledger, cfg, sha256(str_bytes("dispute-channel")).span())
    {
        if (cfg_.arity < 2) throw std::invalid_argument("DisputeSession: arity must be >= 2");
    }

    DisputeOutcome run()
    {
        size_t n = prover_.size();
        if (n == 0 || n != truth_.size())
            throw std::invalid_argument("DisputeSession: sources must agree on the length");
        if (ctx_.ab == 0 || ctx_.ab >= n)
            throw std::invalid_argument("DisputeSession: boundary must be inside the trace");

        // kickoff: the prover commits to the final chain head
        if (!prover_send("final_head", prover_.hash(n - 1).bytes())) return out_;

        bool disagree = vb_.adversarial || !(prover_.hash(n - 1) == truth_.hash(n - 1));
        if (!disagree) {
            finish(DisputeOutcome::Verdict::prover_wins, "no-challenge");
            return out_;
        }

        std::optional<size_t> r = partition_search(n);
        if (r) {
            out_.first_disagreement = *r;
            dispatch(*r);
        }
        return out_;
    }

private:
    // --- messaging --------------------------------------------------------

    bool prover_send(const std::string& kind, ByteSpan payload)
    {
        if (done_) return false;
        if (pb_.silent_after && out_.prover_rounds >= *pb_.silent_after) {
            channel_.claim_timeout();
            log(channel_.last_txid(), 'V', "timeout", Digest32{});
            finish(DisputeOutcome::Verdict::verifier_wins, "timeout");
            return false;
        }
        if (pb_.equivocate_at && out_.prover_rounds == *pb_.equivocate_at && !slots_.empty()) {
            // a second value signed under an already-used one-time slot key:
            // immediate loss
            log(Digest32{}, 'P', "equivocation", Digest32{});
            finish(DisputeOutcome::Verdict::verifier_wins, "equivocation");
            return false;
        }
        Digest32 digest = channel_.send(round_++, payload);
        log(channel_.last_txid(), 'P', kind, digest);
        slots_.emplace(kind + "#" + std::to_string(round_), digest);
        ++out_.prover_rounds;
        if (out_.total_rounds > cfg_.max_rounds) throw std::logic_error("dispute: round overflow");
        return true;
    }

    bool verifier_send(const std::string& kind, ByteSpan payload)
    {
        if (done_) return false;
        Digest32 digest = channel_.send(round_++, payload);
        log(channel_.last_txid(), 'V', kind, digest);
        return true;
    }

    void log(const Digest32& txid, char actor, const std::string& kind, const Digest32& digest)
    {
        out_.log.push_back(RoundLogEntry{out_.total_rounds, actor, kind, digest.hex(), txid.hex()});
        ++out_.total_rounds;
    }

    void finish(DisputeOutcome::Verdict verdict, std::string reason)
    {
        if (done_) return;
        out_.verdict = verdict;
        out_.reason = std::move(reason);
        done_ = true;
    }

    // Whether the verifier treats a prover claim as matching its own view.
    // The adversarial verifier answers at random.
    bool believes_equal(const Digest32& claimed, const Digest32& own)
    {
        if (vb_.adversarial) return rng_() % 2 == 0;
        return claimed == own;
    }

    // --- protocol phases ----------------------------------------------------

    // Narrows [0, n) to the first step whose hash claim the verifier rejects.
    std::optional<size_t> partition_search(size_t n)
    {
        size_t lo = 0, hi = n - 1; // agreement holds strictly below lo
        while (lo < hi) {
            size_t span = hi - lo;
            std::vector<uint32_t> probes;
            for (uint32_t k = 1; k < cfg_.arity; ++k) {
                size_t p = lo + span * k / cfg_.arity;
                if (p >= hi) break;
                if (probes.empty() || probes.back() != p) probes.push_back(static_cast<uint32_t>(p));
            }
            if (probes.empty()) probes.push_back(static_cast<uint32_t>(lo));

            ByteWriter q;
            for (uint32_t p : probes) q.u32le(p);
            if (!verifier_send("partition_query", q.out)) return std::nullopt;

            ByteWriter reply;
            std::vector<Digest32> claims;
            for (uint32_t p : probes) {
                Digest32 h = prover_.hash(p);
                claims.push_back(h);
                reply.u32le(p);
                reply.raw(h.span());
            }
            if (!prover_send("partition_reply", reply.out)) return std::nullopt;
            ++out_.partition_rounds;

            size_t new_lo = lo, new_hi = hi;
            bool found = false;
            for (size_t i = 0; i < probes.size(); ++i) {
                if (!believes_equal(claims[i], truth_.hash(probes[i]))) {
                    new_hi = probes[i];
                    found = true;
                    break;
                }
                new_lo = probes[i] + 1;
            }
            if (!found && new_lo == lo) new_lo = lo + 1; // defensive progress
            lo = new_lo;
            hi = new_hi;
        }
        return hi;
    }

    struct PinnedPair {
        std::optional<TraceRecord> before; // step r-1, absent at r == 0
        TraceRecord at;
        bool ok = false;
    };

    // The prover reveals traces r-1 and r in one message, each pinned to his
    // committed chain: the bytes must hash from his prior head to his head.
    PinnedPair reveal_pinned_pair(size_t r, const char* kind)
    {
        PinnedPair out;
        TraceRecord at = prover_.trace(r).trace;
        Digest32 h_r = prover_.hash(r);
        Digest32 h_rm1 = r >= 1 ? prover_.hash(r - 1) : Digest32{};
        std::optional<TraceRecord> before;
        Digest32 h_rm2;
        if (r >= 1) {
            before = prover_.trace(r - 1).trace;
            h_rm2 = r >= 2 ? prover_.hash(r - 2) : Digest32{};
        }
        ByteWriter w;
        w.u32le(static_cast<uint32_t>(r));
        w.raw(at.serialize());
        if (before) w.raw(before->serialize());
        if (!prover_send(kind, w.out)) return out;

        if (!(step_hash(h_rm1, at) == h_r)) {
            finish(DisputeOutcome::Verdict::verifier_wins, "hash-chain");
            return out;
        }
        if (before && !(step_hash(h_rm2, *before) == h_rm1)) {
            finish(DisputeOutcome::Verdict::verifier_wins, "hash-chain");
            return out;
        }
        out.before = before;
        out.at = at;
        out.ok = true;
        return out;
    }

    // Fields the host protocol's regular challenges already adjudicate in
    // section A: everything except the stores feeding the MEB/UPI and the
    // midstate itself, which belong to the hashing challenges.
    bool referee_fields_match(const FullTraceRecord& a, const FullTraceRecord& b) const
    {
        auto basics = [](const FullTraceRecord& t) {
            return std::array<uint32_t, 6>{t.trace.opcode, t.trace.pc_next, t.trace.flags,
                                           t.read1_addr,   t.read1_last_step,
                                           t.trace.write_addr};
        };
        if (basics(a) != basics(b)) return false;
        bool hashing_write = ctx_.layout.in_upi(a.trace.write_addr) ||
                             ctx_.layout.in_meb(a.trace.write_addr);
        if (!hashing_write && a.trace.write_value != b.trace.write_value) return false;
        if (!ctx_.layout.in_upi(a.read1_addr) && a.read1_value != b.read1_value) return false;
        return true;
    }

    void dispatch(size_t r)
    {
        if (!verifier_send("trace_demand", Bytes{static_cast<uint8_t>(r & 0xff)})) return;
        PinnedPair pair = reveal_pinned_pair(r, "trace_reveal");
        if (!pair.ok) return;

        // section B: the referee owns the whole record
        if (r >= ctx_.ab) {
            referee(r, /*full=*/true);
            return;
        }

        std::array<uint8_t, 32> mib_before =
            pair.before ? pair.before->mib : Midstate::iv().digest().b;

        // a midstate that moved under a non-hashing opcode is directly
        // provable from the two pinned records
        if (!(pair.at.mib == mib_before) && !is_hashing_opcode(pair.at.opcode)) {
            finish(DisputeOutcome::Verdict::verifier_wins, "midstate-mutation");
            return;
        }

        // control-flow or addressing lies go to the regular challenges
        bool fields_differ =
            vb_.adversarial ? rng_() % 4 == 0
                            : !referee_fields_match(prover_.trace(r), truth_.trace(r));
        if (fields_differ) {
            referee(r, /*full=*/false);
            if (done_) return;
        }

        uint32_t op = pair.at.opcode;
        bool writes_meb = op == static_cast<uint32_t>(Opcode::Lssw) ||
                          (op == static_cast<uint32_t>(Opcode::Sw) &&
                           ctx_.layout.in_meb(pair.at.write_addr));
        bool is_hash = is_hashing_opcode(op);
        if (!writes_meb && !is_hash) {
            // nothing hashing-related left to challenge
            finish(DisputeOutcome::Verdict::prover_wins, "challenges-exhausted");
            return;
        }

        // x: the hash step whose compression consumes the disputed window
        size_t x = r;
        if (writes_meb) {
            if (!verifier_send("demand_x", {})) return;
            x = r + 1;
            while (x < prover_.size() && !is_hashing_opcode(prover_.trace(x).trace.opcode)) ++x;
            if (x >= prover_.size()) {
                finish(DisputeOutcome::Verdict::verifier_wins, "missing-hash-step");
                return;
            }
        }

        // the prover reveals x, its trace and his MEB claim in one message
        TraceRecord trace_x = prover_.trace(x).trace;
        Bytes meb_x = prover_.meb_at(x);
        {
            ByteWriter w;
            w.u32le(static_cast<uint32_t>(x));
            w.raw(trace_x.serialize());
            w.raw(meb_x);
            if (!prover_send("x_reveal", w.out)) return;
        }

        // OWCF challenge: compressing MEB_x onto MIB_{r-1} must yield MIB_x
        Midstate from = Midstate::from_digest(Digest32::from_bytes(mib_before), 0);
        if (!(owcf_compress(from, meb_x).digest() == Digest32::from_bytes(trace_x.mib))) {
            finish(DisputeOutcome::Verdict::verifier_wins, "owcf");
            return;
        }

        // MEB-write challenge: the committed store must equal the hashed
        // word at its offset
        if (writes_meb) {
            uint32_t ofs = op == static_cast<uint32_t>(Opcode::Lssw)
                               ? (prover_.trace(r).read1_addr - ctx_.layout.upi_base) % 64
                               : pair.at.write_addr - ctx_.layout.meb_base;
            uint32_t hashed_word = read_le32(meb_x.data() + ofs);
            if (hashed_word != pair.at.write_value) {
                if (!verifier_send("meb_write_challenge", Bytes{static_cast<uint8_t>(ofs)})) return;
                finish(DisputeOutcome::Verdict::verifier_wins, "meb-write");
                return;
            }
        }

        // boundary pin: the prover's midstate entering section B must be V
        PinnedPair at_ab = reveal_pinned_pair(ctx_.ab - 1, "ab_reveal");
        if (!at_ab.ok) return;
        if (!(Digest32::from_bytes(at_ab.at.mib) == ctx_.v)) {
            finish(DisputeOutcome::Verdict::verifier_wins, "boundary-pin");
            return;
        }

        midstate_search(x);
    }

    // Search (x, AB) for the prover's last rejected midstate, then demand a
    // block that carries his own MIB_z to his MIB_{z+1}.
    void midstate_search(size_t x)
    {
        size_t lo = x, hi = ctx_.ab - 1; // rejected at lo, accepted at hi
        while (hi - lo > 1) {
            size_t mid = lo + (hi - lo) / 2;
            ByteWriter q;
            q.u32le(static_cast<uint32_t>(mid));
            if (!verifier_send("midstate_query", q.out)) return;
            Digest32 claim = Digest32::from_bytes(prover_.trace(mid).trace.mib);
            if (!prover_send("midstate_reply", claim.bytes())) return;
            Digest32 own = Digest32::from_bytes(truth_.trace(mid).trace.mib);
            if (believes_equal(claim, own)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        size_t z = lo;

        PinnedPair pair = reveal_pinned_pair(z + 1, "z_reveal");
        if (!pair.ok) return;
        const TraceRecord& at_z = *pair.before; // z >= x >= 0, so z+1 >= 1
        const TraceRecord& at_z1 = pair.at;

        if (at_z.mib == at_z1.mib) {
            // the prover's own transition is trivial; the demand is vacuous
            finish(DisputeOutcome::Verdict::prover_wins, "vacuous-preimage-demand");
            return;
        }
        if (!is_hashing_opcode(at_z1.opcode)) {
            finish(DisputeOutcome::Verdict::verifier_wins, "midstate-mutation");
            return;
        }

        // final challenge: any 64-byte block linking MIB_z to MIB_{z+1}
        if (!verifier_send("final_preimage_demand", {})) return;
        Bytes answer = prover_.meb_at(z + 1);
        Midstate from = Midstate::from_digest(Digest32::from_bytes(at_z.mib), 0);
        bool valid = owcf_compress(from, answer).digest() == Digest32::from_bytes(at_z1.mib);
        if (!valid) {
            // nothing the prover holds satisfies the script; the deadline lapses
            channel_.claim_timeout();
            log(channel_.last_txid(), 'V', "timeout", Digest32{});
            finish(DisputeOutcome::Verdict::verifier_wins, "preimage-demand-unanswered");
            return;
        }
        if (!prover_send("final_preimage_response", answer)) return;
        if (!vb_.adversarial) {
            // answering an honest verifier's demand would be a second
            // preimage of the compression function: flag loudly
            out_.protocol_failure = true;
        }
        finish(DisputeOutcome::Verdict::prover_wins, "preimage-demand-answered");
    }

    // Trusted stand-in for the regular BitVMX instruction/read challenges. A
    // well-founded accusation wins; a failed one exonerates the prover.
    void referee(size_t r, bool full)
    {
        if (!verifier_send("instruction_challenge", {})) return;
        FullTraceRecord claimed = prover_.trace(r);
        FullTraceRecord correct = truth_.trace(r);
        bool mismatch = full ? !(claimed == correct) : !referee_fields_match(claimed, correct);
        if (mismatch) {
            finish(DisputeOutcome::Verdict::verifier_wins, "referee");
        } else if (full) {
            finish(DisputeOutcome::Verdict::prover_wins, "referee-exonerated");
        }
        // a failed partial accusation falls through to the hashing challenges
    }

    DisputeContext ctx_;
    const TraceSource& prover_;
    ProverBehavior pb_;
    const TraceSource& truth_;
    VerifierBehavior vb_;
    DisputeConfig cfg_;
    std::mt19937_64 rng_;
    detail_dispute::Channel channel_;
    DisputeOutcome out_;
    std::map<std::string, Digest32> slots_;
    size_t round_ = 0;
    bool done_ = false;
};

inline DisputeOutcome run_dispute(Ledger& ledger, const DisputeContext& ctx,
                                  const TraceSource& prover, ProverBehavior prover_behavior,
                                  const TraceSource& truth, VerifierBehavior verifier_behavior,
                                  DisputeConfig cfg = {})
{
    DisputeSession session(ledger, ctx, prover, prover_behavior, truth, verifier_behavior, cfg);
    return session.run();
}

} // namespace esspi

#endif // ESSPI_DISPUTE_HPP
