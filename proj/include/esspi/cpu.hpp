// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_CPU_HPP
#define ESSPI_CPU_HPP

#include <array>
#include <map>
#include <sstream>
#include <vector>

#include <esspi/hashcore.hpp>

namespace esspi {

// Minimal 32-bit word machine with the input-check extensions. The ISA is
// deliberately small: the dispute protocol only needs deterministic traces
// and the hashing opcodes.
//
//   nop                      no effect
//   halt imm                 stop; imm != 0 flags a program-level reject
//   li   rd imm32            rd := imm
//   lw   rd rs imm           rd := mem32[rs + imm]
//   sw   rs rb imm           mem32[rb + imm] := rs
//   add/sub/xor/and rd ra rb rd := ra (op) rb
//   beq  ra rb target        pc := target if ra == rb else pc + 1
//   jmp  target              pc := target
//   lssw rb imm              UPI word load/store/store (see below)
//   hash_update              MIB := OWCF(MIB, MEB)
//   hash_final               same compression, marks the hash finished
//   hash_reset               MIB := SHA-256 IV
enum class Opcode : uint32_t {
    Nop = 0,
    Halt,
    Li,
    Lw,
    Sw,
    Add,
    Sub,
    Xor,
    And,
    Beq,
    Jmp,
    Lssw,
    HashUpdate,
    HashFinal,
    HashReset,
};

inline bool is_hashing_opcode(uint32_t op)
{
    return op == static_cast<uint32_t>(Opcode::HashUpdate) ||
           op == static_cast<uint32_t>(Opcode::HashFinal) ||
           op == static_cast<uint32_t>(Opcode::HashReset);
}

struct Instr {
    Opcode op = Opcode::Nop;
    uint32_t a = 0, b = 0, c = 0;

    bool operator==(const Instr&) const = default;
};

using Program = std::vector<Instr>;

// Memory-mapped regions. MEB is exactly 64 bytes, MIB exactly 32.
struct MemLayout {
    uint32_t upi_base = 0x10000000;
    uint32_t upi_len = 0;
    uint32_t spi_base = 0x20000000;
    uint32_t spi_len = 64;
    uint32_t meb_base = 0x30000000;
    uint32_t mib_base = 0x30001000;
    uint32_t ram_base = 0x40000000;
    uint32_t ram_len = 0x10000;

    void validate() const
    {
        for (uint32_t base : {upi_base, spi_base, meb_base, mib_base, ram_base})
            if (base % 4 != 0) throw std::invalid_argument("MemLayout: bases must be word-aligned");
        if (upi_len % 64 != 0) throw std::invalid_argument("MemLayout: UPI length not a 64 multiple");
    }
    bool in_upi(uint32_t addr, uint32_t len = 4) const
    {
        return addr >= upi_base && addr + len <= upi_base + upi_len && addr + len > addr;
    }
    bool in_meb(uint32_t addr, uint32_t len = 4) const
    {
        return addr >= meb_base && addr + len <= meb_base + 64;
    }
    bool in_mib(uint32_t addr, uint32_t len = 4) const
    {
        return addr >= mib_base && addr + len <= mib_base + 32;
    }
    bool in_spi(uint32_t addr, uint32_t len = 4) const
    {
        return addr >= spi_base && addr + len <= spi_base + spi_len;
    }
    bool in_ram(uint32_t addr, uint32_t len = 4) const
    {
        return addr >= ram_base && addr + len <= ram_base + ram_len;
    }
};

// The 49-byte per-step commitment: write_addr(4) write_value(4) pc_next(4)
// MIB(32) opcode(4) flags(1), little-endian words. Fits one SHA-256 block
// together with its padding.
struct TraceRecord {
    uint32_t write_addr = 0;
    uint32_t write_value = 0;
    uint32_t pc_next = 0;
    std::array<uint8_t, 32> mib{};
    uint32_t opcode = 0;
    uint8_t flags = 0; // bit0 halted, bit1 fault/reject

    bool operator==(const TraceRecord&) const = default;

    static constexpr size_t kSerializedLen = 49;

    Bytes serialize() const
    {
        Bytes out(kSerializedLen);
        write_le32(out.data(), write_addr);
        write_le32(out.data() + 4, write_value);
        write_le32(out.data() + 8, pc_next);
        std::copy(mib.begin(), mib.end(), out.begin() + 12);
        write_le32(out.data() + 44, opcode);
        out[48] = flags;
        return out;
    }
    static TraceRecord parse(ByteSpan b)
    {
        if (b.size() != kSerializedLen) throw std::invalid_argument("TraceRecord: need 49 bytes");
        TraceRecord t;
        t.write_addr = read_le32(b.data());
        t.write_value = read_le32(b.data() + 4);
        t.pc_next = read_le32(b.data() + 8);
        std::copy(b.begin() + 12, b.begin() + 44, t.mib.begin());
        t.opcode = read_le32(b.data() + 44);
        t.flags = b[48];
        return t;
    }
};

struct FullTraceRecord {
    uint32_t read1_addr = 0;
    uint32_t read1_value = 0;
    uint32_t read1_last_step = 0;
    uint32_t read2_addr = 0;
    uint32_t read2_value = 0;
    uint32_t read2_last_step = 0;
    TraceRecord trace;

    bool operator==(const FullTraceRecord&) const = default;
};

// stepHash_i = sha256(stepHash_{i-1} || trace_i); the chain is seeded with
// the all-zero digest.
inline Digest32 step_hash(const Digest32& prev, const TraceRecord& trace)
{
    Sha256 h;
    h.update(prev.span()).update(trace.serialize());
    return h.finalize();
}

struct CpuState {
    MemLayout layout;
    uint32_t pc = 0;
    std::array<uint32_t, 16> regs{}; // r0 hardwired to zero
    Bytes upi;                       // rewritten in place by LSSW
    Bytes spi;                       // read-only signed input
    std::array<uint8_t, 64> meb{};
    std::array<uint8_t, 32> mib{};   // big-endian midstate words
    std::map<uint32_t, uint32_t> ram;
    std::map<uint32_t, uint32_t> last_written; // word address -> step index
    uint64_t step_count = 0;
    uint32_t boundary_ab = 0; // first step index of section B
    bool halted = false;
    bool fault = false;
    bool hash_finalized = false;

    bool in_icm() const { return step_count < boundary_ab; }

    static CpuState boot(MemLayout layout, Bytes upi, Bytes spi, uint32_t boundary_ab)
    {
        layout.upi_len = static_cast<uint32_t>(upi.size());
        layout.validate();
        if (spi.size() > layout.spi_len) throw std::invalid_argument("CpuState: SPI too long");
        spi.resize(layout.spi_len, 0);
        CpuState s;
        s.layout = layout;
        s.upi = std::move(upi);
        s.spi = std::move(spi);
        s.boundary_ab = boundary_ab;
        Digest32 iv = Midstate::iv().digest();
        std::copy(iv.b.begin(), iv.b.end(), s.mib.begin());
        return s;
    }

    Midstate mib_midstate(uint64_t bytes_compressed = 0) const
    {
        return Midstate::from_digest(Digest32::from_bytes(mib), bytes_compressed);
    }
};

// Executes one instruction. Illegal accesses halt the CPU with the fault
// flag; ICM access-discipline violations throw, since the prelude is agreed
// ahead of time and only a harness bug can reach them.
inline FullTraceRecord step(CpuState& s, const Program& program)
{
    FullTraceRecord t;
    if (s.halted) {
        // halted CPU idles: the trace repeats with the halt flags
        t.trace.pc_next = s.pc;
        t.trace.mib = s.mib;
        t.trace.opcode = static_cast<uint32_t>(Opcode::Halt);
        t.trace.flags = static_cast<uint8_t>(1 | (s.fault ? 2 : 0));
        ++s.step_count;
        return t;
    }

    bool icm = s.in_icm();
    auto fault_halt = [&] {
        s.halted = true;
        s.fault = true;
    };
    auto write_reg = [&](uint32_t rd, uint32_t value) {
        if (rd >= 16) throw std::logic_error("cpu: bad register");
        if (rd != 0) s.regs[rd] = value;
        t.trace.write_addr = 0x00000100 + 4 * rd; // registers are memory too
        t.trace.write_value = rd == 0 ? 0 : value;
    };
    auto mem_read = [&](uint32_t addr, uint32_t& out) {
        if (addr % 4 != 0) return false;
        if (s.layout.in_upi(addr)) {
            if (icm) throw std::logic_error("cpu: ICM reads UPI through LSSW only");
            out = read_le32(s.upi.data() + (addr - s.layout.upi_base));
            return true;
        }
        if (s.layout.in_meb(addr)) {
            out = read_le32(s.meb.data() + (addr - s.layout.meb_base));
            return true;
        }
        if (s.layout.in_mib(addr)) {
            if (icm) throw std::logic_error("cpu: ICM must not read the MIB");
            out = read_le32(s.mib.data() + (addr - s.layout.mib_base));
            return true;
        }
        if (s.layout.in_spi(addr)) {
            if (icm) throw std::logic_error("cpu: ICM must not read the SPI");
            out = read_le32(s.spi.data() + (addr - s.layout.spi_base));
            return true;
        }
        if (s.layout.in_ram(addr)) {
            if (icm) throw std::logic_error("cpu: ICM must not touch general RAM");
            auto it = s.ram.find(addr);
            out = it == s.ram.end() ? 0 : it->second;
            return true;
        }
        return false;
    };
    auto note_write = [&](uint32_t addr, uint32_t value) {
        s.last_written[addr] = static_cast<uint32_t>(s.step_count);
        t.trace.write_addr = addr;
        t.trace.write_value = value;
    };
    auto mem_write = [&](uint32_t addr, uint32_t value) {
        if (addr % 4 != 0) return false;
        if (s.layout.in_meb(addr)) {
            write_le32(s.meb.data() + (addr - s.layout.meb_base), value);
        } else if (s.layout.in_mib(addr)) {
            if (icm) throw std::logic_error("cpu: ICM must not store to the MIB");
            write_le32(s.mib.data() + (addr - s.layout.mib_base), value);
        } else if (s.layout.in_upi(addr)) {
            if (icm) throw std::logic_error("cpu: ICM writes UPI through LSSW only");
            write_le32(s.upi.data() + (addr - s.layout.upi_base), value);
        } else if (s.layout.in_ram(addr)) {
            if (icm) throw std::logic_error("cpu: ICM must not touch general RAM");
            s.ram[addr] = value;
        } else {
            return false;
        }
        note_write(addr, value);
        return true;
    };

    uint32_t next_pc = s.pc + 1;
    if (s.pc >= program.size()) {
        fault_halt();
        t.trace.opcode = static_cast<uint32_t>(Opcode::Halt);
    } else {
        const Instr& ins = program[s.pc];
        t.trace.opcode = static_cast<uint32_t>(ins.op);
        switch (ins.op) {
        case Opcode::Nop: break;
        case Opcode::Halt:
            s.halted = true;
            s.fault = ins.a != 0;
            break;
        case Opcode::Li: write_reg(ins.a, ins.c); break;
        case Opcode::Lw: {
            uint32_t addr = s.regs[ins.b] + ins.c;
            uint32_t value = 0;
            if (!mem_read(addr, value)) {
                fault_halt();
                break;
            }
            t.read1_addr = addr;
            t.read1_value = value;
            auto it = s.last_written.find(addr);
            t.read1_last_step = it == s.last_written.end() ? 0 : it->second;
            write_reg(ins.a, value);
            break;
        }
        case Opcode::Sw: {
            uint32_t addr = s.regs[ins.b] + ins.c;
            if (!mem_write(addr, s.regs[ins.a])) fault_halt();
            break;
        }
        case Opcode::Add: write_reg(ins.a, s.regs[ins.b] + s.regs[ins.c]); break;
        case Opcode::Sub: write_reg(ins.a, s.regs[ins.b] - s.regs[ins.c]); break;
        case Opcode::Xor: write_reg(ins.a, s.regs[ins.b] ^ s.regs[ins.c]); break;
        case Opcode::And: write_reg(ins.a, s.regs[ins.b] & s.regs[ins.c]); break;
        case Opcode::Beq:
            if (s.regs[ins.a] == s.regs[ins.b]) next_pc = ins.c;
            break;
        case Opcode::Jmp: next_pc = ins.c; break;
        case Opcode::Lssw: {
            // Reads a UPI word, writes it back in place and mirrors it into
            // the MEB at (addr - UPI base) mod 64. No destination register.
            // A word not fully inside the UPI halts the CPU.
            uint32_t addr = s.regs[ins.a] + ins.c;
            if (addr % 4 != 0 || !s.layout.in_upi(addr)) {
                fault_halt();
                break;
            }
            uint32_t value = read_le32(s.upi.data() + (addr - s.layout.upi_base));
            t.read1_addr = addr;
            t.read1_value = value;
            auto it = s.last_written.find(addr);
            t.read1_last_step = it == s.last_written.end() ? 0 : it->second;
            write_le32(s.upi.data() + (addr - s.layout.upi_base), value);
            uint32_t ofs = (addr - s.layout.upi_base) % 64;
            write_le32(s.meb.data() + ofs, value);
            s.last_written[s.layout.meb_base + ofs] = static_cast<uint32_t>(s.step_count);
            note_write(addr, value);
            break;
        }
        case Opcode::HashUpdate:
        case Opcode::HashFinal: {
            Midstate next = owcf_compress(s.mib_midstate(), ByteSpan(s.meb.data(), 64));
            Digest32 d = next.digest();
            std::copy(d.b.begin(), d.b.end(), s.mib.begin());
            if (ins.op == Opcode::HashFinal) s.hash_finalized = true;
            break;
        }
        case Opcode::HashReset: {
            Digest32 iv = Midstate::iv().digest();
            std::copy(iv.b.begin(), iv.b.end(), s.mib.begin());
            s.hash_finalized = false;
            break;
        }
        }
    }

    if (s.halted) {
        t.trace.pc_next = s.pc;
        t.trace.flags = static_cast<uint8_t>(1 | (s.fault ? 2 : 0));
    } else {
        t.trace.pc_next = next_pc;
    }
    t.trace.mib = s.mib;
    s.pc = t.trace.pc_next;
    ++s.step_count;
    return t;
}

struct RunResult {
    std::vector<FullTraceRecord> traces;
    std::vector<Digest32> step_hashes; // chain heads, one per step
    CpuState final_state;
    Digest32 mib_at_ab; // MIB right at the section boundary

    const TraceRecord& trace(size_t i) const { return traces.at(i).trace; }
    Digest32 head() const { return step_hashes.empty() ? Digest32{} : step_hashes.back(); }
};

// Runs the two-section program: section A (the agreed ICM prelude, ending in
// HASH_FINAL followed only by NOPs) then section B. Executes exactly
// max_steps steps, idling after a halt, so trace lengths are uniform.
inline RunResult run_sections(const Program& program, Bytes upi, Bytes spi, uint32_t boundary_ab,
                              uint32_t max_steps, MemLayout layout = MemLayout{})
{
    if (boundary_ab > max_steps)
        throw std::invalid_argument("run_sections: boundary beyond max_steps");
    // the prelude contract: exactly one HASH_FINAL in section A, only NOPs
    // between it and the boundary
    bool seen_final = false;
    for (uint32_t i = 0; i < boundary_ab && i < program.size(); ++i) {
        if (program[i].op == Opcode::HashFinal) {
            if (seen_final) throw std::invalid_argument("run_sections: duplicate HASH_FINAL");
            seen_final = true;
        } else if (seen_final && program[i].op != Opcode::Nop) {
            throw std::invalid_argument("run_sections: section A continues after HASH_FINAL");
        }
    }
    if (!seen_final) throw std::invalid_argument("run_sections: section A must end in HASH_FINAL");

    RunResult r;
    CpuState s = CpuState::boot(layout, std::move(upi), std::move(spi), boundary_ab);
    Digest32 chain{};
    for (uint32_t i = 0; i < max_steps; ++i) {
        FullTraceRecord t = step(s, program);
        chain = step_hash(chain, t.trace);
        r.traces.push_back(t);
        r.step_hashes.push_back(chain);
        if (s.step_count == boundary_ab) r.mib_at_ab = Digest32::from_bytes(s.mib);
    }
    r.final_state = std::move(s);
    return r;
}

// ---------------------------------------------------------------------------
// Program builders and the line-oriented assembly format.

// The agreed ICM prelude: LSSW every UPI word block by block, HASH_UPDATE
// after each block, then write the standard padding block into the MEB and
// HASH_FINAL. Leaves sha256(UPI) in the MIB.
inline Program build_icm_prelude(uint32_t upi_len, const MemLayout& layout = MemLayout{})
{
    if (upi_len == 0 || upi_len % 64 != 0)
        throw std::invalid_argument("build_icm_prelude: UPI length must be a positive 64 multiple");
    Program prog;
    uint32_t blocks = upi_len / 64;
    for (uint32_t b = 0; b < blocks; ++b) {
        for (uint32_t w = 0; w < 16; ++w)
            prog.push_back({Opcode::Lssw, 0, 0, layout.upi_base + 64 * b + 4 * w});
        prog.push_back({Opcode::HashUpdate, 0, 0, 0});
    }
    Bytes pad = padding_blocks(upi_len);
    if (pad.size() != 64) throw std::logic_error("build_icm_prelude: unexpected padding size");
    for (uint32_t w = 0; w < 16; ++w) {
        prog.push_back({Opcode::Li, 1, 0, read_le32(pad.data() + 4 * w)});
        prog.push_back({Opcode::Sw, 1, 0, layout.meb_base + 4 * w});
    }
    prog.push_back({Opcode::HashFinal, 0, 0, 0});
    return prog;
}

inline uint32_t icm_prelude_steps(uint32_t upi_len)
{
    return (upi_len / 64) * 17 + 33;
}

// Pads section A with NOPs up to the boundary and appends section B.
inline Program assemble_two_sections(const Program& prelude, const Program& section_b, uint32_t ab)
{
    if (prelude.size() > ab)
        throw std::invalid_argument("assemble_two_sections: prelude longer than boundary");
    Program prog = prelude;
    prog.resize(ab, Instr{Opcode::Nop, 0, 0, 0});
    prog.insert(prog.end(), section_b.begin(), section_b.end());
    return prog;
}

// Masked word compare used by section-B checkers: each entry asserts
// (word at addr) & mask == expect, halting with the reject flag otherwise.
struct WordCheck {
    uint32_t addr = 0;
    uint32_t mask = 0xffffffff;
    uint32_t expect = 0;
};

// Section B checker: verify MIB == V from the SPI, run the word checks, then
// halt clean. Any mismatch halts with the reject flag.
inline Program build_checker(const std::vector<WordCheck>& checks, uint32_t pc_base,
                             const MemLayout& layout = MemLayout{})
{
    Program prog;
    auto emit_check = [&](uint32_t addr_a, uint32_t addr_b) {
        // lw r1 <- a ; lw r2 <- b ; beq r1 r2 +2 ; halt 1
        uint32_t pc = pc_base + static_cast<uint32_t>(prog.size());
        prog.push_back({Opcode::Lw, 1, 0, addr_a});
        prog.push_back({Opcode::Lw, 2, 0, addr_b});
        prog.push_back({Opcode::Beq, 1, 2, pc + 4});
        prog.push_back({Opcode::Halt, 1, 0, 0});
    };
    for (uint32_t k = 0; k < 8; ++k)
        emit_check(layout.mib_base + 4 * k, layout.spi_base + 4 * k);
    for (const WordCheck& c : checks) {
        uint32_t pc = pc_base + static_cast<uint32_t>(prog.size());
        prog.push_back({Opcode::Lw, 1, 0, c.addr});
        prog.push_back({Opcode::Li, 2, 0, c.mask});
        prog.push_back({Opcode::And, 3, 1, 2});
        prog.push_back({Opcode::Li, 4, 0, c.expect});
        prog.push_back({Opcode::Beq, 3, 4, pc + 6});
        prog.push_back({Opcode::Halt, 1, 0, 0});
    }
    prog.push_back({Opcode::Halt, 0, 0, 0});
    return prog;
}

inline const char* opcode_name(Opcode op)
{
    switch (op) {
    case Opcode::Nop: return "nop";
    case Opcode::Halt: return "halt";
    case Opcode::Li: return "li";
    case Opcode::Lw: return "lw";
    case Opcode::Sw: return "sw";
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::Xor: return "xor";
    case Opcode::And: return "and";
    case Opcode::Beq: return "beq";
    case Opcode::Jmp: return "jmp";
    case Opcode::Lssw: return "lssw";
    case Opcode::HashUpdate: return "hash_update";
    case Opcode::HashFinal: return "hash_final";
    case Opcode::HashReset: return "hash_reset";
    }
    return "?";
}

// One instruction per line: mnemonic then operands. Registers as rN,
// immediates decimal or 0x-hex, '#' comments.
inline std::string disassemble_program(const Program& prog)
{
    std::ostringstream out;
    for (const Instr& ins : prog) {
        out << opcode_name(ins.op);
        switch (ins.op) {
        case Opcode::Nop:
        case Opcode::HashUpdate:
        case Opcode::HashFinal:
        case Opcode::HashReset: break;
        case Opcode::Halt: out << " " << ins.a; break;
        case Opcode::Li: out << " r" << ins.a << " 0x" << std::hex << ins.c << std::dec; break;
        case Opcode::Lw:
        case Opcode::Sw:
            out << " r" << ins.a << " r" << ins.b << " 0x" << std::hex << ins.c << std::dec;
            break;
        case Opcode::Add:
        case Opcode::Sub:
        case Opcode::Xor:
        case Opcode::And: out << " r" << ins.a << " r" << ins.b << " r" << ins.c; break;
        case Opcode::Beq: out << " r" << ins.a << " r" << ins.b << " " << ins.c; break;
        case Opcode::Jmp: out << " " << ins.c; break;
        case Opcode::Lssw: out << " r" << ins.a << " 0x" << std::hex << ins.c << std::dec; break;
        }
        out << "\n";
    }
    return out.str();
}

inline Program parse_program(const std::string& text)
{
    Program prog;
    std::istringstream in(text);
    std::string line;
    auto parse_imm = [](const std::string& tok) -> uint32_t {
        return static_cast<uint32_t>(std::stoul(tok, nullptr, 0));
    };
    auto parse_reg = [](const std::string& tok) -> uint32_t {
        if (tok.size() < 2 || tok[0] != 'r') throw std::invalid_argument("expected register: " + tok);
        uint32_t r = static_cast<uint32_t>(std::stoul(tok.substr(1)));
        if (r >= 16) throw std::invalid_argument("register out of range: " + tok);
        return r;
    };
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string mn;
        if (!(ls >> mn)) continue;
        std::vector<std::string> toks;
        std::string tok;
        while (ls >> tok) toks.push_back(tok);

        Instr ins;
        auto expect = [&](size_t n) {
            if (toks.size() != n)
                throw std::invalid_argument("bad operand count for " + mn);
        };
        if (mn == "nop") { expect(0); ins.op = Opcode::Nop; }
        else if (mn == "halt") { expect(1); ins.op = Opcode::Halt; ins.a = parse_imm(toks[0]); }
        else if (mn == "li") { expect(2); ins.op = Opcode::Li; ins.a = parse_reg(toks[0]); ins.c = parse_imm(toks[1]); }
        else if (mn == "lw" || mn == "sw") {
            expect(3);
            ins.op = mn == "lw" ? Opcode::Lw : Opcode::Sw;
            ins.a = parse_reg(toks[0]);
            ins.b = parse_reg(toks[1]);
            ins.c = parse_imm(toks[2]);
        }
        else if (mn == "add" || mn == "sub" || mn == "xor" || mn == "and") {
            expect(3);
            ins.op = mn == "add" ? Opcode::Add : mn == "sub" ? Opcode::Sub
                     : mn == "xor" ? Opcode::Xor : Opcode::And;
            ins.a = parse_reg(toks[0]);
            ins.b = parse_reg(toks[1]);
            ins.c = parse_reg(toks[2]);
        }
        else if (mn == "beq") { expect(3); ins.op = Opcode::Beq; ins.a = parse_reg(toks[0]); ins.b = parse_reg(toks[1]); ins.c = parse_imm(toks[2]); }
        else if (mn == "jmp") { expect(1); ins.op = Opcode::Jmp; ins.c = parse_imm(toks[0]); }
        else if (mn == "lssw") { expect(2); ins.op = Opcode::Lssw; ins.a = parse_reg(toks[0]); ins.c = parse_imm(toks[1]); }
        else if (mn == "hash_update") { expect(0); ins.op = Opcode::HashUpdate; }
        else if (mn == "hash_final") { expect(0); ins.op = Opcode::HashFinal; }
        else if (mn == "hash_reset") { expect(0); ins.op = Opcode::HashReset; }
        else throw std::invalid_argument("unknown mnemonic: " + mn);
        prog.push_back(ins);
    }
    return prog;
}

} // namespace esspi

#endif // ESSPI_CPU_HPP
