// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <esspi/cpu.hpp>

using namespace esspi;

namespace {

Bytes random_upi(std::mt19937_64& rng, size_t blocks)
{
    Bytes upi(blocks * 64);
    for (auto& b : upi) b = static_cast<uint8_t>(rng());
    return upi;
}

RunResult run_prelude(const Bytes& upi, uint32_t slack = 0, const Bytes& spi = Bytes(64, 0))
{
    Program prelude = build_icm_prelude(static_cast<uint32_t>(upi.size()));
    uint32_t ab = static_cast<uint32_t>(prelude.size()) + slack;
    Program prog = assemble_two_sections(prelude, {{Opcode::Halt, 0, 0, 0}}, ab);
    return run_sections(prog, upi, spi, ab, ab + 4);
}

} // namespace

TEST_CASE("trace record serializes to exactly 49 bytes", "[cpu]")
{
    TraceRecord t;
    t.write_addr = 0x10000004;
    t.write_value = 0xdeadbeef;
    t.pc_next = 7;
    t.mib.fill(0xab);
    t.opcode = static_cast<uint32_t>(Opcode::Lssw);
    t.flags = 1;
    Bytes ser = t.serialize();
    REQUIRE(ser.size() == 49);
    CHECK(TraceRecord::parse(ser) == t);
    // 49 bytes plus padding fit one compression call
    Sha256 h;
    h.update(ser);
    h.finalize();
    CHECK(h.compress_calls() == 1);
}

TEST_CASE("step hash chain is prefix sensitive", "[cpu]")
{
    std::mt19937_64 rng(3);
    RunResult r = run_prelude(random_upi(rng, 2));
    REQUIRE(r.traces.size() >= 3);

    // brute-force recomputation matches
    Digest32 chain{};
    for (size_t i = 0; i < r.traces.size(); ++i) {
        Sha256 h;
        h.update(chain.span()).update(r.traces[i].trace.serialize());
        chain = h.finalize();
        CHECK(chain == r.step_hashes[i]);
    }

    // mutate step i: all heads from i on change
    size_t k = r.traces.size() / 2;
    TraceRecord mutated = r.traces[k].trace;
    mutated.write_value ^= 1;
    Digest32 alt = step_hash(k == 0 ? Digest32{} : r.step_hashes[k - 1], mutated);
    CHECK_FALSE(alt == r.step_hashes[k]);
}

TEST_CASE("NOP advances pc and writes nothing", "[cpu]")
{
    Program prog = {{Opcode::Nop, 0, 0, 0},
                    {Opcode::HashFinal, 0, 0, 0},
                    {Opcode::Halt, 0, 0, 0}};
    RunResult r = run_sections(prog, Bytes(64, 0), Bytes(64, 0), 2, 3);
    CHECK(r.traces[0].trace.write_addr == 0);
    CHECK(r.traces[0].trace.write_value == 0);
    CHECK(r.traces[0].trace.pc_next == 1);
    CHECK(r.traces[0].trace.flags == 0);
}

TEST_CASE("HASH_UPDATE compresses the MEB into the MIB", "[cpu]")
{
    Bytes upi(64, 0x11);
    Program prog = build_icm_prelude(64);
    uint32_t ab = static_cast<uint32_t>(prog.size());
    prog = assemble_two_sections(prog, {{Opcode::Halt, 0, 0, 0}}, ab);
    RunResult r = run_sections(prog, upi, Bytes(64, 0), ab, ab + 1);

    // after the 16 LSSWs, HASH_UPDATE at step 16 must equal a manual OWCF
    Midstate manual = owcf_compress(Midstate::iv(), upi);
    CHECK(Digest32::from_bytes(r.trace(16).mib) == manual.digest());
    // LSSW steps left the MIB at the IV
    CHECK(Digest32::from_bytes(r.trace(15).mib) == Midstate::iv().digest());
}

TEST_CASE("honest prelude leaves sha256(UPI) in the MIB at the boundary", "[cpu]")
{
    std::mt19937_64 rng(7);
    for (size_t blocks : {1, 2, 7, 64}) {
        Bytes upi = random_upi(rng, blocks);
        RunResult r = run_prelude(upi, /*slack=*/3);
        CHECK(r.mib_at_ab == sha256(upi));
    }
}

TEST_CASE("LSSW writes back and mirrors into the MEB with wraparound", "[cpu]")
{
    std::mt19937_64 rng(8);
    Bytes upi = random_upi(rng, 2);
    Bytes original = upi;
    MemLayout layout;

    RunResult r = run_prelude(upi);
    // every LSSW write-back leaves UPI bytes unchanged
    CHECK(r.final_state.upi == original);

    // first LSSW of block 0 and of block 1 hit MEB offset 0
    const FullTraceRecord& first = r.traces[0];
    CHECK(first.read1_addr == layout.upi_base);
    CHECK(first.trace.write_addr == layout.upi_base);
    CHECK(first.trace.write_value == first.read1_value);

    const FullTraceRecord& wrap = r.traces[17]; // block 1 starts after 16 LSSW + update
    CHECK(wrap.read1_addr == layout.upi_base + 64);
    CHECK((wrap.read1_addr - layout.upi_base) % 64 == 0);
}

TEST_CASE("LSSW outside the UPI halts with fault", "[cpu]")
{
    MemLayout layout;
    // UPI is 64 bytes; address 64-2 straddles the boundary
    Program prog = {{Opcode::Lssw, 0, 0, layout.upi_base + 62},
                    {Opcode::HashFinal, 0, 0, 0}};
    RunResult r = run_sections(prog, Bytes(64, 0), Bytes(64, 0), 2, 3);
    CHECK(r.final_state.halted);
    CHECK(r.final_state.fault);
    CHECK((r.trace(0).flags & 2) != 0);

    Program prog2 = {{Opcode::Lssw, 0, 0, layout.upi_base + 64}, // one past the end
                     {Opcode::HashFinal, 0, 0, 0}};
    RunResult r2 = run_sections(prog2, Bytes(64, 0), Bytes(64, 0), 2, 3);
    CHECK(r2.final_state.fault);
}

TEST_CASE("every UPI word is read once and mirrored once between updates", "[cpu]")
{
    std::mt19937_64 rng(9);
    Bytes upi = random_upi(rng, 4);
    RunResult r = run_prelude(upi);

    std::map<uint32_t, int> upi_reads;
    std::set<uint32_t> meb_offsets;
    size_t i = 0;
    while (i < r.traces.size()) {
        const TraceRecord& t = r.trace(i);
        if (t.opcode == static_cast<uint32_t>(Opcode::Lssw)) {
            upi_reads[r.traces[i].read1_addr] += 1;
            uint32_t ofs = (r.traces[i].read1_addr - MemLayout{}.upi_base) % 64;
            CHECK(meb_offsets.insert(ofs).second); // exactly once between updates
        } else if (t.opcode == static_cast<uint32_t>(Opcode::HashUpdate)) {
            CHECK(meb_offsets.size() == 16);
            meb_offsets.clear();
        }
        ++i;
    }
    for (uint32_t w = 0; w < upi.size(); w += 4)
        CHECK(upi_reads[MemLayout{}.upi_base + w] == 1);
}

TEST_CASE("ICM discipline is asserted by instrumentation", "[cpu]")
{
    // a section-A program touching the MIB with a plain store throws
    Program bad = {{Opcode::Li, 1, 0, 0x1234},
                   {Opcode::Sw, 1, 0, MemLayout{}.mib_base},
                   {Opcode::HashFinal, 0, 0, 0}};
    CHECK_THROWS_AS(run_sections(bad, Bytes(64, 0), Bytes(64, 0), 3, 4), std::logic_error);

    // section B may write the MIB: that is the challengeable case
    Program prelude = build_icm_prelude(64);
    Program evil_b = {{Opcode::Li, 1, 0, 0x1234},
                      {Opcode::Sw, 1, 0, MemLayout{}.mib_base},
                      {Opcode::Halt, 0, 0, 0}};
    uint32_t ab = static_cast<uint32_t>(prelude.size());
    Program prog = assemble_two_sections(prelude, evil_b, ab);
    RunResult r = run_sections(prog, Bytes(64, 5), Bytes(64, 0), ab, ab + 4);
    // the store changed the midstate under a non-hashing opcode
    const TraceRecord& store = r.trace(ab + 1);
    CHECK(store.opcode == static_cast<uint32_t>(Opcode::Sw));
    CHECK_FALSE(store.mib == r.trace(ab).mib);
    CHECK_FALSE(is_hashing_opcode(store.opcode));
}

TEST_CASE("prelude contract is enforced", "[cpu]")
{
    // no HASH_FINAL in section A
    Program no_final = {{Opcode::Nop, 0, 0, 0}, {Opcode::Halt, 0, 0, 0}};
    CHECK_THROWS_AS(run_sections(no_final, Bytes(64, 0), Bytes(64, 0), 1, 2),
                    std::invalid_argument);
    // instructions after HASH_FINAL inside section A
    Program tail = {{Opcode::HashFinal, 0, 0, 0}, {Opcode::Li, 1, 0, 1},
                    {Opcode::Halt, 0, 0, 0}};
    CHECK_THROWS_AS(run_sections(tail, Bytes(64, 0), Bytes(64, 0), 2, 3), std::invalid_argument);
}

TEST_CASE("checker program validates MIB against SPI and masked words", "[cpu]")
{
    std::mt19937_64 rng(10);
    Bytes upi = random_upi(rng, 2);
    Digest32 v = sha256(upi);

    Program prelude = build_icm_prelude(static_cast<uint32_t>(upi.size()));
    uint32_t ab = static_cast<uint32_t>(prelude.size());
    MemLayout layout;
    std::vector<WordCheck> checks = {
        {layout.upi_base, 0x0000ffff, static_cast<uint32_t>(upi[0]) | static_cast<uint32_t>(upi[1]) << 8}};
    Program prog = assemble_two_sections(prelude, build_checker(checks, ab), ab);

    Bytes spi = v.bytes();
    spi.resize(64, 0);
    RunResult good = run_sections(prog, upi, spi, ab, ab + 64);
    CHECK(good.final_state.halted);
    CHECK_FALSE(good.final_state.fault);

    // wrong V in the SPI -> reject
    Bytes bad_spi = spi;
    bad_spi[3] ^= 1;
    RunResult bad = run_sections(prog, upi, bad_spi, ab, ab + 64);
    CHECK(bad.final_state.halted);
    CHECK(bad.final_state.fault);

    // masked word mismatch -> reject
    Bytes bad_upi = upi;
    bad_upi[0] ^= 0xff;
    Bytes spi2 = sha256(bad_upi).bytes();
    spi2.resize(64, 0);
    RunResult bad2 = run_sections(prog, bad_upi, spi2, ab, ab + 64);
    CHECK(bad2.final_state.fault);
}

TEST_CASE("assembly text roundtrip", "[cpu]")
{
    Program prelude = build_icm_prelude(128);
    Program checker = build_checker({{0x10000000, 0xff, 0x12}}, 100);
    Program prog = assemble_two_sections(prelude, checker, 100);
    std::string text = disassemble_program(prog);
    CHECK(parse_program(text) == prog);

    CHECK_THROWS_AS(parse_program("frob r1 r2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_program("li r99 0"), std::invalid_argument);
    Program with_comment = parse_program("# prelude\nnop\nhalt 0\n");
    CHECK(with_comment.size() == 2);
}

TEST_CASE("halted CPU idles deterministically", "[cpu]")
{
    Program prog = {{Opcode::HashFinal, 0, 0, 0}, {Opcode::Halt, 1, 0, 0}};
    RunResult r = run_sections(prog, Bytes(64, 0), Bytes(64, 0), 1, 6);
    for (size_t i = 2; i < 6; ++i) {
        CHECK((r.trace(i).flags & 1) != 0);
        CHECK(r.trace(i).pc_next == r.trace(1).pc_next);
    }
}
