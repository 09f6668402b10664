// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_HASHCORE_HPP
#define ESSPI_HASHCORE_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string_view>

#include <esspi/bytes.hpp>

namespace esspi {

struct Digest32 {
    std::array<uint8_t, 32> b{};

    auto operator<=>(const Digest32&) const = default;
    std::string hex() const { return esspi::hex(b); }
    ByteSpan span() const { return ByteSpan(b.data(), b.size()); }
    Bytes bytes() const { return Bytes(b.begin(), b.end()); }

    static Digest32 from_bytes(ByteSpan s)
    {
        if (s.size() != 32) throw std::invalid_argument("Digest32: need 32 bytes");
        Digest32 d;
        std::copy(s.begin(), s.end(), d.b.begin());
        return d;
    }
    static Digest32 from_hex(const std::string& h) { return from_bytes(unhex(h)); }
    bool is_zero() const
    {
        for (uint8_t x : b)
            if (x) return false;
        return true;
    }
};

// State of the SHA-256 compressor between 64-byte blocks. bytes_compressed
// counts whole blocks fed so far, so valid states always have a multiple of
// 64 here.
struct Midstate {
    std::array<uint32_t, 8> h{};
    uint64_t bytes_compressed = 0;

    auto operator<=>(const Midstate&) const = default;

    static Midstate iv()
    {
        Midstate m;
        m.h = {0x6a09e667ul, 0xbb67ae85ul, 0x3c6ef372ul, 0xa54ff53aul,
               0x510e527ful, 0x9b05688cul, 0x1f83d9abul, 0x5be0cd19ul};
        return m;
    }

    // Big-endian word serialization; applied to a final state this is the
    // SHA-256 digest.
    Digest32 digest() const
    {
        Digest32 d;
        for (int i = 0; i < 8; ++i) write_be32(d.b.data() + 4 * i, h[i]);
        return d;
    }

    // 8 big-endian words followed by the byte count (fixture encoding).
    std::string hex() const
    {
        ByteWriter w;
        for (uint32_t word : h) {
            uint8_t be[4];
            write_be32(be, word);
            w.raw(ByteSpan(be, 4));
        }
        return esspi::hex(w.out) + ":" + std::to_string(bytes_compressed);
    }

    static Midstate from_digest(const Digest32& d, uint64_t bytes_compressed)
    {
        Midstate m;
        for (int i = 0; i < 8; ++i) m.h[i] = read_be32(d.b.data() + 4 * i);
        m.bytes_compressed = bytes_compressed;
        return m;
    }
};

namespace detail {

inline uint32_t rotr(uint32_t x, int n) { return x >> n | x << (32 - n); }
inline uint32_t ch(uint32_t x, uint32_t y, uint32_t z) { return z ^ (x & (y ^ z)); }
inline uint32_t maj(uint32_t x, uint32_t y, uint32_t z) { return (x & y) | (z & (x | y)); }
inline uint32_t big_sigma0(uint32_t x) { return rotr(x, 2) ^ rotr(x, 13) ^ rotr(x, 22); }
inline uint32_t big_sigma1(uint32_t x) { return rotr(x, 6) ^ rotr(x, 11) ^ rotr(x, 25); }
inline uint32_t small_sigma0(uint32_t x) { return rotr(x, 7) ^ rotr(x, 18) ^ (x >> 3); }
inline uint32_t small_sigma1(uint32_t x) { return rotr(x, 17) ^ rotr(x, 19) ^ (x >> 10); }

inline constexpr uint32_t K[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

inline void transform(std::array<uint32_t, 8>& s, const uint8_t* chunk)
{
    uint32_t w[64];
    for (int i = 0; i < 16; ++i) w[i] = read_be32(chunk + 4 * i);
    for (int i = 16; i < 64; ++i)
        w[i] = small_sigma1(w[i - 2]) + w[i - 7] + small_sigma0(w[i - 15]) + w[i - 16];

    uint32_t a = s[0], b = s[1], c = s[2], d = s[3], e = s[4], f = s[5], g = s[6], h = s[7];
    for (int i = 0; i < 64; ++i) {
        uint32_t t1 = h + big_sigma1(e) + ch(e, f, g) + K[i] + w[i];
        uint32_t t2 = big_sigma0(a) + maj(a, b, c);
        h = g;
        g = f;
        f = e;
        e = d + t1;
        d = c;
        c = b;
        b = a;
        a = t1 + t2;
    }
    s[0] += a;
    s[1] += b;
    s[2] += c;
    s[3] += d;
    s[4] += e;
    s[5] += f;
    s[6] += g;
    s[7] += h;
}

} // namespace detail

// SHA-256 one-way compression function. The input block must be exactly 64
// bytes; midstates are first-class values here because dispute challenges
// operate on them directly.
inline Midstate owcf_compress(const Midstate& state, ByteSpan block)
{
    if (block.size() != 64) throw std::invalid_argument("owcf_compress: block must be 64 bytes");
    Midstate next = state;
    detail::transform(next.h, block.data());
    next.bytes_compressed += 64;
    return next;
}

// Standard FIPS 180-4 padding for a message of msg_len_bytes: 0x80 marker,
// zero fill, 64-bit big-endian bit count. One block if len%64 <= 55, else two.
inline Bytes padding_blocks(uint64_t msg_len_bytes)
{
    size_t rem = static_cast<size_t>(msg_len_bytes % 64);
    size_t pad_len = (rem <= 55) ? 64 - rem : 128 - rem;
    Bytes pad(pad_len, 0);
    pad[0] = 0x80;
    write_be64(pad.data() + pad_len - 8, msg_len_bytes * 8);
    return pad;
}

// Streaming hasher over the compression function. Tracks how many
// compression calls it made, which tests use to pin block-count behaviour.
class Sha256 {
public:
    Sha256() : state_(Midstate::iv()) {}

    Sha256& update(ByteSpan data)
    {
        for (uint8_t byte : data) {
            buf_[buf_len_++] = byte;
            ++total_len_;
            if (buf_len_ == 64) flush();
        }
        return *this;
    }

    Digest32 finalize()
    {
        Bytes pad = padding_blocks(total_len_);
        for (uint8_t byte : pad) {
            buf_[buf_len_++] = byte;
            if (buf_len_ == 64) flush();
        }
        return state_.digest();
    }

    // Compressor state after the blocks fed so far; only meaningful on block
    // boundaries.
    Midstate midstate() const
    {
        if (buf_len_ != 0) throw std::logic_error("Sha256::midstate: not on a block boundary");
        return state_;
    }

    size_t compress_calls() const { return compress_calls_; }
    uint64_t total_len() const { return total_len_; }

private:
    void flush()
    {
        detail::transform(state_.h, buf_);
        state_.bytes_compressed += 64;
        buf_len_ = 0;
        ++compress_calls_;
    }

    Midstate state_;
    uint8_t buf_[64];
    size_t buf_len_ = 0;
    uint64_t total_len_ = 0;
    size_t compress_calls_ = 0;
};

inline Digest32 sha256(ByteSpan msg)
{
    Sha256 h;
    h.update(msg);
    return h.finalize();
}

inline Digest32 sha256d(ByteSpan msg)
{
    Digest32 first = sha256(msg);
    return sha256(first.span());
}

// BIP-340 style tagged hash: sha256(sha256(tag) || sha256(tag) || data).
inline Digest32 tagged_hash(std::string_view tag, ByteSpan data)
{
    Digest32 tag_hash = sha256(ByteSpan(reinterpret_cast<const uint8_t*>(tag.data()), tag.size()));
    Sha256 h;
    h.update(tag_hash.span());
    h.update(tag_hash.span());
    h.update(data);
    return h.finalize();
}

// Continues a block-aligned midstate with a padding block claiming that the
// total message was claimed_total_bits long, and returns the resulting
// digest. Matching a known digest proves the bit count embedded in the final
// padding block without revealing the message.
inline Digest32 midstate_finalize(const Midstate& state, uint64_t claimed_total_bits)
{
    Bytes pad(64, 0);
    pad[0] = 0x80;
    write_be64(pad.data() + 56, claimed_total_bits);
    return owcf_compress(state, pad).digest();
}

} // namespace esspi

#endif // ESSPI_HASHCORE_HPP
