// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_BYTES_HPP
#define ESSPI_BYTES_HPP

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace esspi {

using Bytes = std::vector<uint8_t>;
using ByteSpan = std::span<const uint8_t>;

inline Bytes to_bytes(ByteSpan s) { return Bytes(s.begin(), s.end()); }

inline Bytes str_bytes(const std::string& s)
{
    return Bytes(s.begin(), s.end());
}

inline std::string hex(ByteSpan data)
{
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

inline int hex_nibble(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

inline Bytes unhex(const std::string& s)
{
    if (s.size() % 2 != 0) throw std::invalid_argument("unhex: odd length");
    Bytes out;
    out.reserve(s.size() / 2);
    for (size_t i = 0; i < s.size(); i += 2) {
        int hi = hex_nibble(s[i]), lo = hex_nibble(s[i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("unhex: bad digit");
        out.push_back(static_cast<uint8_t>(hi << 4 | lo));
    }
    return out;
}

// Little-endian scalar writers/readers (transaction serialization order).
class ByteWriter {
public:
    Bytes out;

    void u8(uint8_t v) { out.push_back(v); }
    void u16le(uint16_t v)
    {
        out.push_back(v & 0xff);
        out.push_back(v >> 8);
    }
    void u32le(uint32_t v)
    {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void u64le(uint64_t v)
    {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void raw(ByteSpan data) { out.insert(out.end(), data.begin(), data.end()); }
    // Bitcoin CompactSize encoding.
    void compact_size(uint64_t v)
    {
        if (v < 253) {
            u8(static_cast<uint8_t>(v));
        } else if (v <= 0xffff) {
            u8(253);
            u16le(static_cast<uint16_t>(v));
        } else if (v <= 0xffffffff) {
            u8(254);
            u32le(static_cast<uint32_t>(v));
        } else {
            u8(255);
            u64le(v);
        }
    }
    void var_bytes(ByteSpan data)
    {
        compact_size(data.size());
        raw(data);
    }
};

inline size_t compact_size_len(uint64_t v)
{
    if (v < 253) return 1;
    if (v <= 0xffff) return 3;
    if (v <= 0xffffffff) return 5;
    return 9;
}

class ByteReader {
public:
    explicit ByteReader(ByteSpan data) : data_(data) {}

    uint8_t u8()
    {
        need(1);
        return data_[pos_++];
    }
    uint16_t u16le()
    {
        need(2);
        uint16_t v = static_cast<uint16_t>(data_[pos_] | data_[pos_ + 1] << 8);
        pos_ += 2;
        return v;
    }
    uint32_t u32le()
    {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    uint64_t u64le()
    {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    uint64_t compact_size()
    {
        uint8_t tag = u8();
        if (tag < 253) return tag;
        if (tag == 253) return u16le();
        if (tag == 254) return u32le();
        return u64le();
    }
    Bytes take(size_t n)
    {
        need(n);
        Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        return out;
    }
    Bytes var_bytes() { return take(compact_size()); }
    size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }
    size_t pos() const { return pos_; }

private:
    void need(size_t n) const
    {
        if (data_.size() - pos_ < n) throw std::out_of_range("ByteReader: underrun");
    }
    ByteSpan data_;
    size_t pos_ = 0;
};

inline uint32_t read_be32(const uint8_t* p)
{
    return static_cast<uint32_t>(p[0]) << 24 | static_cast<uint32_t>(p[1]) << 16 |
           static_cast<uint32_t>(p[2]) << 8 | static_cast<uint32_t>(p[3]);
}

inline void write_be32(uint8_t* p, uint32_t v)
{
    p[0] = static_cast<uint8_t>(v >> 24);
    p[1] = static_cast<uint8_t>(v >> 16);
    p[2] = static_cast<uint8_t>(v >> 8);
    p[3] = static_cast<uint8_t>(v);
}

inline void write_be64(uint8_t* p, uint64_t v)
{
    for (int i = 0; i < 8; ++i) p[i] = static_cast<uint8_t>(v >> (56 - 8 * i));
}

inline uint32_t read_le32(const uint8_t* p)
{
    return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
           static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

inline void write_le32(uint8_t* p, uint32_t v)
{
    p[0] = static_cast<uint8_t>(v);
    p[1] = static_cast<uint8_t>(v >> 8);
    p[2] = static_cast<uint8_t>(v >> 16);
    p[3] = static_cast<uint8_t>(v >> 24);
}

} // namespace esspi

#endif // ESSPI_BYTES_HPP
