// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_SECP256K1_HPP
#define ESSPI_SECP256K1_HPP

#include <optional>

#include <gmp.h>

#include <esspi/bytes.hpp>
#include <esspi/hashcore.hpp>

namespace esspi::secp {

// Thin RAII wrapper over mpz_t. Big integers only; all curve logic lives in
// the free functions below.
class Num {
public:
    Num() { mpz_init(v_); }
    Num(unsigned long x) { mpz_init_set_ui(v_, x); }
    Num(const Num& o) { mpz_init_set(v_, o.v_); }
    Num(Num&& o) noexcept
    {
        mpz_init(v_);
        mpz_swap(v_, o.v_);
    }
    Num& operator=(const Num& o)
    {
        if (this != &o) mpz_set(v_, o.v_);
        return *this;
    }
    Num& operator=(Num&& o) noexcept
    {
        mpz_swap(v_, o.v_);
        return *this;
    }
    ~Num() { mpz_clear(v_); }

    static Num from_hex(const char* hex)
    {
        Num n;
        mpz_set_str(n.v_, hex, 16);
        return n;
    }
    static Num from_bytes(ByteSpan b)
    {
        Num n;
        mpz_import(n.v_, b.size(), 1, 1, 1, 0, b.data());
        return n;
    }
    std::array<uint8_t, 32> to_bytes32() const
    {
        std::array<uint8_t, 32> out{};
        size_t count = 0;
        if (mpz_sgn(v_) != 0) {
            size_t bytes = (mpz_sizeinbase(v_, 2) + 7) / 8;
            if (bytes > 32) throw std::overflow_error("Num: does not fit in 32 bytes");
            mpz_export(out.data() + (32 - bytes), &count, 1, 1, 1, 0, v_);
        }
        return out;
    }

    bool is_zero() const { return mpz_sgn(v_) == 0; }
    bool is_odd() const { return mpz_odd_p(v_) != 0; }
    bool operator==(const Num& o) const { return mpz_cmp(v_, o.v_) == 0; }
    bool operator<(const Num& o) const { return mpz_cmp(v_, o.v_) < 0; }

    friend Num add_mod(const Num& a, const Num& b, const Num& m)
    {
        Num r;
        mpz_add(r.v_, a.v_, b.v_);
        mpz_mod(r.v_, r.v_, m.v_);
        return r;
    }
    friend Num sub_mod(const Num& a, const Num& b, const Num& m)
    {
        Num r;
        mpz_sub(r.v_, a.v_, b.v_);
        mpz_mod(r.v_, r.v_, m.v_);
        return r;
    }
    friend Num mul_mod(const Num& a, const Num& b, const Num& m)
    {
        Num r;
        mpz_mul(r.v_, a.v_, b.v_);
        mpz_mod(r.v_, r.v_, m.v_);
        return r;
    }
    friend Num pow_mod(const Num& a, const Num& e, const Num& m)
    {
        Num r;
        mpz_powm(r.v_, a.v_, e.v_, m.v_);
        return r;
    }
    friend Num inv_mod(const Num& a, const Num& m)
    {
        Num r;
        if (mpz_invert(r.v_, a.v_, m.v_) == 0) throw std::domain_error("inv_mod: not invertible");
        return r;
    }
    friend Num mod(const Num& a, const Num& m)
    {
        Num r;
        mpz_mod(r.v_, a.v_, m.v_);
        return r;
    }
    friend Num xor_num(const Num& a, const Num& b)
    {
        Num r;
        mpz_xor(r.v_, a.v_, b.v_);
        return r;
    }
    size_t bit_length() const { return is_zero() ? 0 : mpz_sizeinbase(v_, 2); }
    bool bit(size_t i) const { return mpz_tstbit(v_, i) != 0; }

private:
    mpz_t v_;
};

inline const Num& field_p()
{
    static const Num p = Num::from_hex(
        "FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F");
    return p;
}

inline const Num& order_n()
{
    static const Num n = Num::from_hex(
        "FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141");
    return n;
}

struct Point {
    Num x, y;
    bool inf = true;

    bool operator==(const Point& o) const
    {
        if (inf || o.inf) return inf == o.inf;
        return x == o.x && y == o.y;
    }
};

inline const Point& generator()
{
    static const Point g{
        Num::from_hex("79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798"),
        Num::from_hex("483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8"),
        false};
    return g;
}

inline bool on_curve(const Point& pt)
{
    if (pt.inf) return false;
    const Num& p = field_p();
    Num lhs = mul_mod(pt.y, pt.y, p);
    Num rhs = add_mod(mul_mod(mul_mod(pt.x, pt.x, p), pt.x, p), Num(7), p);
    return lhs == rhs;
}

inline Point point_add(const Point& a, const Point& b)
{
    if (a.inf) return b;
    if (b.inf) return a;
    const Num& p = field_p();
    if (a.x == b.x) {
        if (add_mod(a.y, b.y, p).is_zero()) return Point{};
        // doubling
        Num lam = mul_mod(mul_mod(Num(3), mul_mod(a.x, a.x, p), p),
                          inv_mod(add_mod(a.y, a.y, p), p), p);
        Num x3 = sub_mod(sub_mod(mul_mod(lam, lam, p), a.x, p), a.x, p);
        Num y3 = sub_mod(mul_mod(lam, sub_mod(a.x, x3, p), p), a.y, p);
        return Point{std::move(x3), std::move(y3), false};
    }
    Num lam = mul_mod(sub_mod(b.y, a.y, p), inv_mod(sub_mod(b.x, a.x, p), p), p);
    Num x3 = sub_mod(sub_mod(mul_mod(lam, lam, p), a.x, p), b.x, p);
    Num y3 = sub_mod(mul_mod(lam, sub_mod(a.x, x3, p), p), a.y, p);
    return Point{std::move(x3), std::move(y3), false};
}

inline Point point_mul(const Point& pt, const Num& k)
{
    Point r;
    Point base = pt;
    size_t bits = k.bit_length();
    for (size_t i = 0; i < bits; ++i) {
        if (k.bit(i)) r = point_add(r, base);
        base = point_add(base, base);
    }
    return r;
}

inline Point point_neg(const Point& pt)
{
    if (pt.inf) return pt;
    return Point{pt.x, sub_mod(Num(0), pt.y, field_p()), false};
}

// Point with the given x and even y, if x is on the curve. p = 3 (mod 4) so
// the square root is a single exponentiation.
inline std::optional<Point> lift_x_even(const Num& x)
{
    const Num& p = field_p();
    if (!(x < p)) return std::nullopt;
    Num c = add_mod(mul_mod(mul_mod(x, x, p), x, p), Num(7), p);
    static const Num e = [] {
        Num t = Num::from_hex("3FFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFBFFFFF0C");
        return t;
    }();
    Num y = pow_mod(c, e, p);
    if (!(mul_mod(y, y, p) == c)) return std::nullopt;
    if (y.is_odd()) y = sub_mod(Num(0), y, p);
    return Point{x, std::move(y), false};
}

} // namespace esspi::secp

#endif // ESSPI_SECP256K1_HPP
