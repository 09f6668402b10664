// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_SIG_HPP
#define ESSPI_SIG_HPP

#include <esspi/bytes.hpp>
#include <esspi/hashcore.hpp>
#include <esspi/secp256k1.hpp>

namespace esspi {

// Raw signing layer: both schemes sign a 32-byte value with no message
// pre-hash. Schnorr follows BIP-340 (x-only keys, 64-byte signatures,
// deterministic given the aux bytes); ECDSA uses compact r||s with low s and
// a deterministic nonce.

enum class SigScheme { schnorr, ecdsa };

namespace detail_sig {

inline secp::Num scalar_from(ByteSpan b) { return secp::Num::from_bytes(b); }

inline void check_seckey(const secp::Num& d)
{
    if (d.is_zero() || !(d < secp::order_n()))
        throw std::invalid_argument("secret key out of range");
}

} // namespace detail_sig

inline Bytes schnorr_pubkey(ByteSpan seckey32)
{
    secp::Num d = detail_sig::scalar_from(seckey32);
    detail_sig::check_seckey(d);
    secp::Point pt = secp::point_mul(secp::generator(), d);
    auto x = pt.x.to_bytes32();
    return Bytes(x.begin(), x.end());
}

inline bool schnorr_verify(ByteSpan pub32, const Digest32& msg, ByteSpan sig64)
{
    if (pub32.size() != 32 || sig64.size() != 64) return false;
    auto pt_opt = secp::lift_x_even(secp::Num::from_bytes(pub32));
    if (!pt_opt) return false;
    secp::Num r = secp::Num::from_bytes(sig64.subspan(0, 32));
    secp::Num s = secp::Num::from_bytes(sig64.subspan(32, 32));
    if (!(r < secp::field_p()) || !(s < secp::order_n())) return false;

    Sha256 h;
    Digest32 ch_tag = sha256(str_bytes("BIP0340/challenge"));
    h.update(ch_tag.span()).update(ch_tag.span());
    h.update(sig64.subspan(0, 32)).update(pub32).update(msg.span());
    secp::Num e = mod(secp::Num::from_bytes(h.finalize().span()), secp::order_n());

    secp::Point rpt = secp::point_add(
        secp::point_mul(secp::generator(), s),
        secp::point_mul(secp::point_neg(*pt_opt), e));
    if (rpt.inf || rpt.y.is_odd()) return false;
    return rpt.x == r;
}

inline Bytes schnorr_sign(ByteSpan seckey32, const Digest32& msg, ByteSpan aux32 = ByteSpan{})
{
    static const Bytes zero_aux(32, 0);
    if (aux32.empty()) aux32 = ByteSpan(zero_aux.data(), 32);
    if (aux32.size() != 32) throw std::invalid_argument("schnorr_sign: aux must be 32 bytes");

    secp::Num d0 = detail_sig::scalar_from(seckey32);
    detail_sig::check_seckey(d0);
    secp::Point pt = secp::point_mul(secp::generator(), d0);
    secp::Num d = pt.y.is_odd() ? sub_mod(secp::Num(0), d0, secp::order_n()) : d0;
    auto px = pt.x.to_bytes32();

    secp::Num t = xor_num(d, secp::Num::from_bytes(tagged_hash("BIP0340/aux", aux32).span()));
    Sha256 nh;
    Digest32 nonce_tag = sha256(str_bytes("BIP0340/nonce"));
    auto tb = t.to_bytes32();
    nh.update(nonce_tag.span()).update(nonce_tag.span());
    nh.update(ByteSpan(tb.data(), 32)).update(ByteSpan(px.data(), 32)).update(msg.span());
    secp::Num k0 = mod(secp::Num::from_bytes(nh.finalize().span()), secp::order_n());
    if (k0.is_zero()) throw std::runtime_error("schnorr_sign: zero nonce");

    secp::Point rpt = secp::point_mul(secp::generator(), k0);
    secp::Num k = rpt.y.is_odd() ? sub_mod(secp::Num(0), k0, secp::order_n()) : k0;
    auto rx = rpt.x.to_bytes32();

    Sha256 eh;
    Digest32 ch_tag = sha256(str_bytes("BIP0340/challenge"));
    eh.update(ch_tag.span()).update(ch_tag.span());
    eh.update(ByteSpan(rx.data(), 32)).update(ByteSpan(px.data(), 32)).update(msg.span());
    secp::Num e = mod(secp::Num::from_bytes(eh.finalize().span()), secp::order_n());

    secp::Num s = add_mod(k, mul_mod(e, d, secp::order_n()), secp::order_n());
    auto sb = s.to_bytes32();
    Bytes sig;
    sig.insert(sig.end(), rx.begin(), rx.end());
    sig.insert(sig.end(), sb.begin(), sb.end());
    return sig;
}

inline Bytes ecdsa_pubkey(ByteSpan seckey32)
{
    secp::Num d = detail_sig::scalar_from(seckey32);
    detail_sig::check_seckey(d);
    secp::Point pt = secp::point_mul(secp::generator(), d);
    Bytes out;
    out.push_back(pt.y.is_odd() ? 0x03 : 0x02);
    auto x = pt.x.to_bytes32();
    out.insert(out.end(), x.begin(), x.end());
    return out;
}

inline bool ecdsa_verify(ByteSpan pub33, const Digest32& digest, ByteSpan sig64)
{
    if (pub33.size() != 33 || sig64.size() != 64) return false;
    if (pub33[0] != 0x02 && pub33[0] != 0x03) return false;
    auto pt_opt = secp::lift_x_even(secp::Num::from_bytes(pub33.subspan(1)));
    if (!pt_opt) return false;
    secp::Point q = *pt_opt;
    if (pub33[0] == 0x03) q = secp::point_neg(q);

    const secp::Num& n = secp::order_n();
    secp::Num r = secp::Num::from_bytes(sig64.subspan(0, 32));
    secp::Num s = secp::Num::from_bytes(sig64.subspan(32, 32));
    if (r.is_zero() || s.is_zero() || !(r < n) || !(s < n)) return false;
    secp::Num z = secp::Num::from_bytes(digest.span());
    secp::Num w = inv_mod(s, n);
    secp::Point rpt = secp::point_add(
        secp::point_mul(secp::generator(), mul_mod(mod(z, n), w, n)),
        secp::point_mul(q, mul_mod(r, w, n)));
    if (rpt.inf) return false;
    return mod(rpt.x, n) == r;
}

inline Bytes ecdsa_sign(ByteSpan seckey32, const Digest32& digest)
{
    secp::Num d = detail_sig::scalar_from(seckey32);
    detail_sig::check_seckey(d);
    const secp::Num& n = secp::order_n();
    secp::Num z = mod(secp::Num::from_bytes(digest.span()), n);

    for (uint32_t counter = 0;; ++counter) {
        Sha256 kh;
        uint8_t cb[4];
        write_be32(cb, counter);
        kh.update(seckey32).update(digest.span()).update(ByteSpan(cb, 4));
        secp::Num k = mod(secp::Num::from_bytes(kh.finalize().span()), n);
        if (k.is_zero()) continue;
        secp::Point rpt = secp::point_mul(secp::generator(), k);
        secp::Num r = mod(rpt.x, n);
        if (r.is_zero()) continue;
        secp::Num s = mul_mod(inv_mod(k, n), add_mod(z, mul_mod(r, d, n), n), n);
        if (s.is_zero()) continue;
        // low-s normalization
        secp::Num half = sub_mod(secp::Num(0), s, n);
        if (half < s) s = half;
        auto rb = r.to_bytes32();
        auto sb = s.to_bytes32();
        Bytes sig;
        sig.insert(sig.end(), rb.begin(), rb.end());
        sig.insert(sig.end(), sb.begin(), sb.end());
        return sig;
    }
}

inline Bytes sig_sign_raw(SigScheme scheme, ByteSpan seckey, const Digest32& digest)
{
    return scheme == SigScheme::schnorr ? schnorr_sign(seckey, digest)
                                        : ecdsa_sign(seckey, digest);
}

inline bool sig_verify_raw(SigScheme scheme, ByteSpan pubkey, const Digest32& digest, ByteSpan sig)
{
    return scheme == SigScheme::schnorr ? schnorr_verify(pubkey, digest, sig)
                                        : ecdsa_verify(pubkey, digest, sig);
}

} // namespace esspi

#endif // ESSPI_SIG_HPP
