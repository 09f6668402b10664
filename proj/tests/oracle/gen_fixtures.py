# Copyright (c) 2026 The esspi developers
# Distributed under the MIT software license, see the accompanying
# file COPYING or http://www.opensource.org/licenses/mit-license.php.
"""Generates the frozen JSON fixtures under tests/fixtures/.

Run from this directory: python3 gen_fixtures.py
All randomness is seeded; output is reproducible byte for byte.
"""

import hashlib
import json
import os
import random

import ref_secp
import ref_tx
from ref_tx import Tx, TxIn, TxOut

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def h(b: bytes) -> str:
    return b.hex()


def write(name, obj):
    path = os.path.join(OUT_DIR, name)
    with open(path, "w") as f:
        json.dump(obj, f, indent=1, sort_keys=True)
        f.write("\n")
    print("wrote", path)


def gen_sha256():
    msgs = [
        b"",
        b"abc",
        b"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq",
        b"abcdefghbcdefghicdefghijdefghijkefghijklfghijklmghijklmnhijklmno"
        b"ijklmnopjklmnopqklmnopqrlmnopqrsmnopqrstnopqrstu",
        b"a" * 64,
        b"message digest",
        b"secure hash algorithm",
        bytes(range(112)),
    ]
    vectors = [{"msg": h(m), "digest": h(hashlib.sha256(m).digest())} for m in msgs]
    write("sha256_vectors.json", {"vectors": vectors})


def gen_tagged():
    cases = []
    for tag, data in [("TapLeaf", b"\x51\x52\x53"), ("TapSighash", b"\x51\x52\x53"),
                      ("TapLeaf", b""), ("BIP0340/challenge", b"\x01" * 96)]:
        cases.append({"tag": tag, "data": h(data), "digest": h(ref_secp.tagged_hash(tag, data))})
    # tapleaf hash of a fixed 3-byte script, leaf version 0xc0
    script = b"\x51\x93\x87"
    cases.append({"tag": "TapLeaf", "data": h(b"\xc0" + ref_tx.var_bytes(script)),
                  "digest": h(ref_tx.tapleaf_hash(script))})
    write("tagged_hash_vectors.json", {"vectors": cases})


def gen_schnorr():
    rng = random.Random(0x5EC12026)
    vectors = []
    # pinned vector: seckey 3, zero aux, zero message
    sk = (3).to_bytes(32, "big")
    pk = ref_secp.pubkey_xonly(sk)
    sig = ref_secp.schnorr_sign(b"\x00" * 32, sk)
    vectors.append({"seckey": h(sk), "pubkey": h(pk), "msg": h(b"\x00" * 32),
                    "sig": h(sig), "valid": True})
    for _ in range(10):
        sk = rng.getrandbits(255).to_bytes(32, "big")
        if not 1 <= int.from_bytes(sk, "big") < ref_secp.N:
            continue
        msg = rng.getrandbits(256).to_bytes(32, "big")
        aux = rng.getrandbits(256).to_bytes(32, "big")
        pk = ref_secp.pubkey_xonly(sk)
        sig = ref_secp.schnorr_sign(msg, sk, aux)
        vectors.append({"seckey": h(sk), "pubkey": h(pk), "msg": h(msg),
                        "sig": h(sig), "valid": True})
        # negated variants
        bad_sig = bytearray(sig)
        bad_sig[40] ^= 0x01
        vectors.append({"pubkey": h(pk), "msg": h(msg), "sig": h(bytes(bad_sig)),
                        "valid": False})
        bad_msg = bytearray(msg)
        bad_msg[0] ^= 0x80
        vectors.append({"pubkey": h(pk), "msg": h(bytes(bad_msg)), "sig": h(sig),
                        "valid": False})
    # public key x not on the curve
    x = 7
    while ref_secp.lift_x(x) is not None:
        x += 1
    vectors.append({"pubkey": h(x.to_bytes(32, "big")), "msg": h(b"\x00" * 32),
                    "sig": h(b"\x00" * 64), "valid": False})
    # s >= n
    sk = (5).to_bytes(32, "big")
    sig = bytearray(ref_secp.schnorr_sign(b"\x11" * 32, sk))
    sig[32:] = ref_secp.N.to_bytes(32, "big")
    vectors.append({"pubkey": h(ref_secp.pubkey_xonly(sk)), "msg": h(b"\x11" * 32),
                    "sig": h(bytes(sig)), "valid": False})
    write("schnorr_vectors.json", {"vectors": vectors})


def gen_ecdsa():
    rng = random.Random(0xECD5A026)
    vectors = []
    for _ in range(8):
        sk = rng.getrandbits(255).to_bytes(32, "big")
        if not 1 <= int.from_bytes(sk, "big") < ref_secp.N:
            continue
        digest = rng.getrandbits(256).to_bytes(32, "big")
        pub = ref_secp.ecdsa_pubkey(sk)
        sig = ref_secp.ecdsa_sign(digest, sk)
        assert ref_secp.ecdsa_verify(digest, pub, sig)
        vectors.append({"pubkey": h(pub), "digest": h(digest), "sig": h(sig), "valid": True})
        bad = bytearray(sig)
        bad[50] ^= 0x04
        vectors.append({"pubkey": h(pub), "digest": h(digest), "sig": h(bytes(bad)),
                        "valid": False})
        bad_digest = bytearray(digest)
        bad_digest[31] ^= 0x01
        vectors.append({"pubkey": h(pub), "digest": h(bytes(bad_digest)), "sig": h(sig),
                        "valid": False})
    write("ecdsa_vectors.json", {"vectors": vectors})


def fixture_txs():
    prev = lambda tag: hashlib.sha256(tag.encode()).digest()
    tx1 = Tx(version=2,
             vin=[TxIn(prev("prev-a"), 0, sequence=0xFFFFFFFE)],
             vout=[TxOut(50_000, bytes.fromhex("51"))],
             locktime=0)
    script_p2tr = b"\x51\x20" + hashlib.sha256(b"outkey-b").digest()
    tx2 = Tx(version=2,
             vin=[TxIn(prev("prev-b"), 1, sequence=0xFFFFFFFF),
                  TxIn(prev("prev-c"), 0, sequence=0x00000019)],
             vout=[TxOut(90_000, script_p2tr),
                   TxOut(4_500, b"\x6a\x04" + b"demo"),
                   TxOut(330, b"\x00\x20" + hashlib.sha256(b"wsh").digest())],
             locktime=101)
    tx3 = Tx(version=1,
             vin=[TxIn(prev("prev-d"), 7, script_sig=b"\x01\x02\x03",
                       sequence=0x00000040)],
             vout=[TxOut(1_000_000, b"\x51\x20" + hashlib.sha256(b"outkey-d").digest())],
             locktime=0)
    return tx1, tx2, tx3


def gen_txid():
    cases = []
    for tx in fixture_txs():
        witness_tx = Tx(tx.version, [TxIn(i.prev_txid, i.prev_vout, i.script_sig, i.sequence,
                                          [b"\xaa\xbb", b""]) for i in tx.vin],
                        tx.vout, tx.locktime)
        cases.append({
            "tx": h(ref_tx.serialize_tx(tx)),
            "txid": h(ref_tx.txid(tx)),
            "tx_with_witness": h(ref_tx.serialize_tx(witness_tx, with_witness=True)),
            "witness_txid": h(ref_tx.txid(witness_tx)),
        })
    write("txid_vectors.json", {"vectors": cases})


def gen_legacy_sighash():
    tx1, tx2, _ = fixture_txs()
    script_code = bytes.fromhex("21") + b"\x02" + hashlib.sha256(b"eck").digest() + b"\xad"
    cases = []
    for tx, idx, ht in [
        (tx1, 0, 0x01),                  # ALL
        (tx1, 0, 0x81),                  # ALL|ANYONECANPAY
        (tx2, 0, 0x01),
        (tx2, 1, 0x03),                  # SINGLE
        (tx2, 0, 0x02),                  # NONE
        (tx2, 1, 0x83),                  # SINGLE|ANYONECANPAY
    ]:
        dprime = ref_tx.legacy_signed_message(tx, idx, script_code, ht)
        cases.append({
            "tx": h(ref_tx.serialize_tx(tx)),
            "input_index": idx,
            "script_code": h(script_code),
            "hash_type": ht,
            "d_prime": h(dprime),
            "v": h(ref_tx.sha256(dprime)),
            "sighash": h(ref_tx.sha256d(dprime)),
        })
    write("legacy_sighash_vectors.json", {"vectors": cases})


def gen_taproot_sighash():
    _, tx2, tx3 = fixture_txs()
    spent2 = [TxOut(95_000, b"\x51\x20" + hashlib.sha256(b"spent-0").digest()),
              TxOut(1_000, b"\x51\x20" + hashlib.sha256(b"spent-1").digest())]
    spent3 = [TxOut(1_100_000, b"\x51\x20" + hashlib.sha256(b"spent-d").digest())]
    leaf = ref_tx.tapleaf_hash(b"\x51\x51")
    cases = []
    specs = [
        (tx2, 0, spent2, 0x01, None, None),
        (tx2, 0, spent2, 0x00, None, None),                    # DEFAULT
        (tx2, 1, spent2, 0x03, None, None),                    # SINGLE
        (tx2, 0, spent2, 0x81, None, None),                    # ALL|ACP
        (tx2, 1, spent2, 0x83, None, None),                    # SINGLE|ACP
        (tx2, 0, spent2, 0x02, None, None),                    # NONE
        (tx2, 0, spent2, 0x01, {"tapleaf_hash": leaf}, None),  # script path
        (tx2, 0, spent2, 0x01, {"tapleaf_hash": leaf}, b"\x50\x01\x02"),  # with annex
        (tx3, 0, spent3, 0x01, {"tapleaf_hash": leaf}, None),
        (tx3, 0, spent3, 0x83, {"tapleaf_hash": leaf}, b"\x50"),
    ]
    for tx, idx, spent, ht, ext, annex in specs:
        msg = ref_tx.taproot_sigmsg(tx, idx, spent, ht, ext, annex)
        cases.append({
            "tx": h(ref_tx.serialize_tx(tx)),
            "input_index": idx,
            "spent_outputs": [{"amount": o.amount, "script_pubkey": h(o.script_pubkey)}
                              for o in spent],
            "hash_type": ht,
            "tapleaf_hash": h(ext["tapleaf_hash"]) if ext else None,
            "annex": h(annex) if annex is not None else None,
            "sigmsg": h(msg),
            "sighash": h(ref_tx.taproot_sighash(msg)),
        })
    write("taproot_sighash_vectors.json", {"vectors": cases})


def gen_taptree():
    cases = []
    for scripts in [[b"\x51"],
                    [b"\x51", b"\x52"],
                    [b"\x51", b"\x52", b"\x53"],
                    [bytes([0x50 + i]) for i in range(1, 8)]]:
        leaf_hashes = [ref_tx.tapleaf_hash(s) for s in scripts]
        root, paths = ref_tx.taptree(leaf_hashes)
        out_x, parity = ref_tx.taproot_tweak(ref_tx.NUMS_X, root)
        cases.append({
            "scripts": [h(s) for s in scripts],
            "leaf_hashes": [h(lh) for lh in leaf_hashes],
            "root": h(root),
            "internal_key": h(ref_tx.NUMS_X),
            "output_key": h(out_x),
            "parity": parity,
            "paths": [[h(p) for p in path] for path in paths],
        })
    write("taptree_vectors.json", {"vectors": cases})


if __name__ == "__main__":
    os.makedirs(OUT_DIR, exist_ok=True)
    gen_sha256()
    gen_tagged()
    gen_schnorr()
    gen_ecdsa()
    gen_txid()
    gen_legacy_sighash()
    gen_taproot_sighash()
    gen_taptree()
