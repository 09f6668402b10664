// Copyright (c) 2026 The esspi developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef ESSPI_TAPROOT_HPP
#define ESSPI_TAPROOT_HPP

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

#include <esspi/secp256k1.hpp>
#include <esspi/sig.hpp>
#include <esspi/tx.hpp>

namespace esspi {

inline constexpr uint8_t kTapLeafVersion = 0xc0;

// x coordinate of the canonical unspendable NUMS internal key.
inline const Bytes& nums_internal_key()
{
    static const Bytes x =
        unhex("50929b74c1a04954b78b4b6035e97a5e078a5a0f28ec96d547bfee9ace803ac0");
    return x;
}

struct TapLeaf {
    uint8_t version = kTapLeafVersion;
    Bytes script;

    bool operator==(const TapLeaf&) const = default;
};

// tagged_hash("TapLeaf", version || compact_size(script) || script). The
// message fed to SHA-256 here is the program input M of the envelope scheme.
inline Bytes tapleaf_message(const TapLeaf& leaf)
{
    static const Digest32 tag = sha256(str_bytes("TapLeaf"));
    ByteWriter w;
    w.raw(tag.span());
    w.raw(tag.span());
    w.u8(leaf.version);
    w.var_bytes(leaf.script);
    return w.out;
}

inline Digest32 tapleaf_hash(const TapLeaf& leaf)
{
    return sha256(tapleaf_message(leaf));
}

inline Digest32 tapbranch_hash(const Digest32& a, const Digest32& b)
{
    ByteWriter w;
    if (b < a) {
        w.raw(b.span());
        w.raw(a.span());
    } else {
        w.raw(a.span());
        w.raw(b.span());
    }
    return tagged_hash("TapBranch", w.out);
}

// Output key from internal key and merkle root: Q = P + tweak*G.
struct TweakResult {
    Bytes output_x; // 32 bytes
    uint8_t parity = 0;
};

inline TweakResult taproot_tweak(ByteSpan internal_x, const Digest32& merkle_root)
{
    ByteWriter w;
    w.raw(internal_x);
    w.raw(merkle_root.span());
    Digest32 t = tagged_hash("TapTweak", w.out);
    secp::Num tweak = secp::Num::from_bytes(t.span());
    if (!(tweak < secp::order_n())) throw std::runtime_error("taproot_tweak: tweak out of range");
    auto base = secp::lift_x_even(secp::Num::from_bytes(internal_x));
    if (!base) throw std::invalid_argument("taproot_tweak: internal key not on curve");
    secp::Point q = secp::point_add(*base, secp::point_mul(secp::generator(), tweak));
    if (q.inf) throw std::runtime_error("taproot_tweak: point at infinity");
    auto x = q.x.to_bytes32();
    return TweakResult{Bytes(x.begin(), x.end()), static_cast<uint8_t>(q.y.is_odd() ? 1 : 0)};
}

inline Bytes p2tr_script(ByteSpan output_x)
{
    ByteWriter w;
    w.u8(0x51); // OP_1
    w.u8(0x20);
    w.raw(output_x);
    return w.out;
}

inline bool is_p2tr_script(ByteSpan spk)
{
    return spk.size() == 34 && spk[0] == 0x51 && spk[1] == 0x20;
}

// Script tree with the canonical deterministic shape: leaves sorted by their
// tagged hash, folded pairwise level by level with an odd node promoted.
class TapTree {
public:
    TapTree() = default; // empty placeholder; real trees come from the leaf constructor

    explicit TapTree(std::vector<TapLeaf> leaves) : leaves_(std::move(leaves))
    {
        if (leaves_.empty()) throw std::invalid_argument("TapTree: need at least one leaf");
        build();
    }

    const std::vector<TapLeaf>& leaves() const { return leaves_; }
    const Digest32& leaf_hash(size_t i) const { return leaf_hashes_[i]; }
    const Digest32& root() const { return root_; }
    // Sibling hashes from the leaf up to the root.
    const std::vector<Digest32>& merkle_path(size_t i) const { return paths_[i]; }

    std::optional<size_t> find_leaf(ByteSpan script) const
    {
        for (size_t i = 0; i < leaves_.size(); ++i)
            if (ByteSpan(leaves_[i].script) .size() == script.size() &&
                std::equal(script.begin(), script.end(), leaves_[i].script.begin()))
                return i;
        return std::nullopt;
    }

private:
    void build()
    {
        leaf_hashes_.clear();
        for (const TapLeaf& leaf : leaves_) leaf_hashes_.push_back(tapleaf_hash(leaf));
        paths_.assign(leaves_.size(), {});

        std::vector<size_t> order(leaves_.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return leaf_hashes_[a] < leaf_hashes_[b]; });

        struct Node {
            Digest32 hash;
            std::vector<size_t> covers;
        };
        std::vector<Node> nodes;
        for (size_t i : order) nodes.push_back({leaf_hashes_[i], {i}});
        while (nodes.size() > 1) {
            std::vector<Node> next;
            for (size_t j = 0; j + 1 < nodes.size(); j += 2) {
                for (size_t i : nodes[j].covers) paths_[i].push_back(nodes[j + 1].hash);
                for (size_t i : nodes[j + 1].covers) paths_[i].push_back(nodes[j].hash);
                Node merged{tapbranch_hash(nodes[j].hash, nodes[j + 1].hash), {}};
                merged.covers = nodes[j].covers;
                merged.covers.insert(merged.covers.end(), nodes[j + 1].covers.begin(),
                                     nodes[j + 1].covers.end());
                next.push_back(std::move(merged));
            }
            if (nodes.size() % 2 == 1) next.push_back(nodes.back());
            nodes = std::move(next);
        }
        root_ = nodes[0].hash;
    }

    std::vector<TapLeaf> leaves_;
    std::vector<Digest32> leaf_hashes_;
    std::vector<std::vector<Digest32>> paths_;
    Digest32 root_;
};

struct TaprootAddress {
    TapTree tree;
    Bytes internal_x;
    TweakResult key;

    Bytes script_pubkey() const { return p2tr_script(key.output_x); }

    // version-and-parity byte, internal key, then the merkle path.
    Bytes control_block(size_t leaf_index) const
    {
        ByteWriter w;
        w.u8(static_cast<uint8_t>(kTapLeafVersion | key.parity));
        w.raw(internal_x);
        for (const Digest32& sib : tree.merkle_path(leaf_index)) w.raw(sib.span());
        return w.out;
    }
};

inline TaprootAddress taproot_address(std::vector<TapLeaf> leaves,
                                      ByteSpan internal_x_key = ByteSpan{})
{
    Bytes internal = internal_x_key.empty() ? nums_internal_key() : to_bytes(internal_x_key);
    TapTree tree(std::move(leaves));
    TweakResult key = taproot_tweak(internal, tree.root());
    return TaprootAddress{std::move(tree), std::move(internal), std::move(key)};
}

// Recomputes the root from a leaf hash and a control-block path and checks it
// tweaks the internal key to the given output key (parity carried in the
// control byte's low bit).
inline bool verify_control_block(ByteSpan output_x, const Digest32& leaf_hash, ByteSpan control)
{
    if (control.size() < 33 || (control.size() - 33) % 32 != 0) return false;
    if ((control[0] & 0xfe) != kTapLeafVersion) return false;
    ByteSpan internal = control.subspan(1, 32);
    Digest32 node = leaf_hash;
    for (size_t off = 33; off < control.size(); off += 32)
        node = tapbranch_hash(node, Digest32::from_bytes(control.subspan(off, 32)));
    TweakResult expect;
    try {
        expect = taproot_tweak(internal, node);
    } catch (const std::exception&) {
        return false;
    }
    if (!std::equal(output_x.begin(), output_x.end(), expect.output_x.begin())) return false;
    return (control[0] & 1) == expect.parity;
}

} // namespace esspi

#endif // ESSPI_TAPROOT_HPP
