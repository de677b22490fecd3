#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "horotree/core.hpp"
#include "horotree/graph.hpp"
#include "horotree/sources.hpp"

namespace horotree {

// A graph automorphism germ. Planar germs map one oriented flag to another
// and extend over the ball by rotation transport; Cayley elements are reduced
// words acting by left multiplication on vertex labels.
struct GroupElement {
    enum class Kind { PlanarGerm, CayleyWord };
    Kind kind = Kind::CayleyWord;
    Vertex src_v = 0;
    int src_i = 0;
    Vertex dst_v = 0;
    int dst_i = 0;
    // Cayley elements x -> word * perm(x): a left translation twisted by a
    // signed generator permutation (perm[letter-1] is the image letter;
    // empty perm means the identity twist).
    std::vector<int> word;
    std::vector<int> perm;

    bool operator==(const GroupElement& o) const {
        if (kind != o.kind) return false;
        if (kind == Kind::PlanarGerm)
            return src_v == o.src_v && src_i == o.src_i && dst_v == o.dst_v && dst_i == o.dst_i;
        return word == o.word && perm == o.perm;
    }
};

class Symmetry {
public:
    explicit Symmetry(const LayeredGraph& g) : g_(&g) {
        switch (g.kind) {
            case SourceKind::Tiling:
                available_ = true;
                names_ = {"r", "s"};
                break;
            case SourceKind::FreeGroup: {
                available_ = true;
                static const char* letters = "abcdef";
                for (int i = 0; i < g.free_rank; ++i) names_.push_back(std::string(1, letters[i]));
                break;
            }
            case SourceKind::Line:
                available_ = true;
                names_ = {"t"};
                break;
            case SourceKind::File:
                available_ = false;  // adjacency files carry no symmetry data
                break;
        }
    }

    const LayeredGraph& graph() const { return *g_; }
    bool available() const { return available_; }
    const std::vector<std::string>& generator_names() const { return names_; }

    GroupElement identity() const {
        GroupElement e;
        if (g_->kind == SourceKind::Tiling) {
            e.kind = GroupElement::Kind::PlanarGerm;
            e.src_v = e.dst_v = g_->base;
            e.src_i = e.dst_i = 0;
        } else {
            e.kind = GroupElement::Kind::CayleyWord;
        }
        return e;
    }

    GroupElement generator(const std::string& name, int exponent = 1) const {
        require_available();
        int idx = -1;
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) idx = static_cast<int>(i);
        if (idx < 0) fail_input("unknown generator '" + name + "'");
        GroupElement e = generator_power(idx, exponent);
        return e;
    }

    GroupElement inverse(const GroupElement& a) const {
        GroupElement e = a;
        if (a.kind == GroupElement::Kind::PlanarGerm) {
            std::swap(e.src_v, e.dst_v);
            std::swap(e.src_i, e.dst_i);
        } else {
            // (u, s)^-1 = (s^-1(u^-1), s^-1)
            e.perm = invert_perm(a.perm);
            e.word = apply_perm(e.perm, cayley::invert_word(a.word));
        }
        return e;
    }

    // act(compose(a,b), x) = act(a, act(b, x)).
    GroupElement compose(const GroupElement& a, const GroupElement& b) const {
        require_available();
        if (a.kind != b.kind) fail_input("compose: mixed element kinds");
        GroupElement e;
        if (a.kind == GroupElement::Kind::CayleyWord) {
            // (u1, s1)(u2, s2) = (u1 * s1(u2), s1 s2)
            e.kind = GroupElement::Kind::CayleyWord;
            e.word = cayley::reduce_concat(a.word, apply_perm(a.perm, b.word));
            e.perm = compose_perm(a.perm, b.perm);
            return e;
        }
        // Planar: transport b's destination flag through a.
        e.kind = GroupElement::Kind::PlanarGerm;
        e.src_v = b.src_v;
        e.src_i = b.src_i;
        auto flag = transport_flag(a, b.dst_v, b.dst_i);
        if (!flag) fail_radius("compose: flag transport left the certified ball");
        e.dst_v = flag->first;
        e.dst_i = flag->second;
        return e;
    }

    // Image table over the whole ball; kNoVertex where the action is not
    // determined. Returns nullopt when the germ is inconsistent with the
    // graph structure (it extends to no automorphism).
    std::optional<std::vector<Vertex>> materialize(const GroupElement& a) const {
        require_available();
        if (a.kind == GroupElement::Kind::CayleyWord) return materialize_cayley(a);
        return transport_all(a, nullptr);
    }

    Vertex apply(const GroupElement& a, Vertex x) const {
        require_available();
        if (a.kind == GroupElement::Kind::CayleyWord) return apply_cayley(a, x);
        std::vector<Vertex> targets = {x};
        auto img = transport_all(a, &targets);
        if (!img) return kNoVertex;
        return (*img)[x];
    }

    std::vector<Vertex> apply_batch(const GroupElement& a, const std::vector<Vertex>& xs) const {
        require_available();
        std::vector<Vertex> out(xs.size(), kNoVertex);
        if (a.kind == GroupElement::Kind::CayleyWord) {
            for (std::size_t i = 0; i < xs.size(); ++i)
                if (xs[i] < g_->size()) out[i] = apply_cayley(a, xs[i]);
            return out;
        }
        auto img = transport_all(a, &xs);
        if (!img) return out;
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (xs[i] < g_->size()) out[i] = (*img)[xs[i]];
        return out;
    }

    // Candidate germs mapping p to q: one per flag choice at q. For tilings
    // these are the orientation-preserving dart alignments; for free groups
    // the signed generator permutations (the edge bijections at the flag);
    // for the line, translations only (the two ends stay distinct).
    std::vector<GroupElement> germs(Vertex p, Vertex q) const {
        require_available();
        std::vector<GroupElement> out;
        if (g_->kind == SourceKind::Tiling) {
            if (g_->adj[p].empty() || g_->adj[q].empty()) return out;
            for (int i = 0; i < static_cast<int>(g_->adj[q].size()); ++i) {
                GroupElement e;
                e.kind = GroupElement::Kind::PlanarGerm;
                e.src_v = p;
                e.src_i = 0;
                e.dst_v = q;
                e.dst_i = i;
                out.push_back(e);
            }
        } else {
            for (const auto& s : signed_perms()) {
                GroupElement e;
                e.kind = GroupElement::Kind::CayleyWord;
                e.perm = s;
                // u * s(p) = q  =>  u = q * s(p)^-1
                e.word = cayley::reduce_concat(label_word(q),
                                               cayley::invert_word(apply_perm(s, label_word(p))));
                out.push_back(e);
            }
        }
        return out;
    }

    // Elements fixing v, enumerated as flag maps and checked for consistency.
    std::vector<GroupElement> stabilizer_elements(Vertex v) const {
        std::vector<GroupElement> out;
        for (auto& e : germs(v, v))
            if (materialize(e)) out.push_back(e);
        return out;
    }

    int magnitude(const GroupElement& a) const {
        if (a.kind == GroupElement::Kind::CayleyWord) return static_cast<int>(a.word.size());
        Vertex y = apply(a, g_->base);
        if (y == kNoVertex) fail_radius("magnitude: base image outside certified ball");
        return g_->layer[y];
    }

    bool equal_on_ball(const GroupElement& a, const GroupElement& b, int radius) const {
        auto ia = materialize(a), ib = materialize(b);
        if (!ia || !ib) return false;
        for (Vertex x = 0; x < g_->size(); ++x) {
            if (g_->layer[x] > radius) continue;
            Vertex ya = (*ia)[x], yb = (*ib)[x];
            if (ya == kNoVertex || yb == kNoVertex)
                fail_radius("equal_on_ball: action undefined inside requested radius");
            if (ya != yb) return false;
        }
        return true;
    }

    // Words like "r s r^-1 s^2". Composition left to right: "g h" acts by x -> g(h(x)).
    GroupElement from_word(const std::string& text) const {
        require_available();
        GroupElement acc = identity();
        std::istringstream in(text);
        std::string tok;
        bool any = false;
        while (in >> tok) {
            std::string name = tok;
            int exp = 1;
            auto caret = tok.find('^');
            if (caret != std::string::npos) {
                name = tok.substr(0, caret);
                try {
                    exp = std::stoi(tok.substr(caret + 1));
                } catch (...) {
                    fail_input("bad exponent in token '" + tok + "'");
                }
            }
            acc = any ? compose(acc, generator(name, exp)) : generator(name, exp);
            any = true;
        }
        return acc;
    }

private:
    void require_available() const {
        if (!available_) fail_input("this source carries no symmetry data; group operations unavailable");
    }

    static std::vector<int> apply_perm(const std::vector<int>& perm, const std::vector<int>& w) {
        if (perm.empty()) return w;
        std::vector<int> out;
        out.reserve(w.size());
        for (int letter : w) out.push_back(perm[static_cast<std::size_t>(letter) - 1]);
        return out;
    }

    static std::vector<int> invert_perm(const std::vector<int>& perm) {
        if (perm.empty()) return perm;
        std::vector<int> inv(perm.size());
        for (std::size_t i = 0; i < perm.size(); ++i) inv[static_cast<std::size_t>(perm[i]) - 1] = static_cast<int>(i) + 1;
        return inv;
    }

    static std::vector<int> compose_perm(const std::vector<int>& a, const std::vector<int>& b) {
        if (a.empty()) return b;
        if (b.empty()) return a;
        std::vector<int> out(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[static_cast<std::size_t>(b[i]) - 1];
        return out;
    }

    // Signed permutations of the generators: the letter bijections commuting
    // with inversion. These are the valid edge bijections of a base flag.
    const std::vector<std::vector<int>>& signed_perms() const {
        if (!signed_perms_.empty()) return signed_perms_;
        if (g_->kind != SourceKind::FreeGroup) {
            signed_perms_.push_back({});  // line: identity only
            return signed_perms_;
        }
        int k = g_->free_rank;
        std::vector<int> gen_order(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) gen_order[static_cast<std::size_t>(i)] = i;
        std::sort(gen_order.begin(), gen_order.end());
        do {
            for (int signs = 0; signs < (1 << k); ++signs) {
                std::vector<int> perm(static_cast<std::size_t>(2 * k));
                for (int i = 0; i < k; ++i) {
                    int target = gen_order[static_cast<std::size_t>(i)];
                    bool flip = (signs >> i) & 1;
                    perm[static_cast<std::size_t>(2 * i)] = 2 * target + (flip ? 2 : 1);
                    perm[static_cast<std::size_t>(2 * i) + 1] = 2 * target + (flip ? 1 : 2);
                }
                signed_perms_.push_back(std::move(perm));
            }
        } while (std::next_permutation(gen_order.begin(), gen_order.end()));
        return signed_perms_;
    }

    std::vector<int> label_word(Vertex v) const {
        if (g_->kind == SourceKind::FreeGroup)
            return cayley::decode_word(g_->label[v], 2 * g_->free_rank + 1);
        // line: offset encoded with bias 2^31; letter 1 = +1, letter 2 = -1
        std::int64_t off = static_cast<std::int64_t>(g_->label[v]) - (1ll << 31);
        std::vector<int> w(static_cast<std::size_t>(off < 0 ? -off : off), off < 0 ? 2 : 1);
        return w;
    }

    Vertex apply_cayley(const GroupElement& a, Vertex x) const {
        auto moved = cayley::reduce_concat(a.word, apply_perm(a.perm, label_word(x)));
        std::uint64_t lab;
        if (g_->kind == SourceKind::FreeGroup) {
            lab = cayley::encode_word(moved, 2 * g_->free_rank + 1);
        } else {
            std::int64_t off = 0;
            for (int letter : moved) off += (letter == 1) ? 1 : -1;
            lab = static_cast<std::uint64_t>(off + (1ll << 31));
        }
        auto it = g_->label_index.find(lab);
        return it == g_->label_index.end() ? kNoVertex : it->second;
    }

    std::optional<std::vector<Vertex>> materialize_cayley(const GroupElement& a) const {
        std::vector<Vertex> img(g_->size(), kNoVertex);
        for (Vertex x = 0; x < g_->size(); ++x) img[x] = apply_cayley(a, x);
        return img;
    }

    GroupElement generator_power(int idx, int exponent) const {
        if (g_->kind == SourceKind::Tiling) {
            GroupElement e;
            e.kind = GroupElement::Kind::PlanarGerm;
            e.src_v = e.dst_v = g_->base;
            e.src_i = e.dst_i = 0;
            if (idx == 0) {  // r: rotation at the base vertex by one slot per power
                int q = g_->tiling_q;
                e.dst_i = ((exponent % q) + q) % q;
                return e;
            }
            // s: half turn about the midpoint of the first base edge
            GroupElement s;
            s.kind = GroupElement::Kind::PlanarGerm;
            s.src_v = g_->base;
            s.src_i = 0;
            s.dst_v = g_->adj[g_->base].empty() ? g_->base : g_->adj[g_->base][0];
            s.dst_i = 0;
            if (exponent % 2 == 0) return e;
            return s;
        }
        GroupElement e;
        e.kind = GroupElement::Kind::CayleyWord;
        int letter = 2 * idx + 1 + (exponent < 0 ? 1 : 0);
        e.word.assign(static_cast<std::size_t>(exponent < 0 ? -exponent : exponent), letter);
        return e;
    }

    // Transports the dart (v, i) through a planar germ; nullopt if unreachable.
    std::optional<std::pair<Vertex, int>> transport_flag(const GroupElement& a, Vertex v, int i) const {
        std::vector<Vertex> targets = {v};
        std::vector<int> off_a, off_b;
        auto img = transport_all(a, &targets, &off_a, &off_b);
        if (!img || (*img)[v] == kNoVertex) return std::nullopt;
        int q = g_->degree;
        int j = ((off_b[v] + (i - off_a[v])) % q + q) % q;
        if (j >= static_cast<int>(g_->adj[(*img)[v]].size())) {
            // The dart exists at the source but not at the image (rim). The flag
            // cannot be transported.
            return std::nullopt;
        }
        return std::make_pair((*img)[v], j);
    }

    // Rotation transport from the germ's anchor. Adjacency lists are prefixes
    // of the full rotation, so dart indices are valid modulo the full degree.
    std::optional<std::vector<Vertex>> transport_all(const GroupElement& a,
                                                     const std::vector<Vertex>* targets,
                                                     std::vector<int>* off_a_out = nullptr,
                                                     std::vector<int>* off_b_out = nullptr) const {
        const LayeredGraph& g = *g_;
        const int q = g.degree;
        std::vector<Vertex> img(g.size(), kNoVertex);
        std::vector<int> off_a(g.size(), 0), off_b(g.size(), 0);
        if (a.src_i >= static_cast<int>(g.adj[a.src_v].size()) ||
            a.dst_i >= static_cast<int>(g.adj[a.dst_v].size()))
            return std::nullopt;

        std::size_t remaining = 0;
        std::vector<char> wanted;
        if (targets) {
            wanted.assign(g.size(), 0);
            for (Vertex t : *targets)
                if (t < g.size() && !wanted[t]) {
                    wanted[t] = 1;
                    ++remaining;
                }
        }

        std::vector<Vertex> queue;
        img[a.src_v] = a.dst_v;
        off_a[a.src_v] = a.src_i;
        off_b[a.src_v] = a.dst_i;
        queue.push_back(a.src_v);
        if (targets && wanted[a.src_v]) --remaining;

        for (std::size_t head = 0; head < queue.size(); ++head) {
            if (targets && remaining == 0) break;
            Vertex u = queue[head];
            Vertex u2 = img[u];
            const auto& ru = g.adj[u];
            const auto& ru2 = g.adj[u2];
            for (int j = 0; j < static_cast<int>(ru.size()); ++j) {
                int j2 = ((off_b[u] + (j - off_a[u])) % q + q) % q;
                if (j2 >= static_cast<int>(ru2.size())) continue;
                Vertex v = ru[j];
                Vertex v2 = ru2[j2];
                int i = g.rot_index(v, u);
                int i2 = g.rot_index(v2, u2);
                if (img[v] == kNoVertex) {
                    img[v] = v2;
                    off_a[v] = i;
                    off_b[v] = i2;
                    queue.push_back(v);
                    if (targets && wanted[v] && --remaining == 0 && !off_a_out) break;
                } else {
                    if (img[v] != v2) return std::nullopt;
                    int d1 = ((i - off_a[v]) % q + q) % q;
                    int d2 = ((i2 - off_b[v]) % q + q) % q;
                    if (d1 != d2) return std::nullopt;
                }
            }
        }
        if (off_a_out) *off_a_out = std::move(off_a);
        if (off_b_out) *off_b_out = std::move(off_b);
        return img;
    }

    const LayeredGraph* g_;
    bool available_ = false;
    std::vector<std::string> names_;
    mutable std::vector<std::vector<int>> signed_perms_;
};

}  // namespace horotree
