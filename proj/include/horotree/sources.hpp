#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "horotree/core.hpp"
#include "horotree/graph.hpp"

namespace horotree {

// ---------------------------------------------------------------------------
// Order-q square tiling of the hyperbolic plane (Schlaefli {4,q}, q >= 5).
//
// Grown layer by layer. The graph is bipartite and every square face is a
// diamond: one vertex at layer n, two at n+1, one at n+2. Vertices at layer
// n >= 1 have one predecessor (grown between corners) or two (corners, the
// tops of diamonds). Boundary of each layer is kept as a cyclic list in
// counterclockwise order; consecutive boundary vertices share a diamond.
//
// Rotation conventions (counterclockwise, faces close under the walk rule
// next(u->v) = predecessor of (v->u) in the rotation at v):
//   base:            [children in boundary order]
//   one predecessor: [down, corner_left, mids..., corner_right]
//   two predecessors:[right_down, left_down, corner_left, mids..., corner_right]
// Partial rotations at the rim are prefixes of the full rotation.
// ---------------------------------------------------------------------------
inline LayeredGraph build_tiling_ball(int p, int q, int radius) {
    if (p != 4) fail_input("tiling source: only square tilings (p=4) are built in");
    if (q < 5) fail_input("tiling source: need q >= 5 for a hyperbolic tiling");
    if (radius < 0) fail_input("tiling source: negative radius");

    LayeredGraph g;
    g.kind = SourceKind::Tiling;
    g.radius = radius;
    g.tiling_q = q;
    g.degree = q;
    g.cert_margin = 1;
    g.planar_rotation = true;
    g.base = 0;
    g.sphere.assign(static_cast<std::size_t>(radius) + 1, {});

    auto new_vertex = [&](int layer) -> Vertex {
        Vertex v = static_cast<Vertex>(g.adj.size());
        g.adj.emplace_back();
        g.layer.push_back(layer);
        g.label.push_back(v);
        g.sphere[static_cast<std::size_t>(layer)].push_back(v);
        return v;
    };

    Vertex base = new_vertex(0);
    if (radius == 0) return g;

    struct BoundaryVertex {
        Vertex v;
        int mids;  // number of fresh (single-predecessor) children to create
    };

    std::vector<BoundaryVertex> boundary;
    for (int i = 0; i < q; ++i) {
        Vertex v = new_vertex(1);
        g.adj[base].push_back(v);
        g.adj[v].push_back(base);
        boundary.push_back({v, q - 3});
    }

    for (int n = 1; n < radius; ++n) {
        const std::size_t m = boundary.size();
        // Corner over each cyclically consecutive pair (i, i+1).
        std::vector<Vertex> corner(m);
        for (std::size_t i = 0; i < m; ++i) {
            Vertex c = new_vertex(n + 1);
            Vertex left = boundary[i].v;
            Vertex right = boundary[(i + 1) % m].v;
            g.adj[c].push_back(right);  // right_down first, then left_down
            g.adj[c].push_back(left);
            corner[i] = c;
        }
        std::vector<BoundaryVertex> next;
        next.reserve(m * 3);
        for (std::size_t i = 0; i < m; ++i) {
            Vertex v = boundary[i].v;
            Vertex cl = corner[(i + m - 1) % m];
            Vertex cr = corner[i];
            g.adj[v].push_back(cl);
            std::vector<Vertex> mids(static_cast<std::size_t>(boundary[i].mids));
            for (auto& mid : mids) {
                mid = new_vertex(n + 1);
                g.adj[mid].push_back(v);
                g.adj[v].push_back(mid);
            }
            g.adj[v].push_back(cr);
            for (Vertex mid : mids) next.push_back({mid, q - 3});
            next.push_back({cr, q - 4});
        }
        boundary.swap(next);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Cayley graphs of free groups and of Z (the line graph). Vertices are
// reduced words, encoded little-endian in base (2*rank + 1) with letters
// 1..2*rank; letter 2i / 2i+1 are a generator and its inverse.
// ---------------------------------------------------------------------------
namespace cayley {

inline int letter_inverse(int letter) { return ((letter - 1) ^ 1) + 1; }

inline std::vector<int> decode_word(std::uint64_t label, int base) {
    std::vector<int> w;
    while (label != 0) {
        w.push_back(static_cast<int>(label % base));
        label /= base;
    }
    return w;
}

inline std::uint64_t encode_word(const std::vector<int>& w, int base) {
    std::uint64_t label = 0;
    for (std::size_t i = w.size(); i-- > 0;) label = label * base + static_cast<std::uint64_t>(w[i]);
    return label;
}

// Reduced concatenation: the word u followed by the word v.
inline std::vector<int> reduce_concat(const std::vector<int>& u, const std::vector<int>& v) {
    std::vector<int> out = u;
    for (int letter : v) {
        if (!out.empty() && out.back() == letter_inverse(letter))
            out.pop_back();
        else
            out.push_back(letter);
    }
    return out;
}

inline std::vector<int> invert_word(const std::vector<int>& w) {
    std::vector<int> out;
    out.reserve(w.size());
    for (std::size_t i = w.size(); i-- > 0;) out.push_back(letter_inverse(w[i]));
    return out;
}

}  // namespace cayley

inline LayeredGraph build_free_ball(int rank, int radius) {
    if (rank < 1 || rank > 6) fail_input("free source: rank must be in 1..6");
    if (radius < 0) fail_input("free source: negative radius");
    const int base = 2 * rank + 1;
    {
        double cap = 1.0;
        for (int i = 0; i < radius; ++i) cap *= base;
        if (cap > 1e18) fail_input("free source: radius too large for word labels");
    }

    LayeredGraph g;
    g.kind = SourceKind::FreeGroup;
    g.radius = radius;
    g.free_rank = rank;
    g.degree = 2 * rank;
    g.cert_margin = 0;  // geodesics in a tree never leave the spanned ball
    g.base = 0;
    g.sphere.assign(static_cast<std::size_t>(radius) + 1, {});

    auto add_vertex = [&](std::uint64_t label, int layer) -> Vertex {
        Vertex v = static_cast<Vertex>(g.adj.size());
        g.adj.emplace_back();
        g.layer.push_back(layer);
        g.label.push_back(label);
        g.label_index.emplace(label, v);
        g.sphere[static_cast<std::size_t>(layer)].push_back(v);
        return v;
    };

    add_vertex(0, 0);
    std::vector<Vertex> frontier = {0};
    for (int n = 0; n < radius; ++n) {
        std::vector<Vertex> next;
        for (Vertex v : frontier) {
            auto word = cayley::decode_word(g.label[v], base);
            for (int letter = 1; letter <= 2 * rank; ++letter) {
                if (!word.empty() && word.back() == cayley::letter_inverse(letter)) continue;
                word.push_back(letter);
                Vertex w = add_vertex(cayley::encode_word(word, base), n + 1);
                word.pop_back();
                g.adj[v].push_back(w);
                g.adj[w].push_back(v);
                next.push_back(w);
            }
        }
        frontier.swap(next);
    }
    return g;
}

inline LayeredGraph build_line_ball(int radius) {
    if (radius < 0) fail_input("line source: negative radius");
    LayeredGraph g;
    g.kind = SourceKind::Line;
    g.radius = radius;
    g.degree = 2;
    g.cert_margin = 0;
    g.base = 0;
    g.sphere.assign(static_cast<std::size_t>(radius) + 1, {});

    auto offset_label = [](int off) {
        return static_cast<std::uint64_t>(static_cast<std::int64_t>(off) + (1ll << 31));
    };
    auto add_vertex = [&](int off) -> Vertex {
        Vertex v = static_cast<Vertex>(g.adj.size());
        g.adj.emplace_back();
        g.layer.push_back(off < 0 ? -off : off);
        g.label.push_back(offset_label(off));
        g.label_index.emplace(g.label.back(), v);
        g.sphere[static_cast<std::size_t>(g.layer.back())].push_back(v);
        return v;
    };

    add_vertex(0);
    for (int n = 1; n <= radius; ++n) {
        Vertex pos = add_vertex(n);
        Vertex neg = add_vertex(-n);
        Vertex prev_pos = g.label_index.at(offset_label(n - 1));
        Vertex prev_neg = g.label_index.at(offset_label(-(n - 1)));
        g.adj[pos].push_back(prev_pos);
        g.adj[prev_pos].push_back(pos);
        g.adj[neg].push_back(prev_neg);
        g.adj[prev_neg].push_back(neg);
    }
    return g;
}

// Line-oriented file source: `base <id>` header, then `edge <id> <id>` lines.
inline LayeredGraph build_file_ball(std::istream& in, int radius, int cert_margin) {
    std::uint64_t base_label = 0;
    bool have_base = false;
    std::map<std::uint64_t, std::vector<std::uint64_t>> edges;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag[0] == '#') continue;
        if (tag == "base") {
            if (!(ls >> base_label)) fail_input("file source: malformed base line " + std::to_string(lineno));
            have_base = true;
        } else if (tag == "edge") {
            std::uint64_t a, b;
            if (!(ls >> a >> b)) fail_input("file source: malformed edge line " + std::to_string(lineno));
            if (a == b) fail_input("file source: self-loop at line " + std::to_string(lineno));
            edges[a].push_back(b);
            edges[b].push_back(a);
        } else {
            fail_input("file source: unknown directive '" + tag + "' at line " + std::to_string(lineno));
        }
    }
    if (!have_base) fail_input("file source: missing base vertex");
    if (!edges.count(base_label)) fail_input("file source: base vertex has no edges");

    // BFS layering from the base, keeping vertices within the radius.
    LayeredGraph g;
    g.kind = SourceKind::File;
    g.radius = radius;
    g.cert_margin = cert_margin;
    g.base = 0;
    g.sphere.assign(static_cast<std::size_t>(radius) + 1, {});

    std::map<std::uint64_t, Vertex> id_of;
    auto add_vertex = [&](std::uint64_t label, int layer) -> Vertex {
        Vertex v = static_cast<Vertex>(g.adj.size());
        g.adj.emplace_back();
        g.layer.push_back(layer);
        g.label.push_back(label);
        g.label_index.emplace(label, v);
        g.sphere[static_cast<std::size_t>(layer)].push_back(v);
        id_of[label] = v;
        return v;
    };

    add_vertex(base_label, 0);
    std::vector<std::uint64_t> frontier = {base_label};
    for (int n = 0; n < radius; ++n) {
        std::vector<std::uint64_t> next;
        for (auto ulab : frontier) {
            for (auto wlab : edges[ulab]) {
                if (!id_of.count(wlab)) {
                    add_vertex(wlab, n + 1);
                    next.push_back(wlab);
                }
            }
        }
        frontier.swap(next);
    }
    // Induced edges among retained vertices, deduplicated.
    for (auto& [ulab, nbrs] : edges) {
        auto uit = id_of.find(ulab);
        if (uit == id_of.end()) continue;
        std::vector<std::uint64_t> uniq = nbrs;
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        if (uniq.size() != nbrs.size()) fail_input("file source: duplicate edge");
        for (auto wlab : uniq) {
            auto wit = id_of.find(wlab);
            if (wit == id_of.end()) continue;
            if (uit->second < wit->second) {
                g.adj[uit->second].push_back(wit->second);
                g.adj[wit->second].push_back(uit->second);
            }
        }
    }
    return g;
}

// Source spec strings: "tiling:<p>,<q>", "free:<rank>", "line".
struct SourceSpec {
    SourceKind kind = SourceKind::Tiling;
    int p = 4, q = 5;
    int rank = 2;
    std::string path;
};

inline SourceSpec parse_source_spec(const std::string& s) {
    SourceSpec spec;
    if (s.rfind("tiling:", 0) == 0) {
        spec.kind = SourceKind::Tiling;
        if (std::sscanf(s.c_str() + 7, "%d,%d", &spec.p, &spec.q) != 2)
            fail_input("bad tiling spec '" + s + "' (expected tiling:<p>,<q>)");
    } else if (s.rfind("free:", 0) == 0) {
        spec.kind = SourceKind::FreeGroup;
        if (std::sscanf(s.c_str() + 5, "%d", &spec.rank) != 1)
            fail_input("bad free spec '" + s + "' (expected free:<rank>)");
    } else if (s == "line") {
        spec.kind = SourceKind::Line;
    } else if (s.rfind("file:", 0) == 0) {
        spec.kind = SourceKind::File;
        spec.path = s.substr(5);
    } else {
        fail_input("unknown source spec '" + s + "'");
    }
    return spec;
}

}  // namespace horotree
