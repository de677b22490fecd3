#pragma once

#include <algorithm>
#include <vector>

#include "horotree/atoms.hpp"
#include "horotree/core.hpp"
#include "horotree/graph.hpp"

namespace horotree {

// Nearest, visible and proximal subsets of S_n for an atom, with the delta
// used for the 4*delta+2 proximity bound. All three are sorted vertex lists.
struct ProximalData {
    int level = 0;
    int atom_index = -1;
    int delta_used = 1;
    std::vector<Vertex> nearest;
    std::vector<Vertex> visible;
    std::vector<Vertex> proximal;
};

// Nearest neighbors of a vertex in B_n: for l(x) >= n these are the S_n
// vertices on geodesics from the base to x.
inline std::vector<Vertex> nearest_neighbors(const LayeredGraph& g, Vertex x, int n) {
    if (g.layer[x] > g.certified_limit())
        fail_radius("nearest_neighbors: vertex outside certified region");
    std::vector<std::uint16_t> dist;
    bfs_fill(g, x, dist);
    int best = 1 << 30;
    for (Vertex b = 0; b < g.size(); ++b)
        if (g.layer[b] <= n && dist[b] != kUnreached) best = std::min(best, static_cast<int>(dist[b]));
    std::vector<Vertex> out;
    for (Vertex b = 0; b < g.size(); ++b)
        if (g.layer[b] <= n && dist[b] == best) out.push_back(b);
    return out;
}

// Visible points of a finite set B from x: p with d(p,x) < d(p,q) + d(q,x)
// for every other q in B. Distances within B come from per-point searches.
inline std::vector<Vertex> visible(const LayeredGraph& g, Vertex x, const std::vector<Vertex>& B) {
    std::vector<std::uint16_t> dx;
    bfs_fill(g, x, dx);
    std::vector<std::vector<std::uint16_t>> rows(B.size());
    for (std::size_t i = 0; i < B.size(); ++i) bfs_fill(g, B[i], rows[i]);
    std::vector<Vertex> out;
    for (std::size_t i = 0; i < B.size(); ++i) {
        bool vis = true;
        for (std::size_t j = 0; j < B.size() && vis; ++j) {
            if (i == j) continue;
            if (dx[B[i]] >= rows[i][B[j]] + dx[B[j]]) vis = false;
        }
        if (vis) out.push_back(B[i]);
    }
    return out;
}

namespace detail {

// Visible subset of B_n computed from an atom profile: p is visible iff
// prof(p) - prof(q) < d(p,q) for every other q of B_n.
inline std::vector<Vertex> visible_from_profile(const AtomTree& tree, int n,
                                                const std::vector<Vertex>& bn,
                                                const std::vector<int>& prof) {
    std::vector<Vertex> out;
    for (std::size_t i = 0; i < bn.size(); ++i) {
        bool vis = true;
        for (std::size_t j = 0; j < bn.size() && vis; ++j) {
            if (i == j) continue;
            if (prof[i] - prof[j] >= tree.core_distance(bn[i], bn[j])) vis = false;
        }
        if (vis) out.push_back(bn[i]);
    }
    return out;
}

}  // namespace detail

// Proximal set of a tree atom, built inductively along its ancestor chain:
// level-k proximal points are successors of level-(k-1) proximal points lying
// within 4*delta+2 of every nearest neighbor at level k.
inline ProximalData proximal_set(const AtomTree& tree, int level, int index, int delta) {
    const LayeredGraph& g = *tree.graph;
    ProximalData out;
    out.level = level;
    out.atom_index = index;
    out.delta_used = delta;

    const int bound = 4 * delta + 2;
    std::vector<Vertex> prev = {g.base};
    std::vector<char> in_prev;
    for (int k = 1; k <= level; ++k) {
        int anc = tree.ancestor(level, index, k);
        const Atom& a = tree.atom(k, anc);
        atom_profile(tree, k, anc);  // materializes the ancestor's nearest set
        std::vector<Vertex> bk = tree.ball_of_level(k);
        std::vector<Vertex> nearest_k;
        for (int p : a.nearest) nearest_k.push_back(bk[static_cast<std::size_t>(p)]);

        in_prev.assign(g.size(), 0);
        for (Vertex v : prev) in_prev[v] = 1;
        std::vector<Vertex> cur;
        for (Vertex p : g.sphere_at(k)) {
            bool has_prev = false;
            for (Vertex u : g.adj[p])
                if (g.layer[u] == k - 1 && in_prev[u]) has_prev = true;
            if (!has_prev) continue;
            bool near_all = true;
            for (Vertex q : nearest_k)
                if (tree.core_distance(p, q) > bound) {
                    near_all = false;
                    break;
                }
            if (near_all) cur.push_back(p);
        }
        prev.swap(cur);
    }
    out.proximal = prev;

    const Atom& a = tree.atom(level, index);
    std::vector<Vertex> bn = tree.ball_of_level(level);
    for (int p : a.nearest) out.nearest.push_back(bn[static_cast<std::size_t>(p)]);
    out.visible = detail::visible_from_profile(tree, level, bn, atom_profile(tree, level, index));
    // Only the S_n part of the visible set participates in the chain.
    std::vector<Vertex> vis_sphere;
    for (Vertex v : out.visible)
        if (g.layer[v] == level) vis_sphere.push_back(v);
    if (level > 0) out.visible = vis_sphere;
    return out;
}

inline int set_diameter(const AtomTree& tree, const std::vector<Vertex>& s) {
    int d = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j)
            d = std::max(d, tree.core_distance(s[i], s[j]));
    return d;
}

inline bool is_subset(const std::vector<Vertex>& a, const std::vector<Vertex>& b) {
    for (Vertex v : a)
        if (!std::binary_search(b.begin(), b.end(), v)) return false;
    return true;
}

// N(x,B_n) subset of N(y,B_n) must imply P(y,S_n) subset of P(x,S_n).
// Returns true when no violation occurs for this pair.
inline bool check_monotonicity(const LayeredGraph& g, const AtomTree& tree, Vertex x, Vertex y,
                               int n) {
    auto prox_of_vertex = [&](Vertex v) {
        int idx = tree.atom_index_of(n, v);
        if (idx < 0) fail_radius("check_monotonicity: vertex not classified");
        return proximal_set(tree, n, idx, 1);
    };
    auto nx = nearest_neighbors(g, x, n);
    auto ny = nearest_neighbors(g, y, n);
    if (!is_subset(nx, ny)) return true;  // hypothesis void
    auto px = prox_of_vertex(x);
    auto py = prox_of_vertex(y);
    return is_subset(py.proximal, px.proximal);
}

// Membership test from Proposition-style data: x belongs to the atom iff it
// lies in the cone of every nearest neighbor and its profile agrees with the
// atom's on the proximal set up to a constant.
inline bool membership_test(const LayeredGraph& g, const AtomTree& tree, Vertex x, int level,
                            int index, const ProximalData& prox) {
    if (g.layer[x] > tree.cert_limit) fail_radius("membership_test: vertex not certified");
    std::vector<std::uint16_t> dx;
    bfs_fill(g, x, dx);
    for (Vertex p : prox.nearest)
        if (static_cast<int>(dx[p]) != g.layer[x] - level) return false;

    const std::vector<int>& prof = atom_profile(tree, level, index);
    std::vector<Vertex> bn = tree.ball_of_level(level);
    std::vector<int> pos(g.size(), -1);
    for (std::size_t i = 0; i < bn.size(); ++i) pos[bn[i]] = static_cast<int>(i);
    bool first = true;
    int shift = 0;
    for (Vertex p : prox.proximal) {
        int diff = static_cast<int>(dx[p]) - prof[static_cast<std::size_t>(pos[p])];
        if (first) {
            shift = diff;
            first = false;
        } else if (diff != shift) {
            return false;
        }
    }
    return true;
}

// Reconstruction identity: d(b,x) = min over p in P of d(b,p) + d(p,x),
// for any P containing V(x,B_n). Checked for every b in B_n.
inline bool reconstruction_holds(const LayeredGraph& g, const AtomTree& tree, Vertex x, int n,
                                 const std::vector<Vertex>& P) {
    std::vector<std::uint16_t> dx;
    bfs_fill(g, x, dx);
    for (Vertex b : tree.core) {
        if (g.layer[b] > n) continue;
        int direct = dx[b];
        int via = 1 << 30;
        for (Vertex p : P) via = std::min(via, tree.core_distance(b, p) + static_cast<int>(dx[p]));
        if (direct != via) return false;
    }
    return true;
}

}  // namespace horotree
