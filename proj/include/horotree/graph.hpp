#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <unordered_map>
#include <vector>

#include "horotree/core.hpp"

namespace horotree {

enum class SourceKind { Tiling, FreeGroup, Line, File };

// Finite ball of radius R around a base vertex. Vertices carry their length
// (distance to the base); every vertex with length < R is neighbor-complete.
// For planar tiling sources, adjacency lists are in counterclockwise rotation
// order and partial lists are prefixes of the full rotation.
struct LayeredGraph {
    SourceKind kind = SourceKind::File;
    int radius = 0;
    int tiling_q = 0;
    int free_rank = 0;
    int degree = 0;           // full degree for homogeneous sources, 0 otherwise
    int cert_margin = 1;      // geodesic bulge bound used by the margin rule
    bool planar_rotation = false;
    Vertex base = 0;
    std::vector<int> layer;
    std::vector<std::vector<Vertex>> adj;
    std::vector<std::vector<Vertex>> sphere;  // sphere[n] = S_n, ascending ids
    std::vector<std::uint64_t> label;         // source labels (words for Cayley sources)
    std::unordered_map<std::uint64_t, Vertex> label_index;

    std::size_t size() const { return adj.size(); }

    const std::vector<Vertex>& sphere_at(int n) const {
        static const std::vector<Vertex> empty;
        if (n < 0 || n > radius) return empty;
        return sphere[static_cast<std::size_t>(n)];
    }

    std::size_t ball_size(int n) const {
        std::size_t c = 0;
        for (int m = 0; m <= n && m <= radius; ++m) c += sphere[static_cast<std::size_t>(m)].size();
        return c;
    }

    // Vertices of B_n in ascending id order.
    std::vector<Vertex> ball_vertices(int n) const {
        std::vector<Vertex> out;
        out.reserve(ball_size(n));
        for (Vertex v = 0; v < size(); ++v)
            if (layer[v] <= n) out.push_back(v);
        return out;
    }

    int rot_index(Vertex v, Vertex nbr) const {
        const auto& a = adj[v];
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] == nbr) return static_cast<int>(i);
        return -1;
    }

    // Highest layer whose vertices still have certified distances to the
    // whole ball under the bulge rule.
    int certified_limit() const { return radius - cert_margin; }
};

inline void bfs_fill(const LayeredGraph& g, Vertex src, std::vector<std::uint16_t>& dist,
                     int max_depth = -1) {
    dist.assign(g.size(), kUnreached);
    std::vector<Vertex> queue;
    queue.reserve(g.size());
    dist[src] = 0;
    queue.push_back(src);
    for (std::size_t head = 0; head < queue.size(); ++head) {
        Vertex u = queue[head];
        std::uint16_t du = dist[u];
        if (max_depth >= 0 && du >= max_depth) continue;
        for (Vertex w : g.adj[u]) {
            if (dist[w] == kUnreached) {
                dist[w] = static_cast<std::uint16_t>(du + 1);
                queue.push_back(w);
            }
        }
    }
}

inline std::vector<std::uint16_t> bfs_distances(const LayeredGraph& g, Vertex src,
                                                int max_depth = -1) {
    std::vector<std::uint16_t> dist;
    bfs_fill(g, src, dist, max_depth);
    return dist;
}

struct Distance {
    int value = -1;
    bool certified = false;
};

// Margin rule: an in-ball distance is globally correct when either every
// escaping path is provably longer (slack rule) or thin triangles confine
// every geodesic to the ball (bulge rule, max layer + margin <= R).
inline bool pair_certified(const LayeredGraph& g, Vertex x, Vertex y, int in_ball_dist) {
    int lx = g.layer[x], ly = g.layer[y];
    if (std::max(lx, ly) + g.cert_margin <= g.radius) return true;
    return in_ball_dist + lx + ly <= 2 * g.radius;
}

inline Distance distance(const LayeredGraph& g, Vertex x, Vertex y) {
    if (x >= g.size() || y >= g.size()) fail_input("distance: vertex out of range");
    std::vector<std::uint16_t> dist;
    bfs_fill(g, x, dist);
    if (dist[y] == kUnreached) fail_input("distance: vertices not connected inside the ball");
    Distance d;
    d.value = dist[y];
    d.certified = pair_certified(g, x, y, d.value);
    return d;
}

// Cone on x truncated at depth k: vertices y with l(y) = l(x) + d(x,y), d <= k.
inline std::vector<Vertex> cone(const LayeredGraph& g, Vertex x, int depth) {
    if (depth < 0) fail_input("cone: negative depth");
    if (g.layer[x] + depth > g.radius) fail_radius("cone: depth overruns ball radius");
    if (g.layer[x] + depth + g.cert_margin > g.radius)
        fail_radius("cone: depth overruns certified region");
    std::vector<std::uint16_t> dist;
    bfs_fill(g, x, dist, depth);
    std::vector<Vertex> out;
    for (Vertex v = 0; v < g.size(); ++v)
        if (dist[v] != kUnreached && g.layer[v] == g.layer[x] + dist[v]) out.push_back(v);
    return out;
}

// Canonical fingerprint of the truncated cone: iterated neighborhood-hash of
// the induced subgraph, seeded with distances from the root. Equal for cones
// related by a layer-respecting isomorphism.
inline std::uint64_t cone_signature(const LayeredGraph& g, Vertex x, int depth) {
    std::vector<Vertex> c = cone(g, x, depth);
    std::vector<std::uint16_t> dist;
    bfs_fill(g, x, dist, depth);
    std::unordered_map<Vertex, int> pos;
    pos.reserve(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) pos[c[i]] = static_cast<int>(i);
    std::vector<std::uint64_t> color(c.size()), next(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) color[i] = mix64(dist[c[i]] + 1);
    std::vector<std::uint64_t> nb;
    for (int round = 0; round < depth + 2; ++round) {
        for (std::size_t i = 0; i < c.size(); ++i) {
            nb.clear();
            for (Vertex w : g.adj[c[i]]) {
                auto it = pos.find(w);
                if (it != pos.end()) nb.push_back(color[it->second]);
            }
            std::sort(nb.begin(), nb.end());
            std::uint64_t h = hash_combine(color[i], 0x5bd1e995u);
            for (auto v : nb) h = hash_combine(h, v);
            next[i] = h;
        }
        color.swap(next);
    }
    std::vector<std::uint64_t> all = color;
    std::sort(all.begin(), all.end());
    std::uint64_t sig = hash_combine(mix64(c.size()), mix64(static_cast<std::uint64_t>(depth)));
    for (auto v : all) sig = hash_combine(sig, v);
    return sig;
}

// Least delta such that every geodesic triangle with vertices in B_max_radius
// is delta-thin. Exhaustive over enumerated geodesics; a lower bound for the
// graph as a whole. Geodesics between B_max_radius vertices live in
// B_{max_radius + cert_margin}, which must fit in the certified ball.
inline int estimate_delta(const LayeredGraph& g, int max_radius,
                          const std::function<void(int, int)>& progress = {}) {
    if (max_radius < 0) fail_input("estimate_delta: negative radius");
    int work_radius = max_radius + g.cert_margin;
    if (work_radius > g.radius) fail_radius("estimate_delta: max_radius too close to ball radius");

    std::vector<Vertex> verts;       // triangle vertices: B_max_radius
    std::vector<Vertex> work_verts;  // geodesic support: B_work_radius
    for (Vertex v = 0; v < g.size(); ++v) {
        if (g.layer[v] <= max_radius) verts.push_back(v);
        if (g.layer[v] <= work_radius) work_verts.push_back(v);
    }
    std::unordered_map<Vertex, int> wpos;
    for (std::size_t i = 0; i < work_verts.size(); ++i) wpos[work_verts[i]] = static_cast<int>(i);
    std::unordered_map<Vertex, int> vpos;
    for (std::size_t i = 0; i < verts.size(); ++i) vpos[verts[i]] = static_cast<int>(i);
    const int W = static_cast<int>(work_verts.size());
    const int V = static_cast<int>(verts.size());
    if (static_cast<std::size_t>(W) * V * V > (std::size_t(1) << 28))
        fail_input("estimate_delta: max_radius too large for exhaustive search");

    // All-pairs distances on the work ball (rows over full graph, columns used within).
    std::vector<std::vector<std::uint16_t>> rows(W);
    for (int i = 0; i < W; ++i) bfs_fill(g, work_verts[i], rows[i]);
    auto d = [&](Vertex a, Vertex b) -> int { return rows[wpos.at(a)][b]; };

    // widest(v; a, b) = max over geodesics [a,b] of min over path vertices of d(v, .).
    // DP over the geodesic DAG in order of distance from a.
    std::vector<std::int16_t> memo(static_cast<std::size_t>(W) * V * V, -1);
    std::vector<int> order;
    std::vector<int> best(W);
    auto widest = [&](Vertex v, Vertex a, Vertex b) -> int {
        std::size_t key = (static_cast<std::size_t>(wpos.at(v)) * V + vpos.at(a)) * V + vpos.at(b);
        if (memo[key] >= 0) return memo[key];
        int dab = d(a, b);
        order.clear();
        for (int i = 0; i < W; ++i) {
            Vertex w = work_verts[i];
            if (d(a, w) + d(w, b) == dab) order.push_back(i);
        }
        std::sort(order.begin(), order.end(),
                  [&](int i, int j) { return d(a, work_verts[i]) < d(a, work_verts[j]); });
        for (int i : order) best[i] = -1;
        for (int i : order) {
            Vertex w = work_verts[i];
            int da = d(a, w);
            int incoming = -1;
            if (da == 0) {
                incoming = 1 << 14;
            } else {
                for (Vertex u : g.adj[w]) {
                    auto it = wpos.find(u);
                    if (it == wpos.end()) continue;
                    if (d(a, u) == da - 1 && d(a, u) + 1 + d(w, b) == dab)
                        incoming = std::max(incoming, best[it->second]);
                }
            }
            best[i] = std::min(incoming, d(v, w));
        }
        int res = 0;
        for (int i : order)
            if (d(a, work_verts[i]) == dab && work_verts[i] == b) res = best[i];
        memo[key] = static_cast<std::int16_t>(res);
        return res;
    };

    int delta = 0;
    for (int ia = 0; ia < V; ++ia) {
        if (progress) progress(ia, V);
        for (int ib = ia + 1; ib < V; ++ib) {
            for (int ic = ib + 1; ic < V; ++ic) {
                Vertex a = verts[ia], b = verts[ib], c = verts[ic];
                // v ranges over vertices on some geodesic [a,b]; by symmetry over all three sides.
                struct Side { Vertex p, q, r, s; };
                const Side sides[3] = {{a, b, a, c}, {a, c, a, b}, {b, c, b, a}};
                for (const auto& sd : sides) {
                    Vertex p = sd.p, q = sd.q;
                    int dpq = d(p, q);
                    Vertex o1 = sd.r == p ? sd.s : sd.r;  // the third vertex
                    for (int i = 0; i < W; ++i) {
                        Vertex v = work_verts[i];
                        if (d(p, v) + d(v, q) != dpq) continue;
                        int m1 = widest(v, p, o1);
                        int m2 = widest(v, q, o1);
                        delta = std::max(delta, std::min(m1, m2));
                    }
                }
            }
        }
    }
    return delta;
}

}  // namespace horotree
