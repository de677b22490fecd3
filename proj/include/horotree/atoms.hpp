#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "horotree/core.hpp"
#include "horotree/graph.hpp"

namespace horotree {

// An atom of A(B_n): a class of certified vertices sharing a distance profile
// on B_n up to an additive constant. Profiles are stored normalized (min 0)
// over the vertices of B_n in ascending id order.
struct Atom {
    int level = 0;
    int index = -1;
    bool infinite = false;
    int parent = -1;
    std::vector<Vertex> members;  // ascending id; only vertices with certified profiles
    Vertex rep = kNoVertex;       // member minimizing (layer, id)
    std::vector<int> profile;     // over B_level positions; empty until computed
    std::vector<int> nearest;     // positions in B_level where the profile is 0
    std::vector<int> child_atoms;  // infinite children (indices at level+1)
};

struct AtomLevel {
    std::vector<Atom> atoms;
    std::vector<int> atom_of;  // per ball vertex: atom index, or -1 outside the certified set
    int infinite_count = 0;
};

struct AtomTree {
    const LayeredGraph* graph = nullptr;
    int depth = 0;
    int horizon = 0;
    int cert_limit = 0;
    std::vector<AtomLevel> levels;

    // B_depth bookkeeping: vertices in ascending id order and pairwise distances.
    std::vector<Vertex> core;
    std::vector<int> core_pos;  // per ball vertex: index into core, or -1
    std::vector<std::uint16_t> core_dist;  // core x core, row-major

    int core_distance(Vertex a, Vertex b) const {
        return core_dist[static_cast<std::size_t>(core_pos[a]) * core.size() +
                         static_cast<std::size_t>(core_pos[b])];
    }

    // Vertices of B_n (prefix of core by layer filter), ascending ids.
    std::vector<Vertex> ball_of_level(int n) const {
        std::vector<Vertex> out;
        for (Vertex v : core)
            if (graph->layer[v] <= n) out.push_back(v);
        return out;
    }

    const Atom& atom(int level, int index) const { return levels[level].atoms[index]; }
    Atom& atom(int level, int index) { return levels[level].atoms[index]; }

    int atom_index_of(int level, Vertex x) const { return levels[level].atom_of[x]; }

    // Ancestor of a tree atom at an earlier level.
    int ancestor(int level, int index, int at_level) const {
        int cur = index;
        for (int n = level; n > at_level; --n) cur = levels[n].atoms[cur].parent;
        return cur;
    }
};

namespace detail {

// Profile of an atom from a bounded BFS at its representative. The rep is the
// shallowest member, so the search stays near the atom's tip.
inline void compute_profile(const LayeredGraph& g, const AtomTree& tree, Atom& a) {
    if (!a.profile.empty() || a.rep == kNoVertex) return;
    std::vector<Vertex> bn = tree.ball_of_level(a.level);
    std::vector<std::uint16_t> dist;
    bfs_fill(g, a.rep, dist);
    int mn = 1 << 30;
    a.profile.resize(bn.size());
    for (std::size_t i = 0; i < bn.size(); ++i) {
        if (dist[bn[i]] == kUnreached) fail_radius("atom profile: ball not connected");
        a.profile[i] = dist[bn[i]];
        mn = std::min(mn, a.profile[i]);
    }
    for (auto& v : a.profile) v -= mn;
    a.nearest.clear();
    for (std::size_t i = 0; i < bn.size(); ++i)
        if (a.profile[i] == 0) a.nearest.push_back(static_cast<int>(i));
}

}  // namespace detail

// Partition all certified vertices of the ball into atoms per level 0..depth,
// flag infinite atoms through the horizon heuristic (audited at H and H+1),
// and assemble the tree of infinite atoms with containment links.
inline AtomTree build_atom_tree(const LayeredGraph& g, int depth, int horizon) {
    if (depth < 0 || horizon < 1) fail_input("build_atom_tree: need depth >= 0, horizon >= 1");
    AtomTree tree;
    tree.graph = &g;
    tree.depth = depth;
    tree.horizon = horizon;
    tree.cert_limit = g.certified_limit();
    if (depth + horizon + 1 > tree.cert_limit)
        fail_radius("build_atom_tree: radius too small (need R >= depth + horizon + 1 + margin)");

    const std::size_t V = g.size();
    tree.core = g.ball_vertices(depth);
    tree.core_pos.assign(V, -1);
    for (std::size_t i = 0; i < tree.core.size(); ++i) tree.core_pos[tree.core[i]] = static_cast<int>(i);
    const std::size_t C = tree.core.size();
    tree.core_dist.assign(C * C, 0);

    std::vector<int> part(V, -1);
    for (Vertex v = 0; v < V; ++v)
        if (g.layer[v] <= tree.cert_limit) part[v] = 0;

    tree.levels.resize(static_cast<std::size_t>(depth) + 1);

    // Base row of the pairwise core table: d(x0, b) = layer(b).
    {
        int p0 = tree.core_pos[g.base];
        for (std::size_t j = 0; j < C; ++j) {
            tree.core_dist[static_cast<std::size_t>(p0) * C + j] =
                static_cast<std::uint16_t>(g.layer[tree.core[j]]);
            tree.core_dist[j * C + static_cast<std::size_t>(p0)] =
                static_cast<std::uint16_t>(g.layer[tree.core[j]]);
        }
    }

    std::vector<std::uint16_t> row;
    const int offset_span = 2 * g.radius + 1;
    std::vector<int> table_val, table_epoch, new_part(V);
    int epoch = 0;
    int parts = 1;

    for (int n = 0; n <= depth; ++n) {
        if (n > 0) {
            for (Vertex s : g.sphere_at(n)) {
                bfs_fill(g, s, row);
                int sp = tree.core_pos[s];
                for (std::size_t j = 0; j < C; ++j)
                    tree.core_dist[static_cast<std::size_t>(sp) * C + j] = row[tree.core[j]];
                // Refine the partition by the normalized value d(s,x) - l(x).
                std::size_t need = static_cast<std::size_t>(parts) * offset_span;
                if (table_val.size() < need) {
                    table_val.resize(need);
                    table_epoch.resize(need, 0);
                }
                ++epoch;
                int next_parts = 0;
                for (Vertex x = 0; x < V; ++x) {
                    if (part[x] < 0) continue;
                    std::size_t idx = static_cast<std::size_t>(part[x]) * offset_span +
                                      (row[x] - g.layer[x] + g.radius);
                    if (table_epoch[idx] != epoch) {
                        table_epoch[idx] = epoch;
                        table_val[idx] = next_parts++;
                    }
                    new_part[x] = table_val[idx];
                }
                for (Vertex x = 0; x < V; ++x)
                    if (part[x] >= 0) part[x] = new_part[x];
                parts = next_parts;
            }
        }

        AtomLevel& lv = tree.levels[static_cast<std::size_t>(n)];
        lv.atom_of.assign(V, -1);
        lv.atoms.assign(static_cast<std::size_t>(parts), Atom{});
        for (Vertex x = 0; x < V; ++x) {
            if (part[x] < 0) continue;
            Atom& a = lv.atoms[static_cast<std::size_t>(part[x])];
            a.members.push_back(x);
            lv.atom_of[x] = part[x];
        }
        for (int i = 0; i < parts; ++i) {
            Atom& a = lv.atoms[static_cast<std::size_t>(i)];
            a.level = n;
            a.index = i;
            a.rep = a.members.front();
            for (Vertex m : a.members)
                if (g.layer[m] < g.layer[a.rep]) a.rep = m;
            bool inf_h = false, inf_h1 = false;
            for (Vertex m : a.members) {
                if (g.layer[m] >= n + horizon) inf_h = true;
                if (g.layer[m] >= n + horizon + 1) inf_h1 = true;
            }
            if (n == 0) inf_h = inf_h1 = true;
            if (inf_h != inf_h1)
                fail_audit("infinite-flag audit: horizon " + std::to_string(horizon) + " and " +
                           std::to_string(horizon + 1) + " disagree at level " + std::to_string(n) +
                           " atom " + std::to_string(i));
            a.infinite = inf_h;
            if (a.infinite) ++lv.infinite_count;
            if (n > 0) {
                a.parent = tree.levels[static_cast<std::size_t>(n) - 1].atom_of[a.members.front()];
                if (a.infinite) {
                    Atom& pa = tree.levels[static_cast<std::size_t>(n) - 1]
                                   .atoms[static_cast<std::size_t>(a.parent)];
                    if (!pa.infinite)
                        fail_audit("refinement audit: infinite atom under a finite parent");
                    pa.child_atoms.push_back(i);
                }
            }
        }
    }

    // No dead ends below the last computed level.
    for (int n = 0; n < depth; ++n)
        for (const Atom& a : tree.levels[static_cast<std::size_t>(n)].atoms)
            if (a.infinite && a.child_atoms.empty())
                fail_audit("tree audit: infinite atom with no infinite child");

    // Profiles and nearest sets for tree atoms.
    for (int n = 0; n <= depth; ++n)
        for (Atom& a : tree.levels[static_cast<std::size_t>(n)].atoms)
            if (a.infinite) detail::compute_profile(g, tree, a);

    return tree;
}

// Normalized distance profile of a single vertex on B_n.
inline std::vector<int> vertex_profile(const LayeredGraph& g, const AtomTree& tree, Vertex x, int n) {
    if (g.layer[x] > tree.cert_limit) fail_radius("vertex_profile: vertex outside certified region");
    std::vector<Vertex> bn = tree.ball_of_level(n);
    std::vector<std::uint16_t> dist;
    bfs_fill(g, x, dist);
    std::vector<int> prof(bn.size());
    int mn = 1 << 30;
    for (std::size_t i = 0; i < bn.size(); ++i) {
        prof[i] = dist[bn[i]];
        mn = std::min(mn, prof[i]);
    }
    for (auto& v : prof) v -= mn;
    return prof;
}

inline const std::vector<int>& atom_profile(const AtomTree& tree, int level, int index) {
    Atom& a = const_cast<AtomTree&>(tree).levels[static_cast<std::size_t>(level)]
                  .atoms[static_cast<std::size_t>(index)];
    if (a.profile.empty()) detail::compute_profile(*tree.graph, tree, a);
    return a.profile;
}

// Profile along a root-to-leaf chain: the level-m profile of the chain atom.
inline std::vector<int> horofunction_profile(const AtomTree& tree, const std::vector<int>& chain,
                                             int m) {
    if (m < 0 || m >= static_cast<int>(chain.size()))
        fail_input("horofunction_profile: level exceeds chain depth");
    for (int n = 1; n <= m; ++n) {
        const Atom& a = tree.atom(n, chain[static_cast<std::size_t>(n)]);
        if (a.parent != chain[static_cast<std::size_t>(n) - 1])
            fail_input("horofunction_profile: chain is not a tree path");
    }
    return atom_profile(tree, m, chain[static_cast<std::size_t>(m)]);
}

}  // namespace horotree
