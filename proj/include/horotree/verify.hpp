#pragma once

#include <deque>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "horotree/golden.hpp"
#include "horotree/pipeline.hpp"
#include "horotree/proximal.hpp"
#include "horotree/selfsimilar.hpp"

namespace horotree {

struct VerifyReport {
    struct Item {
        std::string name;
        bool passed;
        std::string detail;
    };
    std::vector<Item> items;
    bool all_passed = true;

    void add(const std::string& name, bool ok, const std::string& detail = "") {
        items.push_back({name, ok, detail});
        if (!ok) all_passed = false;
    }
};

namespace detail {

// Independent check-side BFS (deque + map, distinct from bfs_fill).
inline int slow_distance(const LayeredGraph& g, Vertex a, Vertex b) {
    std::map<Vertex, int> dist;
    std::deque<Vertex> q;
    dist[a] = 0;
    q.push_back(a);
    while (!q.empty()) {
        Vertex u = q.front();
        q.pop_front();
        if (u == b) return dist[u];
        for (Vertex w : g.adj[u])
            if (!dist.count(w)) {
                dist[w] = dist[u] + 1;
                q.push_back(w);
            }
    }
    return -1;
}

}  // namespace detail

inline void verify_graph(const Pipeline& p, VerifyReport& rep, std::mt19937& rng) {
    const LayeredGraph& g = p.graph;
    bool layers_ok = true;
    for (Vertex v = 0; v < g.size() && layers_ok; ++v) {
        bool has_down = g.layer[v] == 0;
        for (Vertex w : g.adj[v]) {
            if (std::abs(g.layer[v] - g.layer[w]) > 1) layers_ok = false;
            if (g.layer[w] == g.layer[v] - 1) has_down = true;
        }
        if (!has_down) layers_ok = false;
    }
    rep.add("graph.layer-consistency", layers_ok);

    std::vector<Vertex> cert;
    for (Vertex v = 0; v < g.size(); ++v)
        if (g.layer[v] <= g.certified_limit()) cert.push_back(v);
    bool dist_ok = true;
    int samples = static_cast<int>(std::min<std::size_t>(300, cert.size() * 2));
    for (int t = 0; t < samples && dist_ok; ++t) {
        Vertex a = cert[rng() % cert.size()];
        Vertex b = cert[rng() % cert.size()];
        auto d = distance(g, a, b);
        if (!d.certified || d.value != detail::slow_distance(g, a, b)) dist_ok = false;
    }
    rep.add("graph.distance-vs-independent-bfs", dist_ok, std::to_string(samples) + " pairs");

    bool cone_ok = true;
    int probe = std::min<int>(2, g.certified_limit() - p.cfg.cone_depth - 1);
    if (probe >= 1) {
        for (Vertex x : g.sphere_at(probe)) {
            auto c = cone(g, x, p.cfg.cone_depth);
            std::set<Vertex> cs(c.begin(), c.end());
            if (!cs.count(x)) cone_ok = false;
            for (Vertex y : c)
                if (g.layer[y] != g.layer[x] + distance(g, x, y).value) cone_ok = false;
        }
    }
    rep.add("graph.cone-characterization", cone_ok);
}

inline void verify_group(const Pipeline& p, VerifyReport& rep, std::mt19937& rng) {
    if (!p.sym->available()) return;
    const Symmetry& sym = *p.sym;
    const LayeredGraph& g = p.graph;

    if (g.kind == SourceKind::Tiling) {
        auto id = sym.identity();
        auto r = sym.generator("r");
        auto s = sym.generator("s");
        auto r5 = sym.from_word("r^5");
        auto rs = sym.compose(r, s);
        auto rs4 = sym.compose(sym.compose(rs, rs), sym.compose(rs, rs));
        int rad = std::min(4, g.certified_limit() - 1);
        rep.add("group.relation-r5", sym.equal_on_ball(r5, id, rad));
        rep.add("group.relation-s2", sym.equal_on_ball(sym.from_word("s s"), id, rad));
        rep.add("group.relation-rs4", sym.equal_on_ball(rs4, id, rad));
        rep.add("group.stabilizer-order", sym.stabilizer_elements(g.base).size() == 5, "order 5");
    }

    // Isometry on sampled pairs under each generator.
    bool iso_ok = true;
    std::vector<std::uint16_t> row1, row2;
    for (const auto& name : sym.generator_names()) {
        auto m = sym.materialize(sym.generator(name));
        if (!m) {
            iso_ok = false;
            break;
        }
        std::vector<Vertex> dom;
        for (Vertex v = 0; v < g.size(); ++v)
            if ((*m)[v] != kNoVertex && g.layer[v] <= g.certified_limit() - 1) dom.push_back(v);
        for (int t = 0; t < 40 && iso_ok; ++t) {
            Vertex a = dom[rng() % dom.size()];
            Vertex b = dom[rng() % dom.size()];
            bfs_fill(g, a, row1);
            bfs_fill(g, (*m)[a], row2);
            if (row1[b] != row2[(*m)[b]]) iso_ok = false;
        }
    }
    rep.add("group.action-isometry", iso_ok);

    bool sub_ok = true;
    const auto& names = sym.generator_names();
    for (int t = 0; t < 200 && sub_ok; ++t) {
        GroupElement a = sym.generator(names[rng() % names.size()]);
        GroupElement b = sym.generator(names[rng() % names.size()]);
        if (rng() % 2) a = sym.compose(a, sym.generator(names[rng() % names.size()]));
        if (rng() % 2) b = sym.compose(b, sym.generator(names[rng() % names.size()]));
        try {
            if (sym.magnitude(sym.compose(a, b)) > sym.magnitude(a) + sym.magnitude(b)) sub_ok = false;
        } catch (const Error&) {
            // composed flag wandered outside the ball; skip the sample
        }
    }
    rep.add("group.magnitude-subadditive", sub_ok);
}

inline void verify_atoms(const Pipeline& p, VerifyReport& rep, std::mt19937&) {
    const LayeredGraph& g = p.graph;
    const AtomTree& tree = p.tree;

    bool partition_ok = true, refine_ok = true, singleton_ok = true, complement_ok = true;
    for (int n = 0; n <= tree.depth; ++n) {
        std::size_t total = 0;
        for (const Atom& a : tree.levels[static_cast<std::size_t>(n)].atoms) {
            total += a.members.size();
            if (n > 0) {
                int par = tree.levels[static_cast<std::size_t>(n) - 1].atom_of[a.members.front()];
                for (Vertex m : a.members)
                    if (tree.levels[static_cast<std::size_t>(n) - 1].atom_of[m] != par) refine_ok = false;
            }
            if (a.infinite && n > 0)
                for (Vertex m : a.members)
                    if (g.layer[m] < n) complement_ok = false;
        }
        std::size_t cert = 0;
        for (Vertex v = 0; v < g.size(); ++v)
            if (g.layer[v] <= tree.cert_limit) ++cert;
        if (total != cert) partition_ok = false;
        if (n >= 1 && n <= 4) {
            for (Vertex x = 0; x < g.size(); ++x) {
                if (g.layer[x] > n - 1) continue;
                const Atom& a = tree.atom(n, tree.levels[static_cast<std::size_t>(n)].atom_of[x]);
                if (a.members.size() != 1 || a.infinite) singleton_ok = false;
            }
        }
    }
    rep.add("atoms.partition", partition_ok);
    rep.add("atoms.refinement", refine_ok);
    rep.add("atoms.one-point-atoms", singleton_ok, "levels 1..4");
    rep.add("atoms.infinite-avoid-inner-ball", complement_ok);

    bool chain_ok = true;
    for (int n = 1; n < tree.depth && chain_ok; ++n)
        for (const Atom& a : tree.levels[static_cast<std::size_t>(n)].atoms) {
            if (!a.infinite) continue;
            const auto& prof = atom_profile(tree, n, a.index);
            for (int ci : a.child_atoms) {
                const auto& cprof = atom_profile(tree, n + 1, ci);
                std::vector<Vertex> bn = tree.ball_of_level(n);
                std::vector<Vertex> bn1 = tree.ball_of_level(n + 1);
                std::vector<int> restr;
                for (std::size_t i = 0, j = 0; i < bn1.size(); ++i)
                    if (j < bn.size() && bn1[i] == bn[j]) {
                        restr.push_back(cprof[i]);
                        ++j;
                    }
                int mn = 1 << 30;
                for (int v : restr) mn = std::min(mn, v);
                for (std::size_t i = 0; i < restr.size(); ++i)
                    if (restr[i] - mn != prof[i]) chain_ok = false;
            }
        }
    rep.add("atoms.chain-restriction-consistency", chain_ok);
}

inline void verify_proximal(const Pipeline& p, VerifyReport& rep, std::mt19937& rng) {
    const LayeredGraph& g = p.graph;
    const AtomTree& tree = p.tree;
    int delta = g.cert_margin;  // per-source default equals the margin
    if (p.cfg.delta >= 0) delta = p.cfg.delta;
    if (g.kind == SourceKind::Tiling) delta = std::max(delta, 1);

    bool chain_ok = true, diam_ok = true, sphere_ok = true;
    for (int n = 0; n <= tree.depth; ++n)
        for (const Atom& a : tree.levels[static_cast<std::size_t>(n)].atoms) {
            if (!a.infinite) continue;
            auto pd = proximal_set(tree, n, a.index, delta);
            if (!is_subset(pd.nearest, pd.visible) || !is_subset(pd.visible, pd.proximal))
                chain_ok = false;
            if (set_diameter(tree, pd.proximal) > 8 * delta + 4) diam_ok = false;
            if (g.kind == SourceKind::Tiling && n <= 3 && delta == 1) {
                std::vector<Vertex> sn(g.sphere_at(n).begin(), g.sphere_at(n).end());
                if (n == 0) sn = {g.base};
                if (pd.proximal != sn) sphere_ok = false;
            }
        }
    rep.add("proximal.nested-chain", chain_ok, "N within V within P");
    rep.add("proximal.diameter-bound", diam_ok, "8*delta+4");
    if (g.kind == SourceKind::Tiling) rep.add("proximal.full-spheres-low-levels", sphere_ok);

    bool member_ok = true;
    std::vector<Vertex> cert;
    for (Vertex v = 0; v < g.size(); ++v)
        if (g.layer[v] <= tree.cert_limit) cert.push_back(v);
    int done = 0;
    int guard = 0;
    while (done < 500 && ++guard < 100000) {
        int n = 1 + static_cast<int>(rng() % std::max(1, tree.depth));
        const auto& lv = tree.levels[static_cast<std::size_t>(n)];
        const Atom& a = lv.atoms[rng() % lv.atoms.size()];
        if (!a.infinite) continue;
        Vertex x = cert[rng() % cert.size()];
        if (g.layer[x] < n) continue;
        auto pd = proximal_set(tree, n, a.index, delta);
        bool brute = lv.atom_of[x] == a.index;
        if (membership_test(g, tree, x, n, a.index, pd) != brute) member_ok = false;
        ++done;
    }
    rep.add("proximal.membership-vs-bruteforce", member_ok, std::to_string(done) + " pairs");

    bool recon_ok = true;
    int rn = std::min(4, tree.depth);
    std::vector<Vertex> bn = tree.ball_of_level(rn);
    std::vector<std::uint16_t> dx;
    for (Vertex x = 0; x < g.size(); ++x) {
        if (g.layer[x] > std::min(tree.cert_limit, rn + 2)) continue;
        bfs_fill(g, x, dx);
        // Visible subset of B_rn from x, using the precomputed core table.
        std::vector<Vertex> vis;
        for (std::size_t i = 0; i < bn.size(); ++i) {
            bool v = true;
            for (std::size_t j = 0; j < bn.size() && v; ++j) {
                if (i == j) continue;
                if (dx[bn[i]] >= tree.core_distance(bn[i], bn[j]) + dx[bn[j]]) v = false;
            }
            if (v) vis.push_back(bn[i]);
        }
        // d(b,x) = min over p in vis of d(b,p) + d(p,x), for every b in B_rn.
        for (Vertex b : bn) {
            int direct = dx[b];
            int via = 1 << 30;
            for (Vertex pp : vis) via = std::min(via, tree.core_distance(b, pp) + static_cast<int>(dx[pp]));
            if (direct != via) recon_ok = false;
        }
    }
    rep.add("proximal.reconstruction", recon_ok,
            "exhaustive on B_" + std::to_string(rn) + " plus a band above");

    bool mono_ok = true;
    int mn = std::min(4, tree.depth);
    for (int t = 0; t < 200; ++t) {
        Vertex x = cert[rng() % cert.size()];
        Vertex y = cert[rng() % cert.size()];
        if (g.layer[x] < mn || g.layer[y] < mn) continue;
        if (!check_monotonicity(g, tree, x, y, mn)) mono_ok = false;
    }
    rep.add("proximal.monotonicity", mono_ok);
}

inline void verify_typing(const Pipeline& p, VerifyReport& rep, std::mt19937& rng) {
    if (!p.sym->available()) return;
    const Symmetry& sym = *p.sym;
    const AtomTree& tree = p.tree;
    const Typing& ty = p.typing;

    MorphismParams params;
    params.cone_depth = p.cfg.cone_depth;
    bool marking_ok = true;
    for (int n = 1; n <= std::min(3, tree.depth); ++n)
        for (const Atom& a : tree.levels[static_cast<std::size_t>(n)].atoms) {
            if (!a.infinite) continue;
            int t = ty.type_of[static_cast<std::size_t>(n)][static_cast<std::size_t>(a.index)];
            auto [rl, ri] = ty.type_rep[static_cast<std::size_t>(t)];
            if (!verify_morphism(sym, tree, ty.marking[static_cast<std::size_t>(n)][static_cast<std::size_t>(a.index)],
                                 n, a.index, rl, ri, params))
                marking_ok = false;
        }
    rep.add("typing.markings-are-morphisms", marking_ok);

    bool child_ok = true;
    for (int n = 0; n < tree.depth; ++n)
        for (const Atom& a : tree.levels[static_cast<std::size_t>(n)].atoms) {
            if (!a.infinite) continue;
            int t = ty.type_of[static_cast<std::size_t>(n)][static_cast<std::size_t>(a.index)];
            const auto& slots = ty.slot_targets[static_cast<std::size_t>(t)];
            const auto& mine = ty.child_at_slot[static_cast<std::size_t>(n)][static_cast<std::size_t>(a.index)];
            if (mine.size() != slots.size()) {
                child_ok = false;
                continue;
            }
            for (std::size_t s = 0; s < mine.size(); ++s)
                if (ty.type_of[static_cast<std::size_t>(n) + 1][static_cast<std::size_t>(mine[s])] != slots[s])
                    child_ok = false;
        }
    rep.add("typing.child-type-consistency", child_ok);

    if (tree.depth >= 2) {
        auto shallow_tree = build_atom_tree(p.graph, tree.depth - 1, tree.horizon);
        auto shallow_ty = classify_types(sym, shallow_tree, params);
        rep.add("typing.stability", type_graph_of(shallow_ty) == p.type_graph,
                "type graph stable between depths " + std::to_string(tree.depth - 1) + " and " +
                    std::to_string(tree.depth));
    }

    auto rs = build_rigid_structure(ty);
    bool cocycle_ok = true;
    std::vector<std::vector<std::pair<int, int>>> by_type(static_cast<std::size_t>(ty.type_count()));
    for (int n = 0; n <= tree.depth; ++n)
        for (const Atom& a : tree.levels[static_cast<std::size_t>(n)].atoms)
            if (a.infinite)
                by_type[static_cast<std::size_t>(ty.type_of[static_cast<std::size_t>(n)][static_cast<std::size_t>(a.index)])]
                    .emplace_back(n, a.index);
    int done = 0;
    int guard = 0;
    while (done < 30 && ++guard < 3000) {
        auto& pool = by_type[rng() % by_type.size()];
        if (pool.size() < 3) continue;
        auto [lu, iu] = pool[rng() % pool.size()];
        auto [lv, iv] = pool[rng() % pool.size()];
        auto [lw, iw] = pool[rng() % pool.size()];
        if (!rigid_cocycle_holds(sym, tree, rs, lu, iu, lv, iv, lw, iw)) cocycle_ok = false;
        ++done;
    }
    rep.add("typing.rigid-cocycles", cocycle_ok, std::to_string(done) + " triples");
}

inline void verify_transducers(const Pipeline& p, VerifyReport& rep, std::mt19937&) {
    if (!p.sym->available()) return;
    const Symmetry& sym = *p.sym;
    const AtomTree& tree = p.tree;
    SynthesisParams sp;
    sp.max_states = p.cfg.state_bound;

    auto slot_of = slot_labels(tree, p.typing);
    auto id = identity_transducer(p.type_graph);

    for (const auto& name : sym.generator_names()) {
        GroupElement g = sym.generator(name);
        SynthesisResult res;
        try {
            res = synthesize_action_transducer(sym, tree, p.typing, p.type_graph, g, sp);
        } catch (const Error& e) {
            rep.add("transducer." + name + ".synthesis", false, e.what());
            continue;
        }
        validate_transducer(res.machine);
        rep.add("transducer." + name + ".nondegenerate", nondegenerate(res.machine));

        auto gm = sym.materialize(g);
        bool oracle_ok = true;
        int k = sym.magnitude(g);
        bool lipschitz_ok = true;
        for (int n = 0; n <= tree.depth && oracle_ok; ++n)
            for (const Atom& a : tree.levels[static_cast<std::size_t>(n)].atoms) {
                if (!a.infinite) continue;
                std::vector<Vertex> ys;
                for (Vertex x : a.members) {
                    Vertex y = (*gm)[x];
                    if (y != kNoVertex && p.graph.layer[y] <= tree.cert_limit) ys.push_back(y);
                }
                int lvl = 0, idx = tree.levels[0].atom_of[p.graph.base];
                std::vector<int> expect;
                bool capped = false;
                for (;;) {
                    if (lvl == tree.depth) {
                        capped = true;
                        break;
                    }
                    int child = -2;
                    for (Vertex y : ys) {
                        int c = p.graph.layer[y] < lvl + 1 ? -1 : tree.atom_index_of(lvl + 1, y);
                        if (child == -2) child = c;
                        else if (child != c) child = -1;
                        if (child == -1) break;
                    }
                    if (child < 0) break;
                    bool is_child = false;
                    for (int ci : tree.atom(lvl, idx).child_atoms)
                        if (ci == child) is_child = true;
                    if (!is_child) break;
                    expect.push_back(slot_of[static_cast<std::size_t>(lvl) + 1][static_cast<std::size_t>(child)]);
                    idx = child;
                    ++lvl;
                }
                if (capped) continue;
                auto addr = atom_address(tree, slot_of, n, a.index);
                auto got = evaluate(res.machine, addr);
                if (got != expect) oracle_ok = false;
                int len = static_cast<int>(got.size());
                if (len < n - k || len > n + k + 1) lipschitz_ok = false;
            }
        rep.add("transducer." + name + ".oracle-agreement", oracle_ok);
        rep.add("transducer." + name + ".output-length-bounds", lipschitz_ok,
                "within [n-|g|, n+|g|+1]");

        auto res_inv = synthesize_action_transducer(sym, tree, p.typing, p.type_graph,
                                                    sym.inverse(g), sp);
        int d = std::min(p.cfg.equiv_depth, tree.depth - 1);
        rep.add("transducer." + name + ".inverse-composes-to-identity",
                bounded_equivalent(compose(res.machine, res_inv.machine), id, d, 2 * k + 2));
    }
}

// The golden comparisons for the order-5 square tiling worked example.
inline void verify_golden_tiling(const Pipeline& p, VerifyReport& rep) {
    if (p.graph.kind != SourceKind::Tiling || p.graph.tiling_q != 5) return;
    const AtomTree& tree = p.tree;

    rep.add("golden.sphere-sizes",
            p.graph.sphere_at(1).size() == 5 && p.graph.sphere_at(2).size() == 15, "S1=5 S2=15");
    bool counts_ok = tree.depth >= 2 && tree.levels[1].atoms.size() == 11 &&
                     tree.levels[1].infinite_count == 10 && tree.levels[2].atoms.size() == 36 &&
                     tree.levels[2].infinite_count == 30;
    rep.add("golden.atom-counts", counts_ok, "11/10 at level 1, 36/30 at level 2");

    auto ptg = golden::published_type_graph();
    bool four_types = p.typing.type_count() == 4;
    bool structure_ok = four_types && golden::identify_tiling_types(p.type_graph, ptg).has_value();
    if (structure_ok) {
        std::multiset<std::multiset<int>> mine, theirs;
        auto shape = [](const TypeGraph& tg) {
            std::multiset<std::multiset<int>> out;
            for (std::size_t t = 0; t < tg.names.size(); ++t) {
                std::multiset<int> row;
                for (int u : tg.slots[t]) row.insert(tg.out_degree(u));
                out.insert(row);
            }
            return out;
        };
        structure_ok = shape(p.type_graph) == shape(ptg);
    }
    rep.add("golden.type-graph", structure_ok, "four types with the published child structure");

    SynthesisParams sp;
    sp.max_states = p.cfg.state_bound;
    try {
        auto Tr = synthesize_action_transducer(*p.sym, tree, p.typing, p.type_graph,
                                               p.sym->generator("r"), sp);
        auto Ts = synthesize_action_transducer(*p.sym, tree, p.typing, p.type_graph,
                                               p.sym->generator("s"), sp);
        auto rl = golden::find_relabeling(p.type_graph, Tr.machine, Ts.machine, ptg,
                                          golden::published_rotation(), golden::published_reflection(), 8);
        rep.add("golden.machines-match-published-rules", rl.has_value(),
                "exact agreement at depth 8 under a slot relabeling");
        rep.add("golden.reflection-class-count", minimize(Ts.machine, 12).state_count() == 13);
        auto id = identity_transducer(p.type_graph);
        auto r5 = compose(compose(compose(compose(Tr.machine, Tr.machine), Tr.machine), Tr.machine),
                          Tr.machine);
        auto rs = compose(Tr.machine, Ts.machine);
        auto rs4 = compose(compose(rs, rs), compose(rs, rs));
        int d = p.cfg.equiv_depth;
        rep.add("golden.relations-as-machines",
                bounded_equivalent(r5, id, d, 0) &&
                    bounded_equivalent(compose(Ts.machine, Ts.machine), id, d, 4) &&
                    bounded_equivalent(rs4, id, d, 8));
    } catch (const Error& e) {
        rep.add("golden.machines-match-published-rules", false, e.what());
    }
}

inline VerifyReport run_verify(const Pipeline& p) {
    VerifyReport rep;
    std::mt19937 rng(20240517);
    verify_graph(p, rep, rng);
    verify_group(p, rep, rng);
    verify_atoms(p, rep, rng);
    verify_proximal(p, rep, rng);
    verify_typing(p, rep, rng);
    verify_transducers(p, rep, rng);
    verify_golden_tiling(p, rep);
    return rep;
}

}  // namespace horotree
