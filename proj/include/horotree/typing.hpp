#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "horotree/atoms.hpp"
#include "horotree/core.hpp"
#include "horotree/graph.hpp"
#include "horotree/group.hpp"
#include "horotree/proximal.hpp"

namespace horotree {

struct EquivalenceWitness {
    GroupElement g;
    int src_level = 0, src_index = -1;
    int dst_level = 0, dst_index = -1;
    int checked_depth = 0;
    bool geometric = false;  // also satisfied the geometric-equivalence conditions
};

// Finite directed multigraph of atom types: per type an ordered list of child
// slots, each carrying the child's type.
struct TypeGraph {
    int root_type = 0;
    std::vector<std::string> names;
    std::vector<std::vector<int>> slots;

    bool operator==(const TypeGraph& o) const {
        return root_type == o.root_type && names == o.names && slots == o.slots;
    }

    int out_degree(int t) const { return static_cast<int>(slots[static_cast<std::size_t>(t)].size()); }

    std::string serialize() const {
        std::ostringstream out;
        out << "typegraph " << names.size() << " root " << names[static_cast<std::size_t>(root_type)]
            << "\n";
        for (std::size_t t = 0; t < names.size(); ++t) {
            out << "type " << names[t] << "\n";
            for (std::size_t s = 0; s < slots[t].size(); ++s)
                out << "child " << s << " " << names[static_cast<std::size_t>(slots[t][s])] << "\n";
        }
        return out.str();
    }

    static TypeGraph parse(const std::string& text) {
        TypeGraph tg;
        std::istringstream in(text);
        std::string tag;
        std::size_t count = 0;
        std::string rootname;
        if (!(in >> tag >> count >> tag >> rootname)) fail_input("typegraph parse: bad header");
        std::map<std::string, int> id;
        std::vector<std::vector<std::string>> child_names;
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            std::istringstream ls(line);
            if (!(ls >> tag)) continue;
            if (tag == "type") {
                std::string name;
                ls >> name;
                id[name] = static_cast<int>(tg.names.size());
                tg.names.push_back(name);
                child_names.emplace_back();
            } else if (tag == "child") {
                std::size_t slot;
                std::string name;
                if (!(ls >> slot >> name) || child_names.empty())
                    fail_input("typegraph parse: bad child line");
                if (slot != child_names.back().size())
                    fail_input("typegraph parse: slots out of order");
                child_names.back().push_back(name);
            } else {
                fail_input("typegraph parse: unknown tag '" + tag + "'");
            }
        }
        if (tg.names.size() != count) fail_input("typegraph parse: type count mismatch");
        for (auto& row : child_names) {
            tg.slots.emplace_back();
            for (auto& name : row) {
                auto it = id.find(name);
                if (it == id.end()) fail_input("typegraph parse: unknown child type");
                tg.slots.back().push_back(it->second);
            }
        }
        auto rit = id.find(rootname);
        if (rit == id.end()) fail_input("typegraph parse: unknown root type");
        tg.root_type = rit->second;
        return tg;
    }

    std::string to_dot() const {
        std::ostringstream out;
        out << "digraph typegraph {\n";
        for (std::size_t t = 0; t < names.size(); ++t)
            out << "  " << names[t] << (static_cast<int>(t) == root_type ? " [shape=doublecircle];\n" : ";\n");
        for (std::size_t t = 0; t < names.size(); ++t) {
            std::map<int, std::vector<std::size_t>> grouped;
            for (std::size_t s = 0; s < slots[t].size(); ++s) grouped[slots[t][s]].push_back(s);
            for (auto& [target, labels] : grouped) {
                out << "  " << names[t] << " -> " << names[static_cast<std::size_t>(target)]
                    << " [label=\"";
                for (std::size_t i = 0; i < labels.size(); ++i)
                    out << (i ? "," : "") << labels[i];
                out << "\"];\n";
            }
        }
        out << "}\n";
        return out.str();
    }
};

// ---------------------------------------------------------------------------
// Morphism verification and search
// ---------------------------------------------------------------------------

struct MorphismParams {
    int cone_depth = 3;      // truncation depth for the cone condition
    int min_checked = 2;     // least verified depth for a witness to count
};

// Bounded check that g carries the atom (m,i) onto the atom (n,j) level by
// level, mapping descendant tree atoms to descendant tree atoms. Returns the
// verified depth, or nullopt.
inline std::optional<int> verify_morphism(const Symmetry& sym, const AtomTree& tree,
                                          const GroupElement& g, int m, int i, int n, int j,
                                          const MorphismParams& params) {
    const LayeredGraph& graph = sym.graph();
    const Atom& A = tree.atom(m, i);
    const Atom& B = tree.atom(n, j);
    const int o = n - m;

    auto images = sym.apply_batch(g, A.members);
    // Depth to which the comparison is conclusive: all members defined and
    // certified on both sides.
    int cap = std::min(tree.cert_limit, tree.cert_limit - o);
    for (std::size_t t = 0; t < A.members.size(); ++t) {
        if (images[t] == kNoVertex || graph.layer[images[t]] > tree.cert_limit)
            cap = std::min(cap, graph.layer[A.members[t]] - 1);
    }
    int k_max = cap - m;
    if (k_max < params.min_checked) return std::nullopt;

    // Level-by-level member counts on the target side.
    std::vector<int> want(static_cast<std::size_t>(cap + 1), 0);
    for (Vertex y : B.members)
        if (graph.layer[y] - o <= cap && graph.layer[y] - o >= 0) ++want[static_cast<std::size_t>(graph.layer[y] - o)];

    std::vector<int> got(static_cast<std::size_t>(cap + 1), 0);
    for (std::size_t t = 0; t < A.members.size(); ++t) {
        Vertex x = A.members[t];
        int lx = graph.layer[x];
        if (lx > cap) continue;
        Vertex y = images[t];
        if (y == kNoVertex) return std::nullopt;
        if (graph.layer[y] != lx + o) return std::nullopt;
        if (tree.atom_index_of(n, y) != j) return std::nullopt;
        ++got[static_cast<std::size_t>(lx)];
    }
    for (int l = 0; l <= cap; ++l)
        if (got[static_cast<std::size_t>(l)] != want[static_cast<std::size_t>(l)]) return std::nullopt;

    // Descendant tree atoms map to descendant tree atoms, bijectively per level.
    std::vector<int> idx_of_member(graph.size(), -1);
    for (std::size_t t = 0; t < A.members.size(); ++t) idx_of_member[A.members[t]] = static_cast<int>(t);
    std::vector<std::pair<int, int>> stack = {{i, j}};  // (source atom, image atom)
    std::vector<std::pair<int, int>> next_stack;
    for (int lvl = m; lvl < std::min(tree.depth, cap); ++lvl) {
        int tgt_lvl = lvl + o;
        if (tgt_lvl + 1 > tree.depth || tgt_lvl + 1 < 0) break;
        next_stack.clear();
        for (auto [ai, bi] : stack) {
            const Atom& pa = tree.atom(lvl, ai);
            std::vector<int> seen;
            for (int ci : pa.child_atoms) {
                const Atom& ca = tree.atom(lvl + 1, ci);
                int img_atom = -2;
                for (Vertex x : ca.members) {
                    if (graph.layer[x] > cap) continue;
                    Vertex y = images[static_cast<std::size_t>(idx_of_member[x])];
                    int cand = tree.atom_index_of(tgt_lvl + 1, y);
                    if (img_atom == -2)
                        img_atom = cand;
                    else if (img_atom != cand)
                        return std::nullopt;
                }
                if (img_atom == -2) continue;  // no members shallow enough to test
                if (img_atom < 0) return std::nullopt;
                const Atom& ba = tree.atom(tgt_lvl + 1, img_atom);
                if (!ba.infinite || ba.parent != bi) return std::nullopt;
                seen.push_back(img_atom);
                next_stack.emplace_back(ci, img_atom);
            }
            std::sort(seen.begin(), seen.end());
            if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) return std::nullopt;
        }
        stack = next_stack;
    }
    return k_max;
}

// The three geometric-equivalence conditions, with cones truncated at depth.
inline bool check_geometric_equivalence(const Symmetry& sym, const AtomTree& tree,
                                        const GroupElement& g, const ProximalData& pa,
                                        const ProximalData& pb, int cone_depth) {
    const LayeredGraph& graph = sym.graph();
    const int m = pa.level, n = pb.level;

    auto img = sym.apply_batch(g, pa.proximal);
    std::vector<Vertex> mapped = img;
    for (Vertex v : mapped)
        if (v == kNoVertex) return false;
    std::sort(mapped.begin(), mapped.end());
    if (mapped != pb.proximal) return false;

    // Profile agreement on P(A2) up to an additive constant.
    const auto& prof_a = atom_profile(tree, m, pa.atom_index);
    const auto& prof_b = atom_profile(tree, n, pb.atom_index);
    std::vector<Vertex> ball_a = tree.ball_of_level(m), ball_b = tree.ball_of_level(n);
    std::vector<int> pos_a(graph.size(), -1), pos_b(graph.size(), -1);
    for (std::size_t t = 0; t < ball_a.size(); ++t) pos_a[ball_a[t]] = static_cast<int>(t);
    for (std::size_t t = 0; t < ball_b.size(); ++t) pos_b[ball_b[t]] = static_cast<int>(t);
    bool first = true;
    int shift = 0;
    for (std::size_t t = 0; t < pa.proximal.size(); ++t) {
        int va = prof_a[static_cast<std::size_t>(pos_a[pa.proximal[t]])];
        int vb = prof_b[static_cast<std::size_t>(pos_b[img[t]])];
        if (first) {
            shift = va - vb;
            first = false;
        } else if (va - vb != shift) {
            return false;
        }
    }

    // Cone condition: g C(p) = C(gp), both truncated at graph distance cone_depth.
    int depth = cone_depth;
    for (std::size_t t = 0; t < pa.proximal.size(); ++t) {
        Vertex p = pa.proximal[t], q = img[t];
        int usable = std::min(depth, graph.radius - graph.cert_margin - std::max(graph.layer[p], graph.layer[q]));
        if (usable < 1) return false;
        auto ca = cone(graph, p, usable);
        auto cb = cone(graph, q, usable);
        auto ca_img = sym.apply_batch(g, ca);
        for (Vertex v : ca_img)
            if (v == kNoVertex) return false;
        std::sort(ca_img.begin(), ca_img.end());
        if (ca_img != cb) return false;
    }
    return true;
}

// Searches for a group element inducing a morphism between two atoms.
// Candidates are flag germs from the source tip to each matching target tip.
inline std::optional<EquivalenceWitness> find_morphism(const Symmetry& sym, const AtomTree& tree,
                                                       int m, int i, int n, int j,
                                                       const MorphismParams& params,
                                                       const ProximalData* pa = nullptr,
                                                       const ProximalData* pb = nullptr) {
    const LayeredGraph& graph = sym.graph();
    const Atom& A = tree.atom(m, i);
    const Atom& B = tree.atom(n, j);
    int tip_a = graph.layer[A.rep] - m;
    int tip_b = graph.layer[B.rep] - n;
    if (tip_a != tip_b) return std::nullopt;

    for (Vertex q : B.members) {
        if (graph.layer[q] - n != tip_b) continue;
        for (const GroupElement& g : sym.germs(A.rep, q)) {
            auto depth = verify_morphism(sym, tree, g, m, i, n, j, params);
            if (!depth) continue;
            EquivalenceWitness w;
            w.g = g;
            w.src_level = m;
            w.src_index = i;
            w.dst_level = n;
            w.dst_index = j;
            w.checked_depth = *depth;
            if (pa && pb)
                w.geometric = check_geometric_equivalence(sym, tree, g, *pa, *pb, params.cone_depth);
            return w;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Classification: types, markings, canonical child slots
// ---------------------------------------------------------------------------

struct Typing {
    std::vector<std::pair<int, int>> type_rep;          // type -> (level, index)
    std::vector<std::vector<int>> type_of;              // [level][atom] -> type or -1
    std::vector<std::vector<GroupElement>> marking;     // psi: atom -> rep of its type
    std::vector<std::vector<int>> slot_targets;         // type -> slot -> child type
    std::vector<std::vector<int>> rep_child_at_slot;    // type -> slot -> child atom index of rep
    std::vector<std::vector<std::vector<int>>> child_at_slot;  // [level][atom][slot] -> child index

    int type_count() const { return static_cast<int>(type_rep.size()); }
};

inline Typing classify_types(const Symmetry& sym, const AtomTree& tree, const MorphismParams& params) {
    const LayeredGraph& graph = sym.graph();
    Typing ty;
    ty.type_of.resize(tree.levels.size());
    ty.marking.resize(tree.levels.size());
    ty.child_at_slot.resize(tree.levels.size());
    for (std::size_t n = 0; n < tree.levels.size(); ++n) {
        ty.type_of[n].assign(tree.levels[n].atoms.size(), -1);
        ty.marking[n].resize(tree.levels[n].atoms.size());
        ty.child_at_slot[n].resize(tree.levels[n].atoms.size());
    }

    auto reanchor = [&](const GroupElement& e, Vertex at) -> GroupElement {
        if (e.kind == GroupElement::Kind::CayleyWord) return e;
        // Anchor the germ at a flag of `at` to keep later transports local.
        Vertex nb = graph.adj[at].empty() ? kNoVertex : graph.adj[at][0];
        if (nb == kNoVertex) fail_audit("classify: isolated vertex");
        auto imgs = sym.apply_batch(e, {at, nb});
        if (imgs[0] == kNoVertex || imgs[1] == kNoVertex)
            fail_radius("classify: marking transport left the ball");
        int di = graph.rot_index(imgs[0], imgs[1]);
        if (di < 0) fail_audit("classify: germ image is not adjacency-preserving");
        GroupElement out = e;
        out.src_v = at;
        out.src_i = 0;
        out.dst_v = imgs[0];
        out.dst_i = di;
        return out;
    };

    // Root seeds type 0.
    ty.type_rep.emplace_back(0, 0);
    ty.slot_targets.emplace_back();
    ty.rep_child_at_slot.emplace_back();
    {
        int root_idx = tree.levels[0].atom_of[graph.base];
        ty.type_of[0][static_cast<std::size_t>(root_idx)] = 0;
        GroupElement id = sym.identity();
        if (id.kind == GroupElement::Kind::PlanarGerm) id = reanchor(id, tree.atom(0, root_idx).rep);
        ty.marking[0][static_cast<std::size_t>(root_idx)] = id;
    }

    for (int n = 0; n < tree.depth; ++n) {
        // Type reps fix the slot order of their type, so they go first.
        std::vector<std::size_t> order;
        const auto& atoms_n = tree.levels[static_cast<std::size_t>(n)].atoms;
        for (std::size_t ai = 0; ai < atoms_n.size(); ++ai) {
            int t = ty.type_of[static_cast<std::size_t>(n)][ai];
            if (t >= 0 && ty.type_rep[static_cast<std::size_t>(t)] == std::make_pair(n, static_cast<int>(ai)))
                order.push_back(ai);
        }
        for (std::size_t ai = 0; ai < atoms_n.size(); ++ai) {
            int t = ty.type_of[static_cast<std::size_t>(n)][ai];
            if (!(t >= 0 && ty.type_rep[static_cast<std::size_t>(t)] == std::make_pair(n, static_cast<int>(ai))))
                order.push_back(ai);
        }
        for (std::size_t ai : order) {
            const Atom& A = tree.atom(n, static_cast<int>(ai));
            if (!A.infinite) continue;
            int t = ty.type_of[static_cast<std::size_t>(n)][ai];
            if (t < 0) fail_audit("classify: untyped tree atom reached");
            bool is_rep = ty.type_rep[static_cast<std::size_t>(t)] ==
                          std::make_pair(n, static_cast<int>(ai));

            if (is_rep && ty.slot_targets[static_cast<std::size_t>(t)].empty() &&
                !A.child_atoms.empty()) {
                // First visit of the type rep: type its children and fix the slot order.
                struct ChildRec { int type; int child; GroupElement psi; };
                std::vector<ChildRec> recs;
                for (int ci : A.child_atoms) {
                    int found_type = -1;
                    GroupElement psi = sym.identity();
                    for (int u = 0; u < ty.type_count(); ++u) {
                        auto [rl, ri] = ty.type_rep[static_cast<std::size_t>(u)];
                        auto w = find_morphism(sym, tree, n + 1, ci, rl, ri, params);
                        if (w) {
                            found_type = u;
                            psi = w->g;
                            break;
                        }
                    }
                    if (found_type < 0) {
                        found_type = ty.type_count();
                        ty.type_rep.emplace_back(n + 1, ci);
                        ty.slot_targets.emplace_back();
                        ty.rep_child_at_slot.emplace_back();
                        psi = sym.identity();
                        if (psi.kind == GroupElement::Kind::PlanarGerm)
                            psi = reanchor(psi, tree.atom(n + 1, ci).rep);
                    }
                    ty.type_of[static_cast<std::size_t>(n) + 1][static_cast<std::size_t>(ci)] = found_type;
                    ty.marking[static_cast<std::size_t>(n) + 1][static_cast<std::size_t>(ci)] = psi;
                    recs.push_back({found_type, ci, psi});
                }
                std::stable_sort(recs.begin(), recs.end(),
                                 [](const ChildRec& a, const ChildRec& b) { return a.type < b.type; });
                auto& slots = ty.slot_targets[static_cast<std::size_t>(t)];
                auto& at_slot = ty.rep_child_at_slot[static_cast<std::size_t>(t)];
                auto& mine = ty.child_at_slot[static_cast<std::size_t>(n)][ai];
                for (const auto& r : recs) {
                    slots.push_back(r.type);
                    at_slot.push_back(r.child);
                    mine.push_back(r.child);
                }
                continue;
            }

            // Generic atom: transport children through the marking onto the
            // rep's children; types, markings and slots follow.
            const GroupElement& psi = ty.marking[static_cast<std::size_t>(n)][ai];
            auto [rl, ri] = ty.type_rep[static_cast<std::size_t>(t)];
            const Atom& R = tree.atom(rl, ri);
            if (ty.slot_targets[static_cast<std::size_t>(t)].empty() && !R.child_atoms.empty())
                fail_divergence("classify: type rep visited after its instances");
            auto images = sym.apply_batch(psi, A.members);
            std::vector<int> member_pos(graph.size(), -1);
            for (std::size_t k = 0; k < A.members.size(); ++k) member_pos[A.members[k]] = static_cast<int>(k);

            const auto& rep_slots = ty.rep_child_at_slot[static_cast<std::size_t>(t)];
            std::map<int, int> rep_child_slot;  // rep child atom -> slot
            for (std::size_t s = 0; s < rep_slots.size(); ++s) rep_child_slot[rep_slots[s]] = static_cast<int>(s);

            auto& mine = ty.child_at_slot[static_cast<std::size_t>(n)][ai];
            mine.assign(rep_slots.size(), -1);
            if (A.child_atoms.size() != rep_slots.size())
                fail_audit("classify: child count differs from type rep");
            for (int ci : A.child_atoms) {
                const Atom& C = tree.atom(n + 1, ci);
                int target = -2;
                for (Vertex x : C.members) {
                    Vertex y = images[static_cast<std::size_t>(member_pos[x])];
                    if (y == kNoVertex || graph.layer[y] > tree.cert_limit) continue;
                    int cand = tree.atom_index_of(rl + 1, y);
                    if (target == -2)
                        target = cand;
                    else if (target != cand)
                        fail_audit("classify: marking scatters a child atom");
                }
                if (target < 0) fail_radius("classify: no certified image members for a child");
                auto it = rep_child_slot.find(target);
                if (it == rep_child_slot.end()) fail_audit("classify: child image is not a rep child");
                if (mine[static_cast<std::size_t>(it->second)] != -1)
                    fail_audit("classify: two children map to one rep child");
                mine[static_cast<std::size_t>(it->second)] = ci;
                int ct = ty.slot_targets[static_cast<std::size_t>(t)][static_cast<std::size_t>(it->second)];
                ty.type_of[static_cast<std::size_t>(n) + 1][static_cast<std::size_t>(ci)] = ct;
                GroupElement tau = ty.marking[static_cast<std::size_t>(rl) + 1]
                                             [static_cast<std::size_t>(target)];
                GroupElement comp = sym.compose(tau, psi);
                if (comp.kind == GroupElement::Kind::PlanarGerm) comp = reanchor(comp, C.rep);
                ty.marking[static_cast<std::size_t>(n) + 1][static_cast<std::size_t>(ci)] = comp;
            }
        }
    }
    return ty;
}

inline TypeGraph type_graph_of(const Typing& ty) {
    TypeGraph tg;
    tg.root_type = 0;
    for (int t = 0; t < ty.type_count(); ++t) {
        std::string name;
        int v = t;
        do {
            name.insert(name.begin(), static_cast<char>('A' + v % 26));
            v = v / 26 - 1;
        } while (v >= 0);
        tg.names.push_back(name);
        tg.slots.push_back(ty.slot_targets[static_cast<std::size_t>(t)]);
    }
    return tg;
}

}  // namespace horotree
