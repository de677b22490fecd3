#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "horotree/core.hpp"
#include "horotree/transducer.hpp"
#include "horotree/typing.hpp"

namespace horotree {

// ---------------------------------------------------------------------------
// Rigid structure: one marking per tree atom (already built by classify_types)
// plus the derived pairwise morphisms phi_{vw} = psi_w^{-1} psi_v.
// ---------------------------------------------------------------------------
struct RigidStructure {
    const Typing* typing = nullptr;

    GroupElement pairwise(const Symmetry& sym, int lvl_v, int idx_v, int lvl_w, int idx_w) const {
        const GroupElement& pv = typing->marking[static_cast<std::size_t>(lvl_v)][static_cast<std::size_t>(idx_v)];
        const GroupElement& pw = typing->marking[static_cast<std::size_t>(lvl_w)][static_cast<std::size_t>(idx_w)];
        return sym.compose(sym.inverse(pw), pv);
    }
};

inline RigidStructure build_rigid_structure(const Typing& ty) {
    RigidStructure rs;
    rs.typing = &ty;
    return rs;
}

// Cocycle spot check: phi_{vw} phi_{uv} agrees with phi_{uw} on sample members.
inline bool rigid_cocycle_holds(const Symmetry& sym, const AtomTree& tree, const RigidStructure& rs,
                                int lvl_u, int idx_u, int lvl_v, int idx_v, int lvl_w, int idx_w,
                                int samples = 8) {
    GroupElement uv = rs.pairwise(sym, lvl_u, idx_u, lvl_v, idx_v);
    GroupElement vw = rs.pairwise(sym, lvl_v, idx_v, lvl_w, idx_w);
    GroupElement uw = rs.pairwise(sym, lvl_u, idx_u, lvl_w, idx_w);
    const Atom& A = tree.atom(lvl_u, idx_u);
    std::vector<Vertex> xs;
    for (std::size_t i = 0; i < A.members.size() && static_cast<int>(xs.size()) < samples;
         i += 1 + A.members.size() / static_cast<std::size_t>(samples))
        xs.push_back(A.members[i]);
    auto step1 = sym.apply_batch(uv, xs);
    auto direct = sym.apply_batch(uw, xs);
    auto step2 = sym.apply_batch(vw, step1);
    int checked = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (step2[i] == kNoVertex || direct[i] == kNoVertex) continue;
        if (step2[i] != direct[i]) return false;
        ++checked;
    }
    return checked > 0;
}

// ---------------------------------------------------------------------------
// Simplification and expansion of type graphs
// ---------------------------------------------------------------------------

struct SimplifiedGraph {
    TypeGraph graph;
    std::vector<int> type_map;  // original type -> simplified type, or -1 if contracted
};

// Removes single-child types by path contraction. Errors when some type heads
// an infinite single-child chain (an isolated branch: expand first).
inline SimplifiedGraph simplify(const TypeGraph& tg) {
    const int n = static_cast<int>(tg.names.size());
    // Follow forced steps from each type to the first branching type.
    std::vector<int> lead_to(static_cast<std::size_t>(n), -1);
    for (int t = 0; t < n; ++t) {
        int cur = t, steps = 0;
        while (tg.out_degree(cur) == 1) {
            cur = tg.slots[static_cast<std::size_t>(cur)][0];
            if (++steps > n) fail_input("simplify: isolated single-child chain; expand first");
        }
        if (tg.out_degree(cur) == 0) fail_input("simplify: type graph has a dead end");
        lead_to[static_cast<std::size_t>(t)] = cur;
    }
    SimplifiedGraph out;
    out.type_map.assign(static_cast<std::size_t>(n), -1);
    std::vector<int> keep;
    for (int t = 0; t < n; ++t)
        if (tg.out_degree(t) >= 2) {
            out.type_map[static_cast<std::size_t>(t)] = static_cast<int>(keep.size());
            keep.push_back(t);
        }
    for (int t : keep) {
        out.graph.names.push_back(tg.names[static_cast<std::size_t>(t)]);
        std::vector<int> slots;
        for (int target : tg.slots[static_cast<std::size_t>(t)])
            slots.push_back(out.type_map[static_cast<std::size_t>(lead_to[static_cast<std::size_t>(target)])]);
        out.graph.slots.push_back(std::move(slots));
    }
    out.graph.root_type = out.type_map[static_cast<std::size_t>(lead_to[static_cast<std::size_t>(tg.root_type)])];
    return out;
}

// Replaces every isolated branch (a type from which no branching type is
// reachable) by one shared binary type with two self loops.
inline TypeGraph expand(const TypeGraph& tg) {
    const int n = static_cast<int>(tg.names.size());
    // A type is isolated iff no type of out-degree >= 2 is reachable from it.
    std::vector<char> reaches_branch(static_cast<std::size_t>(n), 0);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int t = 0; t < n; ++t) {
            if (reaches_branch[static_cast<std::size_t>(t)]) continue;
            bool r = tg.out_degree(t) >= 2;
            for (int target : tg.slots[static_cast<std::size_t>(t)])
                if (reaches_branch[static_cast<std::size_t>(target)]) r = true;
            if (r) {
                reaches_branch[static_cast<std::size_t>(t)] = 1;
                changed = true;
            }
        }
    }
    bool any_isolated = false;
    for (int t = 0; t < n; ++t)
        if (!reaches_branch[static_cast<std::size_t>(t)]) any_isolated = true;
    if (!any_isolated) return tg;

    TypeGraph out;
    std::vector<int> map(static_cast<std::size_t>(n), -1);
    for (int t = 0; t < n; ++t) {
        if (!reaches_branch[static_cast<std::size_t>(t)]) continue;
        map[static_cast<std::size_t>(t)] = static_cast<int>(out.names.size());
        out.names.push_back(tg.names[static_cast<std::size_t>(t)]);
    }
    int bin = static_cast<int>(out.names.size());
    out.names.push_back("X");
    for (int t = 0; t < n; ++t) {
        if (!reaches_branch[static_cast<std::size_t>(t)]) continue;
        std::vector<int> slots;
        for (int target : tg.slots[static_cast<std::size_t>(t)]) {
            int m = map[static_cast<std::size_t>(target)];
            slots.push_back(m < 0 ? bin : m);
        }
        out.slots.push_back(std::move(slots));
    }
    out.slots.push_back({bin, bin});
    out.root_type = reaches_branch[static_cast<std::size_t>(tg.root_type)]
                        ? map[static_cast<std::size_t>(tg.root_type)]
                        : bin;
    return out;
}

// ---------------------------------------------------------------------------
// Complete binary prefix codes
// ---------------------------------------------------------------------------

// Canonical complete code with k leaves: split the leftmost deepest leaf until
// k leaves exist; slots take leaves left to right.
inline std::vector<std::vector<int>> canonical_code(int k) {
    if (k < 1) fail_input("canonical_code: need at least one slot");
    std::vector<std::vector<int>> leaves = {{}};
    while (static_cast<int>(leaves.size()) < k) {
        std::size_t pick = 0;
        for (std::size_t i = 1; i < leaves.size(); ++i)
            if (leaves[i].size() > leaves[pick].size()) pick = i;
        std::vector<int> left = leaves[pick], right = leaves[pick];
        left.push_back(0);
        right.push_back(1);
        leaves[pick] = left;
        leaves.insert(leaves.begin() + static_cast<long>(pick) + 1, right);
    }
    return leaves;
}

// Per-type slot codes over a branching type graph.
struct PrefixCode {
    std::vector<std::vector<std::vector<int>>> bits;  // [type][slot] -> code word

    std::string serialize(const TypeGraph& tg) const {
        std::ostringstream out;
        for (std::size_t t = 0; t < bits.size(); ++t)
            for (std::size_t s = 0; s < bits[t].size(); ++s) {
                out << "code " << tg.names[t] << " " << s << " ";
                for (int b : bits[t][s]) out << b;
                out << "\n";
            }
        return out.str();
    }
};

inline PrefixCode build_prefix_code(const TypeGraph& tg) {
    PrefixCode code;
    for (std::size_t t = 0; t < tg.names.size(); ++t) {
        int k = tg.out_degree(static_cast<int>(t));
        if (k < 2) fail_input("build_prefix_code: type graph is not branching");
        code.bits.push_back(canonical_code(k));
    }
    return code;
}

// Binary address of a chain of slot labels in the original type graph:
// forced steps at contracted types contribute nothing; surviving steps emit
// their slot's code word.
inline std::vector<int> binary_address(const TypeGraph& orig, const SimplifiedGraph& simp,
                                       const PrefixCode& code, const std::vector<int>& chain) {
    std::vector<int> out;
    int t = orig.root_type;
    for (int sym : chain) {
        if (sym < 0 || sym >= orig.out_degree(t)) fail_input("binary_address: invalid chain");
        int st = simp.type_map[static_cast<std::size_t>(t)];
        if (st >= 0) {
            const auto& w = code.bits[static_cast<std::size_t>(st)][static_cast<std::size_t>(sym)];
            out.insert(out.end(), w.begin(), w.end());
        }
        t = orig.slots[static_cast<std::size_t>(t)][static_cast<std::size_t>(sym)];
    }
    return out;
}

inline TypeGraph binary_type_graph() {
    TypeGraph tg;
    tg.root_type = 0;
    tg.names = {"Bit"};
    tg.slots = {{0, 0}};
    return tg;
}

// Conjugates a transducer on the original path language to the binary
// alphabet through the prefix encoding: states pair a machine state with the
// partial code word read so far. Requires a branching simplification (no
// isolated branches).
inline AsyncTransducer to_binary(const AsyncTransducer& T, const SimplifiedGraph& simp,
                                 const PrefixCode& code) {
    const TypeGraph& orig = T.in_types;
    if (!(T.out_types == orig)) fail_input("to_binary: machine must act on one path language");

    // Feeds forced slots while the current state's input type is contracted.
    auto advance_forced = [&](int q, std::vector<int>& emitted) {
        while (simp.type_map[static_cast<std::size_t>(T.states[static_cast<std::size_t>(q)].in_type)] < 0) {
            const auto& st = T.states[static_cast<std::size_t>(q)];
            if (st.next.size() != 1) fail_audit("to_binary: contracted type with branching state");
            emitted.insert(emitted.end(), st.out[0].begin(), st.out[0].end());
            q = st.next[0];
        }
        return q;
    };
    // Encodes an original output word starting at out-position type `ot`.
    auto encode_out = [&](int ot, const std::vector<int>& w) {
        std::vector<int> bits;
        for (int sym : w) {
            int st = simp.type_map[static_cast<std::size_t>(ot)];
            if (st >= 0) {
                const auto& cw = code.bits[static_cast<std::size_t>(st)][static_cast<std::size_t>(sym)];
                bits.insert(bits.end(), cw.begin(), cw.end());
            }
            ot = orig.slots[static_cast<std::size_t>(ot)][static_cast<std::size_t>(sym)];
        }
        return bits;
    };

    AsyncTransducer B;
    B.in_types = B.out_types = binary_type_graph();

    std::vector<int> pre;
    int q0 = advance_forced(T.initial, pre);
    std::vector<int> pre_bits = encode_out(T.states[static_cast<std::size_t>(T.initial)].out_type, pre);

    struct Key {
        int q;
        std::vector<int> buf;
        bool operator<(const Key& o) const { return std::tie(q, buf) < std::tie(o.q, o.buf); }
    };
    std::map<Key, int> id;
    std::vector<Key> order;
    auto intern = [&](int q, std::vector<int> buf) {
        Key k{q, std::move(buf)};
        auto it = id.find(k);
        if (it != id.end()) return it->second;
        int nid = static_cast<int>(order.size());
        id[k] = nid;
        order.push_back(k);
        return nid;
    };
    B.initial = intern(q0, {});
    for (std::size_t k = 0; k < order.size(); ++k) {
        Key key = order[k];
        AsyncTransducer::State st;
        st.in_type = 0;
        st.out_type = 0;
        for (int b = 0; b < 2; ++b) {
            std::vector<int> buf = key.buf;
            buf.push_back(b);
            const auto& mstate = T.states[static_cast<std::size_t>(key.q)];
            int stype = simp.type_map[static_cast<std::size_t>(mstate.in_type)];
            const auto& codes = code.bits[static_cast<std::size_t>(stype)];
            int slot = -1;
            for (std::size_t s = 0; s < codes.size(); ++s)
                if (codes[s] == buf) slot = static_cast<int>(s);
            if (slot < 0) {
                st.next.push_back(intern(key.q, std::move(buf)));
                st.out.push_back({});
                continue;
            }
            std::vector<int> emitted = mstate.out[static_cast<std::size_t>(slot)];
            int q2 = mstate.next[static_cast<std::size_t>(slot)];
            q2 = advance_forced(q2, emitted);
            std::vector<int> bits = encode_out(mstate.out_type, emitted);
            st.next.push_back(intern(q2, {}));
            st.out.push_back(std::move(bits));
        }
        B.states.push_back(std::move(st));
    }
    if (!pre_bits.empty()) {
        // The machine may only emit on transitions: prepend the initial forced
        // output to every transition out of a duplicated initial state.
        AsyncTransducer::State init_copy = B.states[static_cast<std::size_t>(B.initial)];
        for (auto& w : init_copy.out) w.insert(w.begin(), pre_bits.begin(), pre_bits.end());
        B.states.push_back(std::move(init_copy));
        B.initial = static_cast<int>(B.states.size()) - 1;
    }
    validate_transducer(B);
    return B;
}

}  // namespace horotree
