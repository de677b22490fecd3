#pragma once

#include <algorithm>
#include <climits>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "horotree/atoms.hpp"
#include "horotree/core.hpp"
#include "horotree/group.hpp"
#include "horotree/typing.hpp"

namespace horotree {

// Asynchronous transducer over type-graph path languages. Input words are
// paths in in_types from the initial state's type; each transition emits a
// finite (possibly empty) continuation of the output path in out_types.
struct AsyncTransducer {
    TypeGraph in_types, out_types;
    struct State {
        int in_type = 0;
        int out_type = 0;
        std::vector<int> next;               // per input slot
        std::vector<std::vector<int>> out;   // per input slot
    };
    std::vector<State> states;
    int initial = 0;

    int state_count() const { return static_cast<int>(states.size()); }
};

inline AsyncTransducer identity_transducer(const TypeGraph& tg) {
    AsyncTransducer T;
    T.in_types = T.out_types = tg;
    T.states.resize(tg.names.size());
    for (std::size_t t = 0; t < tg.names.size(); ++t) {
        auto& st = T.states[t];
        st.in_type = st.out_type = static_cast<int>(t);
        for (std::size_t s = 0; s < tg.slots[t].size(); ++s) {
            st.next.push_back(tg.slots[t][s]);
            st.out.push_back({static_cast<int>(s)});
        }
    }
    T.initial = tg.root_type;
    return T;
}

// Structural soundness: transitions follow in_types, outputs are valid path
// continuations in out_types, and the machine has no reachable silent cycle.
inline void validate_transducer(const AsyncTransducer& T) {
    for (std::size_t q = 0; q < T.states.size(); ++q) {
        const auto& st = T.states[q];
        int deg = T.in_types.out_degree(st.in_type);
        if (static_cast<int>(st.next.size()) != deg || static_cast<int>(st.out.size()) != deg)
            fail_audit("transducer: transition arity mismatch at state " + std::to_string(q));
        for (int a = 0; a < deg; ++a) {
            if (T.states[static_cast<std::size_t>(st.next[a])].in_type != T.in_types.slots[st.in_type][a])
                fail_audit("transducer: input type discipline broken");
            int ot = st.out_type;
            for (int sym : st.out[a]) {
                if (sym < 0 || sym >= T.out_types.out_degree(ot))
                    fail_audit("transducer: output symbol invalid for its position");
                ot = T.out_types.slots[ot][static_cast<std::size_t>(sym)];
            }
            if (ot != T.states[static_cast<std::size_t>(st.next[a])].out_type)
                fail_audit("transducer: output type discipline broken");
        }
    }
}

inline bool nondegenerate(const AsyncTransducer& T) {
    // A reachable cycle of empty-output transitions makes some infinite input
    // produce a finite output.
    std::vector<int> color(T.states.size(), 0);  // 0 unseen, 1 on stack, 2 done
    std::vector<char> reach(T.states.size(), 0);
    {
        std::vector<int> q = {T.initial};
        reach[static_cast<std::size_t>(T.initial)] = 1;
        while (!q.empty()) {
            int u = q.back();
            q.pop_back();
            for (int v : T.states[static_cast<std::size_t>(u)].next)
                if (!reach[static_cast<std::size_t>(v)]) {
                    reach[static_cast<std::size_t>(v)] = 1;
                    q.push_back(v);
                }
        }
    }
    std::function<bool(int)> dfs = [&](int u) -> bool {
        color[static_cast<std::size_t>(u)] = 1;
        const auto& st = T.states[static_cast<std::size_t>(u)];
        for (std::size_t a = 0; a < st.next.size(); ++a) {
            if (!st.out[a].empty()) continue;
            int v = st.next[a];
            if (color[static_cast<std::size_t>(v)] == 1) return false;
            if (color[static_cast<std::size_t>(v)] == 0 && !dfs(v)) return false;
        }
        color[static_cast<std::size_t>(u)] = 2;
        return true;
    };
    for (std::size_t u = 0; u < T.states.size(); ++u)
        if (reach[u] && color[u] == 0 && !dfs(static_cast<int>(u))) return false;
    return true;
}

inline std::vector<int> evaluate(const AsyncTransducer& T, const std::vector<int>& input) {
    std::vector<int> out;
    int q = T.initial;
    for (int sym : input) {
        const auto& st = T.states[static_cast<std::size_t>(q)];
        if (sym < 0 || sym >= static_cast<int>(st.next.size()))
            fail_input("evaluate: input rejected (symbol " + std::to_string(sym) +
                       " invalid at type " + T.in_types.names[static_cast<std::size_t>(st.in_type)] + ")");
        out.insert(out.end(), st.out[static_cast<std::size_t>(sym)].begin(),
                   st.out[static_cast<std::size_t>(sym)].end());
        q = st.next[static_cast<std::size_t>(sym)];
    }
    return out;
}

// Pipeline composition: evaluate(compose(T1,T2), w) = evaluate(T2, evaluate(T1, w)).
inline AsyncTransducer compose(const AsyncTransducer& T1, const AsyncTransducer& T2) {
    if (!(T1.out_types == T2.in_types)) fail_input("compose: alphabet mismatch");
    AsyncTransducer R;
    R.in_types = T1.in_types;
    R.out_types = T2.out_types;

    std::map<std::pair<int, int>, int> id;
    std::vector<std::pair<int, int>> order;
    auto intern = [&](int q1, int q2) {
        auto key = std::make_pair(q1, q2);
        auto it = id.find(key);
        if (it != id.end()) return it->second;
        int nid = static_cast<int>(order.size());
        id[key] = nid;
        order.push_back(key);
        return nid;
    };
    if (T2.states[static_cast<std::size_t>(T2.initial)].in_type !=
        T1.states[static_cast<std::size_t>(T1.initial)].out_type)
        fail_input("compose: initial output/input types disagree");
    R.initial = intern(T1.initial, T2.initial);
    for (std::size_t k = 0; k < order.size(); ++k) {
        auto [q1, q2] = order[k];
        const auto& s1 = T1.states[static_cast<std::size_t>(q1)];
        AsyncTransducer::State st;
        st.in_type = s1.in_type;
        st.out_type = T2.states[static_cast<std::size_t>(q2)].out_type;
        for (std::size_t a = 0; a < s1.next.size(); ++a) {
            int r2 = q2;
            std::vector<int> emitted;
            for (int sym : s1.out[a]) {
                const auto& s2 = T2.states[static_cast<std::size_t>(r2)];
                if (sym >= static_cast<int>(s2.next.size()))
                    fail_audit("compose: intermediate word rejected by second machine");
                emitted.insert(emitted.end(), s2.out[static_cast<std::size_t>(sym)].begin(),
                               s2.out[static_cast<std::size_t>(sym)].end());
                r2 = s2.next[static_cast<std::size_t>(sym)];
            }
            st.next.push_back(intern(s1.next[a], r2));
            st.out.push_back(std::move(emitted));
        }
        R.states.push_back(std::move(st));  // order only grows, so index k is next
    }
    return R;
}

// Bounded equivalence: on every valid input word of length <= depth the two
// outputs must be prefix-compatible, and at full depth their lengths may
// differ by at most lag_tol (asynchronous machines can run ahead or behind).
inline bool bounded_equivalent(const AsyncTransducer& T1, const AsyncTransducer& T2, int depth,
                               int lag_tol = INT_MAX) {
    if (!(T1.in_types == T2.in_types) || !(T1.out_types == T2.out_types)) return false;
    if (T1.states[static_cast<std::size_t>(T1.initial)].in_type !=
        T2.states[static_cast<std::size_t>(T2.initial)].in_type)
        return false;

    struct Frame {
        int q1, q2, d;
        int ahead;               // >0: T1 ahead by |tail|; <0: T2 ahead
        std::vector<int> tail;   // unmatched surplus of the machine that is ahead
    };
    std::vector<Frame> stack;
    stack.push_back({T1.initial, T2.initial, 0, 0, {}});
    while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        if (f.d == depth) {
            if (static_cast<int>(f.tail.size()) > lag_tol) return false;
            continue;
        }
        const auto& s1 = T1.states[static_cast<std::size_t>(f.q1)];
        const auto& s2 = T2.states[static_cast<std::size_t>(f.q2)];
        for (std::size_t a = 0; a < s1.next.size(); ++a) {
            // Append the two emissions to the running surplus and re-match.
            std::vector<int> o1, o2;
            if (f.ahead >= 0) {
                o1 = f.tail;
            } else {
                o2 = f.tail;
            }
            o1.insert(o1.end(), s1.out[a].begin(), s1.out[a].end());
            o2.insert(o2.end(), s2.out[a].begin(), s2.out[a].end());
            std::size_t common = 0;
            while (common < o1.size() && common < o2.size() && o1[common] == o2[common]) ++common;
            if (common < o1.size() && common < o2.size()) return false;  // genuine mismatch
            Frame nf;
            nf.q1 = s1.next[a];
            nf.q2 = s2.next[a];
            nf.d = f.d + 1;
            if (o1.size() >= o2.size()) {
                nf.ahead = static_cast<int>(o1.size() - o2.size());
                nf.tail.assign(o1.begin() + static_cast<long>(common), o1.end());
            } else {
                nf.ahead = -static_cast<int>(o2.size() - o1.size());
                nf.tail.assign(o2.begin() + static_cast<long>(common), o2.end());
            }
            stack.push_back(std::move(nf));
        }
    }
    return true;
}

// Merges states with identical bounded behavior. States keep their input and
// output type annotations; refinement runs to a fixed point or `depth` rounds.
inline AsyncTransducer minimize(const AsyncTransducer& T, int depth) {
    std::vector<int> cls(T.states.size());
    std::map<std::pair<int, int>, int> seed;
    for (std::size_t q = 0; q < T.states.size(); ++q) {
        auto key = std::make_pair(T.states[q].in_type, T.states[q].out_type);
        auto it = seed.find(key);
        if (it == seed.end()) {
            int nid = static_cast<int>(seed.size());
            seed[key] = nid;
            cls[q] = nid;
        } else {
            cls[q] = it->second;
        }
    }
    for (int round = 0; round < depth; ++round) {
        std::map<std::vector<int>, int> sig_id;
        std::vector<int> next_cls(T.states.size());
        for (std::size_t q = 0; q < T.states.size(); ++q) {
            std::vector<int> sig;
            sig.push_back(cls[q]);
            for (std::size_t a = 0; a < T.states[q].next.size(); ++a) {
                sig.push_back(-1);
                for (int sym : T.states[q].out[a]) sig.push_back(sym);
                sig.push_back(-2);
                sig.push_back(cls[static_cast<std::size_t>(T.states[q].next[a])]);
            }
            auto it = sig_id.find(sig);
            if (it == sig_id.end()) {
                int nid = static_cast<int>(sig_id.size());
                sig_id[sig] = nid;
                next_cls[q] = nid;
            } else {
                next_cls[q] = it->second;
            }
        }
        bool changed = next_cls != cls;
        cls = std::move(next_cls);
        if (!changed) break;
    }
    // Canonical class ids in order of first occurrence along reachable states.
    AsyncTransducer R;
    R.in_types = T.in_types;
    R.out_types = T.out_types;
    std::vector<int> rep;
    std::vector<int> queue = {T.initial};
    std::vector<char> seen(T.states.size(), 0);
    seen[static_cast<std::size_t>(T.initial)] = 1;
    std::map<int, int> cls_new;
    for (std::size_t h = 0; h < queue.size(); ++h) {
        int q = queue[h];
        if (!cls_new.count(cls[static_cast<std::size_t>(q)])) {
            cls_new[cls[static_cast<std::size_t>(q)]] = static_cast<int>(rep.size());
            rep.push_back(q);
        }
        for (int v : T.states[static_cast<std::size_t>(q)].next)
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                queue.push_back(v);
            }
    }
    R.states.resize(rep.size());
    for (std::size_t k = 0; k < rep.size(); ++k) {
        const auto& st = T.states[static_cast<std::size_t>(rep[k])];
        auto& ns = R.states[k];
        ns.in_type = st.in_type;
        ns.out_type = st.out_type;
        for (std::size_t a = 0; a < st.next.size(); ++a) {
            ns.next.push_back(cls_new.at(cls[static_cast<std::size_t>(st.next[a])]));
            ns.out.push_back(st.out[a]);
        }
    }
    R.initial = cls_new.at(cls[static_cast<std::size_t>(T.initial)]);
    return R;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline std::string word_text(const std::vector<int>& w) {
    if (w.empty()) return "-";
    std::ostringstream out;
    for (std::size_t i = 0; i < w.size(); ++i) out << (i ? "," : "") << w[i];
    return out.str();
}

inline std::vector<int> parse_word_text(const std::string& s) {
    std::vector<int> w;
    if (s == "-") return w;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) w.push_back(std::stoi(tok));
    return w;
}

inline std::string serialize_transducer(const AsyncTransducer& T) {
    std::ostringstream out;
    out << "transducer states " << T.states.size() << " init " << T.initial << "\n";
    out << "intypes\n" << T.in_types.serialize() << "endtypes\n";
    out << "outtypes\n" << T.out_types.serialize() << "endtypes\n";
    for (std::size_t q = 0; q < T.states.size(); ++q) {
        out << "state " << q << " " << T.in_types.names[static_cast<std::size_t>(T.states[q].in_type)]
            << " " << T.out_types.names[static_cast<std::size_t>(T.states[q].out_type)] << "\n";
        for (std::size_t a = 0; a < T.states[q].next.size(); ++a)
            out << "trans " << q << " " << a << " " << T.states[q].next[a] << " "
                << word_text(T.states[q].out[a]) << "\n";
    }
    return out.str();
}

inline AsyncTransducer parse_transducer(const std::string& text) {
    AsyncTransducer T;
    std::istringstream in(text);
    std::string line, tag;
    if (!std::getline(in, line)) fail_input("transducer parse: empty input");
    std::size_t nstates = 0;
    {
        std::istringstream ls(line);
        std::string w1, w2, w4;
        if (!(ls >> w1 >> w2 >> nstates >> w4 >> T.initial) || w1 != "transducer")
            fail_input("transducer parse: bad header");
    }
    auto read_block = [&](const std::string& opener) {
        if (!std::getline(in, line) || line != opener) fail_input("transducer parse: expected " + opener);
        std::ostringstream block;
        while (std::getline(in, line) && line != "endtypes") block << line << "\n";
        return TypeGraph::parse(block.str());
    };
    T.in_types = read_block("intypes");
    T.out_types = read_block("outtypes");
    T.states.resize(nstates);
    std::map<std::string, int> in_id, out_id;
    for (std::size_t t = 0; t < T.in_types.names.size(); ++t) in_id[T.in_types.names[t]] = static_cast<int>(t);
    for (std::size_t t = 0; t < T.out_types.names.size(); ++t) out_id[T.out_types.names[t]] = static_cast<int>(t);
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        if (!(ls >> tag)) continue;
        if (tag == "state") {
            std::size_t q;
            std::string ti, to;
            if (!(ls >> q >> ti >> to) || q >= nstates) fail_input("transducer parse: bad state line");
            T.states[q].in_type = in_id.at(ti);
            T.states[q].out_type = out_id.at(to);
        } else if (tag == "trans") {
            std::size_t q, a;
            int nq;
            std::string w;
            if (!(ls >> q >> a >> nq >> w) || q >= nstates) fail_input("transducer parse: bad trans line");
            auto& st = T.states[q];
            if (st.next.size() != a) fail_input("transducer parse: transitions out of order");
            st.next.push_back(nq);
            st.out.push_back(parse_word_text(w));
        } else {
            fail_input("transducer parse: unknown tag '" + tag + "'");
        }
    }
    return T;
}

inline std::string transducer_to_dot(const AsyncTransducer& T) {
    std::ostringstream out;
    out << "digraph transducer {\n  rankdir=LR;\n";
    for (std::size_t q = 0; q < T.states.size(); ++q)
        out << "  q" << q << " [label=\"q" << q << ":"
            << T.in_types.names[static_cast<std::size_t>(T.states[q].in_type)]
            << (static_cast<int>(q) == T.initial ? "\",shape=doublecircle];\n" : "\"];\n");
    for (std::size_t q = 0; q < T.states.size(); ++q)
        for (std::size_t a = 0; a < T.states[q].next.size(); ++a) {
            out << "  q" << q << " -> q" << T.states[q].next[a] << " [label=\"" << a << "|";
            if (T.states[q].out[a].empty())
                out << "eps";
            else
                for (std::size_t i = 0; i < T.states[q].out[a].size(); ++i)
                    out << (i ? "," : "") << T.states[q].out[a][i];
            out << "\"];\n";
        }
    out << "}\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Synthesis of the boundary-action transducer of a group element.
// ---------------------------------------------------------------------------

struct SynthesisParams {
    int max_states = 512;
    int min_commute_samples = 1;
    // Cap on members used by the state-identity commutation check. A wrong
    // merge is caught loudly by the transition-consistency audit; a wrong
    // split only adds states that minimization removes.
    int max_commute_samples = 96;
};

struct SynthesisResult {
    AsyncTransducer machine;
    std::vector<std::vector<int>> state_of_atom;  // [level][atom index] -> state or -1
    std::vector<std::pair<int, int>> state_rep;   // state -> (level, index) of first atom
    std::vector<std::pair<int, int>> state_image;  // state -> image atom (level, index)
};

namespace detail {

struct AtomD {
    int level = 0;
    int index = 0;
    bool capped = false;
};

// Deepest tree atom whose member set contains every certified image of the
// atom's members. Shallow image vertices block descent, which is what keeps
// the output head aligned with the published machines.
inline AtomD descend_image(const AtomTree& tree, const std::vector<Vertex>& images, int from_level,
                           int from_index) {
    const LayeredGraph& g = *tree.graph;
    AtomD cur{from_level, from_index, false};
    for (Vertex y : images) {
        if (g.layer[y] < cur.level || tree.atom_index_of(cur.level, y) != cur.index)
            fail_divergence("synthesize: image escapes the current parent atom");
    }
    for (;;) {
        if (cur.level == tree.depth) {
            cur.capped = true;
            return cur;
        }
        const Atom& a = tree.atom(cur.level, cur.index);
        int child = -1;
        bool ok = true;
        for (Vertex y : images) {
            if (g.layer[y] < cur.level + 1) {
                ok = false;
                break;
            }
            int c = tree.atom_index_of(cur.level + 1, y);
            if (child == -1) child = c;
            if (c != child) {
                ok = false;
                break;
            }
        }
        if (!ok || child < 0) return cur;
        bool is_tree_child = false;
        for (int ci : a.child_atoms)
            if (ci == child) is_tree_child = true;
        if (!is_tree_child) return cur;  // images concentrate in a finite atom: stop
        cur.level += 1;
        cur.index = child;
    }
}

}  // namespace detail

inline SynthesisResult synthesize_action_transducer(const Symmetry& sym, const AtomTree& tree,
                                                    const Typing& ty, const TypeGraph& tg,
                                                    const GroupElement& g,
                                                    const SynthesisParams& params = {}) {
    const LayeredGraph& graph = sym.graph();
    auto gm_opt = sym.materialize(g);
    if (!gm_opt) fail_input("synthesize: element is not a graph automorphism germ");
    const std::vector<Vertex>& gm = *gm_opt;
    const int k = sym.magnitude(g);

    // Slot of each tree atom within its parent (canonical labels).
    std::vector<std::vector<int>> slot_of(tree.levels.size());
    for (std::size_t n = 0; n < tree.levels.size(); ++n)
        slot_of[n].assign(tree.levels[n].atoms.size(), -1);
    for (std::size_t n = 0; n + 1 < tree.levels.size(); ++n)
        for (std::size_t ai = 0; ai < tree.levels[n].atoms.size(); ++ai) {
            const auto& slots = ty.child_at_slot[n][ai];
            for (std::size_t s = 0; s < slots.size(); ++s)
                if (slots[s] >= 0) slot_of[n + 1][static_cast<std::size_t>(slots[s])] = static_cast<int>(s);
        }

    auto usable_images = [&](const Atom& a) {
        std::vector<Vertex> ys;
        ys.reserve(a.members.size());
        for (Vertex x : a.members) {
            Vertex y = gm[x];
            if (y != kNoVertex && graph.layer[y] <= tree.cert_limit) ys.push_back(y);
        }
        if (ys.empty()) fail_radius("synthesize: atom has no certified images");
        return ys;
    };

    struct StateRec {
        int a_lvl, a_idx, d_lvl, d_idx;
        int in_type, out_type, dlevel;
    };
    std::vector<StateRec> recs;
    std::vector<std::vector<int>> state_of(tree.levels.size());
    std::vector<std::vector<detail::AtomD>> d_of(tree.levels.size());
    for (std::size_t n = 0; n < tree.levels.size(); ++n) {
        state_of[n].assign(tree.levels[n].atoms.size(), -1);
        d_of[n].resize(tree.levels[n].atoms.size());
    }

    AsyncTransducer M;
    M.in_types = tg;
    M.out_types = tg;

    // Tries to identify (A, D) with an existing state through the rigid
    // morphisms: u maps the image atoms, v the source atoms, and u(g(x)) must
    // equal g(v(x)) on the state rep's members.
    auto match_state = [&](int a_lvl, int a_idx, const detail::AtomD& d) -> int {
        int in_t = ty.type_of[static_cast<std::size_t>(a_lvl)][static_cast<std::size_t>(a_idx)];
        int out_t = ty.type_of[static_cast<std::size_t>(d.level)][static_cast<std::size_t>(d.index)];
        for (std::size_t s = 0; s < recs.size(); ++s) {
            const StateRec& r = recs[s];
            if (r.in_type != in_t || r.out_type != out_t || r.dlevel != a_lvl - d.level) continue;
            if (r.a_lvl == a_lvl && r.a_idx == a_idx) return static_cast<int>(s);
            // v: rep atom -> this atom; u: rep image atom -> this image atom.
            const GroupElement& psi_a = ty.marking[static_cast<std::size_t>(a_lvl)][static_cast<std::size_t>(a_idx)];
            const GroupElement& psi_ra = ty.marking[static_cast<std::size_t>(r.a_lvl)][static_cast<std::size_t>(r.a_idx)];
            const GroupElement& psi_d = ty.marking[static_cast<std::size_t>(d.level)][static_cast<std::size_t>(d.index)];
            const GroupElement& psi_rd = ty.marking[static_cast<std::size_t>(r.d_lvl)][static_cast<std::size_t>(r.d_idx)];
            GroupElement v, u;
            try {
                v = sym.compose(sym.inverse(psi_a), psi_ra);
                u = sym.compose(sym.inverse(psi_d), psi_rd);
            } catch (const Error&) {
                continue;
            }
            // Sample near the tip: construction ids grow with the layer, so
            // the first members keep the transport searches local.
            const Atom& RA = tree.atom(r.a_lvl, r.a_idx);
            std::size_t take = std::min<std::size_t>(RA.members.size(),
                                                     static_cast<std::size_t>(params.max_commute_samples));
            std::vector<Vertex> sample(RA.members.begin(), RA.members.begin() + static_cast<long>(take));
            auto vx = sym.apply_batch(v, sample);
            std::vector<Vertex> gx(sample.size(), kNoVertex);
            for (std::size_t t = 0; t < sample.size(); ++t) gx[t] = gm[sample[t]];
            auto ugx = sym.apply_batch(u, gx);
            int checked = 0;
            bool ok = true;
            for (std::size_t t = 0; t < sample.size() && ok; ++t) {
                Vertex a = ugx[t];
                Vertex b = vx[t] == kNoVertex ? kNoVertex : gm[vx[t]];
                if (a == kNoVertex || b == kNoVertex) continue;
                if (a != b) ok = false;
                ++checked;
            }
            if (ok && checked >= params.min_commute_samples) return static_cast<int>(s);
        }
        return -1;
    };

    auto intern_state = [&](int a_lvl, int a_idx, const detail::AtomD& d) -> int {
        int found = match_state(a_lvl, a_idx, d);
        if (found >= 0) return found;
        StateRec r;
        r.a_lvl = a_lvl;
        r.a_idx = a_idx;
        r.d_lvl = d.level;
        r.d_idx = d.index;
        r.in_type = ty.type_of[static_cast<std::size_t>(a_lvl)][static_cast<std::size_t>(a_idx)];
        r.out_type = ty.type_of[static_cast<std::size_t>(d.level)][static_cast<std::size_t>(d.index)];
        r.dlevel = a_lvl - d.level;
        recs.push_back(r);
        if (static_cast<int>(recs.size()) > params.max_states)
            fail_divergence("synthesize: state count exceeded bound without closure");
        AsyncTransducer::State st;
        st.in_type = r.in_type;
        st.out_type = r.out_type;
        M.states.push_back(st);
        return static_cast<int>(recs.size()) - 1;
    };

    // Root.
    int root_idx = tree.levels[0].atom_of[graph.base];
    {
        const Atom& root = tree.atom(0, root_idx);
        auto ys = usable_images(root);
        detail::AtomD d = detail::descend_image(tree, ys, 0, root_idx);
        d_of[0][static_cast<std::size_t>(root_idx)] = d;
        state_of[0][static_cast<std::size_t>(root_idx)] = intern_state(0, root_idx, d);
        M.initial = state_of[0][static_cast<std::size_t>(root_idx)];
    }

    // Level sweep: transitions from every atom whose children are computed.
    // A capped image descent (stopped by the tree depth, not by a blocker)
    // leaves the image atom unknown; the subtree below it adds no states or
    // transitions, and its machine rows come from shallower instances.
    constexpr int kCapped = -2;
    for (int n = 0; n < tree.depth; ++n) {
        for (std::size_t ai = 0; ai < tree.levels[static_cast<std::size_t>(n)].atoms.size(); ++ai) {
            const Atom& A = tree.atom(n, static_cast<int>(ai));
            if (!A.infinite) continue;
            int sa = state_of[static_cast<std::size_t>(n)][ai];
            const auto& slots = ty.child_at_slot[static_cast<std::size_t>(n)][ai];
            if (sa == kCapped) {
                for (int ci : slots)
                    state_of[static_cast<std::size_t>(n) + 1][static_cast<std::size_t>(ci)] = kCapped;
                continue;
            }
            if (sa < 0) fail_divergence("synthesize: unreached atom in sweep");
            const detail::AtomD& dA = d_of[static_cast<std::size_t>(n)][ai];

            std::vector<int> next_row(slots.size(), -1);
            std::vector<std::vector<int>> out_row(slots.size());
            bool row_ok = !dA.capped;
            for (std::size_t s = 0; s < slots.size(); ++s) {
                int ci = slots[s];
                const Atom& C = tree.atom(n + 1, ci);
                auto ys = usable_images(C);
                detail::AtomD dC = detail::descend_image(tree, ys, dA.level, dA.index);
                if (dC.capped) {
                    state_of[static_cast<std::size_t>(n) + 1][static_cast<std::size_t>(ci)] = kCapped;
                    row_ok = false;
                    continue;
                }
                if (n + 1 >= k && dC.level < n + 1 - k)
                    fail_audit("synthesize: image atom above the mapping-triple level");
                d_of[static_cast<std::size_t>(n) + 1][static_cast<std::size_t>(ci)] = dC;
                int sc = intern_state(n + 1, ci, dC);
                state_of[static_cast<std::size_t>(n) + 1][static_cast<std::size_t>(ci)] = sc;
                next_row[s] = sc;
                // Output word: slot labels along the tree path dA -> dC.
                std::vector<int> w;
                int lvl = dC.level, idx = dC.index;
                while (lvl > dA.level) {
                    w.push_back(slot_of[static_cast<std::size_t>(lvl)][static_cast<std::size_t>(idx)]);
                    idx = tree.atom(lvl, idx).parent;
                    --lvl;
                }
                if (idx != dA.index)
                    fail_divergence("synthesize: image atom is not a descendant of the parent image");
                std::reverse(w.begin(), w.end());
                out_row[s] = std::move(w);
            }
            if (row_ok) {
                auto& st = M.states[static_cast<std::size_t>(sa)];
                if (st.next.empty()) {
                    st.next = next_row;
                    st.out = out_row;
                } else {
                    if (st.next != next_row || st.out != out_row)
                        fail_divergence("synthesize: transition mismatch between state instances (atom level " +
                                        std::to_string(n) + " index " + std::to_string(ai) + ")");
                }
            }
        }
    }

    // Closure: every state needs a full transition row.
    for (std::size_t s = 0; s < M.states.size(); ++s) {
        if (M.states[s].next.empty() && tg.out_degree(M.states[s].in_type) > 0) {
#ifdef HOROTREE_SYNTH_DEBUG
            for (std::size_t q = 0; q < recs.size(); ++q)
                std::fprintf(stderr, "q%zu A=(%d,%d) D=(%d,%d) types %d->%d row=%zu\n", q,
                             recs[q].a_lvl, recs[q].a_idx, recs[q].d_lvl, recs[q].d_idx,
                             recs[q].in_type, recs[q].out_type, M.states[q].next.size());
#endif
            fail_divergence("synthesize: state " + std::to_string(s) +
                            " has no transitions; increase the tree depth");
        }
    }
    if (static_cast<int>(M.states.size()) != static_cast<int>(recs.size()))
        fail_divergence("synthesize: internal state bookkeeping error");

    validate_transducer(M);
    if (!nondegenerate(M)) fail_audit("synthesize: machine is degenerate");

    SynthesisResult res;
    res.machine = std::move(M);
    res.state_of_atom = std::move(state_of);
    for (const auto& r : recs) {
        res.state_rep.emplace_back(r.a_lvl, r.a_idx);
        res.state_image.emplace_back(r.d_lvl, r.d_idx);
    }
    return res;
}

}  // namespace horotree
