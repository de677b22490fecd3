// Golden fixtures for the order-5 square tiling example: the published
// four-type graph and the boundary transducers of the two generators,
// transcribed rule by rule, plus the machinery for matching synthesized
// machines against them up to a relabeling of the type-graph slots.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "horotree/transducer.hpp"
#include "horotree/typing.hpp"

namespace horotree::golden {



inline TypeGraph published_type_graph() {
    TypeGraph tg;
    tg.root_type = 0;
    tg.names = {"A", "B", "C", "D"};
    tg.slots = {
        {1, 2, 1, 2, 1, 2, 1, 2, 1, 2},  // A
        {1, 2, 1},                        // B
        {2, 3, 2},                        // C
        {1},                              // D
    };
    return tg;
}

// State ids for the s machine.
enum PublishedState : int {
    S = 0, S0, S1, S9, F, FB, G, GB, H, HB, IDB, IDC, IDD, NSTATES
};

inline AsyncTransducer published_rotation() {
    TypeGraph tg = published_type_graph();
    AsyncTransducer T;
    T.in_types = T.out_types = tg;
    // states: 0 = initial (type A), 1 = id_B, 2 = id_C, 3 = id_D
    T.states.resize(4);
    T.states[0].in_type = 0;
    T.states[0].out_type = 0;
    for (int i = 0; i < 10; ++i) {
        T.states[0].next.push_back(i % 2 == 0 ? 1 : 2);
        T.states[0].out.push_back({(i + 2) % 10});
    }
    auto fill_id = [&](int q, int t) {
        T.states[static_cast<std::size_t>(q)].in_type = t;
        T.states[static_cast<std::size_t>(q)].out_type = t;
        for (std::size_t s = 0; s < tg.slots[static_cast<std::size_t>(t)].size(); ++s) {
            int target = tg.slots[static_cast<std::size_t>(t)][s];
            int next = target == 1 ? 1 : (target == 2 ? 2 : 3);
            T.states[static_cast<std::size_t>(q)].next.push_back(next);
            T.states[static_cast<std::size_t>(q)].out.push_back({static_cast<int>(s)});
        }
    };
    fill_id(1, 1);
    fill_id(2, 2);
    fill_id(3, 3);
    T.initial = 0;
    return T;
}

inline AsyncTransducer published_reflection() {
    TypeGraph tg = published_type_graph();
    AsyncTransducer T;
    T.in_types = T.out_types = tg;
    T.states.resize(NSTATES);
    auto set = [&](int q, int in_t, int out_t) {
        T.states[static_cast<std::size_t>(q)].in_type = in_t;
        T.states[static_cast<std::size_t>(q)].out_type = out_t;
        T.states[static_cast<std::size_t>(q)].next.assign(
            tg.slots[static_cast<std::size_t>(in_t)].size(), -1);
        T.states[static_cast<std::size_t>(q)].out.resize(
            tg.slots[static_cast<std::size_t>(in_t)].size());
    };
    auto tr = [&](int q, int slot, std::vector<int> w, int next) {
        T.states[static_cast<std::size_t>(q)].out[static_cast<std::size_t>(slot)] = std::move(w);
        T.states[static_cast<std::size_t>(q)].next[static_cast<std::size_t>(slot)] = next;
    };
    // s at the root (in A, out A)
    set(S, 0, 0);
    tr(S, 0, {}, S0);
    tr(S, 1, {}, S1);
    tr(S, 2, {9}, F);
    tr(S, 3, {9, 2}, IDC);
    tr(S, 4, {0, 0}, IDB);
    tr(S, 5, {0, 1}, IDC);
    tr(S, 6, {0, 2}, IDB);
    tr(S, 7, {1, 0}, IDC);
    tr(S, 8, {1}, FB);
    tr(S, 9, {}, S9);
    // s0: reads B-children, outputs root slots
    set(S0, 1, 0);
    tr(S0, 0, {4}, IDB);
    tr(S0, 1, {5}, IDC);
    tr(S0, 2, {6}, IDB);
    // s1: reads C-children, outputs root slots
    set(S1, 2, 0);
    tr(S1, 0, {7}, IDC);
    tr(S1, 1, {8}, H);
    tr(S1, 2, {8}, G);
    // s9
    set(S9, 2, 0);
    tr(S9, 0, {2}, GB);
    tr(S9, 1, {2}, HB);
    tr(S9, 2, {3}, IDC);
    // f: reads B-children, writes C-children
    set(F, 1, 2);
    tr(F, 0, {0}, F);
    tr(F, 1, {0, 2}, IDC);
    tr(F, 2, {1, 0}, IDB);
    // f-bar
    set(FB, 1, 2);
    tr(FB, 0, {1, 0}, IDB);
    tr(FB, 1, {2, 0}, IDC);
    tr(FB, 2, {2}, FB);
    // g: reads C-children, writes B-children
    set(G, 2, 1);
    tr(G, 0, {1}, IDC);
    tr(G, 1, {2}, H);
    tr(G, 2, {2}, G);
    // g-bar
    set(GB, 2, 1);
    tr(GB, 0, {0}, GB);
    tr(GB, 1, {0}, HB);
    tr(GB, 2, {1}, IDC);
    // h: reads the D-child, writes B-children
    set(H, 3, 1);
    tr(H, 0, {0}, IDB);
    // h-bar
    set(HB, 3, 1);
    tr(HB, 0, {2}, IDB);
    // identities
    set(IDB, 1, 1);
    tr(IDB, 0, {0}, IDB);
    tr(IDB, 1, {1}, IDC);
    tr(IDB, 2, {2}, IDB);
    set(IDC, 2, 2);
    tr(IDC, 0, {0}, IDC);
    tr(IDC, 1, {1}, IDD);
    tr(IDC, 2, {2}, IDC);
    set(IDD, 3, 3);
    tr(IDD, 0, {0}, IDB);
    T.initial = S;
    return T;
}




struct Relabeling {
    std::vector<int> type_map;               // source type -> target type
    std::vector<std::vector<int>> slot_map;  // [source type][source slot] -> target slot
};

inline AsyncTransducer relabel(const AsyncTransducer& T, const Relabeling& rl,
                               const TypeGraph& target) {
    AsyncTransducer R;
    R.in_types = R.out_types = target;
    R.initial = T.initial;
    R.states.resize(T.states.size());
    const TypeGraph& src = T.in_types;
    for (std::size_t q = 0; q < T.states.size(); ++q) {
        const auto& st = T.states[q];
        auto& ns = R.states[q];
        ns.in_type = rl.type_map[static_cast<std::size_t>(st.in_type)];
        ns.out_type = rl.type_map[static_cast<std::size_t>(st.out_type)];
        ns.next.assign(st.next.size(), -1);
        ns.out.resize(st.out.size());
        for (std::size_t a = 0; a < st.next.size(); ++a) {
            int a2 = rl.slot_map[static_cast<std::size_t>(st.in_type)][a];
            ns.next[static_cast<std::size_t>(a2)] = st.next[a];
            std::vector<int> w;
            int ot = st.out_type;
            for (int sym : st.out[a]) {
                w.push_back(rl.slot_map[static_cast<std::size_t>(ot)][static_cast<std::size_t>(sym)]);
                ot = src.slots[static_cast<std::size_t>(ot)][static_cast<std::size_t>(sym)];
            }
            ns.out[static_cast<std::size_t>(a2)] = std::move(w);
        }
    }
    return R;
}

// Exact output agreement on every valid input word of length <= depth.
inline bool exact_equal(const AsyncTransducer& T1, const AsyncTransducer& T2, int depth) {
    if (T1.states[static_cast<std::size_t>(T1.initial)].in_type !=
        T2.states[static_cast<std::size_t>(T2.initial)].in_type)
        return false;
    struct Frame { int q1, q2, d; };
    std::vector<Frame> stack = {{T1.initial, T2.initial, 0}};
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.d == depth) continue;
        const auto& s1 = T1.states[static_cast<std::size_t>(f.q1)];
        const auto& s2 = T2.states[static_cast<std::size_t>(f.q2)];
        if (s1.next.size() != s2.next.size()) return false;
        for (std::size_t a = 0; a < s1.next.size(); ++a) {
            if (s1.out[a] != s2.out[a]) return false;
            stack.push_back({s1.next[a], s2.next[a], f.d + 1});
        }
    }
    return true;
}

// Identifies the four tiling types structurally: root, the out-degree-1 type,
// the type holding it, and the remaining one.
inline std::optional<std::vector<int>> identify_tiling_types(const TypeGraph& mine,
                                                             const TypeGraph& target) {
    if (mine.names.size() != target.names.size()) return std::nullopt;
    auto classify = [](const TypeGraph& tg) {
        std::vector<int> kind(tg.names.size(), -1);  // 0 root, 3 D, 2 C, 1 B
        kind[static_cast<std::size_t>(tg.root_type)] = 0;
        int d = -1;
        for (std::size_t t = 0; t < tg.names.size(); ++t)
            if (tg.out_degree(static_cast<int>(t)) == 1) d = static_cast<int>(t);
        if (d < 0) return std::vector<int>{};
        kind[static_cast<std::size_t>(d)] = 3;
        for (std::size_t t = 0; t < tg.names.size(); ++t)
            for (int u : tg.slots[t])
                if (u == d && static_cast<int>(t) != d && kind[t] == -1) kind[t] = 2;
        for (std::size_t t = 0; t < tg.names.size(); ++t)
            if (kind[t] == -1) kind[t] = 1;
        return kind;
    };
    auto km = classify(mine);
    auto kp = classify(target);
    if (km.empty() || kp.empty()) return std::nullopt;
    std::vector<int> type_map(mine.names.size(), -1);
    for (std::size_t t = 0; t < km.size(); ++t) {
        for (std::size_t u = 0; u < kp.size(); ++u)
            if (kp[u] == km[t]) type_map[t] = static_cast<int>(u);
        if (type_map[t] < 0) return std::nullopt;
    }
    return type_map;
}

// Searches the slot relabelings compatible with the rotation machine and
// returns one under which both relabeled machines agree exactly with the
// published ones to the given depth.
inline std::optional<Relabeling> find_relabeling(const TypeGraph& mine, const AsyncTransducer& Tr,
                                                 const AsyncTransducer& Ts, const TypeGraph& target,
                                                 const AsyncTransducer& target_r,
                                                 const AsyncTransducer& target_s, int depth) {
    auto tm = identify_tiling_types(mine, target);
    if (!tm) return std::nullopt;
    Relabeling rl;
    rl.type_map = *tm;

    // Root permutation of the rotation machine: slot i emits one symbol pi(i).
    const auto& root = Tr.states[static_cast<std::size_t>(Tr.initial)];
    std::vector<int> pi(root.next.size(), -1);
    for (std::size_t a = 0; a < root.out.size(); ++a) {
        if (root.out[a].size() != 1) return std::nullopt;
        pi[a] = root.out[a][0];
    }
    // Cycles of pi on the two slot blocks of the root type.
    int my_root = mine.root_type;
    std::vector<int> bblock, cblock;
    for (std::size_t a = 0; a < mine.slots[static_cast<std::size_t>(my_root)].size(); ++a) {
        int ct = mine.slots[static_cast<std::size_t>(my_root)][a];
        if (rl.type_map[static_cast<std::size_t>(ct)] == 1)
            bblock.push_back(static_cast<int>(a));
        else
            cblock.push_back(static_cast<int>(a));
    }
    if (bblock.size() != 5 || cblock.size() != 5) return std::nullopt;
    auto cycle_from = [&](int start) {
        std::vector<int> cyc = {start};
        int cur = pi[static_cast<std::size_t>(start)];
        while (cur != start && cyc.size() <= 10) {
            cyc.push_back(cur);
            cur = pi[static_cast<std::size_t>(cur)];
        }
        return cyc;
    };
    auto bcyc = cycle_from(bblock[0]);
    auto ccyc = cycle_from(cblock[0]);
    if (bcyc.size() != 5 || ccyc.size() != 5) return std::nullopt;

    // Slot bijection options for B and C: their two same-type children can map
    // straight or swapped onto the published slots {0,2}; the odd child is slot 1.
    auto small_maps = [&](int t) {
        std::vector<std::vector<int>> res;
        const auto& slots = mine.slots[static_cast<std::size_t>(t)];
        if (slots.size() == 1) {
            res.push_back({0});
            return res;
        }
        std::vector<int> same, other;
        for (std::size_t a = 0; a < slots.size(); ++a) {
            if (rl.type_map[static_cast<std::size_t>(slots[a])] ==
                rl.type_map[static_cast<std::size_t>(mine.slots[static_cast<std::size_t>(t)][0])] &&
                slots[a] == slots[0])
                same.push_back(static_cast<int>(a));
            else
                other.push_back(static_cast<int>(a));
        }
        if (same.size() != 2 || other.size() != 1) return res;
        for (int flip = 0; flip < 2; ++flip) {
            std::vector<int> m(3, -1);
            m[static_cast<std::size_t>(same[0])] = flip ? 2 : 0;
            m[static_cast<std::size_t>(same[1])] = flip ? 0 : 2;
            m[static_cast<std::size_t>(other[0])] = 1;
            res.push_back(m);
        }
        return res;
    };

    int my_b = -1, my_c = -1, my_d = -1;
    for (std::size_t t = 0; t < rl.type_map.size(); ++t) {
        if (rl.type_map[t] == 1) my_b = static_cast<int>(t);
        if (rl.type_map[t] == 2) my_c = static_cast<int>(t);
        if (rl.type_map[t] == 3) my_d = static_cast<int>(t);
    }
    auto bmaps = small_maps(my_b);
    auto cmaps = small_maps(my_c);
    if (bmaps.empty() || cmaps.empty()) return std::nullopt;

    for (int pb = 0; pb < 5; ++pb) {
        for (int pc = 0; pc < 5; ++pc) {
            std::vector<int> amap(10, -1);
            for (int k = 0; k < 5; ++k) {
                amap[static_cast<std::size_t>(bcyc[static_cast<std::size_t>(k)])] = (2 * pb + 2 * k) % 10;
                amap[static_cast<std::size_t>(ccyc[static_cast<std::size_t>(k)])] = (2 * pc + 1 + 2 * k) % 10;
            }
            for (const auto& bm : bmaps) {
                for (const auto& cm : cmaps) {
                    rl.slot_map.assign(mine.names.size(), {});
                    rl.slot_map[static_cast<std::size_t>(my_root)] = amap;
                    rl.slot_map[static_cast<std::size_t>(my_b)] = bm;
                    rl.slot_map[static_cast<std::size_t>(my_c)] = cm;
                    rl.slot_map[static_cast<std::size_t>(my_d)] = {0};
                    auto rr = relabel(Tr, rl, target);
                    if (!exact_equal(rr, target_r, depth)) continue;
                    auto rsm = relabel(Ts, rl, target);
                    if (!exact_equal(rsm, target_s, depth)) continue;
                    return rl;
                }
            }
        }
    }
    return std::nullopt;
}


}  // namespace horotree::golden
