// Acceptance suite: one check per stated criterion, each printing a PASS or
// FAIL line. Exits nonzero if any criterion fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>

#include "horotree/golden.hpp"
#include "horotree/pipeline.hpp"
#include "horotree/proximal.hpp"
#include "horotree/selfsimilar.hpp"
#include "horotree/verify.hpp"

using namespace horotree;

namespace {

int failures = 0;

void report(int k, bool ok, const std::string& what) {
    std::printf("CRITERION %2d %s %s\n", k, ok ? "PASS" : "FAIL", what.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

template <typename F>
void criterion(int k, const std::string& what, F&& f) {
    bool ok = false;
    std::string note;
    try {
        ok = f();
    } catch (const std::exception& e) {
        note = std::string(" [") + e.what() + "]";
    }
    report(k, ok, what + note);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
    using clock = std::chrono::steady_clock;

    // ---- Criteria 1-2: atom counts and sphere sizes at R=8, H=4 ----
    {
        auto t0 = clock::now();
        bool counts_ok = false, spheres_ok = false;
        double elapsed = 0;
        try {
            auto g = build_tiling_ball(4, 5, 8);
            auto tree = build_atom_tree(g, 2, 4);
            elapsed = seconds_since(t0);
            counts_ok = tree.levels[1].atoms.size() == 11 && tree.levels[1].infinite_count == 10 &&
                        tree.levels[2].atoms.size() == 36 && tree.levels[2].infinite_count == 30 &&
                        elapsed < 30.0;
            spheres_ok = g.sphere_at(1).size() == 5 && g.sphere_at(2).size() == 15;
        } catch (const std::exception& e) {
            std::printf("setup failure: %s\n", e.what());
        }
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "atom counts 11/10 and 36/30 at R=8 H=4 in %.2fs (< 30s)", elapsed);
        report(1, counts_ok, buf);
        report(2, spheres_ok, "sphere sizes |S1|=5, |S2|=15");
    }

    // ---- Main tiling pipeline (R=11, N=5, H=4) for criteria 3-6, 8, 10 ----
    RunConfig cfg;
    cfg.source = "tiling:4,5";
    cfg.radius = 11;
    cfg.depth = 5;
    cfg.horizon = 4;
    std::unique_ptr<Pipeline> P;
    try {
        P = build_pipeline(cfg);
    } catch (const std::exception& e) {
        std::printf("pipeline failure: %s\n", e.what());
        for (int k = 3; k <= 10; ++k) report(k, false, "pipeline unavailable");
        std::printf("SUMMARY %d criteria failed\n", failures);
        return failures == 0 ? 0 : 1;
    }

    SynthesisParams sp;
    AsyncTransducer Tr, Ts;
    std::optional<golden::Relabeling> relab;
    auto ptg = golden::published_type_graph();

    criterion(3, "type graph: 4 types, published child-slot multisets", [&] {
        if (P->typing.type_count() != 4) return false;
        auto tm = golden::identify_tiling_types(P->type_graph, ptg);
        if (!tm) return false;
        // Child-type multiset per type must match exactly under the map.
        for (std::size_t t = 0; t < P->type_graph.names.size(); ++t) {
            std::multiset<int> mine, theirs;
            for (int u : P->type_graph.slots[t]) mine.insert((*tm)[static_cast<std::size_t>(u)]);
            int pt = (*tm)[t];
            for (int u : ptg.slots[static_cast<std::size_t>(pt)]) theirs.insert(u);
            if (mine != theirs) return false;
        }
        return true;
    });

    criterion(4, "rotation transducer realizes the ten published prefix rules (depth 8)", [&] {
        Tr = synthesize_action_transducer(*P->sym, P->tree, P->typing, P->type_graph,
                                          P->sym->generator("r"), sp)
                 .machine;
        Ts = synthesize_action_transducer(*P->sym, P->tree, P->typing, P->type_graph,
                                          P->sym->generator("s"), sp)
                 .machine;
        relab = golden::find_relabeling(P->type_graph, Tr, Ts, ptg, golden::published_rotation(),
                                        golden::published_reflection(), 8);
        if (!relab) return false;
        auto rr = golden::relabel(minimize(Tr, 10), *relab, ptg);
        return golden::exact_equal(rr, golden::published_rotation(), 8) &&
               minimize(Tr, 10).state_count() == 4;
    });

    criterion(5, "reflection transducer: 13 classes and published rules (depth 8)", [&] {
        if (!relab) return false;
        if (minimize(Ts, 12).state_count() != 13) return false;
        auto rs = golden::relabel(Ts, *relab, ptg);
        if (!golden::exact_equal(rs, golden::published_reflection(), 8)) return false;
        // Spot rules: s(3 gamma) = 92 gamma, s(4 beta) = 00 beta on depth-8 words.
        std::function<bool(std::vector<int>&, int, int)> spot = [&](std::vector<int>& w, int t,
                                                                    int head) -> bool {
            if (w.size() == 8) {
                auto out = evaluate(rs, w);
                std::vector<int> expect = head == 3 ? std::vector<int>{9, 2} : std::vector<int>{0, 0};
                for (std::size_t i = 1; i < w.size(); ++i) expect.push_back(w[i]);
                return out == expect;
            }
            for (int s = 0; s < ptg.out_degree(t); ++s) {
                w.push_back(s);
                bool ok = spot(w, ptg.slots[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)],
                               head);
                w.pop_back();
                if (!ok) return false;
            }
            return true;
        };
        std::vector<int> w3 = {3}, w4 = {4};
        return spot(w3, 2, 3) && spot(w4, 1, 4);
    });

    criterion(6, "relation machines: r^5, s^2, (rs)^4 equal identity at depth 10", [&] {
        auto id = identity_transducer(P->type_graph);
        auto r5 = compose(compose(compose(compose(Tr, Tr), Tr), Tr), Tr);
        auto rs = compose(Tr, Ts);
        auto rs4 = compose(compose(rs, rs), compose(rs, rs));
        return bounded_equivalent(r5, id, 10, 0) && bounded_equivalent(compose(Ts, Ts), id, 10, 4) &&
               bounded_equivalent(rs4, id, 10, 8);
    });

    // ---- Criterion 7: homomorphism property on a deeper pipeline ----
    criterion(7, "homomorphism: compose(T_g,T_h) vs the machine of the composite (20 pairs, depth 6)",
              [&] {
        RunConfig c7;
        c7.source = "tiling:4,5";
        c7.radius = 12;
        c7.depth = 7;
        c7.horizon = 3;
        auto Q = build_pipeline(c7);
        std::mt19937 rng(424242);
        const char* letters[4] = {"r", "s", "r^-1", "s^-1"};
        auto random_word = [&](int len) {
            std::string w;
            for (int i = 0; i < len; ++i) {
                if (i) w += " ";
                w += letters[rng() % 4];
            }
            return w;
        };
        std::map<std::string, AsyncTransducer> memo;
        auto serialize_key = [](const GroupElement& e) {
            std::string k;
            if (e.kind == GroupElement::Kind::PlanarGerm) {
                k = "g:" + std::to_string(e.src_v) + "," + std::to_string(e.src_i) + "," +
                    std::to_string(e.dst_v) + "," + std::to_string(e.dst_i);
            } else {
                k = "w:";
                for (int x : e.word) k += std::to_string(x) + ".";
                k += "|";
                for (int x : e.perm) k += std::to_string(x) + ".";
            }
            return k;
        };
        auto machine_of = [&](const GroupElement& e) -> const AsyncTransducer& {
            auto key = serialize_key(e);
            auto it = memo.find(key);
            if (it != memo.end()) return it->second;
            auto res = synthesize_action_transducer(*Q->sym, Q->tree, Q->typing, Q->type_graph, e);
            return memo.emplace(key, std::move(res.machine)).first->second;
        };
        for (int t = 0; t < 20; ++t) {
            auto wg = random_word(1 + static_cast<int>(rng() % 3));
            auto wh = random_word(1 + static_cast<int>(rng() % 3));
            GroupElement g = Q->sym->from_word(wg);
            GroupElement h = Q->sym->from_word(wh);
            // compose(T_g, T_h) feeds T_g's output into T_h, realizing the
            // action of h after g, i.e. the element compose(h, g).
            GroupElement hg = Q->sym->compose(h, g);
            auto& Tg = machine_of(g);
            auto& Th = machine_of(h);
            auto& Thg = machine_of(hg);
            int lag = 2 * (Q->sym->magnitude(g) + Q->sym->magnitude(h)) + 2;
            if (!bounded_equivalent(compose(Tg, Th), Thg, 6, lag)) return false;
        }
        return true;
    });

    // ---- Criterion 8: property suites on the main pipeline ----
    criterion(8, "property suites: partition, singletons, N/V/P, membership, reconstruction", [&] {
        VerifyReport rep;
        std::mt19937 rng(11235);
        verify_atoms(*P, rep, rng);
        verify_proximal(*P, rep, rng);
        if (!rep.all_passed) return false;
        // Explicit extras at the stated scales.
        const LayeredGraph& g = P->graph;
        const AtomTree& tree = P->tree;
        for (int n = 0; n <= 3; ++n)
            for (const Atom& a : tree.levels[static_cast<std::size_t>(n)].atoms) {
                if (!a.infinite) continue;
                auto pd = proximal_set(tree, n, a.index, 1);
                std::vector<Vertex> sn(g.sphere_at(n).begin(), g.sphere_at(n).end());
                if (n == 0) sn = {g.base};
                if (pd.proximal != sn) return false;
            }
        for (int n = 0; n <= 5; ++n)
            for (const Atom& a : tree.levels[static_cast<std::size_t>(n)].atoms) {
                if (!a.infinite) continue;
                auto pd = proximal_set(tree, n, a.index, 1);
                if (!is_subset(pd.nearest, pd.visible) || !is_subset(pd.visible, pd.proximal))
                    return false;
                if (set_diameter(tree, pd.proximal) > 12) return false;
            }
        return true;
    });

    // ---- Criterion 9: degenerate sources ----
    criterion(9, "degenerate sources: free:2 and the line behave as expected", [&] {
        // free:2 -> 0-hyperbolic, 2-type graph, prefix-replacement generators.
        auto f = build_free_ball(2, 11);
        if (estimate_delta(f, 3) != 0) return false;
        Symmetry fsym(f);
        auto ftree = build_atom_tree(f, 6, 4);
        auto fty = classify_types(fsym, ftree, MorphismParams{});
        if (fty.type_count() != 2) return false;
        auto ftg = type_graph_of(fty);
        auto slot_of = slot_labels(ftree, fty);
        for (const auto& name : fsym.generator_names()) {
            auto res = synthesize_action_transducer(fsym, ftree, fty, ftg, fsym.generator(name));
            auto gm = fsym.materialize(fsym.generator(name));
            for (int n = 0; n <= 6; ++n)
                for (const Atom& a : ftree.levels[static_cast<std::size_t>(n)].atoms) {
                    if (!a.infinite) continue;
                    std::vector<Vertex> ys;
                    for (Vertex x : a.members) {
                        Vertex y = (*gm)[x];
                        if (y != kNoVertex && f.layer[y] <= ftree.cert_limit) ys.push_back(y);
                    }
                    std::vector<int> expect;
                    bool capped = false;
                    int lvl = 0, idx = ftree.levels[0].atom_of[f.base];
                    for (;;) {
                        if (lvl == ftree.depth) {
                            capped = true;
                            break;
                        }
                        int child = -2;
                        for (Vertex y : ys) {
                            int c = f.layer[y] < lvl + 1 ? -1 : ftree.atom_index_of(lvl + 1, y);
                            if (child == -2) child = c;
                            else if (child != c) child = -1;
                            if (child == -1) break;
                        }
                        if (child < 0) break;
                        bool is_child = false;
                        for (int ci : ftree.atom(lvl, idx).child_atoms)
                            if (ci == child) is_child = true;
                        if (!is_child) break;
                        expect.push_back(slot_of[static_cast<std::size_t>(lvl) + 1]
                                                [static_cast<std::size_t>(child)]);
                        idx = child;
                        ++lvl;
                    }
                    if (capped || n > 6) continue;
                    auto addr = atom_address(ftree, slot_of, n, a.index);
                    if (addr.size() <= 6 && evaluate(res.machine, addr) != expect) return false;
                }
        }
        // line -> two boundary points per level, expansion to binary branches,
        // translation machines equal the identity on the boundary.
        auto l = build_line_ball(12);
        if (estimate_delta(l, 4) != 0) return false;
        Symmetry lsym(l);
        auto ltree = build_atom_tree(l, 6, 4);
        for (int n = 1; n <= 6; ++n)
            if (ltree.levels[static_cast<std::size_t>(n)].infinite_count != 2) return false;
        auto lty = classify_types(lsym, ltree, MorphismParams{});
        auto ltg = type_graph_of(lty);
        auto ex = expand(ltg);
        if (ex.names.size() != 2 || ex.out_degree(ex.root_type) != 2) return false;
        int bin = 1 - ex.root_type;
        if (!(ex.slots[static_cast<std::size_t>(bin)] == std::vector<int>{bin, bin})) return false;
        auto lres = synthesize_action_transducer(lsym, ltree, lty, ltg, lsym.generator("t"));
        auto lid = identity_transducer(ltg);
        return bounded_equivalent(lres.machine, lid, 5, 2) && nondegenerate(lres.machine);
    });

    // ---- Criterion 10: binary pipeline ----
    criterion(10, "binary pipeline: addresses injective to depth 8; (binary r)^5 = id at bit depth 12",
              [&] {
        auto simp = simplify(P->type_graph);
        auto code = build_prefix_code(simp.graph);
        for (int len = 1; len <= 8; ++len) {
            std::set<std::vector<int>> addrs;
            std::size_t count = 0;
            std::function<void(std::vector<int>&, int)> walk = [&](std::vector<int>& chain, int t) {
                if (static_cast<int>(chain.size()) == len) {
                    addrs.insert(binary_address(P->type_graph, simp, code, chain));
                    ++count;
                    return;
                }
                for (int s = 0; s < P->type_graph.out_degree(t); ++s) {
                    chain.push_back(s);
                    walk(chain, P->type_graph.slots[static_cast<std::size_t>(t)]
                                                   [static_cast<std::size_t>(s)]);
                    chain.pop_back();
                }
            };
            std::vector<int> chain;
            walk(chain, P->type_graph.root_type);
            if (addrs.size() != count) return false;
        }
        auto binr = to_binary(Tr, simp, code);
        auto id_bits = identity_transducer(binary_type_graph());
        auto b5 = compose(compose(compose(compose(binr, binr), binr), binr), binr);
        return bounded_equivalent(b5, id_bits, 12, 9);
    });

    std::printf("SUMMARY %s: %d of 10 criteria passed\n", failures == 0 ? "OK" : "FAILED",
                10 - failures);
    return failures == 0 ? 0 : 1;
}
