#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "horotree/selfsimilar.hpp"
#include "horotree/sources.hpp"
#include "horotree/typing.hpp"

using namespace horotree;

namespace {
struct TilingFixture {
    LayeredGraph g = build_tiling_ball(4, 5, 11);
    Symmetry sym{g};
    AtomTree tree = build_atom_tree(g, 5, 4);
    Typing ty = classify_types(sym, tree, MorphismParams{});
    static const TilingFixture& get() {
        static TilingFixture fx;
        return fx;
    }
};
}  // namespace

TEST_CASE("square tiling classifies into four types") {
    const auto& fx = TilingFixture::get();
    REQUIRE(fx.ty.type_count() == 4);

    // Identify the types by their slot structure (names up to renaming).
    auto tg = type_graph_of(fx.ty);
    int tA = tg.root_type;
    REQUIRE(tg.out_degree(tA) == 10);

    auto multiset_of = [&](int t) {
        std::multiset<int> m(tg.slots[static_cast<std::size_t>(t)].begin(),
                             tg.slots[static_cast<std::size_t>(t)].end());
        return m;
    };
    // Root children: five of one type, five of another.
    std::map<int, int> root_counts;
    for (int t : tg.slots[static_cast<std::size_t>(tA)]) ++root_counts[t];
    REQUIRE(root_counts.size() == 2);
    int tB = -1, tC = -1;
    for (auto [t, c] : root_counts) {
        REQUIRE(c == 5);
        // B subdivides as {B, B, C}; C as {C, C, D}.
        if (multiset_of(t).count(t) == 2 && multiset_of(t).size() == 3) {
            // both have two self-children; distinguish by the third child
            int third = -1;
            for (int u : tg.slots[static_cast<std::size_t>(t)])
                if (u != t) third = u;
            if (third == tB || third == tC || third == tA) {
                tB = t;  // third child is another root-child type: this is B
            }
        }
    }
    // Work structurally instead: D is the unique out-degree-1 type.
    int tD = -1;
    for (int t = 0; t < fx.ty.type_count(); ++t)
        if (tg.out_degree(t) == 1) tD = t;
    REQUIRE(tD >= 0);
    // C is the type with D among its children.
    tC = -1;
    for (int t = 0; t < fx.ty.type_count(); ++t)
        for (int u : tg.slots[static_cast<std::size_t>(t)])
            if (u == tD && t != tD) tC = t;
    REQUIRE(tC >= 0);
    // B is the remaining root-child type.
    tB = -1;
    for (auto [t, c] : root_counts)
        if (t != tC) tB = t;
    REQUIRE(tB >= 0);

    SECTION("child structure matches the worked example") {
        CHECK(multiset_of(tA) == std::multiset<int>{tB, tB, tB, tB, tB, tC, tC, tC, tC, tC});
        CHECK(multiset_of(tB) == std::multiset<int>{tB, tB, tC});
        CHECK(multiset_of(tC) == std::multiset<int>{tC, tC, tD});
        CHECK(multiset_of(tD) == std::multiset<int>{tB});
    }

    SECTION("level-1 atoms alternate B and C around the base") {
        // Atoms containing an S_1 vertex are type B, corner-tipped ones type C.
        int nb = 0, nc = 0;
        for (const Atom& a : fx.tree.levels[1].atoms) {
            if (!a.infinite) continue;
            int t = fx.ty.type_of[1][static_cast<std::size_t>(a.index)];
            if (fx.g.layer[a.rep] == 1) {
                CHECK(t == tB);
                ++nb;
            } else {
                CHECK(t == tC);
                ++nc;
            }
        }
        CHECK(nb == 5);
        CHECK(nc == 5);
    }

    SECTION("types recur across levels") {
        std::set<int> at2, at5;
        for (const Atom& a : fx.tree.levels[2].atoms)
            if (a.infinite) at2.insert(fx.ty.type_of[2][static_cast<std::size_t>(a.index)]);
        for (const Atom& a : fx.tree.levels[5].atoms)
            if (a.infinite) at5.insert(fx.ty.type_of[5][static_cast<std::size_t>(a.index)]);
        CHECK(at2 == std::set<int>{tB, tC, tD});
        CHECK(at5 == std::set<int>{tB, tC, tD});
    }

    SECTION("stability: a shallower tree yields the same type graph") {
        auto tree4 = build_atom_tree(fx.g, 4, 4);
        auto ty4 = classify_types(fx.sym, tree4, MorphismParams{});
        CHECK(type_graph_of(ty4) == tg);
    }
}

TEST_CASE("markings are sound morphism witnesses") {
    const auto& fx = TilingFixture::get();
    // Every atom's marking must carry it onto its type rep, level-aligned.
    MorphismParams params;
    for (int n = 1; n <= 3; ++n)
        for (const Atom& a : fx.tree.levels[static_cast<std::size_t>(n)].atoms) {
            if (!a.infinite) continue;
            int t = fx.ty.type_of[static_cast<std::size_t>(n)][static_cast<std::size_t>(a.index)];
            auto [rl, ri] = fx.ty.type_rep[static_cast<std::size_t>(t)];
            const GroupElement& psi = fx.ty.marking[static_cast<std::size_t>(n)][static_cast<std::size_t>(a.index)];
            auto depth = verify_morphism(fx.sym, fx.tree, psi, n, a.index, rl, ri, params);
            CHECK(depth.has_value());
        }
}

TEST_CASE("geometric equivalences at level 1") {
    const auto& fx = TilingFixture::get();
    auto r = fx.sym.generator("r");
    const Atom& root = fx.tree.atom(0, 0);
    // r maps each level-1 atom to the one two slots around; same-parity atoms
    // are geometrically equivalent via powers of r.
    std::map<int, int> image_of;
    for (int ci : root.child_atoms) {
        const Atom& a = fx.tree.atom(1, ci);
        auto img = fx.sym.apply_batch(r, a.members);
        int target = -1;
        for (std::size_t i = 0; i < img.size(); ++i)
            if (img[i] != kNoVertex && fx.g.layer[img[i]] <= fx.tree.cert_limit) {
                target = fx.tree.levels[1].atom_of[img[i]];
                break;
            }
        REQUIRE(target >= 0);
        image_of[ci] = target;
    }
    SECTION("r induces geometric equivalences between level-1 atoms") {
        int checked = 0;
        for (auto [src, dst] : image_of) {
            auto pa = proximal_set(fx.tree, 1, src, 1);
            auto pb = proximal_set(fx.tree, 1, dst, 1);
            CHECK(check_geometric_equivalence(fx.sym, fx.tree, r, pa, pb, 3));
            ++checked;
        }
        CHECK(checked == 10);
    }
    SECTION("identity is a geometric self-equivalence") {
        int src = root.child_atoms[0];
        auto pa = proximal_set(fx.tree, 1, src, 1);
        CHECK(check_geometric_equivalence(fx.sym, fx.tree, fx.sym.identity(), pa, pa, 3));
    }
    SECTION("no level-1 atom is geometrically equivalent to a level-2 atom") {
        // P-sets are full spheres of different sizes here.
        int src = root.child_atoms[0];
        auto pa = proximal_set(fx.tree, 1, src, 1);
        const Atom& a1 = fx.tree.atom(1, src);
        for (int ci : a1.child_atoms) {
            auto pb = proximal_set(fx.tree, 2, ci, 1);
            for (const auto& germ : fx.sym.germs(fx.tree.atom(1, src).rep, fx.tree.atom(2, ci).rep))
                CHECK_FALSE(check_geometric_equivalence(fx.sym, fx.tree, germ, pa, pb, 3));
        }
    }
    SECTION("same-level morphism witnesses exist and are unique") {
        // Orientation-preserving isometries give exactly one morphism between
        // same-type atoms.
        MorphismParams params;
        int b1 = -1, b2 = -1;
        for (int ci : root.child_atoms) {
            if (fx.g.layer[fx.tree.atom(1, ci).rep] == 1) {
                if (b1 < 0)
                    b1 = ci;
                else if (b2 < 0)
                    b2 = ci;
            }
        }
        auto w = find_morphism(fx.sym, fx.tree, 1, b1, 1, b2, params);
        REQUIRE(w.has_value());
        // Count all candidate germs that verify.
        int count = 0;
        const Atom& A = fx.tree.atom(1, b1);
        const Atom& B = fx.tree.atom(1, b2);
        for (Vertex q : B.members) {
            if (fx.g.layer[q] != fx.g.layer[B.rep]) continue;
            for (const auto& germ : fx.sym.germs(A.rep, q))
                if (verify_morphism(fx.sym, fx.tree, germ, 1, b1, 1, b2, params)) ++count;
        }
        CHECK(count == 1);
    }
}

TEST_CASE("free group and line type graphs") {
    SECTION("free rank 2: two types") {
        auto f = build_free_ball(2, 9);
        Symmetry sym(f);
        auto tree = build_atom_tree(f, 4, 4);
        auto ty = classify_types(sym, tree, MorphismParams{});
        REQUIRE(ty.type_count() == 2);
        auto tg = type_graph_of(ty);
        CHECK(tg.out_degree(tg.root_type) == 4);
        int other = 1 - tg.root_type;
        CHECK(tg.out_degree(other) == 3);
        for (int u : tg.slots[static_cast<std::size_t>(other)]) CHECK(u == other);
        for (int u : tg.slots[static_cast<std::size_t>(tg.root_type)]) CHECK(u == other);
    }
    SECTION("line: root plus one chain type per end") {
        auto l = build_line_ball(10);
        Symmetry sym(l);
        auto tree = build_atom_tree(l, 4, 4);
        auto ty = classify_types(sym, tree, MorphismParams{});
        REQUIRE(ty.type_count() == 3);
        auto tg = type_graph_of(ty);
        CHECK(tg.out_degree(tg.root_type) == 2);
        for (int t = 0; t < 3; ++t)
            if (t != tg.root_type) {
                CHECK(tg.out_degree(t) == 1);
                CHECK(tg.slots[static_cast<std::size_t>(t)][0] == t);
            }
    }
}

TEST_CASE("type graph serialization round-trips") {
    const auto& fx = TilingFixture::get();
    auto tg = type_graph_of(fx.ty);
    auto text = tg.serialize();
    auto back = TypeGraph::parse(text);
    CHECK(back == tg);
    CHECK(tg.to_dot().find("digraph") == 0);

    SECTION("depth-0 classification yields a single type with no slots") {
        auto g0 = build_tiling_ball(4, 5, 6);
        Symmetry s0(g0);
        auto t0 = build_atom_tree(g0, 0, 4);
        auto ty0 = classify_types(s0, t0, MorphismParams{});
        auto tg0 = type_graph_of(ty0);
        CHECK(tg0.names.size() == 1);
        CHECK(tg0.slots[0].empty());
        CHECK(TypeGraph::parse(tg0.serialize()) == tg0);
    }
    SECTION("single-node graph for a depth-0 run") {
        TypeGraph single;
        single.root_type = 0;
        single.names = {"A"};
        single.slots = {{}};
        auto t2 = TypeGraph::parse(single.serialize());
        CHECK(t2 == single);
    }
}
