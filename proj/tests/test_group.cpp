#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "horotree/group.hpp"
#include "horotree/sources.hpp"
#include "oracles.hpp"

using namespace horotree;

TEST_CASE("tiling generators and relations") {
    auto g = build_tiling_ball(4, 5, 7);
    Symmetry sym(g);
    auto r = sym.generator("r");
    auto s = sym.generator("s");
    auto id = sym.identity();

    SECTION("identity acts as identity") {
        auto m = sym.materialize(id);
        REQUIRE(m);
        for (Vertex v = 0; v < g.size(); ++v)
            if ((*m)[v] != kNoVertex) CHECK((*m)[v] == v);
    }

    SECTION("r fixes the base and cyclically permutes sphere 1") {
        CHECK(sym.apply(r, g.base) == g.base);
        CHECK(sym.magnitude(r) == 0);
        auto s1 = g.sphere_at(1);
        for (std::size_t i = 0; i < s1.size(); ++i)
            CHECK(sym.apply(r, s1[i]) == s1[(i + 1) % s1.size()]);
    }

    SECTION("relation r^5 = 1") {
        auto r5 = r;
        for (int i = 0; i < 4; ++i) r5 = sym.compose(r5, r);
        CHECK(sym.equal_on_ball(r5, id, 5));
    }

    SECTION("relation s^2 = 1 and |s| = 1") {
        CHECK(sym.equal_on_ball(sym.compose(s, s), id, 5));
        CHECK(sym.magnitude(s) == 1);
        CHECK(sym.equal_on_ball(sym.inverse(s), s, 5));
        CHECK(sym.equal_on_ball(sym.from_word("s s"), id, 5));
    }

    SECTION("relation (rs)^4 = 1") {
        auto rs = sym.compose(r, s);
        auto p = rs;
        for (int i = 0; i < 3; ++i) p = sym.compose(p, rs);
        CHECK(sym.equal_on_ball(p, id, 4));
        CHECK_FALSE(sym.equal_on_ball(rs, id, 4));
    }

    SECTION("word parsing") {
        auto w = sym.from_word("r s r^-1");
        auto direct = sym.compose(sym.compose(r, s), sym.inverse(r));
        CHECK(sym.equal_on_ball(w, direct, 4));
        CHECK(sym.equal_on_ball(sym.from_word("r^5"), id, 5));
        CHECK_THROWS_AS(sym.from_word("z"), Error);
    }

    SECTION("r and r^2 differ on sphere 1") {
        CHECK_FALSE(sym.equal_on_ball(r, sym.from_word("r^2"), 1));
    }

    SECTION("action is an isometry on sampled pairs") {
        std::mt19937 rng(4242);
        auto m = sym.materialize(s);
        REQUIRE(m);
        std::vector<Vertex> dom;
        for (Vertex v = 0; v < g.size(); ++v)
            if ((*m)[v] != kNoVertex && g.layer[v] <= 4) dom.push_back(v);
        for (int t = 0; t < 120; ++t) {
            Vertex a = dom[rng() % dom.size()];
            Vertex b = dom[rng() % dom.size()];
            auto od = oracle::bfs(g, a);
            auto od2 = oracle::bfs(g, (*m)[a]);
            CHECK(od.at(b) == od2.at((*m)[b]));
        }
    }

    SECTION("layer shift is bounded by the magnitude") {
        auto m = sym.materialize(s);
        REQUIRE(m);
        for (Vertex v = 0; v < g.size(); ++v)
            if ((*m)[v] != kNoVertex) {
                int shift = g.layer[(*m)[v]] - g.layer[v];
                CHECK(shift <= 1);
                CHECK(shift >= -1);
            }
    }

    SECTION("stabilizer of the base vertex is the five rotation powers") {
        auto st = sym.stabilizer_elements(g.base);
        REQUIRE(st.size() == 5);
        for (const auto& e : st) {
            bool is_power = false;
            for (int i = 0; i < 5; ++i)
                if (sym.equal_on_ball(e, sym.generator("r", i), 4)) is_power = true;
            CHECK(is_power);
        }
    }

    SECTION("magnitude is subadditive on 1000 random word pairs") {
        std::mt19937 rng(77);
        const char* names[2] = {"r", "s"};
        for (int t = 0; t < 1000; ++t) {
            GroupElement a = sym.identity(), b = sym.identity();
            for (int i = 0; i < 2; ++i) {
                a = sym.compose(a, sym.generator(names[rng() % 2]));
                b = sym.compose(b, sym.generator(names[rng() % 2]));
            }
            int ma = sym.magnitude(a), mb = sym.magnitude(b);
            int mab = sym.magnitude(sym.compose(a, b));
            CHECK(mab <= ma + mb);
            CHECK(sym.magnitude(sym.inverse(a)) == ma);
        }
    }
}

TEST_CASE("cayley actions") {
    SECTION("free group left multiplication") {
        auto f = build_free_ball(2, 6);
        Symmetry sym(f);
        auto a = sym.generator("a");
        auto b = sym.generator("b");
        CHECK(sym.magnitude(a) == 1);
        CHECK(sym.magnitude(sym.compose(a, b)) == 2);
        CHECK(sym.magnitude(sym.compose(a, sym.inverse(a))) == 0);
        CHECK(sym.equal_on_ball(sym.compose(a, sym.inverse(a)), sym.identity(), 4));
        // a then a^-1 from the left cancels on every vertex.
        Vertex w = f.sphere_at(3)[7];
        Vertex img = sym.apply(a, w);
        REQUIRE(img != kNoVertex);
        CHECK(sym.apply(sym.inverse(a), img) == w);
    }
    SECTION("free group base stabilizer is the signed letter permutations") {
        auto f = build_free_ball(2, 5);
        Symmetry sym(f);
        CHECK(sym.stabilizer_elements(f.base).size() == 8);
    }
    SECTION("line translation") {
        auto l = build_line_ball(8);
        Symmetry sym(l);
        auto t = sym.generator("t");
        CHECK(sym.magnitude(t) == 1);
        CHECK(sym.equal_on_ball(sym.compose(t, sym.inverse(t)), sym.identity(), 6));
        auto t3 = sym.from_word("t^3");
        Vertex v = l.label_index.at(static_cast<std::uint64_t>((1ll << 31) + 2));
        Vertex img = sym.apply(t3, v);
        REQUIRE(img != kNoVertex);
        CHECK(l.label[img] == static_cast<std::uint64_t>((1ll << 31) + 5));
    }
}

TEST_CASE("file sources have no symmetry") {
    std::istringstream in("base 0\nedge 0 1\nedge 1 2\nedge 2 0\n");
    auto g = build_file_ball(in, 2, 0);
    Symmetry sym(g);
    CHECK_FALSE(sym.available());
    CHECK_THROWS_AS(sym.generator("r"), Error);
}
