#include <doctest.h>

#include "xdv/errors.hpp"
#include "xdv/triangulation.hpp"
#include "xdv/union_find.hpp"

#include <algorithm>
#include <map>
#include <set>

using namespace xdv;

namespace {

/// Edge-slot orbits by plain union-find over unordered vertex pairs.
int brute_edge_count(const Triangulation& t, std::vector<int>* sizes = nullptr) {
    UnionFind uf(6 * t.size());
    for (int i = 0; i < t.size(); ++i)
        for (int f = 0; f < 4; ++f) {
            const int u = t.tet(i).neighbor[f];
            if (u < 0) continue;
            const Perm& p = t.tet(i).gluing[f];
            for (int a = 0; a < 4; ++a)
                for (int b = a + 1; b < 4; ++b)
                    if (a != f && b != f) uf.unite(6 * i + local_edge(a, b), 6 * u + local_edge(p[a], p[b]));
        }
    std::map<int, int> count;
    for (int s = 0; s < 6 * t.size(); ++s) ++count[uf.find(s)];
    if (sizes) {
        sizes->clear();
        for (auto [r, c] : count) sizes->push_back(c);
        std::sort(sizes->begin(), sizes->end());
    }
    return static_cast<int>(count.size());
}

Triangulation single_unglued() {
    return load_triangulation("tets 1\ntet 0 : -1 -1 -1 -1 | ---- ---- ---- ----\n");
}

} // namespace

TEST_CASE("perm basics") {
    Perm p = Perm::parse("1302");
    CHECK(p.str() == "1302");
    CHECK((p * p.inverse()) == Perm{});
    CHECK(Perm::parse("0132").sign() == -1);
    CHECK(Perm::parse("1230").sign() == -1);
    CHECK(Perm::parse("1032").sign() == 1);
    CHECK_THROWS_AS(Perm::parse("0012"), ParseError);
    CHECK_THROWS_AS(Perm::parse("01"), ParseError);
    for (int e = 0; e < 6; ++e) {
        auto [a, b] = edge_ends(e);
        CHECK(local_edge(a, b) == e);
        CHECK(shape_slot(e) == shape_slot(opposite_edge(e)));
        auto v = even_completion(a, b);
        CHECK(is_even(v));
        CHECK(v[0] == a);
        CHECK(v[1] == b);
    }
}

TEST_CASE("figure-eight classes") {
    Triangulation t = figure_eight();
    CHECK(t.size() == 2);
    CHECK(t.closed());
    std::vector<int> sizes;
    CHECK(brute_edge_count(t, &sizes) == 2);
    CHECK(sizes == std::vector<int>{6, 6});
    REQUIRE(t.edges().size() == 2);
    for (const auto& e : t.edges()) CHECK(e.valence == 6);
    REQUIRE(t.cusps().size() == 1);
    CHECK(t.cusps()[0].members.size() == 8);
    CHECK(t.link_euler_characteristic(0) == 0);
    CHECK(t.is_cusped_manifold());
    Homology h = first_homology(t);
    CHECK(h.rank == 1);
    CHECK(h.torsion.empty());
}

TEST_CASE("edge cycles close and partition the slots") {
    Triangulation t = figure_eight();
    std::set<std::pair<int, int>> seen;
    int total = 0;
    for (const auto& e : t.edges()) {
        total += e.valence;
        CHECK(t.next_corner(e.cycle.back()) == e.cycle.front());
        for (size_t i = 0; i + 1 < e.cycle.size(); ++i) CHECK(t.next_corner(e.cycle[i]) == e.cycle[i + 1]);
        for (const auto& c : e.cycle) {
            CHECK(is_even(c.v));
            CHECK(seen.insert({c.tet, c.edge()}).second);
            CHECK(t.edge_of(c.tet, c.edge()) == e.id);
        }
    }
    CHECK(total == 6 * t.size());
}

TEST_CASE("unglued tetrahedron") {
    Triangulation t = single_unglued();
    CHECK_FALSE(t.closed());
    CHECK(t.edges().size() == 6);
    for (const auto& e : t.edges()) {
        CHECK(e.valence == 1);
        CHECK(e.boundary);
    }
    CHECK(t.cusps().size() == 4);
    CHECK_THROWS_AS(t.require_closed("test"), ValidationError);
}

TEST_CASE("validation errors") {
    // tet 0 face 0 -> tet 1 face 0, but tet 1 does not glue back.
    CHECK_THROWS_AS(load_triangulation("tets 2\n"
                                       "tet 0 : 1 -1 -1 -1 | 0132 ---- ---- ----\n"
                                       "tet 1 : -1 -1 -1 -1 | ---- ---- ---- ----\n"),
                    ValidationError);
    // even permutation
    CHECK_THROWS_AS(load_triangulation("tets 2\n"
                                       "tet 0 : 1 -1 -1 -1 | 0123 ---- ---- ----\n"
                                       "tet 1 : 0 -1 -1 -1 | 0123 ---- ---- ----\n"),
                    ValidationError);
    CHECK_THROWS_AS(load_triangulation("tets 1\ntet 0 : 0 -1 -1 -1 | 0132\n"), ParseError);
    CHECK_THROWS_AS(load_triangulation("tet 0 : 0 -1 -1 -1 | 0132 ---- ---- ----\n"), ParseError);
    CHECK_THROWS_AS(load_triangulation("tets 2\ntet 0 : -1 -1 -1 -1 | ---- ---- ---- ----\n"), ParseError);
    try {
        load_triangulation("tets 1\n\nbogus\n");
        FAIL("expected parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
}

TEST_CASE("one-tetrahedron gluings") {
    // Enumerate every way to pair up or fold the four faces of one tetrahedron by odd maps.
    std::vector<Perm> odd;
    std::array<int, 4> p{0, 1, 2, 3};
    do {
        Perm q(p[0], p[1], p[2], p[3]);
        if (q.sign() == -1) odd.push_back(q);
    } while (std::next_permutation(p.begin(), p.end()));
    int found = 0, valid = 0;
    for (int code = 0; code < 12 * 12 * 12 * 12; ++code) {
        Tetrahedron T;
        T.neighbor = {0, 0, 0, 0};
        for (int f = 0, c = code; f < 4; ++f, c /= 12) T.gluing[f] = odd[c % 12];
        try {
            Triangulation t("one", {T});
            ++valid;
            CHECK(brute_edge_count(t) == static_cast<int>(t.edges().size()));
            if (t.edges().size() == 1) ++found;
        } catch (const ValidationError&) {
        }
    }
    CHECK(valid > 0);
    MESSAGE("one-tet gluings: " << valid << " valid, " << found << " with one edge");
    // Orientable gluings of one tetrahedron never close up to a single edge.
    CHECK(found == 0);
}

TEST_CASE("save and load round trip") {
    Triangulation t = figure_eight();
    Triangulation u = load_triangulation(save_triangulation(t), "fig8");
    for (int i = 0; i < t.size(); ++i) {
        CHECK(t.tet(i).neighbor == u.tet(i).neighbor);
        CHECK(t.tet(i).gluing == u.tet(i).gluing);
    }
    Triangulation s = single_unglued();
    CHECK(save_triangulation(load_triangulation(save_triangulation(s))) == save_triangulation(s));
}

TEST_CASE("2-3 and 3-2 moves") {
    Triangulation t = figure_eight();
    for (int tet = 0; tet < 2; ++tet)
        for (int f = 0; f < 4; ++f) {
            Triangulation u = two_three_move(t, tet, f);
            CHECK(u.size() == 3);
            CHECK(u.edges().size() == 3);
            CHECK(brute_edge_count(u) == 3);
            CHECK(u.is_cusped_manifold());
            Homology h = first_homology(u);
            CHECK(h.rank == 1);
            CHECK(h.torsion.empty());
            int back = 0;
            for (const auto& e : u.edges()) {
                if (e.valence != 3) continue;
                std::set<int> ts;
                for (const auto& c : e.cycle) ts.insert(c.tet);
                if (ts.size() != 3) continue;
                Triangulation w = three_two_move(u, e.id);
                CHECK(w.size() == 2);
                if (isomorphic(w, t)) ++back;
            }
            CHECK(back >= 1);
        }
    CHECK_THROWS_AS(two_three_move(single_unglued(), 0, 0), DomainError);
    CHECK_THROWS_AS(three_two_move(t, 0), DomainError);
}

TEST_CASE("isomorphism detects relabeling") {
    Triangulation t = figure_eight();
    std::vector<Tetrahedron> sw{t.tet(1), t.tet(0)};
    for (auto& T : sw)
        for (auto& n : T.neighbor) n = 1 - n;
    CHECK(isomorphic(Triangulation("swapped", sw), t));
    CHECK_FALSE(isomorphic(single_unglued(), t));
}
