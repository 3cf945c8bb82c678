#include <doctest.h>

#include "xdv/errors.hpp"
#include "xdv/fixtures.hpp"
#include "xdv/gluing.hpp"
#include "xdv/retriangulate.hpp"
#include "xdv/solver.hpp"

#include <map>
#include <set>
#include <random>

using namespace xdv;

namespace {

std::vector<PillowSite> all_sites(const Triangulation& t) {
    std::vector<PillowSite> out;
    for (const auto& e : t.edges())
        for (int i = 0; i < e.valence; ++i)
            for (int j = 0; j < e.valence; ++j) out.push_back({e.id, i, j});
    return out;
}

/// Cusp a pair of endpoint vertices lies on, for each end of a local edge.
std::pair<int, int> end_cusps(const Triangulation& t, int tet, int le) {
    auto [a, b] = edge_ends(le);
    int x = t.cusp_of(tet, a), y = t.cusp_of(tet, b);
    return {std::min(x, y), std::max(x, y)};
}

void check_insertion(const Triangulation& t, const PillowSite& site) {
    const auto r = insert_pillow(t, site);
    const auto& n = r.triangulation;
    const auto& rec = r.record;
    CHECK(n.size() == t.size() + 2);
    CHECK(n.edges().size() == t.edges().size() + 2);
    CHECK(n.cusps().size() == t.cusps().size());
    CHECK(n.closed());
    CHECK(n.is_cusped_manifold() == t.is_cusped_manifold());
    CHECK(n.edges()[rec.diagonal].valence == 2);
    CHECK(rec.folded == effective_site(t, site).folded());
    if (rec.folded) CHECK(n.edges()[rec.up].valence == 1);
    // Each old edge keeps its old corners and gains exactly the new corners lying on its images.
    for (const auto& e : t.edges()) {
        std::set<int> ids(rec.edge_map[e.id].begin(), rec.edge_map[e.id].end());
        int total = 0, fresh = 0;
        for (int id : ids) total += n.edges()[id].valence;
        for (int tet : {rec.tet_a, rec.tet_b})
            for (int le = 0; le < 6; ++le) fresh += ids.count(n.edge_of(tet, le));
        CHECK(total == e.valence + fresh);
    }
    for (int i = 0; i < n.size(); ++i)
        for (int f = 0; f < 4; ++f) {
            const int m = n.tet(i).neighbor[f];
            const Perm& g = n.tet(i).gluing[f];
            CHECK(n.tet(m).neighbor[g[f]] == i);
            CHECK(n.tet(m).gluing[g[f]] == g.inverse());
            CHECK(g.sign() == -1);
        }
    // Splits keep their original's endpoints; cusp ids carry over through the old tets.
    std::map<int, int> cusp;
    for (int i = 0; i < t.size(); ++i)
        for (int v = 0; v < 4; ++v) cusp[t.cusp_of(i, v)] = n.cusp_of(i, v);
    for (const auto& e : t.edges()) {
        auto [x, y] = end_cusps(t, e.cycle[0].tet, e.cycle[0].edge());
        for (int id : rec.edge_map[e.id]) {
            const auto& c = n.edges()[id].cycle[0];
            auto [u, v] = end_cusps(n, c.tet, c.edge());
            const std::pair<int, int> mapped{std::min(cusp[x], cusp[y]), std::max(cusp[x], cusp[y])};
            CHECK(mapped == std::make_pair(u, v));
        }
    }
    CHECK(product(gluing_system(n)).trivial());
}

} // namespace

TEST_CASE("pillows on the figure-eight") {
    const auto t = figure_eight();
    for (const auto& s : all_sites(t)) check_insertion(t, s);
    const auto r = insert_pillow(t, {0, 0, 1});
    CHECK(r.triangulation.size() == 4);
    CHECK(r.triangulation.edges().size() == 4);
}

TEST_CASE("pillows on the bundle triangulations") {
    for (const auto& t : {llr_t4_triangulation(), llr_t5_triangulation()})
        for (const auto& s : all_sites(t)) check_insertion(t, s);
}

TEST_CASE("invalid sites") {
    const auto t = figure_eight();
    CHECK_THROWS_AS(insert_pillow(t, {5, 0, 0}), ValidationError);
    CHECK_THROWS_AS(insert_pillow(t, {0, 0, 6}), ValidationError);
}

TEST_CASE("crossing index finds each crossing from both sides") {
    const auto t = llr_t5_triangulation();
    for (const auto& e : t.edges()) {
        const int v = e.valence;
        for (int i = 0; i < v; ++i) {
            const Corner& c = e.cycle[i];
            const Corner& d = e.cycle[(i + 1) % v];
            CHECK(crossing_index(t, c.tet, c.v[2], c.edge()) == i);
            CHECK(crossing_index(t, d.tet, d.v[3], d.edge()) == i);
        }
    }
}

TEST_CASE("parent inverts children") {
    const auto split = split_inside_fixture();
    for (const auto& t : {figure_eight(), llr_t4_triangulation(), split.triangulation}) {
        const auto sels = enumerate_selections(t, 3);
        for (const auto& site : all_sites(t)) {
            const auto r = insert_pillow(t, site);
            Ball ball(r.triangulation);
            ball.expand(3);
            for (const auto& s : sels) {
                std::vector<EdgeSelection> kids;
                try {
                    kids = children(s, r.record, ball);
                } catch (const DomainError&) {
                    continue;
                }
                REQUIRE(!kids.empty());
                for (const auto& k : kids) CHECK(parent(k, r.record) == s);
                if (kids.size() == 2) {
                    std::vector<int> diff;
                    std::set_symmetric_difference(kids[0].e0.begin(), kids[0].e0.end(), kids[1].e0.begin(),
                                                  kids[1].e0.end(), std::back_inserter(diff));
                    CHECK(diff == std::vector<int>{r.record.diagonal});
                }
            }
            // When the diagonal closes up into a loop in the cover (always for a folded pillow), it
            // must be degenerate; otherwise the empty selection survives.
            if (sels.empty() || !sels[0].e0.empty()) continue;
            const auto empty_kids = children(EdgeSelection{}, r.record, ball);
            const auto loop = bad_loop_screen(EdgeSelection{}, ball);
            if (r.record.folded) CHECK(loop);
            if (loop) {
                CHECK(loop->quotient_edge == r.record.diagonal);
                REQUIRE(empty_kids.size() == 1);
                CHECK(empty_kids[0] == EdgeSelection({r.record.diagonal}));
            } else {
                CHECK(empty_kids[0] == EdgeSelection{});
            }
        }
    }
}

TEST_CASE("flank configurations decide the diagonal") {
    const auto fx = split_inside_fixture();
    const auto& t = fx.triangulation;
    const auto& sel = fx.selection;
    const auto c = classify(sel, t);
    int forced = 0, free_choice = 0;
    for (const auto& e : t.edges()) {
        if (!sel.in_e0(e.id)) continue;
        const int v = e.valence;
        for (int i = 0; i < v; ++i)
            for (int j = 0; j < v; ++j) {
                if (i == j) continue;
                const Corner ci = e.cycle[i], cj = e.cycle[j];
                const FaceType a = c.faces[ci.tet][ci.v[2]], b = c.faces[cj.tet][cj.v[2]];
                const auto r = insert_pillow(t, {e.id, i, j});
                if (r.record.folded) continue;
                const auto kids = children(sel, r.record, r.triangulation, 3);
                std::vector<int> base;
                for (int x : sel.e0)
                    for (int y : r.record.edge_map[x]) base.push_back(y);
                auto with_f = base;
                with_f.push_back(r.record.diagonal);
                if (a == FaceType::F21 && b == FaceType::F3) {
                    ++forced;
                    CHECK(kids.size() == 1);
                    CHECK_FALSE(kids[0].in_e0(r.record.diagonal));
                }
                if (a == FaceType::F21 && b == FaceType::F21) {
                    ++free_choice;
                    CHECK(locally_valid(EdgeSelection(base), r.triangulation));
                    CHECK(locally_valid(EdgeSelection(with_f), r.triangulation));
                }
            }
    }
    CHECK(forced > 0);
    CHECK(free_choice > 0);
}

TEST_CASE("pillow shapes extend a geometric solution") {
    const auto t = figure_eight();
    SolveConfig cfg;
    cfg.pins = {"z0 = z1"};
    const auto sys = pinned(to_rational_system(gluing_system(t), t.size()), cfg.pins);
    const auto sol = solve(sys, cfg);
    const std::vector<cplx> z(sol[0].x.begin(), sol[0].x.end());
    for (const auto& site : all_sites(t)) {
        if (effective_site(t, site).folded()) {
            CHECK_THROWS_AS(pillow_shapes(t, site, z), DomainError);
            continue;
        }
        const auto r = insert_pillow(t, site);
        const auto w = pillow_shapes(t, site, z);
        for (const auto& eq : gluing_system(r.triangulation)) CHECK(std::abs(eq.lhs(w) - 1.0) < 1e-9);
    }
}

TEST_CASE("strip search") {
    const auto fx = split_inside_fixture();
    const auto& t = fx.triangulation;
    Ball ball(t);
    ball.expand(2);
    // Adjacent faces across any edge give a two-face strip.
    auto s = find_strip(ball, {{0, 0}}, [](int, int, int) { return true; }, [](int) { return true; });
    CHECK(s.size() == 2);
    CHECK(s.links.size() == 1);
    CHECK_THROWS_AS(find_strip(ball, {{0, 0}}, [](int, int, int) { return true; }, [](int) { return false; }), DomainError);
    // Interior faces of a strip use different edges on their two sides.
    auto far = find_strip(ball, {{0, 0}}, [&](int l, int, int) { return ball.lift(l).depth >= 2; }, [](int) { return true; });
    for (int k = 1; k + 1 < far.size(); ++k) CHECK(far.links[k - 1].in_edge != far.links[k].out_edge);
    for (int k = 0; k + 1 < far.size(); ++k) {
        CHECK(t.edge_of(far.faces[k].tet, far.links[k].out_edge) == far.links[k].edge_class);
        CHECK(t.edge_of(far.faces[k + 1].tet, far.links[k].in_edge) == far.links[k].edge_class);
    }
}

TEST_CASE("pillows along a strip") {
    const auto fx = split_inside_fixture();
    const auto& t = fx.triangulation;
    const auto c = classify(fx.selection, t);
    Ball ball(t);
    ball.expand(3);
    std::vector<std::pair<int, int>> starts;
    for (int f = 0; f < 4; ++f)
        if (c.faces[0][f] == FaceType::F21) starts.push_back({0, f});
    REQUIRE(!starts.empty());
    auto strip = find_strip(
        ball, starts, [&](int l, int f, int) { return l != 0 && c.faces[ball.lift(l).tet][f] == FaceType::F21; },
        [&](int e) { return fx.selection.in_e0(e); });
    const auto r = insert_pillows_along_strip(t, {fx.selection}, 0, strip);
    CHECK(r.pillows + r.detours >= strip.size() - 1);
    if (r.detours == 0) CHECK(r.pillows == strip.size() - 1);
    CHECK(r.triangulation.size() == t.size() + 2 * r.pillows);
    for (const auto& d : r.descendants) CHECK(locally_valid(d, r.triangulation));
}

TEST_CASE("repair of a split inside region") {
    const auto fx = split_inside_fixture();
    const auto before = omnipresence(fx.selection, fx.triangulation, 4);
    CHECK(before.cond1 != Cond1::Proved);
    CHECK(before.ball_components >= 2);
    const auto r = make_omnipresent(fx.triangulation, fx.selection);
    CHECK(r.pillows > 0);
    CHECK(r.pillows <= 64);
    REQUIRE(!r.descendants.empty());
    for (const auto& d : r.descendants) CHECK(omnipresence(d, r.triangulation, 4).omnipresent());
    // Further pillows keep every descendant omnipresent.
    std::mt19937 rng(11);
    Triangulation cur = r.triangulation;
    auto desc = r.descendants;
    for (int step = 0; step < 3; ++step) {
        const auto& e = cur.edges()[rng() % cur.edges().size()];
        const PillowSite site{e.id, int(rng() % e.valence), int(rng() % e.valence)};
        auto ins = insert_pillow(cur, site);
        std::vector<EdgeSelection> next;
        for (const auto& d : desc)
            for (const auto& k : children(d, ins.record, ins.triangulation, 4)) next.push_back(k);
        cur = ins.triangulation;
        desc = next;
        for (const auto& d : desc) CHECK(omnipresence(d, cur, 4).omnipresent());
    }
}

TEST_CASE("repair leaves omnipresent input alone") {
    const auto t = llr_t5_triangulation();
    const auto r = make_omnipresent(t, EdgeSelection({llr_t5_valence3_edge()}));
    CHECK(r.pillows == 0);
    CHECK(r.descendants.size() == 1);
    CHECK(r.triangulation.size() == t.size());
}

TEST_CASE("repair needs a nondegenerate triangle") {
    CHECK_THROWS_AS(make_omnipresent(figure_eight(), EdgeSelection({0, 1})), DomainError);
}

TEST_CASE("repairing every selection of the figure-eight") {
    const auto r = make_all_omnipresent(figure_eight());
    for (const auto& s : r.selections) {
        const auto rep = omnipresence(s, r.triangulation, 4);
        if (rep.cond3) CHECK(rep.omnipresent());
    }
    const auto again = make_all_omnipresent(r.triangulation);
    CHECK(again.pillows == 0);
}
