#include <doctest.h>

#include "xdv/extended.hpp"
#include "xdv/fixtures.hpp"
#include "xdv/gluing.hpp"
#include "xdv/series.hpp"
#include "xdv/solver.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <set>

using namespace xdv;

namespace {

cplx rc(std::mt19937& g) {
    std::normal_distribution<double> n;
    return {n(g), n(g)};
}

Series random_series(std::mt19937& g, int order) {
    std::vector<cplx> c(series_settings().width);
    for (auto& x : c) x = rc(g);
    while (std::abs(c[0]) < 0.3) c[0] = rc(g);
    return Series::from_coeffs(order, c);
}

TetClass tet_class(TetType type, std::vector<int> e0) {
    TetClass c;
    c.type = type;
    c.e0_local = std::move(e0);
    return c;
}

/// Random data for every tetrahedron, kept away from 0 and 1.
std::vector<std::vector<cplx>> random_angles(const Classification& cls, std::mt19937& g) {
    std::vector<std::vector<cplx>> v;
    for (const auto& c : cls.tets) {
        v.emplace_back();
        for (int k = 0; k < variable_count(c.type); ++k) v.back().push_back(std::polar(0.5 + std::abs(rc(g)), 3.0 * rc(g).real()));
    }
    return v;
}

/// A solution of the reference system: p, q free, r = -p-q, i a root of p i^2 + q i - q, j = 1/i.
std::map<std::string, cplx> reference_solution(cplx p, cplx q) {
    const cplx i = (-q + std::sqrt(q * q + 4.0 * p * q)) / (2.0 * p);
    return {{"i", i}, {"j", 1.0 / i}, {"p", p}, {"q", q}, {"r", -p - q}};
}

RationalSystem t5_system(std::uint64_t seed = 1) {
    ExtendedConfig cfg;
    cfg.tet_names = llr_t5_names();
    cfg.anchor_seed = seed;
    return consistency_system(llr_t5_triangulation(), EdgeSelection({llr_t5_valence3_edge()}), cfg);
}

} // namespace

TEST_CASE("dihedral data per type") {
    const std::vector<cplx> two{2.0};
    const auto t1111 = tet_class(TetType::T1111, {});
    CHECK(std::abs(dihedral(t1111, 0, two).x.lead - 2.0) < 1e-15);
    CHECK(std::abs(dihedral(t1111, 3, two).x.lead - 0.5) < 1e-15);
    CHECK(std::abs(dihedral(t1111, 1, two).x.lead + 1.0) < 1e-15);
    CHECK(dihedral(t1111, 5, two).x.order == 0);

    // 211 with E0 = 01: the three slots carry q, -1/q and 1 at orders 1, -1, 0.
    const cplx q(0.3, 1.7);
    const auto t211 = tet_class(TetType::T211, {0});
    CHECK(preferred_slot(t211) == 1);
    const auto a = dihedral(t211, 2, std::vector<cplx>{q});  // 03, slot 1
    const auto b = dihedral(t211, 1, std::vector<cplx>{q});  // 02, slot 2
    const auto c = dihedral(t211, 5, std::vector<cplx>{q});  // 23, slot 0
    CHECK(a.x.order == 1);
    CHECK(std::abs(a.x.lead - q) < 1e-15);
    CHECK(b.x.order == -1);
    CHECK(std::abs(b.x.lead + 1.0 / q) < 1e-15);
    CHECK(c.x.order == 0);
    CHECK(std::abs(c.x.lead - 1.0) < 1e-15);
    CHECK_THROWS_AS(dihedral(t211, 0, std::vector<cplx>{q}), DomainError);

    const auto t22 = tet_class(TetType::T22, {1, 4});
    CHECK(dihedral(t22, 0, std::vector<cplx>{q}).x.order == 2);
    CHECK(dihedral(t22, 2, std::vector<cplx>{q}).x.order == -2);

    // 31 with E0 on face 012: angles at 03, 13, 23 multiply to -1.
    const auto t31 = tet_class(TetType::T31, {0, 1, 3});
    const std::vector<cplx> zz{cplx(1.2, 0.4), cplx(-0.7, 2.0)};
    cplx prod = 1;
    for (int e : {2, 4, 5}) {
        const auto d = dihedral(t31, e, zz);
        CHECK(d.x.order == 0);
        prod *= d.x.lead;
    }
    CHECK(std::abs(prod + 1.0) < 1e-14);
    CHECK_THROWS_AS(dihedral(tet_class(TetType::T4, {0, 1, 2, 3, 4, 5}), 0, std::vector<cplx>{}), DomainError);
}

TEST_CASE("dihedral data are the leading terms of the degenerating shapes") {
    std::mt19937 g(3);
    for (TetType type : {TetType::T211, TetType::T22})
        for (int e0 = 0; e0 < 6; ++e0) {
            const int k = type == TetType::T211 ? 1 : 2;
            const auto c = type == TetType::T211 ? tet_class(type, {e0}) : tet_class(type, {std::min(e0, 5 - e0), std::max(e0, 5 - e0)});
            const cplx z = rc(g);
            const Series w = Series::monomial(z, k);
            for (int e = 0; e < 6; ++e) {
                if (e == e0 || (type == TetType::T22 && e == 5 - e0)) continue;
                const int r = (shape_slot(e) - preferred_slot(c) + 3) % 3;
                const Series exact = r == 0 ? w : r == 1 ? (w - Series(1)) / w : Series(1) / (Series(1) - w);
                const auto d = dihedral(c, e, std::vector<cplx>{z});
                CHECK(d.x.order == exact.order());
                CHECK(std::abs(d.x.lead - exact.leading()) < 1e-12 * std::abs(exact.leading()));
                const Series m1 = exact - Series(1);
                CHECK(d.xm1.order == m1.order());
                CHECK(std::abs(d.xm1.lead - m1.leading()) < 1e-12 * std::abs(m1.leading()));
            }
        }
}

TEST_CASE("develop step agrees with the lowest-order rule and with full development") {
    std::mt19937 g(41);
    int ok = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        Series a = random_series(g, 0), b = random_series(g, 0), c = random_series(g, 0);
        const int kind = trial % 4;
        if (kind == 1) b = a + random_series(g, 1);
        if (kind == 2) c = a + random_series(g, 1);
        if (kind == 3) c = b + random_series(g, 1);
        if (!is_domestic(a, b, c)) continue;
        const int r = trial % 3;
        const cplx z = rc(g);
        const Series w = Series::monomial(z, trial % 7 == 0 ? 0 : 1) + (trial % 7 == 0 ? Series(0.5) : Series(0));
        const Series x = r == 0 ? w : r == 1 ? (w - Series(1)) / w : Series(1) / (Series(1) - w);
        Series d;
        try {
            d = develop_fourth(a, b, c, x);
        } catch (const Error&) {
            continue;
        }
        auto leading = [](const Series& s) { return Leading<cplx>{s.order(), s.leading()}; };
        DevelopInput<cplx> in{a.coeff(0), b.coeff(0), c.coeff(0), leading(a - b), leading(a - c), leading(b - c),
                              {leading(x), leading(x - Series(1))}};
        if (d.order() < 0) {
            CHECK_THROWS_AS(develop_step(in), DevelopError);
            continue;
        }
        // An angle tending to 1 sits on the edge opposite an E0 edge, whose ends stay apart.
        if (in.z.xm1.order > 0 && in.ab.order > 0) continue;
        const auto out = develop_step(in);
        auto same = [](const Leading<cplx>& l, const Series& s) {
            return l.order == s.order() && std::abs(l.lead - s.leading()) <= 1e-8 * std::abs(s.leading());
        };
        CHECK(same(out.da, d - a));
        CHECK(same(out.db, d - b));
        CHECK(same(out.dc, d - c));
        CHECK(std::abs(out.d - d.coeff(0)) < 1e-8);
        if (x.order() != 0 || std::abs(x.leading() - 1.0) > 1e-6) {
            const auto ref = lowest_order_develop({{false, in.a}, {false, in.b}, {false, in.c}, {in.ab.order, in.ab.lead},
                                                   {in.ac.order, in.ac.lead}, {in.bc.order, in.bc.lead},
                                                   {x.order(), x.leading()}});
            CHECK(std::abs(ref.d.value - out.d) < 1e-12 * (1 + std::abs(out.d)));
            CHECK(ref.dc.order == out.dc.order);
        }
        ++ok;
    }
    CHECK(ok > 500);
}

TEST_CASE("angle 1 at order 0 develops onto the opposite vertex") {
    DevelopInput<cplx> in{0.0, 1.0, 2.0, {0, -1.0}, {0, -2.0}, {0, -1.0}, {{0, 1.0}, {1, 3.0}}};
    const auto out = develop_step(in);
    CHECK(out.d == cplx(2));
    CHECK(out.dc.order == 1);
    CHECK(std::abs(out.dc.lead - 6.0) < 1e-15);
    CHECK(out.da.order == 0);
}

TEST_CASE("empty selection gives the gluing equations") {
    const Triangulation t = figure_eight();
    const RationalSystem ext = consistency_system(t, EdgeSelection{});
    const RationalSystem glu = to_rational_system(gluing_system(t), t.size());
    REQUIRE(ext.variables() == glu.variables());
    REQUIRE(ext.equations().size() == glu.equations().size());
    CHECK(ext.header.size() == 2);
    CHECK(ext.header[0] == "var z0 : 1111 tet 0");
    std::mt19937 g(8);
    for (int k = 0; k < 50; ++k) {
        Eigen::VectorXcd x(2);
        x << std::polar(0.5 + std::abs(rc(g)), rc(g).real()), std::polar(0.5 + std::abs(rc(g)), rc(g).real());
        const Eigen::VectorXcd d = ext.residual(x) - glu.residual(x);
        CHECK(d.cwiseAbs().maxCoeff() < 1e-9 * (1 + glu.residual(x).cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("loops inside one lift close for every type") {
    std::mt19937 g(12);
    std::set<TetType> seen;
    std::vector<Triangulation> ts{figure_eight(), llr_t4_triangulation(), llr_t5_triangulation()};
    for (const auto& t : ts)
        for (const auto& sel : enumerate_selections(t, 2)) {
            const Classification cls = classify(sel, t);
            Ball ball(t, 0);
            ball.expand(1);
            for (int L = 0; L < ball.size(); ++L) {
                if (!ball.alive(L)) continue;
                const int tet = ball.lift(L).tet;
                if (cls.tets[tet].type == TetType::T4) continue;
                std::vector<int> faces;
                for (int f = 0; f < 4; ++f)
                    if (cls.faces[tet][f] != FaceType::F3) faces.push_back(f);
                // Every closed walk f0 -> f1 -> f2 -> f0 through E+ edges.
                auto plus = [&](int f, int h) { return !sel.in_e0(t.edge_of(tet, GEdge{tet, f, h}.shared_edge())); };
                for (int f0 : faces)
                    for (int f1 : faces)
                        for (int f2 : faces) {
                            if (f0 == f1 || f1 == f2 || f2 == f0) continue;
                            if (!plus(f0, f1) || !plus(f1, f2) || !plus(f2, f0)) continue;
                            const auto data = random_angles(cls, g);
                            const std::array<cplx, 3> pts{rc(g), rc(g), rc(g)};
                            const auto start = anchor_triangle(ball, sel, L, f0, pts, rc(g));
                            const auto end = develop_along(ball, cls, sel, data, start,
                                                           {{L, f0, f1}, {L, f1, f2}, {L, f2, f0}});
                            for (int i = 0; i < 3; ++i) {
                                CHECK(std::abs(end.pos[end.index(start.ids[i])] - start.pos[i]) < 1e-9);
                                for (int j = i + 1; j < 3; ++j) {
                                    const auto d0 = start.difference(start.ids[i], start.ids[j]);
                                    const auto d1 = end.difference(start.ids[i], start.ids[j]);
                                    CHECK(d0.order == d1.order);
                                    CHECK(std::abs(d0.lead - d1.lead) < 1e-9 * std::abs(d0.lead));
                                }
                            }
                            seen.insert(cls.tets[tet].type);
                        }
            }
        }
    for (TetType ty : seen) MESSAGE("closed within " << to_string(ty));
    CHECK(seen.count(TetType::T1111));
    CHECK(seen.count(TetType::T211));
}

TEST_CASE("valence-3 selection on the five-tetrahedron bundle matches the reference system") {
    const RationalSystem sys = t5_system();
    const RationalSystem ref = fixture_system("llr-extended");
    CHECK(sys.variables() == std::vector<std::string>{"i", "j", "p", "q", "r"});
    std::mt19937 g(2);
    for (int k = 0; k < 10; ++k) {
        const auto a = reference_solution(rc(g), rc(g));
        REQUIRE(max_residual(ref, a) < 1e-10);
        CHECK(max_residual(sys, a) < 1e-9);
        auto off = a;
        off["r"] *= 1.1;
        CHECK(max_residual(sys, off) > 1e-3);
    }
    SolveConfig sc;
    sc.restarts = 12;
    const auto samples = solve(sys, sc);
    for (const auto& s : samples) {
        CHECK(max_residual(ref, s.assignment) < 1e-9);
        CHECK(dimension_estimate(sys, s) == 2);
    }
}

TEST_CASE("closure equations do not depend on the anchor") {
    const RationalSystem a = t5_system(1), b = t5_system(99);
    REQUIRE(a.equations().size() == b.equations().size());
    std::mt19937 g(4);
    for (int k = 0; k < 10; ++k) {
        Eigen::VectorXcd x(5);
        for (int i = 0; i < 5; ++i) x[i] = std::polar(0.5 + std::abs(rc(g)), 3.0 * rc(g).real());
        const Eigen::VectorXcd ra = a.residual(x), rb = b.residual(x);
        for (int i = 0; i < ra.size(); ++i) CHECK(std::abs(ra[i] - rb[i]) < 1e-9 * (1 + std::abs(ra[i])));
    }
}

TEST_CASE("scaling the degenerate angles together preserves solutions") {
    const RationalSystem sys = t5_system();
    std::mt19937 g(6);
    for (int k = 0; k < 20; ++k) {
        auto a = reference_solution(rc(g), rc(g));
        const cplx lambda = rc(g);
        for (const char* n : {"p", "q", "r"}) a[n] *= lambda;
        CHECK(max_residual(sys, a) < 1e-9);
    }
}

TEST_CASE("closed loops found in the cover") {
    const Triangulation t = llr_t5_triangulation();
    const EdgeSelection sel({llr_t5_valence3_edge()});
    const Classification cls = classify(sel, t);
    Ball ball(t, basepoint(t, sel).first);
    ball.expand(2);
    const LoopSearch s = closed_loops(ball, cls, sel, {});
    CHECK(s.graph_edges > s.graph_vertices);
    REQUIRE(!s.loops.empty());
    for (const auto& loop : s.loops) {
        for (std::size_t k = 0; k < loop.turns.size(); ++k) {
            const auto& a = loop.turns[k];
            const auto& b = loop.turns[(k + 1) % loop.turns.size()];
            // Consecutive turns meet on one lifted face.
            const bool same = a.lift == b.lift && a.to == b.from;
            const bool across = ball.existing_neighbor(a.lift, a.to) == b.lift &&
                                t.tet(ball.lift(a.lift).tet).gluing[a.to][a.to] == b.from;
            CHECK((same || across));
        }
        const ClosedLoop r = anchored(loop, t, sel);
        CHECK(e0_count_on_face(t, sel, r.quotient[0].tet, r.quotient[0].from) == 0);
    }
}

TEST_CASE("consistency system preconditions") {
    const Triangulation t = figure_eight();
    for (const auto& e0 : std::vector<std::vector<int>>{{0}, {1}, {0, 1}}) {
        const EdgeSelection sel(e0);
        if (!locally_valid(sel, t)) CHECK_THROWS_AS(consistency_system(t, sel), ValidationError);
        else if (basepoint(t, sel).first < 0) CHECK_THROWS_AS(consistency_system(t, sel), DomainError);
    }
}

TEST_CASE("concatenated loops close when their parts do") {
    const Triangulation t = llr_t5_triangulation();
    const EdgeSelection sel({llr_t5_valence3_edge()});
    const Classification cls = classify(sel, t);
    Ball ball(t, basepoint(t, sel).first);
    ball.expand(2);
    const LoopSearch s = closed_loops(ball, cls, sel, {});
    REQUIRE(s.loops.size() >= 2);

    // Turn path between two lifted faces, by breadth-first search over (lift, face).
    auto path = [&](std::pair<int, int> from, std::pair<int, int> to) {
        std::map<std::pair<int, int>, std::pair<std::pair<int, int>, LiftedTurn>> prev;
        std::deque<std::pair<int, int>> q{from};
        prev[from] = {from, {-1, -1, -1}};
        auto push = [&](std::pair<int, int> x, std::pair<int, int> y, LiftedTurn tr) {
            if (prev.emplace(y, std::pair{x, tr}).second) q.push_back(y);
        };
        while (!q.empty()) {
            const auto x = q.front();
            q.pop_front();
            if (x == to) break;
            const auto [L, f] = x;
            const int tet = ball.lift(L).tet;
            const int n = ball.existing_neighbor(L, f);
            if (n >= 0) push(x, {n, t.tet(tet).gluing[f][f]}, {-1, -1, -1});
            for (int g = 0; g < 4; ++g)
                if (g != f && cls.faces[tet][g] != FaceType::F3 &&
                    !sel.in_e0(t.edge_of(tet, GEdge{tet, f, g}.shared_edge())))
                    push(x, {L, g}, {L, f, g});
        }
        REQUIRE(prev.count(to));
        std::vector<LiftedTurn> out;
        for (auto x = to; x != from; x = prev[x].first)
            if (prev[x].second.lift >= 0) out.push_back(prev[x].second);
        std::reverse(out.begin(), out.end());
        return out;
    };
    auto reversed = [](std::vector<LiftedTurn> p) {
        std::reverse(p.begin(), p.end());
        for (auto& tr : p) std::swap(tr.from, tr.to);
        return p;
    };

    const auto A = anchored(s.loops[0], t, sel), B = anchored(s.loops[1], t, sel);
    const auto P = path({A.turns[0].lift, A.turns[0].from}, {B.turns[0].lift, B.turns[0].from});
    const std::vector<LiftedTurn> joined = [&] {
        std::vector<LiftedTurn> j = A.turns;
        for (const auto& part : {P, B.turns, reversed(P)}) j.insert(j.end(), part.begin(), part.end());
        return j;
    }();

    std::mt19937 g(9);
    const auto a = reference_solution(rc(g), rc(g));
    const std::vector<std::vector<cplx>> data{{a.at("i")}, {a.at("j")}, {a.at("p")}, {a.at("q")}, {a.at("r")}};
    const std::array<cplx, 3> pts{rc(g), rc(g), rc(g)};
    const auto start = anchor_triangle(ball, sel, A.turns[0].lift, A.turns[0].from, pts, rc(g));
    for (const auto* loop : {&A.turns, &joined}) {
        const auto end = develop_along(ball, cls, sel, data, start, *loop);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(end.position(start.ids[i]) - start.pos[i]) < 1e-8);
    }
}
