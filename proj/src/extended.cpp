#include "xdv/extended.hpp"

#include <bit>
#include <deque>
#include <random>
#include <set>
#include <tuple>

namespace xdv {

int variable_count(TetType t) {
    switch (t) {
    case TetType::T4: return 0;
    case TetType::T31: return 2;
    default: return 1;
    }
}

void ExtendedPoint::validate() const {
    if (types.size() != data.size()) throw DomainError("extended point: type and data counts differ");
    for (std::size_t i = 0; i < types.size(); ++i) {
        if (static_cast<int>(data[i].size()) != variable_count(types[i]))
            throw DomainError("extended point: tet " + std::to_string(i) + " has the wrong number of values");
        for (cplx v : data[i])
            if (v == cplx(0)) throw DomainError("extended point: zero angle at tet " + std::to_string(i));
        if (types[i] == TetType::T1111 && data[i][0] == cplx(1))
            throw DomainError("extended point: shape 1 at tet " + std::to_string(i));
    }
}

std::vector<std::vector<std::string>> extended_variable_names(const Classification& c,
                                                              const std::vector<std::string>& tet_names) {
    const int n = static_cast<int>(c.tets.size());
    if (!tet_names.empty() && static_cast<int>(tet_names.size()) != n)
        throw DomainError("one name per tetrahedron expected");
    std::vector<std::vector<std::string>> out(n);
    for (int i = 0; i < n; ++i) {
        const std::string base = tet_names.empty() ? "z" + std::to_string(i) : tet_names[i];
        switch (variable_count(c.tets[i].type)) {
        case 1: out[i] = {base}; break;
        case 2: out[i] = {base + "_1", base + "_2"}; break;
        default: break;
        }
    }
    return out;
}

int preferred_slot(const TetClass& c) {
    if (c.type != TetType::T211 && c.type != TetType::T22) throw DomainError("preferred slot of a 211 or 22 tet only");
    return (shape_slot(c.e0_local.at(0)) + 1) % 3;
}

namespace {

using Bits = std::vector<std::uint64_t>;

struct Gf2Basis {
    std::map<int, Bits> rows;  // by lowest set bit

    bool insert(Bits v) {
        for (std::size_t w = 0; w < v.size(); ++w) {
            while (v[w]) {
                const int p = static_cast<int>(w * 64 + std::countr_zero(v[w]));
                auto it = rows.find(p);
                if (it == rows.end()) {
                    rows.emplace(p, std::move(v));
                    return true;
                }
                for (std::size_t k = w; k < v.size(); ++k) v[k] ^= it->second[k];
            }
        }
        return false;
    }
};

struct GraphEdge {
    int lift, f, g;  // faces f < g of the lift
    int a, b;  // nodes of (lift, f) and (lift, g)
};

using Canon = std::vector<std::array<int, 3>>;

Canon canonical(const std::vector<GEdge>& q) {
    const int n = static_cast<int>(q.size());
    Canon best;
    for (int dir = 0; dir < 2; ++dir) {
        std::vector<std::array<int, 3>> s(n);
        for (int i = 0; i < n; ++i) {
            const GEdge e = dir == 0 ? q[i] : q[n - 1 - i].reversed();
            s[i] = {e.tet, e.from, e.to};
        }
        for (int r = 0; r < n; ++r) {
            Canon c(s.begin() + r, s.end());
            c.insert(c.end(), s.begin(), s.begin() + r);
            if (best.empty() || c < best) best = std::move(c);
        }
    }
    return best;
}

}  // namespace

LoopSearch closed_loops(Ball& ball, const Classification& cls, const EdgeSelection& sel, const ExtendedConfig& cfg) {
    const auto& t = ball.triangulation();
    auto valid = [&](int lift, int f) { return cls.faces[ball.lift(lift).tet][f] != FaceType::F3; };

    std::map<std::pair<int, int>, int> node_of;
    std::vector<std::pair<int, int>> nodes;
    auto node = [&](int lift, int f) {
        std::pair<int, int> key{lift, f};
        const int n = ball.existing_neighbor(lift, f);
        if (n >= 0) key = std::min(key, std::pair<int, int>{n, t.tet(ball.lift(lift).tet).gluing[f][f]});
        auto [it, fresh] = node_of.emplace(key, static_cast<int>(nodes.size()));
        if (fresh) nodes.push_back(key);
        return it->second;
    };

    std::vector<GraphEdge> edges;
    std::map<std::tuple<int, int, int>, int> edge_of;
    std::vector<int> lifts;
    for (int L = 0; L < ball.size(); ++L)
        if (ball.alive(L)) lifts.push_back(L);
    for (int L : lifts) {
        const int tet = ball.lift(L).tet;
        for (int f = 0; f < 4; ++f) {
            if (!valid(L, f)) continue;
            node(L, f);
            for (int g = f + 1; g < 4; ++g) {
                if (!valid(L, g)) continue;
                if (sel.in_e0(t.edge_of(tet, GEdge{tet, f, g}.shared_edge()))) continue;
                edge_of[{L, f, g}] = static_cast<int>(edges.size());
                edges.push_back({L, f, g, node(L, f), node(L, g)});
            }
        }
    }
    const int nn = static_cast<int>(nodes.size()), ne = static_cast<int>(edges.size());
    const std::size_t words = (ne + 63) / 64;
    auto bits_of = [&](const std::vector<int>& es) {
        Bits b(words, 0);
        for (int e : es) b[e / 64] ^= std::uint64_t(1) << (e % 64);
        return b;
    };
    std::vector<std::vector<int>> adj(nn);
    for (int e = 0; e < ne; ++e) {
        adj[edges[e].a].push_back(e);
        if (edges[e].b != edges[e].a) adj[edges[e].b].push_back(e);
    }
    auto other = [&](int e, int x) { return edges[e].a == x ? edges[e].b : edges[e].a; };

    Gf2Basis basis;
    LoopSearch out;
    out.graph_vertices = nn;
    out.graph_edges = ne;

    // Loops inside one lift.
    for (int L : lifts) {
        std::vector<int> local;
        for (int f = 0; f < 4; ++f)
            for (int g = f + 1; g < 4; ++g)
                if (auto it = edge_of.find({L, f, g}); it != edge_of.end()) local.push_back(it->second);
        UnionFind uf(4);
        std::vector<int> tree;
        for (int e : local) {
            if (uf.unite(edges[e].f, edges[e].g)) {
                tree.push_back(e);
                continue;
            }
            // Cycle: e plus the tree path between its two faces.
            std::vector<int> path{e};
            std::vector<int> prev(4, -2);
            std::deque<int> q{edges[e].f};
            prev[edges[e].f] = -1;
            while (!q.empty()) {
                const int x = q.front();
                q.pop_front();
                for (int te : tree) {
                    const int y = edges[te].f == x ? edges[te].g : edges[te].g == x ? edges[te].f : -1;
                    if (y >= 0 && prev[y] == -2) prev[y] = te, q.push_back(y);
                }
            }
            for (int x = edges[e].g; prev[x] >= 0;) {
                const int te = prev[x];
                path.push_back(te);
                x = edges[te].f == x ? edges[te].g : edges[te].f;
            }
            if (basis.insert(bits_of(path))) ++out.local_relations;
        }
    }
    // Loops around one E+ edge.
    std::set<int> seen_edges;
    for (int L : lifts) {
        const int tet = ball.lift(L).tet;
        for (int e = 0; e < 6; ++e) {
            const int qe = t.edge_of(tet, e);
            if (sel.in_e0(qe)) continue;
            if (!seen_edges.insert(ball.edge_class(L, e)).second) continue;
            auto [a, b] = edge_ends(e);
            Corner c{tet, even_completion(a, b)};
            int cur = L;
            std::vector<int> cyc;
            bool complete = true;
            for (int s = 0; s < t.edges()[qe].valence; ++s) {
                const int f = std::min(c.v[2], c.v[3]), g = std::max(c.v[2], c.v[3]);
                auto it = edge_of.find({cur, f, g});
                const int n = ball.existing_neighbor(cur, c.v[2]);
                if (it == edge_of.end() || n < 0) {
                    complete = false;
                    break;
                }
                cyc.push_back(it->second);
                cur = n;
                c = t.next_corner(c);
            }
            if (complete && cur == L && basis.insert(bits_of(cyc))) ++out.local_relations;
        }
    }

    // Fundamental cycles from BFS trees rooted at the shallowest lift of each quotient face.
    std::map<int, int> root_of;
    for (int x = 0; x < nn; ++x) {
        const auto [L, f] = nodes[x];
        const int qf = t.face_of(ball.lift(L).tet, f);
        auto it = root_of.find(qf);
        if (it == root_of.end() || ball.lift(L).depth < ball.lift(nodes[it->second].first).depth) root_of[qf] = x;
    }
    struct Candidate {
        int length;
        std::vector<std::pair<int, int>> walk;  // (edge, node it leaves from)
    };
    std::vector<Candidate> cands;
    for (const auto& [qf, root] : root_of) {
        std::vector<int> depth(nn, -1), up(nn, -1);
        std::deque<int> q{root};
        depth[root] = 0;
        while (!q.empty()) {
            const int x = q.front();
            q.pop_front();
            if (2 * depth[x] + 1 > cfg.max_loop_length) continue;
            for (int e : adj[x]) {
                const int y = other(e, x);
                if (depth[y] < 0) depth[y] = depth[x] + 1, up[y] = e, q.push_back(y);
            }
        }
        for (int e = 0; e < ne; ++e) {
            const int u = edges[e].a, v = edges[e].b;
            if (depth[u] < 0 || depth[v] < 0 || up[u] == e || up[v] == e) continue;
            std::vector<std::pair<int, int>> pu, pv;  // upward steps from u and from v
            int x = u, y = v;
            while (x != y) {
                if (depth[x] >= depth[y]) pu.push_back({up[x], x}), x = other(up[x], x);
                else pv.push_back({up[y], y}), y = other(up[y], y);
            }
            const int len = static_cast<int>(pu.size() + pv.size()) + 1;
            if (len > cfg.max_loop_length) continue;
            Candidate c{len, {}};
            for (auto it = pu.rbegin(); it != pu.rend(); ++it) c.walk.push_back({it->first, other(it->first, it->second)});
            c.walk.push_back({e, u});
            for (const auto& s : pv) c.walk.push_back(s);
            cands.push_back(std::move(c));
        }
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.length < b.length; });

    std::set<Canon> kept;
    for (const auto& c : cands) {
        if (static_cast<int>(out.loops.size()) >= cfg.max_loops) break;
        std::vector<int> es;
        for (const auto& s : c.walk) es.push_back(s.first);
        if (!basis.insert(bits_of(es))) continue;
        ClosedLoop loop;
        for (const auto& [e, from] : c.walk) {
            const auto& ge = edges[e];
            const bool fwd = from == ge.a;
            const LiftedTurn tr{ge.lift, fwd ? ge.f : ge.g, fwd ? ge.g : ge.f};
            loop.turns.push_back(tr);
            loop.quotient.push_back({ball.lift(ge.lift).tet, tr.from, tr.to});
        }
        if (kept.insert(canonical(loop.quotient)).second) out.loops.push_back(std::move(loop));
    }
    return out;
}

ClosedLoop anchored(const ClosedLoop& loop, const Triangulation& t, const EdgeSelection& sel) {
    const int n = static_cast<int>(loop.turns.size());
    for (int k = 0; k < n; ++k) {
        const auto& q = loop.quotient[k];
        if (e0_count_on_face(t, sel, q.tet, q.from) != 0) continue;
        ClosedLoop r;
        for (int i = 0; i < n; ++i) {
            r.turns.push_back(loop.turns[(k + i) % n]);
            r.quotient.push_back(loop.quotient[(k + i) % n]);
        }
        return r;
    }
    return loop;
}

namespace {

struct Built {
    RationalSystem sys;
    int edge_equations = 0;
};

Built build_system(const Triangulation& t, const EdgeSelection& sel, const Classification& cls,
                   const ExtendedConfig& cfg, std::uint64_t anchor_seed) {
    Built b;
    RationalSystem& sys = b.sys;
    const auto names = extended_variable_names(cls, cfg.tet_names);
    std::vector<std::vector<Sym>> vars(t.size());
    for (int i = 0; i < t.size(); ++i)
        for (const auto& nm : names[i]) {
            sys.header.push_back("var " + nm + " : " + to_string(cls.tets[i].type) + " tet " + std::to_string(i));
            vars[i].push_back({&sys.arena(), sys.symbol(nm)});
        }
    const Sym one{&sys.arena(), sys.arena().constant(1.0)};
    const Sym zero{&sys.arena(), sys.arena().constant(0.0)};

    for (const auto& e : t.edges()) {
        if (sel.in_e0(e.id)) continue;
        Sym prod = one;
        int order = 0;
        for (const auto& c : e.cycle) {
            const auto d = dihedral(cls.tets[c.tet], c.edge(), vars[c.tet]);
            prod = prod * d.x.lead;
            order += d.x.order;
        }
        if (order != 0)
            throw DomainError("angle orders around edge " + std::to_string(e.id) + " sum to " + std::to_string(order));
        sys.add_equation(prod.id, one.id, "edge " + std::to_string(e.id));
        ++b.edge_equations;
    }
    if (sel.empty()) return b;

    Ball ball(t, basepoint(t, sel).first);
    ball.expand(cfg.radius);
    std::vector<int> inner;
    for (int L = 0; L < ball.size(); ++L)
        if (ball.alive(L) && ball.lift(L).depth < cfg.radius) inner.push_back(L);
    for (int L : inner) ball.close_star(L);
    const LoopSearch search = closed_loops(ball, cls, sel, cfg);

    std::mt19937_64 rng(anchor_seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    auto rnd = [&] {
        const double side = u(rng) > 0 ? 3 : -3;
        return constant_like(one, std::round(u(rng) * 64) / 64 + side);
    };
    for (std::size_t k = 0; k < search.loops.size(); ++k) {
        const ClosedLoop loop = anchored(search.loops[k], t, sel);
        const auto& first = loop.turns.front();
        const std::array<Sym, 3> pts{rnd(), rnd(), rnd()};
        const Sym offset = rnd();
        const auto start = anchor_triangle(ball, sel, first.lift, first.from, pts, offset);
        const auto end = develop_along(ball, cls, sel, vars, start, loop.turns);
        const std::string note = "loop " + std::to_string(k);
        int e0 = -1;
        for (int k2 = 0; k2 < 3; ++k2)
            if (start.diff[k2].order == 1) e0 = k2;
        if (e0 < 0) {
            const Sym P1 = start.pos[0], P2 = start.pos[1], P3 = start.pos[2];
            auto f = [&](Sym x) { return ((x - P2) * (P3 - P1)) / ((x - P1) * (P3 - P2)); };
            const Sym Q1 = end.position(start.ids[0]), Q2 = end.position(start.ids[1]),
                      Q3 = end.position(start.ids[2]);
            sys.add_equation((((Q1 - P1) * (P3 - P2)) / ((Q1 - P2) * (P3 - P1))).id, zero.id, note);
            sys.add_equation(f(Q2).id, zero.id, note);
            sys.add_equation(f(Q3).id, one.id, note);
        } else {
            const int i = e0 == 2 ? 1 : 0, j = e0 == 0 ? 1 : 2, w = 3 - i - j;
            const int U = start.ids[i], V = start.ids[j], W = start.ids[w];
            const Sym x = start.position(U), y = start.position(W);
            const Leading<Sym> d1 = end.difference(V, U);
            if (d1.order != 1) throw DevelopError("E0 pair separated after a closed loop");
            const Sym x1 = end.position(U), y1 = end.position(W);
            const Sym xy = x - y, x1y = x1 - y;
            sys.add_equation(((xy * (x1 - x)) / (offset * x1y)).id, zero.id, note);
            sys.add_equation(((offset * (y1 - y)) / (xy * (y1 - x))).id, zero.id, note);
            sys.add_equation(((xy * xy * d1.lead) / (offset * x1y * x1y)).id, one.id, note);
        }
    }
    return b;
}

}  // namespace

RationalSystem consistency_system(const Triangulation& t, const EdgeSelection& sel, const ExtendedConfig& cfg) {
    t.require_closed("the consistency system");
    const Classification cls = classify(sel, t);
    if (basepoint(t, sel).first < 0) throw DomainError("no type-111 triangle");
    Built main = build_system(t, sel, cls, cfg, cfg.anchor_seed);
    if (sel.empty()) return std::move(main.sys);

    std::vector<Built> others;
    others.push_back(build_system(t, sel, cls, cfg, cfg.anchor_seed + 1));
    others.push_back(build_system(t, sel, cls, cfg, cfg.anchor_seed + 2));
    std::mt19937_64 rng(cfg.anchor_seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> ang(0, 6.283185307179586), rad(0.5, 2.0);
    const int n = static_cast<int>(main.sys.variables().size());
    int checked = 0;
    for (int attempt = 0; attempt < 20 && checked < 3; ++attempt) {
        Eigen::VectorXcd x(n);
        for (int i = 0; i < n; ++i) x[i] = std::polar(rad(rng), ang(rng));
        try {
            const Eigen::VectorXcd r0 = main.sys.residual(x);
            for (const auto& o : others) {
                if (o.sys.equations().size() != main.sys.equations().size())
                    throw Error("closure equations depend on the anchor");
                const Eigen::VectorXcd r = o.sys.residual(x);
                for (int k = 0; k < r.size(); ++k)
                    if (std::abs(r[k] - r0[k]) > 1e-7 * (1 + std::abs(r0[k])))
                        throw Error("closure equations depend on the anchor");
            }
            ++checked;
        } catch (const PoleError&) {
        }
    }
    if (checked == 0) throw Error("could not check anchor independence away from poles");
    return std::move(main.sys);
}

ExtendedPoint extended_point(const RationalSystem& sys, const Eigen::VectorXcd& x, const Classification& cls,
                             const std::vector<std::string>& tet_names) {
    const auto names = extended_variable_names(cls, tet_names);
    ExtendedPoint p;
    for (std::size_t i = 0; i < names.size(); ++i) {
        p.types.push_back(cls.tets[i].type);
        p.data.emplace_back();
        for (const auto& nm : names[i]) {
            const int k = sys.find_variable(nm);
            if (k < 0) throw DomainError("system has no variable " + nm);
            p.data.back().push_back(x[k]);
        }
    }
    return p;
}

} // namespace xdv
