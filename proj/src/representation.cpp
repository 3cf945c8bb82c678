#include "xdv/representation.hpp"

#include "xdv/errors.hpp"

#include <cmath>
#include <deque>
#include <set>

namespace xdv {

Mobius normalized(const Mobius& m) {
    const cplx d = m.determinant();
    if (std::abs(d) < 1e-300) throw DomainError("singular Mobius matrix");
    return m / std::sqrt(d);
}

Point act(const Mobius& m, const Point& x) {
    if (x.infinite) {
        if (std::abs(m(1, 0)) <= 1e-14 * m.cwiseAbs().maxCoeff()) return Point::inf();
        return {false, m(0, 0) / m(1, 0)};
    }
    const cplx num = m(0, 0) * x.value + m(0, 1), den = m(1, 0) * x.value + m(1, 1);
    if (std::abs(den) <= 1e-14 * std::max(std::abs(num), 1e-300)) return Point::inf();
    return {false, num / den};
}

cplx derivative(const Mobius& m, cplx x) {
    const cplx den = m(1, 0) * x + m(1, 1);
    return m.determinant() / (den * den);
}

double chordal(const Point& a, const Point& b) {
    if (a.infinite && b.infinite) return 0;
    if (a.infinite) return 2 / std::sqrt(1 + std::norm(b.value));
    if (b.infinite) return 2 / std::sqrt(1 + std::norm(a.value));
    return 2 * std::abs(a.value - b.value) / std::sqrt((1 + std::norm(a.value)) * (1 + std::norm(b.value)));
}

namespace {

/// The map sending p1, p2, p3 to 0, 1, inf.
Mobius to_standard(const std::array<Point, 3>& p) {
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (chordal(p[i], p[j]) < 1e-12) throw DomainError("degenerate triple of points");
    Mobius m;
    const cplx p1 = p[0].value, p2 = p[1].value, p3 = p[2].value;
    if (p[0].infinite) m << 0, p2 - p3, 1, -p3;
    else if (p[1].infinite) m << 1, -p1, 1, -p3;
    else if (p[2].infinite) m << 1, -p1, 0, p2 - p1;
    else m << p2 - p3, -p1 * (p2 - p3), p2 - p1, -p3 * (p2 - p1);
    return m;
}

} // namespace

Mobius mobius_from_points(const std::array<Point, 3>& p, const std::array<Point, 3>& q) {
    return normalized(to_standard(q).inverse() * to_standard(p));
}

double distance_to_identity(const Mobius& m) {
    const Mobius n = normalized(m);
    const Mobius I = Mobius::Identity();
    return std::min((n - I).cwiseAbs().maxCoeff(), (n + I).cwiseAbs().maxCoeff());
}

std::vector<Point> fixed_points(const Mobius& m, double tol) {
    const Mobius n = normalized(m);
    if (distance_to_identity(n) < tol) return {};
    const cplx a = n(0, 0), b = n(0, 1), c = n(1, 0), d = n(1, 1);
    const cplx tr = a + d;
    const bool parabolic = std::abs(tr * tr - 4.0) < tol;
    if (std::abs(c) < tol * n.cwiseAbs().maxCoeff()) {
        if (parabolic) return {Point::inf()};
        return {Point::inf(), {false, b / (d - a)}};
    }
    if (parabolic) return {{false, (a - d) / (2.0 * c)}};
    const cplx s = std::sqrt(tr * tr - 4.0);
    return {{false, (a - d + s) / (2.0 * c)}, {false, (a - d - s) / (2.0 * c)}};
}

double trace_distance(cplx a, cplx b) { return std::min(std::abs(a - b), std::abs(a + b)); }

Presentation presentation(const Triangulation& t, int root) {
    t.require_closed("the fundamental group");
    Presentation p;
    p.root = root;
    const int n = t.size();
    std::vector<char> tree_face(t.faces().size(), 0), seen(n, 0);
    p.tree_word.assign(n, {});
    std::vector<int> queue{root};
    seen[root] = 1;
    for (std::size_t i = 0; i < queue.size(); ++i) {
        const int x = queue[i];
        for (int f = 0; f < 4; ++f) {
            const int y = t.tet(x).neighbor[f];
            if (seen[y]) continue;
            seen[y] = 1;
            tree_face[t.face_of(x, f)] = 1;
            p.tree_word[y] = p.tree_word[x];
            p.tree_word[y].push_back(f);
            queue.push_back(y);
        }
    }
    p.generator_of_face.assign(t.faces().size(), -1);
    for (const auto& fc : t.faces())
        if (!tree_face[fc.id]) {
            p.generator_of_face[fc.id] = p.generators();
            p.generator_face.push_back(fc.id);
        }
    for (const auto& ec : t.edges()) {
        std::vector<int> word;
        for (const Corner& c : ec.cycle)
            if (const int l = letter(t, p, c.tet, c.v[2]); l != 0) word.push_back(l);
        p.relators.push_back(word);
    }
    return p;
}

int letter(const Triangulation& t, const Presentation& p, int tet, int face) {
    const int fid = t.face_of(tet, face);
    const int g = p.generator_of_face[fid];
    if (g < 0) return 0;
    return t.faces()[fid].slots.front() == std::make_pair(tet, face) ? g + 1 : -(g + 1);
}

std::vector<int> generator_path(const Triangulation& t, const Presentation& p, int generator) {
    const auto [i, f] = t.faces()[p.generator_face.at(generator)].slots.front();
    const int j = t.tet(i).neighbor[f];
    std::vector<int> w = p.tree_word[i];
    w.push_back(f);
    // Back from j to the root along the tree, crossing each face from the far side.
    std::vector<std::pair<int, int>> steps;
    int cur = p.root;
    for (int face : p.tree_word[j]) {
        steps.push_back({cur, face});
        cur = t.tet(cur).neighbor[face];
    }
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) w.push_back(t.tet(it->first).gluing[it->second][it->second]);
    return w;
}

std::vector<int> letters_of(const Triangulation& t, const Presentation& p, const std::vector<int>& faces) {
    std::vector<int> out;
    int cur = p.root;
    for (int f : faces) {
        if (const int l = letter(t, p, cur, f); l != 0) out.push_back(l);
        cur = t.tet(cur).neighbor[f];
    }
    return out;
}

Mobius word_image(const RepPoint& rho, const std::vector<int>& letters) {
    Mobius m = Mobius::Identity();
    for (int l : letters) {
        const Mobius& g = rho.generators.at(std::abs(l) - 1);
        m = m * (l > 0 ? g : g.inverse());
    }
    return normalized(m);
}

double verify_homomorphism(const RepPoint& rho, const Presentation& p) {
    double worst = 0;
    for (const auto& r : p.relators) worst = std::max(worst, distance_to_identity(word_image(rho, r)));
    return worst;
}

std::vector<cplx> traces(const RepPoint& rho) {
    std::vector<cplx> out;
    for (const auto& g : rho.generators) out.push_back(normalized(g).trace());
    return out;
}

double trace_mismatch(const RepPoint& a, const RepPoint& b) {
    if (a.generators.size() != b.generators.size()) throw DomainError("representations of different groups");
    const auto ta = traces(a), tb = traces(b);
    double worst = 0;
    for (std::size_t i = 0; i < ta.size(); ++i) worst = std::max(worst, trace_distance(ta[i], tb[i]));
    return worst;
}

std::optional<Point> PositionMap::at(int lift, int vertex) const {
    auto it = position.find({ball->find(lift), vertex});
    if (it == position.end()) return std::nullopt;
    return it->second;
}

DevelopedMap develop_map(const Triangulation& t, const EdgeSelection& sel, const ExtendedPoint& z,
                         const DevelopConfig& cfg) {
    t.require_closed("the developing map");
    const Classification cls = classify(sel, t);
    z.validate();
    if (static_cast<int>(z.data.size()) != t.size()) throw DomainError("one data entry per tetrahedron expected");
    for (int i = 0; i < t.size(); ++i)
        if (z.types[i] != cls.tets[i].type) throw DomainError("point types do not match the selection");

    DevelopedMap m;
    m.sel = sel;
    m.pres = presentation(t, 0);
    std::tie(m.base_tet, m.base_face) =
        cfg.base_tet >= 0 ? std::pair{cfg.base_tet, cfg.base_face} : basepoint(t, sel);
    if (m.base_tet < 0) throw DomainError("no type-111 triangle to anchor the development");
    if (e0_count_on_face(t, sel, m.base_tet, m.base_face) != 0) throw ValidationError("anchor triangle is not of type 111");

    m.ball = std::make_shared<Ball>(t, 0);
    Ball& ball = *m.ball;
    std::vector<int> corridor{0};
    auto walk = [&](const std::vector<int>& word) {
        int L = 0;
        for (int f : word) corridor.push_back(L = ball.neighbor(L, f));
        return L;
    };
    for (int k = 0; k < t.size(); ++k) m.domain.push_back(walk(m.pres.tree_word[k]));
    for (int g = 0; g < m.pres.generators(); ++g) {
        auto w = generator_path(t, m.pres, g);
        w.insert(w.end(), m.pres.tree_word[m.base_tet].begin(), m.pres.tree_word[m.base_tet].end());
        m.translates.push_back(walk(w));
    }
    std::vector<int> frontier = corridor;
    for (int r = 0; r < cfg.corridor_radius; ++r) {
        std::vector<int> next;
        for (int L : frontier)
            for (int f = 0; f < 4; ++f) next.push_back(ball.neighbor(L, f));
        corridor.insert(corridor.end(), next.begin(), next.end());
        frontier = std::move(next);
        if (ball.size() > cfg.max_lifts) throw DomainError("development ball exceeds its lift budget");
    }
    std::set<int> allowed;
    for (int L : corridor) allowed.insert(ball.find(L));
    for (int& L : m.domain) L = ball.find(L);
    for (int& L : m.translates) L = ball.find(L);

    // Internal frame: a generic finite anchor, mapped to (inf, 0, 1) at the end.
    const std::array<cplx, 3> anchor{cplx(-1.3, 0.2), cplx(0.7, -0.4), cplx(0.4, 1.1)};
    const Mobius N = mobius_from_points({Point{false, anchor[0]}, Point{false, anchor[1]}, Point{false, anchor[2]}},
                                        {Point::inf(), Point{false, 0.0}, Point{false, 1.0}});

    using State = DevelopedTriangle<cplx>;
    std::map<std::pair<int, int>, State> states;
    std::map<std::pair<int, int>, cplx> raw;  // internal-frame positions
    std::deque<std::pair<int, int>> queue;
    auto close = [&](cplx a, cplx b) {
        const double d = std::abs(a - b) / (1 + std::abs(a) + std::abs(b));
        m.disagreement = std::max(m.disagreement, d);
    };
    auto visit = [&](int L, int f, const State& st) {
        auto [it, fresh] = states.emplace(std::pair{L, f}, st);
        if (!fresh) {
            for (int i = 0; i < 3; ++i) {
                close(it->second.position(st.ids[i]), st.pos[i]);
                for (int j = i + 1; j < 3; ++j)
                    close(it->second.difference(st.ids[i], st.ids[j]).lead, st.diff[i + j - 1].lead);
            }
            return;
        }
        for (int i = 0; i < 3; ++i) {
            auto [pit, pfresh] = raw.emplace(std::pair{L, st.ids[i]}, st.pos[i]);
            if (!pfresh) close(pit->second, st.pos[i]);
        }
        queue.push_back({L, f});
    };
    {
        State st;
        for (int v = 0, k = 0; v < 4; ++v)
            if (v != m.base_face) st.ids[k++] = v;
        st.pos = anchor;
        st.diff = {Leading<cplx>{0, anchor[0] - anchor[1]}, {0, anchor[0] - anchor[2]}, {0, anchor[1] - anchor[2]}};
        visit(m.domain[m.base_tet], m.base_face, st);
    }
    const std::array<int, 4> local{0, 1, 2, 3};
    while (!queue.empty()) {
        const auto [L, f] = queue.front();
        queue.pop_front();
        const State st = states.at({L, f});
        const int tet = ball.lift(L).tet;
        const int nb = ball.existing_neighbor(L, f);
        if (nb >= 0 && allowed.count(nb)) {
            const Perm& g = t.tet(tet).gluing[f];
            State moved = st;
            for (int& id : moved.ids) id = g[id];
            visit(nb, g[f], moved);
        }
        for (int h = 0; h < 4; ++h) {
            if (h == f || cls.faces[tet][h] == FaceType::F3) continue;
            if (sel.in_e0(t.edge_of(tet, GEdge{tet, f, h}.shared_edge()))) continue;
            visit(L, h, develop_in_tet(t, cls, sel, z.data, st, tet, f, h, local));
        }
    }
    if (cfg.strict && m.disagreement > cfg.tolerance)
        throw DomainError("developed positions disagree by " + std::to_string(m.disagreement) + ": not a solution");
    for (const auto& [key, x] : raw) m.position[key] = act(N, Point{false, x});
    return m;
}

RepPoint holonomy(const DevelopedMap& m) {
    std::array<int, 3> u{};
    for (int v = 0, k = 0; v < 4; ++v)
        if (v != m.base_face) u[k++] = v;
    auto triple = [&](int lift) {
        std::array<Point, 3> p;
        for (int i = 0; i < 3; ++i) {
            const auto x = m.at(lift, u[i]);
            if (!x) throw DomainError("translate of the anchor triangle was not reached; widen the corridor");
            p[i] = *x;
        }
        return p;
    };
    const auto base = triple(m.domain[m.base_tet]);
    RepPoint rho;
    for (int L : m.translates) rho.generators.push_back(mobius_from_points(base, triple(L)));
    return rho;
}

namespace {

/// Group elements carrying each cusp's first member to every member vertex of the domain, and
/// the peripheral elements found on the way.
struct CuspTransport {
    std::map<std::pair<int, int>, Mobius> to_member;
    std::vector<std::vector<Mobius>> peripheral;
};

CuspTransport cusp_transport(const Triangulation& t, const Presentation& p, const RepPoint& rho) {
    CuspTransport ct;
    auto image = [&](int l) { return word_image(rho, {l}); };
    for (const auto& cusp : t.cusps()) {
        ct.peripheral.emplace_back();
        const auto start = cusp.members.front();
        ct.to_member[start] = Mobius::Identity();
        std::deque<std::pair<int, int>> q{start};
        while (!q.empty()) {
            const auto [k, v] = q.front();
            q.pop_front();
            const Mobius h = ct.to_member.at({k, v});
            for (int f = 0; f < 4; ++f) {
                if (f == v) continue;
                const std::pair<int, int> next{t.tet(k).neighbor[f], t.tet(k).gluing[f][v]};
                const int l = letter(t, p, k, f);
                const Mobius h2 = l == 0 ? h : normalized(image(l).inverse() * h);
                auto [it, fresh] = ct.to_member.emplace(next, h2);
                if (fresh) q.push_back(next);
                else ct.peripheral.back().push_back(normalized(it->second.inverse() * h2));
            }
        }
    }
    return ct;
}

} // namespace

std::vector<Mobius> peripheral_images(const Triangulation& t, const Presentation& p, const RepPoint& rho, int cusp) {
    return cusp_transport(t, p, rho).peripheral.at(cusp);
}

std::vector<Point> cusp_points(const DevelopedMap& m) {
    const auto& t = m.ball->triangulation();
    std::vector<Point> out;
    for (const auto& cusp : t.cusps()) {
        const auto [k, v] = cusp.members.front();
        const auto x = m.at(m.domain[k], v);
        if (!x) throw DomainError("cusp " + std::to_string(cusp.id) + " was not developed");
        out.push_back(*x);
    }
    return out;
}

PositionMap psi_from_rep(const Triangulation& t, const Presentation& p, const RepPoint& rho,
                         const std::vector<Point>& cusp_choice, int radius, double tol) {
    if (cusp_choice.size() != t.cusps().size()) throw DomainError("one point per cusp expected");
    if (rho.generators.size() != p.generator_face.size()) throw DomainError("generator count does not match");
    const CuspTransport ct = cusp_transport(t, p, rho);
    for (std::size_t c = 0; c < cusp_choice.size(); ++c)
        for (const auto& s : ct.peripheral[c])
            if (chordal(act(s, cusp_choice[c]), cusp_choice[c]) > tol)
                throw DomainError("chosen point of cusp " + std::to_string(c) + " is not fixed by its peripheral images");

    PositionMap m;
    m.ball = std::make_shared<Ball>(t, p.root);
    Ball& ball = *m.ball;
    for (int k = 0; k < t.size(); ++k) m.domain.push_back(ball.walk(0, p.tree_word[k]));
    ball.expand(radius);
    for (int& L : m.domain) L = ball.find(L);
    std::map<int, Point> by_vertex;
    for (int L = 0; L < ball.size(); ++L) {
        if (!ball.alive(L)) continue;
        const Mobius g = word_image(rho, letters_of(t, p, ball.lift(L).word));
        const int tet = ball.lift(L).tet;
        for (int v = 0; v < 4; ++v) {
            const Point x = act(g * ct.to_member.at({tet, v}), cusp_choice[t.cusp_of(tet, v)]);
            m.position[{L, v}] = x;
            auto [it, fresh] = by_vertex.emplace(ball.vertex_class(L, v), x);
            if (!fresh) m.disagreement = std::max(m.disagreement, chordal(it->second, x));
        }
    }
    return m;
}

EdgeSelection selection_from_rep(const Triangulation& t, const PositionMap& m) {
    constexpr double coincide = 1e-6, band = 1e-5;
    std::vector<int> vote(t.edges().size(), -1);
    const Ball& ball = *m.ball;
    for (const auto& [key, x] : m.position) {
        const auto [L, a] = key;
        if (!ball.alive(L)) continue;
        for (int b = a + 1; b < 4; ++b) {
            const auto y = m.at(L, b);
            if (!y) continue;
            const double d = chordal(x, *y);
            if (d >= coincide && d <= band)
                throw DomainError("ambiguous coincidence at chordal distance " + std::to_string(d));
            const int e = t.edge_of(ball.lift(L).tet, local_edge(a, b));
            const int s = d < coincide ? 1 : 0;
            if (vote[e] >= 0 && vote[e] != s) throw DomainError("lifts of edge " + std::to_string(e) + " disagree");
            vote[e] = s;
        }
    }
    std::vector<int> e0;
    for (std::size_t e = 0; e < vote.size(); ++e) {
        if (vote[e] < 0) throw DomainError("edge " + std::to_string(e) + " has no lift with known ends");
        if (vote[e] == 1) e0.push_back(static_cast<int>(e));
    }
    EdgeSelection sel(e0);
    classify(sel, t);
    if (auto w = bad_loop_screen(sel, t, 2))
        throw ValidationError("selection read off the map has a bad loop at edge " + std::to_string(w->quotient_edge));
    return sel;
}

ExtendedPoint point_from_rep(const Triangulation& t, const Presentation& p, const RepPoint& rho,
                             const PositionMap& m, const EdgeSelection& sel, const std::map<int, cplx>& seeds) {
    const Classification cls = classify(sel, t);
    const int n = t.size();
    // Work in a frame where every domain vertex is finite and moderate.
    Mobius T = Mobius::Identity();
    std::vector<std::array<cplx, 4>> P(n);
    for (int attempt = 0;; ++attempt) {
        if (attempt > 0) {
            const cplx th(0.37 * attempt, 0.11 * attempt);
            T << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
        }
        bool ok = true;
        for (int k = 0; k < n && ok; ++k)
            for (int v = 0; v < 4 && ok; ++v) {
                const auto x = m.at(m.domain[k], v);
                if (!x) throw DomainError("cusp map misses a domain vertex");
                const Point y = act(T, *x);
                ok = !y.infinite && std::abs(y.value) < 1e3;
                if (ok) P[k][v] = y.value;
            }
        if (ok) break;
        if (attempt > 20) throw DomainError("no finite frame for the domain vertices");
    }
    RepPoint rt;
    for (const auto& g : rho.generators) rt.generators.push_back(normalized(T * g * T.inverse()));

    // Offsets low -> high on every E0 edge of every tet of the domain.
    std::map<std::pair<int, int>, cplx> offset;
    for (const auto& ec : t.edges()) {
        if (!sel.in_e0(ec.id)) continue;
        auto it = seeds.find(ec.id);
        const cplx seed = it == seeds.end() ? cplx(1) : it->second;
        if (seed == cplx(0)) throw DomainError("zero offset seed");
        const Corner& c0 = ec.cycle.front();
        const cplx x = P[c0.tet][c0.v[0]];
        Mobius h = Mobius::Identity();
        for (const Corner& c : ec.cycle) {
            const cplx den = h(1, 0) * x + h(1, 1);
            if (std::abs(den) < 1e-9) throw DomainError("offset transport through a pole");
            const cplx d = seed / (den * den);
            offset[{c.tet, c.edge()}] = c.v[0] < c.v[1] ? d : -d;
            const int l = letter(t, p, c.tet, c.v[2]);
            if (l != 0) h = normalized(word_image(rt, {l}).inverse() * h);
        }
    }

    ExtendedPoint z;
    for (int k = 0; k < n; ++k) {
        const TetClass& tc = cls.tets[k];
        z.types.push_back(tc.type);
        z.data.emplace_back();
        auto diff = [&](int a, int b) -> Leading<cplx> {
            if (lifted_e0(t, sel, k, a, b)) {
                const cplx d = offset.at({k, local_edge(a, b)});
                return {1, a < b ? -d : d};
            }
            return {0, P[k][a] - P[k][b]};
        };
        auto cross = [&](int e) {
            const auto [a0, b0] = edge_ends(e);
            const auto v = even_completion(a0, b0);
            const auto ac = diff(v[0], v[2]), bd = diff(v[1], v[3]), ad = diff(v[0], v[3]), bc = diff(v[1], v[2]);
            return Leading<cplx>{ac.order + bd.order - ad.order - bc.order, ac.lead * bd.lead / (ad.lead * bc.lead)};
        };
        auto at_slot = [&](int slot) {
            for (int e = 0; e < 6; ++e)
                if (shape_slot(e) == slot && !sel.in_e0(t.edge_of(k, e))) return cross(e);
            throw DomainError("no E+ edge in the requested slot");
        };
        switch (tc.type) {
        case TetType::T4: break;
        case TetType::T1111: z.data.back().push_back(at_slot(0).lead); break;
        case TetType::T211:
        case TetType::T22: {
            const auto c = at_slot(preferred_slot(tc));
            if (c.order != (tc.type == TetType::T211 ? 1 : 2))
                throw DomainError("angle of tet " + std::to_string(k) + " has order " + std::to_string(c.order));
            z.data.back().push_back(c.lead);
            break;
        }
        case TetType::T31:
            z.data.back().push_back(at_slot(0).lead);
            z.data.back().push_back(at_slot(1).lead);
            break;
        }
    }
    z.validate();
    return z;
}

std::string to_string(RepClass c) {
    switch (c) {
    case RepClass::Reducible: return "reducible";
    case RepClass::DihedralSuspect: return "generalised-dihedral-suspect";
    case RepClass::Generic: return "generic-irreducible";
    }
    return "?";
}

RepClass screen_rep(const RepPoint& rho, double tol) {
    std::vector<Mobius> gens;
    for (const auto& g : rho.generators)
        if (distance_to_identity(g) > tol) gens.push_back(normalized(g));
    if (gens.empty()) return RepClass::Reducible;
    auto fixes = [&](const Mobius& g, const Point& w) { return chordal(act(g, w), w) < tol; };
    for (const Point& w : fixed_points(gens.front(), tol)) {
        bool all = true;
        for (const auto& g : gens) all = all && fixes(g, w);
        if (all) return RepClass::Reducible;
    }
    std::vector<std::vector<Point>> pairs;
    for (std::size_t i = 0; i < gens.size(); ++i) {
        pairs.push_back(fixed_points(gens[i], tol));
        for (std::size_t j = i + 1; j < gens.size(); ++j) pairs.push_back(fixed_points(gens[i] * gens[j], tol));
    }
    for (const auto& pr : pairs) {
        if (pr.size() != 2) continue;
        bool all = true;
        for (const auto& g : gens) {
            const Point a = act(g, pr[0]), b = act(g, pr[1]);
            const bool keep = chordal(a, pr[0]) < tol && chordal(b, pr[1]) < tol;
            const bool swap = chordal(a, pr[1]) < tol && chordal(b, pr[0]) < tol;
            all = all && (keep || swap);
        }
        if (all) return RepClass::DihedralSuspect;
    }
    return RepClass::Generic;
}

} // namespace xdv
