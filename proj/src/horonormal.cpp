#include "xdv/horonormal.hpp"

#include "xdv/errors.hpp"
#include "xdv/union_find.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace xdv {

std::string to_string(TetType t) {
    switch (t) {
    case TetType::T1111: return "1111";
    case TetType::T211: return "211";
    case TetType::T22: return "22";
    case TetType::T31: return "31";
    case TetType::T4: return "4";
    }
    return "?";
}

std::string to_string(FaceType t) {
    switch (t) {
    case FaceType::F111: return "111";
    case FaceType::F21: return "21";
    case FaceType::F3: return "3";
    }
    return "?";
}

std::string to_string(Cond1 c) {
    switch (c) {
    case Cond1::Proved: return "proved";
    case Cond1::Refuted: return "refuted";
    case Cond1::Undecided: return "undecided";
    }
    return "?";
}

int Classification::count(TetType t) const {
    return static_cast<int>(std::count_if(tets.begin(), tets.end(), [&](const TetClass& c) { return c.type == t; }));
}

Classification classify(const EdgeSelection& sel, const Triangulation& t) {
    for (int id : sel.e0)
        if (id >= static_cast<int>(t.edges().size())) throw ValidationError("edge " + std::to_string(id) + " does not exist");
    Classification c;
    c.tets.resize(t.size());
    c.faces.resize(t.size());
    for (int i = 0; i < t.size(); ++i) {
        for (int f = 0; f < 4; ++f) {
            const int n = e0_count_on_face(t, sel, i, f);
            if (n == 2)
                throw ValidationError("face " + std::to_string(f) + " of tet " + std::to_string(i) +
                                      " has two E0 edges and one E+ edge");
            c.faces[i][f] = n == 0 ? FaceType::F111 : n == 1 ? FaceType::F21 : FaceType::F3;
        }
        auto& tc = c.tets[i];
        UnionFind uf(4);
        for (int e = 0; e < 6; ++e)
            if (sel.in_e0(t.edge_of(i, e))) {
                tc.e0_local.push_back(e);
                auto [a, b] = edge_ends(e);
                uf.unite(a, b);
            }
        for (int e = 0; e < 6; ++e) {
            auto [a, b] = edge_ends(e);
            if (uf.same(a, b) && !sel.in_e0(t.edge_of(i, e)))
                throw ValidationError("tet " + std::to_string(i) + " has an E+ edge inside an E0 vertex block");
        }
        std::map<int, int> size;
        for (int v = 0; v < 4; ++v) ++size[uf.find(v)];
        std::map<int, int> index;
        for (int v = 0; v < 4; ++v) tc.block[v] = index.emplace(uf.find(v), int(index.size())).first->second;
        std::vector<int> parts;
        for (auto& [r, s] : size) parts.push_back(s);
        std::sort(parts.rbegin(), parts.rend());
        if (parts == std::vector<int>{1, 1, 1, 1}) tc.type = TetType::T1111;
        else if (parts == std::vector<int>{2, 1, 1}) tc.type = TetType::T211, tc.quads = 1;
        else if (parts == std::vector<int>{2, 2}) tc.type = TetType::T22, tc.quads = 2;
        else if (parts == std::vector<int>{3, 1}) tc.type = TetType::T31;
        else tc.type = TetType::T4;
    }
    return c;
}

bool locally_valid(const EdgeSelection& sel, const Triangulation& t) {
    try {
        classify(sel, t);
        return true;
    } catch (const ValidationError&) {
        return false;
    }
}

std::optional<BadLoopWitness> bad_loop_screen(const EdgeSelection& sel, Ball& ball) {
    const int nv = ball.lifted_vertex_count();
    const int ne = ball.lifted_edge_count();
    UnionFind uf(nv);
    for (int e = 0; e < ne; ++e)
        if (sel.in_e0(ball.quotient_edge(e))) {
            auto [a, b] = ball.edge_endpoints(e);
            uf.unite(a, b);
        }
    for (int i = 0; i < ball.size(); ++i)
        for (int le = 0; le < 6; ++le) {
            if (!ball.alive(i)) break;
            const int e = ball.edge_class(i, le);
            if (sel.in_e0(ball.quotient_edge(e))) continue;
            auto [a, b] = ball.edge_endpoints(e);
            if (uf.same(a, b)) return BadLoopWitness{e, ball.quotient_edge(e), i, le};
        }
    return std::nullopt;
}

std::optional<BadLoopWitness> bad_loop_screen(const EdgeSelection& sel, const Triangulation& t, int depth) {
    Ball b(t);
    b.expand(depth);
    return bad_loop_screen(sel, b);
}

std::vector<EdgeSelection> enumerate_selections(const Triangulation& t, int depth) {
    t.require_closed("enumeration");
    const int n = static_cast<int>(t.edges().size());
    if (n > 24) throw DomainError("too many edge classes to enumerate");
    Ball ball(t);
    ball.expand(depth);
    std::vector<EdgeSelection> out;
    std::vector<std::vector<int>> subsets;
    for (std::uint32_t m = 0; m < (1u << n); ++m) {
        std::vector<int> s;
        for (int k = 0; k < n; ++k)
            if (m >> k & 1) s.push_back(k);
        subsets.push_back(s);
    }
    std::sort(subsets.begin(), subsets.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    for (auto& s : subsets) {
        EdgeSelection sel(s);
        if (!locally_valid(sel, t)) continue;
        if (bad_loop_screen(sel, ball)) continue;
        out.push_back(sel);
    }
    return out;
}

std::vector<int> inside_components(const Classification& c, const Triangulation& t) {
    UnionFind uf(t.size());
    for (int i = 0; i < t.size(); ++i)
        for (int f = 0; f < 4; ++f)
            if (c.faces[i][f] != FaceType::F3) uf.unite(i, t.tet(i).neighbor[f]);
    std::vector<int> comp(t.size(), -1);
    std::map<int, int> id;
    for (int i = 0; i < t.size(); ++i)
        if (c.tets[i].type != TetType::T4) comp[i] = id.emplace(uf.find(i), int(id.size())).first->second;
    return comp;
}

namespace {

/// Components of the lifted inside region over the lifts currently in the ball.
std::vector<int> ball_inside_components(Ball& ball, const Classification& c) {
    const auto& t = ball.triangulation();
    UnionFind uf(ball.size());
    for (int i = 0; i < ball.size(); ++i) {
        if (!ball.alive(i)) {
            uf.unite(i, ball.find(i));
            continue;
        }
        const int tet = ball.lift(i).tet;
        for (int f = 0; f < 4; ++f) {
            const int j = ball.existing_neighbor(i, f);
            if (j >= 0 && c.faces[tet][f] != FaceType::F3) uf.unite(i, j);
        }
    }
    std::vector<int> comp(ball.size(), -1);
    std::map<int, int> id;
    for (int i = 0; i < ball.size(); ++i)
        if (ball.alive(i) && c.tets[ball.lift(i).tet].type != TetType::T4) comp[i] = id.emplace(uf.find(i), int(id.size())).first->second;
    (void)t;
    return comp;
}

int count_distinct(const std::vector<int>& v) {
    std::vector<int> s;
    for (int x : v)
        if (x >= 0) s.push_back(x);
    std::sort(s.begin(), s.end());
    return static_cast<int>(std::unique(s.begin(), s.end()) - s.begin());
}

} // namespace

void resolve_marks(const Ball& ball, std::vector<char>& marks) {
    marks.resize(ball.size(), 0);
    for (int k = 0; k < ball.size(); ++k)
        if (marks[k]) marks[ball.find(k)] = 1;
    for (int k = 0; k < ball.size(); ++k) marks[k] = marks[ball.find(k)];
}

std::vector<char> inside_reach(Ball& ball, const Classification& c, int from, int budget) {
    from = ball.find(from);
    std::vector<char> reached(ball.size(), 0);
    std::deque<int> q{from};
    reached[from] = 1;
    int explored = 0;
    while (!q.empty() && explored < budget) {
        const int x = ball.find(q.front());
        q.pop_front();
        ++explored;
        ball.close_star(x);
        for (int f = 0; f < 4; ++f) {
            if (c.faces[ball.lift(x).tet][f] == FaceType::F3) continue;
            const int y = ball.neighbor(x, f);
            if (y >= static_cast<int>(reached.size())) reached.resize(ball.size(), 0);
            if (!reached[y]) reached[y] = 1, q.push_back(y);
        }
    }
    resolve_marks(ball, reached);
    return reached;
}

std::vector<int> uncertified_translates(Ball& ball, const Classification& c, int budget) {
    const auto& t = ball.triangulation();
    const int root = ball.lift(0).tet;
    // Spanning tree of the dual graph from the root, as face words. Each non-tree face gives a
    // generator g of the deck group; g applied to the root lift must stay in its inside component.
    std::vector<std::vector<int>> down(t.size()), up(t.size());
    std::vector<std::array<char, 4>> in_tree(t.size(), {0, 0, 0, 0});
    std::vector<char> seen(t.size(), 0);
    std::deque<int> q{root};
    seen[root] = 1;
    while (!q.empty()) {
        const int s = q.front();
        q.pop_front();
        for (int f = 0; f < 4; ++f) {
            const int n = t.tet(s).neighbor[f];
            if (seen[n]) continue;
            seen[n] = 1;
            const int back = t.tet(s).gluing[f][f];
            down[n] = down[s];
            down[n].push_back(f);
            up[n] = {back};
            up[n].insert(up[n].end(), up[s].begin(), up[s].end());
            in_tree[s][f] = in_tree[n][back] = 1;
            q.push_back(n);
        }
    }
    std::vector<int> targets;
    for (int s = 0; s < t.size(); ++s)
        for (int f = 0; f < 4; ++f)
            if (!in_tree[s][f]) {
                const int n = t.tet(s).neighbor[f];
                targets.push_back(ball.walk(ball.neighbor(ball.walk(0, down[s]), f), up[n]));
            }
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    // Search the lifted inside region from the root lift, and from each target it misses.
    auto home = inside_reach(ball, c, 0, budget);
    std::vector<int> out;
    for (int x : targets) {
        x = ball.find(x);
        resolve_marks(ball, home);
        if (home[x]) continue;
        const auto other = inside_reach(ball, c, x, budget);
        resolve_marks(ball, home);
        bool meet = false;
        for (size_t k = 0; k < other.size() && !meet; ++k) meet = other[k] && home[k];
        if (!meet) out.push_back(x);
    }
    return out;
}

std::string OmnipresenceReport::str() const {
    std::string s = "cond1=" + to_string(cond1);
    if (cond1 == Cond1::Undecided) s += "@" + std::to_string(depth);
    s += " cond2=" + std::string(cond2 ? "true" : "false");
    s += " cond3=" + std::string(cond3 ? "true" : "false");
    if (!witness.empty()) s += " (" + witness + ")";
    return s;
}

OmnipresenceReport omnipresence(const EdgeSelection& sel, const Triangulation& t, int depth) {
    const auto c = classify(sel, t);
    OmnipresenceReport r;
    r.depth = depth;
    // Condition 2: every cusp meets an E+ edge.
    std::vector<char> touched(t.cusps().size(), 0);
    for (int i = 0; i < t.size(); ++i)
        for (int e = 0; e < 6; ++e)
            if (!sel.in_e0(t.edge_of(i, e))) {
                auto [a, b] = edge_ends(e);
                touched[t.cusp_of(i, a)] = touched[t.cusp_of(i, b)] = 1;
            }
    for (size_t k = 0; k < touched.size(); ++k)
        if (!touched[k]) r.starved_cusps.push_back(int(k));
    r.cond2 = r.starved_cusps.empty();
    // Condition 3: a type-111 triangle exists.
    for (int i = 0; i < t.size() && !r.cond3; ++i)
        for (int f = 0; f < 4; ++f)
            if (c.faces[i][f] == FaceType::F111) r.cond3 = true;

    const auto comp = inside_components(c, t);
    r.quotient_components = count_distinct(comp);
    if (r.quotient_components == 0) {
        r.cond1 = Cond1::Refuted;
        r.witness = "inside region is empty";
        return r;
    }
    // Root at the lowest tetrahedron of type other than 4.
    int root = 0;
    while (c.tets[root].type == TetType::T4) ++root;
    Ball ball(t, root);
    ball.expand(depth);
    r.ball_components = count_distinct(ball_inside_components(ball, c));

    if (c.count(TetType::T31) == 0 && c.count(TetType::T4) == 0) {
        r.cond1 = Cond1::Proved;
        return r;
    }
    if (r.quotient_components > 1) {
        r.cond1 = Cond1::Refuted;
        for (int i = 0; i < t.size(); ++i)
            if (comp[i] > 0) {
                r.witness = "tets " + std::to_string(root) + " and " + std::to_string(i) + " lie in different inside components";
                break;
            }
        return r;
    }
    std::vector<char> in(t.size(), 0);
    std::vector<std::array<char, 4>> crossable(t.size(), {0, 0, 0, 0});
    for (int i = 0; i < t.size(); ++i) {
        in[i] = comp[i] >= 0;
        for (int f = 0; f < 4; ++f) crossable[i][f] = in[i] && c.faces[i][f] != FaceType::F3;
    }
    if (!dual_loops_span_homology(t, in, crossable)) {
        r.cond1 = Cond1::Refuted;
        r.witness = "loops in the inside region miss part of the first homology";
        return r;
    }
    r.cond1 = uncertified_translates(ball, c).empty() ? Cond1::Proved : Cond1::Undecided;
    return r;
}

int HoroNormalSurface::arcs(int tet, int face, int vertex) const {
    const auto& p = pieces[tet];
    int n = p.triangles[vertex];
    if (p.quads > 0) {
        // The quad separates vertex pairs; on this face it cuts off the vertex alone on its side.
        int side_mate = -1;
        for (int w = 0; w < 4; ++w)
            if (w != vertex && shape_slot(local_edge(std::min(w, vertex), std::max(w, vertex))) == p.quad_slot) side_mate = w;
        if (side_mate == face) n += p.quads;
    }
    return n;
}

int HoroNormalSurface::edge_weight(int tet, int e) const {
    const auto& p = pieces[tet];
    auto [a, b] = edge_ends(e);
    int w = p.triangles[a] + p.triangles[b];
    if (p.quads > 0 && shape_slot(e) != p.quad_slot) w += p.quads;
    return w;
}

int HoroNormalSurface::euler_characteristic(const Triangulation& t) const {
    int v = 0, e = 0, f = 0;
    for (const auto& ec : t.edges()) {
        const auto& c = ec.cycle[0];
        v += edge_weight(c.tet, c.edge());
    }
    for (const auto& fc : t.faces()) {
        auto [tet, face] = fc.slots[0];
        for (int x = 0; x < 4; ++x)
            if (x != face) e += arcs(tet, face, x);
    }
    for (const auto& p : pieces) f += p.triangles[0] + p.triangles[1] + p.triangles[2] + p.triangles[3] + p.quads;
    return v - e + f;
}

HoroNormalSurface surface_pieces(const EdgeSelection& sel, const Triangulation& t) {
    const auto c = classify(sel, t);
    HoroNormalSurface s;
    s.selection = sel;
    s.pieces.resize(t.size());
    for (int i = 0; i < t.size(); ++i) {
        const auto& tc = c.tets[i];
        auto& p = s.pieces[i];
        std::map<int, int> block_size;
        for (int v = 0; v < 4; ++v) ++block_size[tc.block[v]];
        switch (tc.type) {
        case TetType::T1111: p.triangles = {1, 1, 1, 1}; break;
        case TetType::T211:
            for (int v = 0; v < 4; ++v)
                if (block_size[tc.block[v]] == 1) p.triangles[v] = 1;
            p.quads = 1;
            p.quad_slot = shape_slot(tc.e0_local[0]);
            break;
        case TetType::T22:
            p.quads = 2;
            p.quad_slot = shape_slot(tc.e0_local[0]);
            break;
        case TetType::T31:
            for (int v = 0; v < 4; ++v)
                if (block_size[tc.block[v]] == 1) p.triangles[v] = 2;
            break;
        case TetType::T4: break;
        }
    }
    return s;
}

} // namespace xdv
