#include "xdv/cover.hpp"

#include "xdv/errors.hpp"

#include <deque>
#include <map>

namespace xdv {

Ball::Ball(const Triangulation& t, int base_tet) : t_(t) {
    t_.require_closed("the universal cover");
    if (base_tet < 0 || base_tet >= t.size()) throw DomainError("base tetrahedron out of range");
    lifts_.push_back({base_tet, {}, -1, 0, {-1, -1, -1, -1}});
    alias_.push_back(0);
    live_ = 1;
}

int Ball::find(int x) const {
    while (alias_[x] != x) {
        alias_[x] = alias_[alias_[x]];
        x = alias_[x];
    }
    return x;
}

int Ball::existing_neighbor(int lift, int face) const {
    const int n = lifts_[find(lift)].nbr[face];
    return n < 0 ? -1 : find(n);
}

void Ball::glue(int a, int fa, int b, int fb) {
    a = find(a);
    b = find(b);
    const int na = existing_neighbor(a, fa), nb = existing_neighbor(b, fb);
    if (na >= 0 && na != b) merges_.push_back({na, b});
    if (nb >= 0 && nb != a) merges_.push_back({nb, a});
    if (na < 0) lifts_[a].nbr[fa] = b;
    if (nb < 0) lifts_[b].nbr[fb] = a;
    pending_.push_back(a);
    pending_.push_back(b);
    dirty_ = true;
}

void Ball::merge(int x, int y) {
    x = find(x);
    y = find(y);
    if (x == y) return;
    if (lifts_[x].tet != lifts_[y].tet) throw Error("lifts of different tetrahedra coincide in the cover");
    if (y < x) std::swap(x, y);
    alias_[y] = x;
    --live_;
    if (lifts_[y].depth < lifts_[x].depth) {
        lifts_[x].depth = lifts_[y].depth;
        lifts_[x].word = lifts_[y].word;
        lifts_[x].parent = lifts_[y].parent;
    }
    const auto& T = t_.tet(lifts_[x].tet);
    for (int f = 0; f < 4; ++f) {
        const int ny = lifts_[y].nbr[f] < 0 ? -1 : find(lifts_[y].nbr[f]);
        if (ny < 0) continue;
        const int nx = existing_neighbor(x, f);
        if (nx < 0) {
            lifts_[x].nbr[f] = ny;
            lifts_[ny].nbr[T.gluing[f][f]] = x;
        } else if (nx != ny) {
            merges_.push_back({nx, ny});
        }
    }
    pending_.push_back(x);
    dirty_ = true;
}

void Ball::scan(int lift) {
    lift = find(lift);
    const int tet = lifts_[lift].tet;
    for (int e = 0; e < 6; ++e) {
        auto [a, b] = edge_ends(e);
        Corner c{tet, even_completion(a, b)};
        const int valence = t_.edges()[t_.edge_of(tet, e)].valence;
        // Forward around the edge as far as lifts exist.
        int fwd = lift, k = 0;
        Corner cf = c;
        while (k < valence) {
            const int n = existing_neighbor(fwd, cf.v[2]);
            if (n < 0) break;
            fwd = n;
            cf = t_.next_corner(cf);
            ++k;
        }
        if (k == valence) {
            if (fwd != lift) merges_.push_back({lift, fwd});
            continue;
        }
        int bwd = lift, m = 0;
        Corner cb = c;
        while (k + m < valence - 1) {
            const int n = existing_neighbor(bwd, cb.v[3]);
            if (n < 0) break;
            bwd = n;
            cb = t_.prev_corner(cb);
            ++m;
        }
        if (k + m < valence - 1) continue;
        // The two ends must be joined across the one missing face.
        if (!(t_.next_corner(cf) == cb)) throw Error("edge walk in the cover lost its place");
        const int back = existing_neighbor(bwd, cb.v[3]);
        if (back >= 0) {
            if (back != fwd) merges_.push_back({back, fwd});
        } else {
            glue(fwd, cf.v[2], bwd, cb.v[3]);
        }
    }
}

void Ball::settle() {
    while (!pending_.empty() || !merges_.empty()) {
        if (!merges_.empty()) {
            auto [x, y] = merges_.front();
            merges_.pop_front();
            merge(x, y);
            continue;
        }
        const int x = pending_.front();
        pending_.pop_front();
        scan(x);
    }
}

int Ball::neighbor(int lift, int face) {
    lift = find(lift);
    if (existing_neighbor(lift, face) >= 0) return existing_neighbor(lift, face);
    pending_.push_back(lift);
    settle();
    lift = find(lift);
    if (existing_neighbor(lift, face) >= 0) return existing_neighbor(lift, face);
    const auto& T = t_.tet(lifts_[lift].tet);
    LiftedTet n;
    n.tet = T.neighbor[face];
    n.word = lifts_[lift].word;
    n.word.push_back(face);
    n.parent = lift;
    n.depth = lifts_[lift].depth + 1;
    lifts_.push_back(n);
    alias_.push_back(size() - 1);
    ++live_;
    glue(lift, face, size() - 1, T.gluing[face][face]);
    settle();
    return existing_neighbor(lift, face);
}

void Ball::expand(int radius) {
    for (int i = 0; i < size(); ++i)
        if (alive(i) && lifts_[i].depth < radius)
            for (int f = 0; f < 4; ++f) {
                neighbor(i, f);
                if (!alive(i)) break;
            }
}

void Ball::close_star(int lift) {
    for (int e = 0; e < 6; ++e) {
        lift = find(lift);
        auto [a, b] = edge_ends(e);
        Corner c{lifts_[lift].tet, even_completion(a, b)};
        const int valence = t_.edges()[t_.edge_of(c.tet, e)].valence;
        int cur = lift;
        for (int s = 0; s < valence; ++s) {
            cur = neighbor(cur, c.v[2]);
            c = t_.next_corner(c);
        }
    }
}

int Ball::walk(int lift, const std::vector<int>& word) {
    for (int f : word) lift = neighbor(lift, f);
    return find(lift);
}

void Ball::refresh() {
    if (!dirty_) return;
    const int n = size();
    UnionFind uv(4 * n), ue(6 * n);
    for (int i = 0; i < n; ++i) {
        const int r = find(i);
        if (r != i) {
            for (int v = 0; v < 4; ++v) uv.unite(4 * i + v, 4 * r + v);
            for (int e = 0; e < 6; ++e) ue.unite(6 * i + e, 6 * r + e);
            continue;
        }
        const auto& T = t_.tet(lifts_[i].tet);
        for (int f = 0; f < 4; ++f) {
            const int j = existing_neighbor(i, f);
            if (j < 0) continue;
            const Perm& p = T.gluing[f];
            for (int v = 0; v < 4; ++v)
                if (v != f) uv.unite(4 * i + v, 4 * j + p[v]);
            for (int a = 0; a < 4; ++a)
                for (int b = a + 1; b < 4; ++b)
                    if (a != f && b != f) ue.unite(6 * i + local_edge(a, b), 6 * j + local_edge(p[a], p[b]));
        }
    }
    std::map<int, int> vid, eid;
    vclass_.assign(4 * n, 0);
    eclass_.assign(6 * n, 0);
    for (int k = 0; k < 4 * n; ++k) vclass_[k] = vid.emplace(uv.find(k), int(vid.size())).first->second;
    for (int k = 0; k < 6 * n; ++k) eclass_[k] = eid.emplace(ue.find(k), int(eid.size())).first->second;
    nv_ = int(vid.size());
    ne_ = int(eid.size());
    ends_.assign(ne_, {-1, -1});
    equot_.assign(ne_, -1);
    evalence_.assign(ne_, 0);
    for (int i = 0; i < n; ++i) {
        if (!alive(i)) continue;
        for (int e = 0; e < 6; ++e) {
            const int c = eclass_[6 * i + e];
            auto [a, b] = edge_ends(e);
            ends_[c] = {vclass_[4 * i + a], vclass_[4 * i + b]};
            equot_[c] = t_.edge_of(lifts_[i].tet, e);
            ++evalence_[c];
        }
    }
    dirty_ = false;
}

int Ball::vertex_class(int lift, int v) {
    refresh();
    return vclass_[4 * lift + v];
}
int Ball::edge_class(int lift, int e) {
    refresh();
    return eclass_[6 * lift + e];
}
int Ball::lifted_vertex_count() {
    refresh();
    return nv_;
}
int Ball::lifted_edge_count() {
    refresh();
    return ne_;
}
std::pair<int, int> Ball::edge_endpoints(int e) {
    refresh();
    return ends_[e];
}
int Ball::quotient_edge(int e) {
    refresh();
    return equot_[e];
}
int Ball::lifted_valence(int e) {
    refresh();
    return evalence_[e];
}

int e0_count_on_face(const Triangulation& t, const EdgeSelection& sel, int tet, int face) {
    int n = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            if (a != face && b != face && sel.in_e0(t.edge_of(tet, local_edge(a, b)))) ++n;
    return n;
}

int GEdge::shared_edge() const {
    int x = -1, y = -1;
    for (int k = 0; k < 4; ++k)
        if (k != from && k != to) (x < 0 ? x : y) = k;
    return local_edge(x, y);
}

std::pair<int, int> basepoint(const Triangulation& t, const EdgeSelection& sel) {
    for (int i = 0; i < t.size(); ++i)
        for (int f = 0; f < 4; ++f)
            if (e0_count_on_face(t, sel, i, f) == 0) return {i, f};
    return {-1, -1};
}

TriangleGraph triangle_graph(const Triangulation& t, const EdgeSelection& sel) {
    t.require_closed("the triangle graph");
    TriangleGraph g;
    std::tie(g.base_tet, g.base_face) = basepoint(t, sel);
    const int nf = static_cast<int>(t.faces().size());
    std::vector<GEdge> all;
    std::vector<std::vector<int>> adj(nf);
    for (int i = 0; i < t.size(); ++i)
        for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b) {
                GEdge e{i, a, b};
                if (sel.in_e0(t.edge_of(i, e.shared_edge()))) continue;
                adj[t.face_of(i, a)].push_back(int(all.size()));
                adj[t.face_of(i, b)].push_back(int(all.size()));
                all.push_back(e);
            }
    UnionFind uf(nf);
    for (const auto& e : all) uf.unite(t.face_of(e.tet, e.from), t.face_of(e.tet, e.to));
    std::vector<char> root(nf, 0);
    for (int f = 0; f < nf; ++f) root[uf.find(f)] = 1;
    for (char r : root) g.components += r;
    if (g.base_tet < 0) {
        for (int f = 0; f < nf; ++f) g.discarded_faces.push_back(f);
        return g;
    }
    const int start = t.face_of(g.base_tet, g.base_face);
    std::vector<char> seen(nf, 0), used(all.size(), 0);
    std::deque<int> q{start};
    seen[start] = 1;
    std::vector<int> local(all.size(), -1);
    while (!q.empty()) {
        const int f = q.front();
        q.pop_front();
        g.faces.push_back(f);
        for (int k : adj[f]) {
            if (used[k]) continue;
            used[k] = 1;
            const auto& e = all[k];
            const int u = t.face_of(e.tet, e.from), v = t.face_of(e.tet, e.to);
            const int other = u == f ? v : u;
            local[k] = int(g.edges.size());
            g.edges.push_back(e);
            if (!seen[other]) {
                seen[other] = 1;
                q.push_back(other);
                g.tree.push_back(local[k]);
            } else {
                g.non_tree.push_back(local[k]);
            }
        }
    }
    for (int f = 0; f < nf; ++f)
        if (!seen[f]) g.discarded_faces.push_back(f);
    return g;
}

std::vector<QuotientLoop> loop_basis(const Triangulation& t, const EdgeSelection& sel) {
    const auto g = triangle_graph(t, sel);
    if (g.base_tet < 0 || g.edges.empty()) throw DomainError("the triangle graph is empty");
    const int start = t.face_of(g.base_tet, g.base_face);
    // Tree path from the root to each face, as oriented turns.
    std::map<int, std::vector<GEdge>> path{{start, {}}};
    std::vector<int> pending = g.tree;
    while (!pending.empty()) {
        std::vector<int> rest;
        for (int k : pending) {
            const auto& e = g.edges[k];
            const int u = t.face_of(e.tet, e.from), v = t.face_of(e.tet, e.to);
            if (path.count(u) && !path.count(v)) {
                path[v] = path[u];
                path[v].push_back(e);
            } else if (path.count(v) && !path.count(u)) {
                path[u] = path[v];
                path[u].push_back(e.reversed());
            } else {
                rest.push_back(k);
            }
        }
        if (rest.size() == pending.size()) throw Error("triangle graph tree is disconnected");
        pending = rest;
    }
    std::vector<QuotientLoop> out;
    for (int k : g.non_tree) {
        const auto& e = g.edges[k];
        QuotientLoop l{g.base_tet, g.base_face, path[t.face_of(e.tet, e.from)]};
        l.steps.push_back(e);
        const auto& back = path[t.face_of(e.tet, e.to)];
        for (auto it = back.rbegin(); it != back.rend(); ++it) l.steps.push_back(it->reversed());
        out.push_back(std::move(l));
    }
    return out;
}

Chain lift_chain(Ball& ball, const QuotientLoop& loop, int start_lift, const EdgeSelection& sel) {
    const auto& t = ball.triangulation();
    if (ball.lift(start_lift).tet != loop.start_tet) throw DomainError("start lift is not over the loop's tetrahedron");
    if (e0_count_on_face(t, sel, loop.start_tet, loop.start_face) != 0)
        throw ValidationError("a valid chain starts at a type-111 triangle");
    Chain ch;
    int L = start_lift, f = loop.start_face;
    auto align = [&](int tet, int face) {
        if (ball.lift(L).tet == tet && f == face) return;
        const int N = ball.neighbor(L, f);
        const int g = t.tet(ball.lift(L).tet).gluing[f][f];
        if (ball.lift(N).tet != tet || g != face) throw ValidationError("loop steps do not connect");
        L = N;
        f = g;
    };
    for (const auto& s : loop.steps) {
        align(s.tet, s.from);
        const int e = s.shared_edge();
        if (sel.in_e0(t.edge_of(s.tet, e))) throw ValidationError("chain turns through an E0 edge");
        ch.triangles.push_back({L, f, e});
        f = s.to;
    }
    align(loop.start_tet, loop.start_face);
    ch.triangles.push_back({L, f, -1});
    ch.end_lift = L;
    return ch;
}

} // namespace xdv
