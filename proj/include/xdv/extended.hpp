#pragma once

#include "xdv/cover.hpp"
#include "xdv/errors.hpp"
#include "xdv/expr.hpp"
#include "xdv/horonormal.hpp"
#include "xdv/selection.hpp"
#include "xdv/triangulation.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace xdv {

/// Arithmetic handle on a node of an expression arena.
struct Sym {
    ExprArena* arena = nullptr;
    int id = -1;
};

inline Sym operator+(Sym a, Sym b) { return {a.arena, a.arena->add(a.id, b.id)}; }
inline Sym operator-(Sym a, Sym b) { return {a.arena, a.arena->sub(a.id, b.id)}; }
inline Sym operator*(Sym a, Sym b) { return {a.arena, a.arena->mul(a.id, b.id)}; }
inline Sym operator/(Sym a, Sym b) { return {a.arena, a.arena->div(a.id, b.id)}; }
inline Sym operator-(Sym a) { return {a.arena, a.arena->neg(a.id)}; }

/// A constant of the same scalar kind as `like`.
inline cplx constant_like(const cplx&, cplx c) { return c; }
inline Sym constant_like(const Sym& like, cplx c) { return {like.arena, like.arena->constant(c)}; }

/// Whether x is zero relative to ref. Symbolic values only know about literal zeros.
inline bool negligible(const cplx& x, const cplx& ref) { return std::abs(x) <= 1e-11 * std::max(1.0, std::abs(ref)); }
inline bool negligible(const Sym& x, const Sym&) { return x.arena->is_const(x.id, 0.0); }

/// Leading coefficient and zeta-order of a nonzero quantity.
template <class S>
struct Leading {
    int order = 0;
    S lead{};
};

template <class S>
Leading<S> operator-(const Leading<S>& x) { return {x.order, -x.lead}; }

/// Lowest-order dihedral angle x at an edge, and the leading term of x - 1.
template <class S>
struct Dihedral {
    Leading<S> x;
    Leading<S> xm1;
};

/// Shape data per tetrahedron: one value for 1111, 211 and 22, two for 31, none for 4.
struct ExtendedPoint {
    std::vector<TetType> types;
    std::vector<std::vector<cplx>> data;

    /// Throws DomainError on a zero value, a 1111 value of 1, or a count that does not fit the type.
    void validate() const;
};

int variable_count(TetType t);

/// Variable names of each tetrahedron: `base` for one value, `base_1` and `base_2` for a 31 tet.
/// Bases default to z0, z1, ...
std::vector<std::vector<std::string>> extended_variable_names(const Classification& c,
                                                              const std::vector<std::string>& tet_names = {});

/// Shape slot holding the angle of positive order in a 211 or 22 tetrahedron.
int preferred_slot(const TetClass& c);

/// Lowest-order dihedral angle of a tetrahedron at a local edge outside E0.
template <class S>
Dihedral<S> dihedral(const TetClass& c, int local, const std::vector<S>& vars) {
    if (std::find(c.e0_local.begin(), c.e0_local.end(), local) != c.e0_local.end())
        throw DomainError("no dihedral datum on an E0 edge");
    const int slot = shape_slot(local);
    switch (c.type) {
    case TetType::T4: throw DomainError("a type-4 tetrahedron carries no data");
    case TetType::T1111: {
        const S& z = vars.at(0);
        const S one = constant_like(z, 1.0);
        S x = slot == 0 ? z : slot == 1 ? (z - one) / z : one / (one - z);
        return {{0, x}, {0, x - one}};
    }
    case TetType::T211:
    case TetType::T22: {
        const int k = c.type == TetType::T211 ? 1 : 2;
        const S& z = vars.at(0);
        const S one = constant_like(z, 1.0);
        const int r = (slot - preferred_slot(c) + 3) % 3;
        if (r == 0) return {{k, z}, {0, -one}};
        if (r == 1) return {{-k, -one / z}, {-k, -one / z}};
        return {{0, one}, {k, z}};
    }
    case TetType::T31: {
        const S& z1 = vars.at(0);
        const S& z2 = vars.at(1);
        const S one = constant_like(z1, 1.0);
        S x = slot == 0 ? z1 : slot == 1 ? z2 : -one / (z1 * z2);
        return {{0, x}, {0, x - one}};
    }
    }
    throw DomainError("unknown tetrahedron type");
}

template <class S>
struct DevelopInput {
    S a, b, c;  // order-0 positions
    Leading<S> ab, ac, bc;  // a-b, a-c, b-c
    Dihedral<S> z;
};

template <class S>
struct DevelopOutput {
    S d;
    Leading<S> da, db, dc;  // d-a, d-b, d-c
};

/// Leading data of the fourth point d with cross_ratio(a,b,c,d) = z, from leading data alone.
/// Branches on integer orders only. Throws DevelopError when d leaves C[[zeta]].
template <class S>
DevelopOutput<S> develop_step(const DevelopInput<S>& in) {
    const int o1 = in.bc.order + in.z.x.order, o2 = in.ac.order;
    Leading<S> q;
    if (o1 < o2) {
        q = {o1, in.bc.lead * in.z.x.lead};
    } else if (o2 < o1) {
        q = {o2, -in.ac.lead};
    } else {
        const S x = in.bc.lead * in.z.x.lead;
        q = {o1, x - in.ac.lead};
        if (negligible(q.lead, x)) throw DevelopError("fourth point leaves C[[zeta]]");
    }
    DevelopOutput<S> r;
    r.da = {in.ab.order + in.ac.order - q.order, in.ab.lead * in.ac.lead / q.lead};
    r.db = {in.bc.order + in.ab.order + in.z.x.order - q.order, in.bc.lead * in.ab.lead * in.z.x.lead / q.lead};
    r.dc = {in.ac.order + in.bc.order + in.z.xm1.order - q.order, in.ac.lead * in.bc.lead * in.z.xm1.lead / q.lead};
    if (r.da.order < 0 || r.db.order < 0 || r.dc.order < 0) throw DevelopError("fourth point leaves C[[zeta]]");
    r.d = r.da.order == 0 ? in.a + r.da.lead : in.a;
    return r;
}

/// Developed triangle: lifted vertex ids, order-0 positions and the leading differences of
/// each pair. diff[0], diff[1], diff[2] are ids 0-1, 0-2 and 1-2.
template <class S>
struct DevelopedTriangle {
    std::array<int, 3> ids{};
    std::array<S, 3> pos{};
    std::array<Leading<S>, 3> diff{};

    int index(int id) const {
        for (int i = 0; i < 3; ++i)
            if (ids[i] == id) return i;
        throw DomainError("vertex is not on the developed triangle");
    }
    const S& position(int id) const { return pos[index(id)]; }
    /// Leading data of position(x) - position(y).
    Leading<S> difference(int x, int y) const {
        const int i = index(x), j = index(y);
        if (i == j) throw DomainError("difference of a vertex with itself");
        const int k = i + j - 1;
        return i < j ? diff[k] : -diff[k];
    }
};

struct LiftedTurn {
    int lift, from, to;
};

/// Whether the lifted edge between two local vertices of a lift lies over E0.
inline bool lifted_e0(const Triangulation& t, const EdgeSelection& sel, int tet, int a, int b) {
    return sel.in_e0(t.edge_of(tet, local_edge(a, b)));
}

/// Starting state on the face `face` of `lift`. A 111 face gets points[0..2] on its vertices in
/// local order. A 21 face puts points[0] on both ends of its E0 edge, separated by `offset` at
/// order 1 from the lower to the higher end, and points[1] on the third vertex.
template <class S>
DevelopedTriangle<S> anchor_triangle(Ball& ball, const EdgeSelection& sel, int lift, int face,
                                     const std::array<S, 3>& points, const S& offset) {
    const auto& t = ball.triangulation();
    const int tet = ball.lift(lift).tet;
    std::array<int, 3> u{};
    for (int v = 0, k = 0; v < 4; ++v)
        if (v != face) u[k++] = v;
    DevelopedTriangle<S> st;
    for (int i = 0; i < 3; ++i) st.ids[i] = ball.vertex_class(lift, u[i]);
    const std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
    int e0 = -1, count = 0;
    for (int k = 0; k < 3; ++k)
        if (lifted_e0(t, sel, tet, u[pairs[k].first], u[pairs[k].second])) e0 = k, ++count;
    if (count == 0) {
        st.pos = points;
        for (int k = 0; k < 3; ++k) st.diff[k] = {0, points[pairs[k].first] - points[pairs[k].second]};
    } else if (count == 1) {
        const auto [i, j] = pairs[e0];
        const int w = 3 - i - j;
        st.pos[i] = st.pos[j] = points[0];
        st.pos[w] = points[1];
        for (int k = 0; k < 3; ++k) {
            const auto [p, q] = pairs[k];
            st.diff[k] = k == e0 ? Leading<S>{1, -offset} : Leading<S>{0, st.pos[p] - st.pos[q]};
        }
    } else {
        throw ValidationError("anchor face is of type 3");
    }
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (st.ids[i] == st.ids[j]) throw DomainError("anchor triangle repeats a lifted vertex");
    return st;
}

/// One turn inside a tetrahedron from face `from` to face `to`; `ids` names the state's vertices
/// by local vertex.
template <class S>
DevelopedTriangle<S> develop_in_tet(const Triangulation& t, const Classification& cls, const EdgeSelection& sel,
                                    const std::vector<std::vector<S>>& vars, const DevelopedTriangle<S>& st,
                                    int tet, int from, int to, const std::array<int, 4>& ids) {
    std::array<int, 4> v{};
    for (int x = 0, k = 0; x < 4; ++x)
        if (x != from && x != to) v[k++] = x;
    v[2] = to;
    v[3] = from;
    if (!is_even(v)) std::swap(v[0], v[1]);
    const int e = local_edge(v[0], v[1]);
    if (sel.in_e0(t.edge_of(tet, e))) throw ValidationError("turn through an E0 edge");
    const int A = ids[v[0]], B = ids[v[1]], C = ids[v[2]], D = ids[v[3]];
    if (D == A || D == B) throw DomainError("developed triangle repeats a lifted vertex");
    DevelopInput<S> in{st.position(A), st.position(B), st.position(C), st.difference(A, B), st.difference(A, C),
                       st.difference(B, C), dihedral(cls.tets[tet], e, vars[tet])};
    DevelopOutput<S> out = develop_step(in);
    auto expect = [&](int a, const Leading<S>& d) {
        const int want = lifted_e0(t, sel, tet, v[3], a) ? 1 : 0;
        if (d.order != want) throw DevelopError("developed difference has order " + std::to_string(d.order));
    };
    expect(v[0], out.da);
    expect(v[1], out.db);
    expect(v[2], out.dc);
    DevelopedTriangle<S> next;
    next.ids = {A, B, D};
    next.pos = {in.a, in.b, out.d};
    next.diff = {in.ab, -out.da, -out.db};
    return next;
}

/// One turn in the ball: the state sits on face `from` of the lift and moves to face `to`.
template <class S>
DevelopedTriangle<S> develop_turn(Ball& ball, const Classification& cls, const EdgeSelection& sel,
                                  const std::vector<std::vector<S>>& vars, const DevelopedTriangle<S>& st,
                                  const LiftedTurn& turn) {
    std::array<int, 4> ids{};
    for (int x = 0; x < 4; ++x) ids[x] = ball.vertex_class(turn.lift, x);
    return develop_in_tet(ball.triangulation(), cls, sel, vars, st, ball.lift(turn.lift).tet, turn.from, turn.to, ids);
}

template <class S>
DevelopedTriangle<S> develop_along(Ball& ball, const Classification& cls, const EdgeSelection& sel,
                                   const std::vector<std::vector<S>>& vars, DevelopedTriangle<S> st,
                                   const std::vector<LiftedTurn>& turns) {
    for (const auto& tr : turns) st = develop_turn(ball, cls, sel, vars, st, tr);
    return st;
}

/// A closed path in the lifted valid-triangle graph and its image in the quotient.
struct ClosedLoop {
    std::vector<LiftedTurn> turns;
    std::vector<GEdge> quotient;
};

struct ExtendedConfig {
    int radius = 3;
    int max_loop_length = 16;
    int max_loops = 32;
    std::uint64_t anchor_seed = 1;
    /// Base names per tetrahedron; defaults to z0, z1, ...
    std::vector<std::string> tet_names;
};

struct LoopSearch {
    std::vector<ClosedLoop> loops;
    int graph_vertices = 0;
    int graph_edges = 0;
    int local_relations = 0;
};

/// Closed loops of the lifted valid-triangle graph inside the ball that are independent over
/// GF(2) of the loops inside one lift and the loops around one E+ edge. Shortest first, one per
/// quotient loop up to rotation and reversal.
LoopSearch closed_loops(Ball& ball, const Classification& cls, const EdgeSelection& sel, const ExtendedConfig& cfg);

/// Loop rotated to start on a 111 triangle when it has one.
ClosedLoop anchored(const ClosedLoop& loop, const Triangulation& t, const EdgeSelection& sel);

/// Equations of the extended deformation variety: one monomial equation per E+ edge class, in
/// edge order, then three closure equations per closed loop found in the cover. Variables are
/// declared in tet order with a `var <name> : <type> tet <i>` header line each.
RationalSystem consistency_system(const Triangulation& t, const EdgeSelection& sel, const ExtendedConfig& cfg = {});

/// Per-tet data of a point of a consistency system, read from its variables.
ExtendedPoint extended_point(const RationalSystem& sys, const Eigen::VectorXcd& x, const Classification& cls,
                             const std::vector<std::string>& tet_names = {});

} // namespace xdv
