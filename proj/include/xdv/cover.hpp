#pragma once

#include "xdv/selection.hpp"
#include "xdv/triangulation.hpp"
#include "xdv/union_find.hpp"

#include <array>
#include <deque>
#include <vector>

namespace xdv {

/// A lift of a tetrahedron, named by the face word of its discovery path from the base.
struct LiftedTet {
    int tet = 0;
    std::vector<int> word;
    int parent = -1;
    int depth = 0;
    std::array<int, 4> nbr{-1, -1, -1, -1};
};

/// A lazily grown piece of the universal cover, built like a coset enumeration: lifts across
/// faces are deduced from edge cycles, and lifts found to coincide are merged. Merged ids stay
/// valid and resolve to their survivor through find().
class Ball {
public:
    explicit Ball(const Triangulation& t, int base_tet = 0);

    const Triangulation& triangulation() const { return t_; }
    /// Number of ids handed out, merged ones included.
    int size() const { return static_cast<int>(lifts_.size()); }
    int live_size() const { return live_; }
    const LiftedTet& lift(int i) const { return lifts_[i]; }
    int find(int lift) const;
    bool alive(int lift) const { return find(lift) == lift; }

    /// Grows every lift at depth < radius across all of its faces.
    void expand(int radius);
    /// Neighbor across a face, created on demand.
    int neighbor(int lift, int face);
    int existing_neighbor(int lift, int face) const;
    /// Creates every lift around every edge of a lift, so that all its edge cycles close.
    void close_star(int lift);
    /// Follows a face word from a lift.
    int walk(int lift, const std::vector<int>& word);

    /// Lifted cusp and lifted edge classes of the current ball.
    int vertex_class(int lift, int v);
    int edge_class(int lift, int e);
    int lifted_vertex_count();
    int lifted_edge_count();
    std::pair<int, int> edge_endpoints(int lifted_edge);
    int quotient_edge(int lifted_edge);
    int lifted_valence(int lifted_edge);

private:
    void glue(int a, int fa, int b, int fb);
    void merge(int a, int b);
    void scan(int lift);
    void settle();
    void refresh();

    Triangulation t_;
    std::vector<LiftedTet> lifts_;
    mutable std::vector<int> alias_;
    int live_ = 0;
    std::deque<int> pending_;
    std::deque<std::pair<int, int>> merges_;
    bool dirty_ = true;
    std::vector<int> vclass_, eclass_;
    int nv_ = 0, ne_ = 0;
    std::vector<std::pair<int, int>> ends_;
    std::vector<int> equot_, evalence_;
};

/// Number of E0 edges on a face of a tetrahedron.
int e0_count_on_face(const Triangulation& t, const EdgeSelection& sel, int tet, int face);

/// Turn inside `tet` from face `from` to face `to` across their shared edge.
struct GEdge {
    int tet, from, to;
    int shared_edge() const;
    GEdge reversed() const { return {tet, to, from}; }
    bool operator==(const GEdge&) const = default;
};

/// Quotient triangle graph restricted to the component reachable from the basepoint.
struct TriangleGraph {
    int base_tet = -1, base_face = -1;
    std::vector<int> faces;  // face classes in the component
    std::vector<int> discarded_faces;
    std::vector<GEdge> edges;
    std::vector<int> tree, non_tree;  // indices into edges
    int components = 0;  // of the whole graph
};

/// Lowest-index type-111 face of the lowest-index tetrahedron that has one; (-1,-1) if none.
std::pair<int, int> basepoint(const Triangulation& t, const EdgeSelection& sel);
TriangleGraph triangle_graph(const Triangulation& t, const EdgeSelection& sel);

struct QuotientLoop {
    int start_tet, start_face;
    std::vector<GEdge> steps;
};

/// Fundamental cycles of the reachable component, one per non-tree edge. Throws when G is empty.
std::vector<QuotientLoop> loop_basis(const Triangulation& t, const EdgeSelection& sel);

struct ChainLink {
    int lift, face;
    int turn = -1;  // local edge turned through to reach the next triangle, -1 for the last
};

struct Chain {
    std::vector<ChainLink> triangles;
    int end_lift = -1;
};

/// Lifts a loop starting at a lift of its start tetrahedron. Throws ValidationError when a
/// turn uses an E0 edge or the first triangle is not of type 111.
Chain lift_chain(Ball& ball, const QuotientLoop& loop, int start_lift, const EdgeSelection& sel);

} // namespace xdv
