#pragma once

#include "xdv/cover.hpp"
#include "xdv/selection.hpp"
#include "xdv/triangulation.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace xdv {

enum class TetType { T1111, T211, T22, T31, T4 };
enum class FaceType { F111, F21, F3 };

std::string to_string(TetType t);
std::string to_string(FaceType t);

struct TetClass {
    TetType type = TetType::T1111;
    std::array<int, 4> block{0, 1, 2, 3};  // vertex partition induced by E0 edges
    std::vector<int> e0_local;  // local edges in E0
    int quads = 0;
};

struct Classification {
    std::vector<TetClass> tets;
    std::vector<std::array<FaceType, 4>> faces;  // per (tet, face)
    int count(TetType t) const;
};

/// Throws ValidationError naming the first face or tetrahedron that breaks local validity.
Classification classify(const EdgeSelection& sel, const Triangulation& t);
bool locally_valid(const EdgeSelection& sel, const Triangulation& t);

struct BadLoopWitness {
    int lifted_edge = -1;
    int quotient_edge = -1;
    int lift = -1, local_edge = -1;
};

/// Lifted E+ edge whose endpoints are joined by lifted E0 edges inside the ball, if any.
std::optional<BadLoopWitness> bad_loop_screen(const EdgeSelection& sel, Ball& ball);
std::optional<BadLoopWitness> bad_loop_screen(const EdgeSelection& sel, const Triangulation& t, int depth);

/// Locally valid selections with no bad loop at the given depth, by cardinality then lexicographically.
std::vector<EdgeSelection> enumerate_selections(const Triangulation& t, int depth);

enum class Cond1 { Proved, Refuted, Undecided };
std::string to_string(Cond1 c);

struct OmnipresenceReport {
    Cond1 cond1 = Cond1::Undecided;
    bool cond2 = false;
    bool cond3 = false;
    int depth = 0;
    /// Components of the inside region among the tetrahedra of the quotient and of the ball.
    int quotient_components = 0;
    int ball_components = 0;
    std::vector<int> starved_cusps;
    std::string witness;
    bool omnipresent() const { return cond1 == Cond1::Proved && cond2 && cond3; }
    std::string str() const;
};

/// Components of the quotient inside region: tets of type other than 4, joined across faces not of type 3.
/// Entry -1 marks a type-4 tetrahedron.
std::vector<int> inside_components(const Classification& c, const Triangulation& t);

/// Resizes per-lift marks to the ball and makes merged ids agree with their survivors.
void resolve_marks(const Ball& ball, std::vector<char>& marks);

/// Lifts reached from `from` inside the lifted inside region, exploring at most `budget` lifts.
std::vector<char> inside_reach(Ball& ball, const Classification& c, int from, int budget);

/// Generator translates of the ball's base lift that the inside search cannot join to it.
/// The base tetrahedron must not be of type 4. Empty means the inside region of the cover is connected,
/// provided the quotient inside region is.
std::vector<int> uncertified_translates(Ball& ball, const Classification& c, int budget = 5000);

OmnipresenceReport omnipresence(const EdgeSelection& sel, const Triangulation& t, int depth);

struct TetPieces {
    std::array<int, 4> triangles{0, 0, 0, 0};  // normal triangles at each vertex
    int quads = 0;
    int quad_slot = -1;  // shape slot of the edge pair the quads separate
};

struct HoroNormalSurface {
    EdgeSelection selection;
    std::vector<TetPieces> pieces;
    /// Normal arcs at vertex v of face f of tet t.
    int arcs(int tet, int face, int vertex) const;
    /// Intersections of the surface with a local edge of a tetrahedron.
    int edge_weight(int tet, int local_edge) const;
    int euler_characteristic(const Triangulation& t) const;
};

HoroNormalSurface surface_pieces(const EdgeSelection& sel, const Triangulation& t);

} // namespace xdv
