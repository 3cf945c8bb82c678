#pragma once

#include "xdv/cover.hpp"
#include "xdv/gluing.hpp"
#include "xdv/horonormal.hpp"
#include "xdv/selection.hpp"
#include "xdv/triangulation.hpp"

#include <functional>
#include <vector>

namespace xdv {

/// Two crossings of an edge cycle. Crossing k is the face through which corner k of the cycle
/// passes to corner k+1. Equal crossings mean a pillow folded over along that face.
struct PillowSite {
    int edge = 0;
    int i = 0, j = 0;
    bool folded() const { return i == j; }
};

/// Crossing index of the face slot (tet, face) met along the local edge, in that edge's cycle.
int crossing_index(const Triangulation& t, int tet, int face, int local_edge);

struct SplitRecord {
    int old_tets = 0;
    int split_edge = -1;      // old edge class that was split
    int up = -1, down = -1;   // its copies: up lies in the first new tet, down in the second
    int diagonal = -1;        // the new valence-2 edge
    int tet_a = -1, tet_b = -1;
    bool folded = false;
    std::vector<std::vector<int>> edge_map;  // old edge class -> new classes
    std::vector<std::vector<int>> face_map;  // old face class -> new classes
};

struct PillowResult {
    Triangulation triangulation;
    SplitRecord record;
};

/// Opens a gap between the two faces of the site and fills it with two tetrahedra. The first
/// new tet has vertices (a, b, apex of the second face, apex of the first face) where ab is the
/// split edge; the second has the last two swapped. They are glued to each other along their
/// faces 0 and 1, which contain the diagonal 23.
PillowResult insert_pillow(const Triangulation& t, const PillowSite& site);

/// The site actually used by insert_pillow: folded at i when the four face slots are not distinct.
PillowSite effective_site(const Triangulation& t, const PillowSite& site);

/// Shapes of the new tetrahedra that keep a solution of the old gluing equations a solution.
std::vector<cplx> pillow_shapes(const Triangulation& t, const PillowSite& site,
                                                const std::vector<cplx>& z);

/// Selections on the new triangulation induced by one on the old, filtered by local validity
/// and the bad-loop screen. Throws DomainError when neither candidate survives.
std::vector<EdgeSelection> children(const EdgeSelection& sel, const SplitRecord& rec, const Triangulation& after, int depth);
std::vector<EdgeSelection> children(const EdgeSelection& sel, const SplitRecord& rec, Ball& after);
/// The old edge is in E0 when both of its copies are.
EdgeSelection parent(const EdgeSelection& sel, const SplitRecord& rec);

struct StripFace {
    int tet = 0, face = 0;
    int lift = -1;
    int height = 0;  // visits of this face class earlier in the strip
};

struct StripLink {
    int edge_class = 0;
    int out_edge = 0;  // local edge in the tet of the face before
    int in_edge = 0;   // local edge in the tet of the face after
    int height = 0;
};

/// Faces joined consecutively along edges; links[k] joins faces[k] and faces[k+1].
struct Strip {
    std::vector<StripFace> faces;
    std::vector<StripLink> links;
    int size() const { return static_cast<int>(faces.size()); }
};

using FacePredicate = std::function<bool(int lift, int face)>;
using EndPredicate = std::function<bool(int lift, int face, int in_edge)>;
using EdgePredicate = std::function<bool(int edge_class)>;

/// Shortest strip in the cover from a start face to a face accepted by `is_end`, crossing only
/// edges accepted by `edge_ok`, with distinct edges on each side of every interior face.
/// Throws DomainError when none is found within the state budget.
Strip find_strip(Ball& ball, const std::vector<std::pair<int, int>>& starts, const EndPredicate& is_end,
                 const EdgePredicate& edge_ok, int max_states = 200000);

struct RepairConfig {
    int depth = 4;
    int max_pillows = 64;
    int max_detours = 16;
};

struct RepairResult {
    Triangulation triangulation;
    std::vector<EdgeSelection> descendants;
    int pillows = 0;
    int detours = 0;
    std::vector<SplitRecord> records;
};

/// Inserts pillows between consecutive faces of the strip, following the descendant in which
/// every new diagonal but possibly the last is in E+.
RepairResult insert_pillows_along_strip(const Triangulation& t, const std::vector<EdgeSelection>& descendants,
                                        int followed, const Strip& strip, const RepairConfig& cfg = {});

/// Repairs conditions 1 and 2 for every descendant of the selection. Throws DomainError when no
/// type-111 triangle exists and Error when the pillow budget is exhausted.
RepairResult make_omnipresent(const Triangulation& t, const EdgeSelection& sel, const RepairConfig& cfg = {});

struct AllRepairResult {
    Triangulation triangulation;
    std::vector<EdgeSelection> selections;
    int pillows = 0;
};

/// Runs the repair over every enumerated selection in turn, carrying descendants forward.
AllRepairResult make_all_omnipresent(const Triangulation& t, const RepairConfig& cfg = {});

} // namespace xdv
