#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace xdv {

/// A permutation of {0,1,2,3}, stored as the image of 0123.
struct Perm {
    std::array<std::uint8_t, 4> img{0, 1, 2, 3};

    Perm() = default;
    Perm(int a, int b, int c, int d) : img{std::uint8_t(a), std::uint8_t(b), std::uint8_t(c), std::uint8_t(d)} {}

    int operator[](int i) const { return img[i]; }
    Perm inverse() const;
    /// (p * q)(i) = p(q(i))
    Perm operator*(const Perm& q) const;
    int sign() const;
    bool operator==(const Perm&) const = default;

    std::string str() const;
    static Perm parse(std::string_view s);
};

/// Local edges of a tetrahedron: 01 02 03 12 13 23 -> 0..5. Opposite edges sum to 5.
int local_edge(int a, int b);
std::pair<int, int> edge_ends(int e);
inline int opposite_edge(int e) { return 5 - e; }

/// Shape slot of a local edge: {01,23} -> 0 (z), {03,12} -> 1 ((z-1)/z), {02,13} -> 2 (1/(1-z)).
/// Slot k+1 is obtained from slot k by x -> 1 - 1/x.
int shape_slot(int e);

/// Returns (a,b,c,d) with {c,d} the complement of {a,b} and the sequence an even permutation.
std::array<int, 4> even_completion(int a, int b);
bool is_even(const std::array<int, 4>& v);

struct Tetrahedron {
    int index = 0;
    std::array<int, 4> neighbor{-1, -1, -1, -1};
    std::array<Perm, 4> gluing{};
};

/// One tetrahedron's view of an edge: (v0,v1) is the edge, (v0,v1,v2,v3) is even.
/// Walking around the edge develops face v0v1v2 into v3 and then leaves through face v2.
struct Corner {
    int tet = 0;
    std::array<int, 4> v{};

    int edge() const { return local_edge(v[0], v[1]); }
    bool operator==(const Corner&) const = default;
};

struct EdgeClass {
    int id = 0;
    std::vector<Corner> cycle;
    int valence = 0;
    bool boundary = false;
};

struct CuspClass {
    int id = 0;
    std::vector<std::pair<int, int>> members;  // (tet, vertex)
};

/// A face of the triangulation: one or two glued face slots.
struct FaceClass {
    int id = 0;
    std::vector<std::pair<int, int>> slots;  // (tet, face)
};

class Triangulation {
public:
    Triangulation() = default;
    /// Validates structure and precomputes edge, cusp and face classes.
    Triangulation(std::string name, std::vector<Tetrahedron> tets);

    const std::string& name() const { return name_; }
    void set_name(std::string n) { name_ = std::move(n); }
    int size() const { return static_cast<int>(tets_.size()); }
    const Tetrahedron& tet(int i) const { return tets_[i]; }
    const std::vector<Tetrahedron>& tets() const { return tets_; }

    bool closed() const { return closed_; }
    /// Throws ValidationError when a boundary face exists.
    void require_closed(const char* what) const;
    /// Edge count equals tetrahedron count and every cusp link is a torus.
    bool is_cusped_manifold() const;

    const std::vector<EdgeClass>& edges() const { return edges_; }
    const std::vector<CuspClass>& cusps() const { return cusps_; }
    const std::vector<FaceClass>& faces() const { return faces_; }

    int edge_of(int tet, int local) const { return edge_of_[tet][local]; }
    int cusp_of(int tet, int vertex) const { return cusp_of_[tet][vertex]; }
    int face_of(int tet, int face) const { return face_of_[tet][face]; }

    /// Euler characteristic of a cusp's link.
    int link_euler_characteristic(int cusp) const;

    /// Corner that continues the walk around an edge after crossing face c.v[2].
    Corner next_corner(const Corner& c) const;
    Corner prev_corner(const Corner& c) const;

private:
    void validate() const;
    void compute_classes();

    std::string name_;
    std::vector<Tetrahedron> tets_;
    bool closed_ = true;
    std::vector<EdgeClass> edges_;
    std::vector<CuspClass> cusps_;
    std::vector<FaceClass> faces_;
    std::vector<std::array<int, 6>> edge_of_;
    std::vector<std::array<int, 4>> cusp_of_;
    std::vector<std::array<int, 4>> face_of_;
};

Triangulation load_triangulation(std::string_view text, std::string name = "");
std::string save_triangulation(const Triangulation& t);

/// Two-tetrahedron figure-eight knot complement.
Triangulation figure_eight();

/// 2-3 move across face `face` of tetrahedron `tet`.
Triangulation two_three_move(const Triangulation& t, int tet, int face);
/// 3-2 move at a valence-3 edge class meeting three distinct tetrahedra.
Triangulation three_two_move(const Triangulation& t, int edge);

bool isomorphic(const Triangulation& a, const Triangulation& b);

/// First homology as Z^r + torsion, from face-pairing generators and edge relators.
struct Homology {
    int rank = 0;
    std::vector<long long> torsion;
};
Homology first_homology(const Triangulation& t);

/// Whether the closed dual paths inside a connected set of tetrahedra, crossing only the allowed
/// face slots, generate H1. When they do not, the preimage of the set in the universal cover is
/// disconnected. `crossable[tet][face]` must agree on both sides of each gluing.
bool dual_loops_span_homology(const Triangulation& t, const std::vector<char>& tets,
                              const std::vector<std::array<char, 4>>& crossable);

} // namespace xdv
