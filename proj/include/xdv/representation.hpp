#pragma once

#include "xdv/cover.hpp"
#include "xdv/extended.hpp"
#include "xdv/horonormal.hpp"
#include "xdv/series.hpp"
#include "xdv/triangulation.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace xdv {

/// Element of PSL2(C), stored with determinant 1 and compared up to sign.
using Mobius = Eigen::Matrix2cd;

Mobius normalized(const Mobius& m);
Point act(const Mobius& m, const Point& x);
/// Derivative of the map at a finite point, 1/(cx+d)^2 for determinant 1.
cplx derivative(const Mobius& m, cplx x);
/// The Mobius map with p_i -> q_i. Throws DomainError if either triple repeats a point.
Mobius mobius_from_points(const std::array<Point, 3>& p, const std::array<Point, 3>& q);
/// Max entry distance to the nearer of I and -I.
double distance_to_identity(const Mobius& m);
/// Chordal distance on the Riemann sphere.
double chordal(const Point& a, const Point& b);
/// Fixed points: one for parabolic maps, two otherwise, none for +-I.
std::vector<Point> fixed_points(const Mobius& m, double tol = 1e-9);
/// |a - b| up to the sign of b.
double trace_distance(cplx a, cplx b);

/// Face-pairing presentation of the fundamental group. The dual spanning tree is grown by
/// breadth-first search from `root`; every other face class is a generator, oriented from its
/// first slot. Letters are +-(g+1).
struct Presentation {
    int root = 0;
    std::vector<int> generator_face;
    std::vector<int> generator_of_face;  // -1 on tree faces
    std::vector<std::vector<int>> tree_word;  // faces crossed from the root to each tet
    std::vector<std::vector<int>> relators;  // one per edge class
    int generators() const { return static_cast<int>(generator_face.size()); }
};
Presentation presentation(const Triangulation& t, int root = 0);
/// Letter of crossing face `face` out of `tet`; 0 for a tree face.
int letter(const Triangulation& t, const Presentation& p, int tet, int face);
/// Face word of the translate of the root lift by a generator.
std::vector<int> generator_path(const Triangulation& t, const Presentation& p, int generator);
/// Letters of a face word starting at the root tet, tree letters dropped.
std::vector<int> letters_of(const Triangulation& t, const Presentation& p, const std::vector<int>& faces);

struct RepPoint {
    std::vector<Mobius> generators;
};
Mobius word_image(const RepPoint& rho, const std::vector<int>& letters);
/// Max over relators of the distance of the image to +-I.
double verify_homomorphism(const RepPoint& rho, const Presentation& p);
/// Generator traces.
std::vector<cplx> traces(const RepPoint& rho);
/// Max over generators of trace_distance; throws DomainError on different generator counts.
double trace_mismatch(const RepPoint& a, const RepPoint& b);

/// Positions of lifted vertices, keyed by (lift, local vertex), inside a ball of the cover
/// rooted at lift 0 of the root tet.
struct PositionMap {
    std::shared_ptr<Ball> ball;
    std::map<std::pair<int, int>, Point> position;
    std::vector<int> domain;  // lift of each tet along its tree word
    double disagreement = 0;

    std::optional<Point> at(int lift, int vertex) const;
};

struct DevelopedMap : PositionMap {
    Presentation pres;
    EdgeSelection sel;
    int base_tet = -1, base_face = -1;
    std::vector<int> translates;  // lift carrying the base triangle's translate, per generator
};

struct DevelopConfig {
    /// Lifts within this many face steps of a generator path take part in the development.
    int corridor_radius = 2;
    int max_lifts = 100000;
    /// Anchor triangle, which must be of type 111; the default is the selection's basepoint.
    int base_tet = -1, base_face = -1;
    double tolerance = 1e-7;
    /// When false, disagreements are only recorded and the first chain to reach a vertex wins.
    bool strict = true;
};

/// Developing map of a point of the extended variety: leading-order positions of the lifted
/// vertices met by valid chains from the anchor triangle, which goes to (inf, 0, 1). Throws
/// DomainError when two chains disagree, which means the data is not a solution.
DevelopedMap develop_map(const Triangulation& t, const EdgeSelection& sel, const ExtendedPoint& z,
                         const DevelopConfig& cfg = {});

/// Images of the generators, from the anchor triangle and its translates.
RepPoint holonomy(const DevelopedMap& m);

/// Images of the loops of a cusp link, based at the cusp's first member.
std::vector<Mobius> peripheral_images(const Triangulation& t, const Presentation& p, const RepPoint& rho, int cusp);
/// Developed position of each cusp's first member, which its peripheral images fix.
std::vector<Point> cusp_points(const DevelopedMap& m);

/// Equivariant cusp map sending each cusp's first member to the chosen point. Throws DomainError
/// if a chosen point is not fixed by the cusp's peripheral images.
PositionMap psi_from_rep(const Triangulation& t, const Presentation& p, const RepPoint& rho,
                         const std::vector<Point>& cusp_choice, int radius = 2, double tol = 1e-7);

/// Edge classes whose lifted ends land on one point (chordal distance below 1e-6). Throws
/// DomainError when a distance falls in [1e-6, 1e-5] or lifts of one edge disagree, and
/// ValidationError when the result is not a valid selection.
EdgeSelection selection_from_rep(const Triangulation& t, const PositionMap& m);

/// Shape data read off a cusp map and the offsets obtained by transporting one seed per E0
/// edge class. Seeds default to 1.
ExtendedPoint point_from_rep(const Triangulation& t, const Presentation& p, const RepPoint& rho,
                             const PositionMap& m, const EdgeSelection& sel,
                             const std::map<int, cplx>& seeds = {});

enum class RepClass { Reducible, DihedralSuspect, Generic };
std::string to_string(RepClass c);
RepClass screen_rep(const RepPoint& rho, double tol = 1e-7);

} // namespace xdv
