#pragma once

#include "xdv/expr.hpp"
#include "xdv/triangulation.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace xdv {

struct ShapeTriple {
    cplx x1, x2, x3;
};

/// (z, (z-1)/z, 1/(1-z)). Throws DomainError for z in {0, 1}.
ShapeTriple shape_triple(cplx z);
/// Value of shape slot 0, 1 or 2.
cplx slot_value(cplx z, int slot);

/// sign * prod z_t^a * (1 - z_t)^b = 1.
struct MonomialEquation {
    int sign = 1;
    std::map<int, std::pair<int, int>> exponents;
    int edge = -1;

    /// Multiplies in one corner with the given shape slot.
    void add_slot(int tet, int slot);
    cplx lhs(const std::vector<cplx>& z) const;
    bool trivial() const;
};

/// One equation per edge class, in edge-class order. Requires a closed triangulation.
std::vector<MonomialEquation> gluing_system(const Triangulation& t);

/// Exponent-wise product of equations.
MonomialEquation product(const std::vector<MonomialEquation>& eqs);

/// z0, z1, ...
std::vector<std::string> default_shape_names(int n);

/// Shape names `names` (defaults when empty) become the system's variables, in tet order.
RationalSystem to_rational_system(const std::vector<MonomialEquation>& eqs, int ntets,
                                  std::vector<std::string> names = {});

} // namespace xdv
