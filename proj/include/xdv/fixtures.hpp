#pragma once

#include "xdv/expr.hpp"
#include "xdv/selection.hpp"
#include "xdv/triangulation.hpp"

#include <string>
#include <vector>

namespace xdv {

/// fig8, llr-t4, llr-t5, llr-t5-simplified, llr-extended.
std::vector<std::string> fixture_names();
bool is_equation_fixture(const std::string& name);
/// Equation text of an equation fixture, or the triangulation file for fig8.
std::string fixture_text(const std::string& name);
RationalSystem fixture_system(const std::string& name);

/// Four- and five-tetrahedron triangulations of the LLR bundle whose gluing
/// equations are the llr-t4 and llr-t5 fixtures under the tet names below.
Triangulation llr_t4_triangulation();
Triangulation llr_t5_triangulation();
std::vector<std::string> llr_t4_names();  // h i j k
std::vector<std::string> llr_t5_names();  // i j p q r
/// Edge class of the five-tetrahedron triangulation met only by p, q, r.
int llr_t5_valence3_edge();

struct SelectedTriangulation {
    Triangulation triangulation;
    EdgeSelection selection;
};

/// A three-tetrahedron one-cusped triangulation with H1 = Z, and a selection on its valence-7 edge
/// whose inside region is connected in the quotient but whose loops miss the homology, so its
/// preimage in the cover falls apart. One pillow repairs it.
SelectedTriangulation split_inside_fixture();

} // namespace xdv
