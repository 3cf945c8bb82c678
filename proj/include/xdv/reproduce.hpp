#pragma once

#include "xdv/representation.hpp"
#include "xdv/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace xdv {

struct ReproduceRow {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0;
};

/// Traces of every generator and of every product of two generators.
std::vector<cplx> word_traces(const RepPoint& rho);

/// Holonomy of a solution of the five-tetrahedron system with the valence-3 edge selected,
/// keyed by the variable names i j p q r.
RepPoint llr_extended_holonomy(const std::map<std::string, cplx>& assignment);

/// The degenerate LLR component: present for four tetrahedra, absent from the five-tetrahedron
/// gluing variety, recovered by the extended variety with a holonomy round trip.
std::vector<ReproduceRow> reproduce_llr(std::uint64_t seed = 1);

} // namespace xdv
