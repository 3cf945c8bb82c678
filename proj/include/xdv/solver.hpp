#pragma once

#include "xdv/expr.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace xdv {

struct SolveConfig {
    std::uint64_t seed = 1;
    int restarts = 64;
    int max_iterations = 80;
    double tolerance = 1e-10;
    /// Starting points keep at least this distance from 0 and 1.
    double pole_guard = 1e-3;
    double annulus_inner = 0.2;
    double annulus_outer = 5.0;
    double dedup_distance = 1e-6;
    /// Extra equations in the equation grammar, e.g. "h*k = 1".
    std::vector<std::string> pins;
    /// Optional explicit starting points, tried before the random ones.
    std::vector<std::map<std::string, cplx>> starts;
};

struct RankInfo {
    int rank = 0;
    double gap = 0;  // ratio of the singular values on either side of the cut
    std::vector<double> singular_values;
    bool well_separated() const { return gap >= 1e6; }
};

struct SolutionSample {
    Eigen::VectorXcd x;
    std::map<std::string, cplx> assignment;
    double residual = 0;
    RankInfo rank;
};

struct SolveReport {
    std::vector<SolutionSample> samples;
    int attempts = 0;
    int converged = 0;
};

/// The system with its pins appended.
RationalSystem pinned(const RationalSystem& sys, const std::vector<std::string>& pins);

/// Damped least-squares Newton from x. Returns false when it fails to reach the tolerance.
bool newton(const RationalSystem& sys, Eigen::VectorXcd& x, int max_iterations, double tolerance);

RankInfo jacobian_rank(const RationalSystem& sys, const Eigen::VectorXcd& x);

/// All deduplicated converged samples, sorted by residual then assignment. Never throws for lack of samples.
SolveReport try_solve(const RationalSystem& sys, const SolveConfig& cfg);
/// As try_solve, but a run with no convergent restart is a SolveError.
std::vector<SolutionSample> solve(const RationalSystem& sys, const SolveConfig& cfg);

/// Variable count minus Jacobian rank, by majority over nearby points of the same solution set.
int dimension_estimate(const RationalSystem& sys, const SolutionSample& sample, int probes = 5, std::uint64_t seed = 7);

std::string format_complex(cplx z, int precision = 12);

/// coefficient * prod x_i^e_i.
struct Monomial {
    cplx coefficient{1.0, 0.0};
    std::map<int, int> exponents;  // variable index -> exponent, zeros dropped
};
/// The expression as a monomial, or nothing if it contains a sum or difference.
std::optional<Monomial> monomial_of(const RationalSystem& sys, int expr);
/// Equation lhs = rhs rewritten as lhs/rhs = 1.
std::optional<Monomial> monomial_equation(const RationalSystem& sys, const Equation& eq);
/// Integer multipliers m_k with prod eqs_k^m_k equal to `target` exactly, exponents by exact
/// rational elimination. Nothing when no integer combination exists.
std::optional<std::vector<long long>> monomial_combination(const std::vector<Monomial>& eqs, const Monomial& target);

} // namespace xdv
