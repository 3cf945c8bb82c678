#include "xdv/solver.hpp"

#include "xdv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <random>

namespace xdv {

RationalSystem pinned(const RationalSystem& sys, const std::vector<std::string>& pins) {
    RationalSystem out = sys;
    if (pins.empty()) return out;
    RationalSystem extra;
    for (const auto& v : sys.variables()) extra.variable(v);
    for (const auto& p : pins) parse_equation_into(extra, p);
    extra.header.clear();
    out = sys.merged(extra);
    return out;
}

namespace {

bool evaluate(const RationalSystem& sys, const Eigen::VectorXcd& x, Eigen::VectorXcd& r) {
    try {
        r = sys.residual(x);
    } catch (const PoleError&) {
        return false;
    }
    return r.allFinite();
}

double inf_norm(const Eigen::VectorXcd& r) { return r.size() ? r.cwiseAbs().maxCoeff() : 0.0; }

} // namespace

bool newton(const RationalSystem& sys, Eigen::VectorXcd& x, int max_iterations, double tolerance) {
    Eigen::VectorXcd r;
    Eigen::MatrixXcd J;
    if (!evaluate(sys, x, r)) return false;
    double norm = r.norm();
    for (int it = 0; it < max_iterations; ++it) {
        if (inf_norm(r) < tolerance * 1e-3) break;
        try {
            sys.residual_and_jacobian(x, r, J);
        } catch (const PoleError&) {
            return false;
        }
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-12);
        Eigen::VectorXcd dx = svd.solve(-r);
        if (!dx.allFinite()) return false;
        double t = 1.0;
        bool improved = false;
        for (int k = 0; k < 12; ++k, t *= 0.5) {
            Eigen::VectorXcd xt = x + t * dx;
            Eigen::VectorXcd rt;
            if (evaluate(sys, xt, rt) && rt.norm() < norm) {
                x = xt;
                r = rt;
                norm = rt.norm();
                improved = true;
                break;
            }
        }
        if (!improved) break;
        if (x.cwiseAbs().maxCoeff() > 1e8) return false;
    }
    return inf_norm(r) < tolerance;
}

RankInfo jacobian_rank(const RationalSystem& sys, const Eigen::VectorXcd& x) {
    Eigen::VectorXcd r;
    Eigen::MatrixXcd J;
    sys.residual_and_jacobian(x, r, J);
    RankInfo info;
    if (J.size() == 0) return info;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(J);
    const auto& s = svd.singularValues();
    for (int i = 0; i < s.size(); ++i) info.singular_values.push_back(s[i]);
    const double top = s[0];
    if (top < 1e-12) {
        info.gap = std::numeric_limits<double>::infinity();
        return info;
    }
    // Cut after position k maximising s[k-1]/s[k], with a floor standing in for the values past the end.
    double best = -1;
    for (int k = 1; k <= s.size(); ++k) {
        const double below = k < s.size() ? std::max(s[k], 1e-300) : 1e-16 * top;
        const double ratio = s[k - 1] / below;
        if (ratio > best) {
            best = ratio;
            info.rank = k;
        }
    }
    info.gap = best;
    return info;
}

namespace {

SolutionSample make_sample(const RationalSystem& sys, const Eigen::VectorXcd& x) {
    SolutionSample s;
    s.x = x;
    for (size_t i = 0; i < sys.variables().size(); ++i) s.assignment[sys.variables()[i]] = x[i];
    s.residual = inf_norm(sys.residual(x));
    s.rank = jacobian_rank(sys, x);
    return s;
}

bool lex_less(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    for (int i = 0; i < a.size(); ++i) {
        if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
        if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
    }
    return false;
}

} // namespace

SolveReport try_solve(const RationalSystem& base, const SolveConfig& cfg) {
    if (cfg.tolerance <= 0 || cfg.pole_guard <= 0) throw DomainError("tolerances must be positive");
    const RationalSystem sys = pinned(base, cfg.pins);
    const int n = static_cast<int>(sys.variables().size());
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    auto random_value = [&]() {
        while (true) {
            const double r2 = cfg.annulus_inner * cfg.annulus_inner +
                              uni(rng) * (cfg.annulus_outer * cfg.annulus_outer - cfg.annulus_inner * cfg.annulus_inner);
            const cplx z = std::polar(std::sqrt(r2), 2 * M_PI * uni(rng));
            if (std::abs(z - 1.0) > cfg.pole_guard) return z;
        }
    };

    SolveReport rep;
    auto attempt = [&](Eigen::VectorXcd x) {
        ++rep.attempts;
        if (!newton(sys, x, cfg.max_iterations, cfg.tolerance)) return;
        ++rep.converged;
        for (const auto& s : rep.samples)
            if ((s.x - x).cwiseAbs().maxCoeff() <= cfg.dedup_distance) return;
        rep.samples.push_back(make_sample(sys, x));
    };
    for (const auto& st : cfg.starts) attempt(sys.assignment(st));
    for (int k = 0; k < cfg.restarts; ++k) {
        Eigen::VectorXcd x(n);
        for (int i = 0; i < n; ++i) x[i] = random_value();
        attempt(x);
    }
    std::sort(rep.samples.begin(), rep.samples.end(), [](const SolutionSample& a, const SolutionSample& b) {
        if (a.residual != b.residual) return a.residual < b.residual;
        return lex_less(a.x, b.x);
    });
    return rep;
}

std::vector<SolutionSample> solve(const RationalSystem& sys, const SolveConfig& cfg) {
    auto rep = try_solve(sys, cfg);
    if (rep.samples.empty())
        throw SolveError("no convergent restart in " + std::to_string(rep.attempts) + " attempts");
    return rep.samples;
}

int dimension_estimate(const RationalSystem& sys, const SolutionSample& sample, int probes, std::uint64_t seed) {
    const int n = static_cast<int>(sys.variables().size());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::map<int, int> votes;
    int ill = 0;
    auto vote = [&](const Eigen::VectorXcd& x) {
        auto info = jacobian_rank(sys, x);
        if (!info.well_separated()) ++ill;
        ++votes[n - info.rank];
    };
    vote(sample.x);
    for (int p = 1; p < probes; ++p) {
        Eigen::VectorXcd x = sample.x;
        for (int i = 0; i < n; ++i) x[i] += 1e-3 * cplx(nd(rng), nd(rng)) * std::max(1.0, std::abs(x[i]));
        if (newton(sys, x, 60, 1e-11)) vote(x);
    }
    if (ill * 2 > probes) throw SolveError("Jacobian rank is ill-conditioned at this sample");
    return std::max_element(votes.begin(), votes.end(), [](auto& a, auto& b) { return a.second < b.second; })->first;
}

std::string format_complex(cplx z, int precision) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.*g %c %.*g i", precision, z.real(), z.imag() < 0 ? '-' : '+', precision,
                  std::abs(z.imag()));
    return buf;
}

std::optional<Monomial> monomial_of(const RationalSystem& sys, int expr) {
    using Op = ExprArena::Op;
    const auto& n = sys.arena().node(expr);
    Monomial m;
    auto combine = [&](int sign) -> std::optional<Monomial> {
        auto a = monomial_of(sys, n.a), b = monomial_of(sys, n.b);
        if (!a || !b) return std::nullopt;
        a->coefficient = sign > 0 ? a->coefficient * b->coefficient : a->coefficient / b->coefficient;
        for (const auto& [v, e] : b->exponents)
            if ((a->exponents[v] += sign * e) == 0) a->exponents.erase(v);
        return a;
    };
    switch (n.op) {
    case Op::Const: m.coefficient = n.value; return m;
    case Op::Sym: m.exponents[n.a] = 1; return m;
    case Op::Mul: return combine(1);
    case Op::Div: return combine(-1);
    case Op::Neg: {
        auto a = monomial_of(sys, n.a);
        if (a) a->coefficient = -a->coefficient;
        return a;
    }
    case Op::Pow: {
        auto a = monomial_of(sys, n.a);
        if (!a) return a;
        const int k = static_cast<int>(std::lround(n.value.real()));
        a->coefficient = std::pow(a->coefficient, k);
        for (auto& [v, e] : a->exponents) e *= k;
        return a;
    }
    default: return std::nullopt;
    }
}

std::optional<Monomial> monomial_equation(const RationalSystem& sys, const Equation& eq) {
    auto l = monomial_of(sys, eq.lhs), r = monomial_of(sys, eq.rhs);
    if (!l || !r) return std::nullopt;
    l->coefficient /= r->coefficient;
    for (const auto& [v, e] : r->exponents)
        if ((l->exponents[v] -= e) == 0) l->exponents.erase(v);
    return l;
}

namespace {

struct Fraction {
    long long num = 0, den = 1;
    Fraction(long long n = 0, long long d = 1) : num(n), den(d) {
        if (den < 0) num = -num, den = -den;
        const long long g = std::gcd(num, den);
        if (g > 1) num /= g, den /= g;
    }
    Fraction operator-(const Fraction& o) const { return {num * o.den - o.num * den, den * o.den}; }
    Fraction operator*(const Fraction& o) const { return {num * o.num, den * o.den}; }
    Fraction operator/(const Fraction& o) const { return {num * o.den, den * o.num}; }
    bool zero() const { return num == 0; }
};

} // namespace

std::optional<std::vector<long long>> monomial_combination(const std::vector<Monomial>& eqs, const Monomial& target) {
    std::set<int> vars;
    for (const auto& e : eqs)
        for (const auto& [v, k] : e.exponents) vars.insert(v);
    for (const auto& [v, k] : target.exponents) vars.insert(v);
    const int cols = static_cast<int>(eqs.size());
    std::vector<std::vector<Fraction>> a;
    for (int v : vars) {
        std::vector<Fraction> row;
        for (const auto& e : eqs) row.emplace_back(e.exponents.count(v) ? e.exponents.at(v) : 0);
        row.emplace_back(target.exponents.count(v) ? target.exponents.at(v) : 0);
        a.push_back(std::move(row));
    }
    std::vector<int> pivot_col;
    std::size_t r = 0;
    for (int c = 0; c < cols && r < a.size(); ++c) {
        std::size_t p = r;
        while (p < a.size() && a[p][c].zero()) ++p;
        if (p == a.size()) continue;
        std::swap(a[p], a[r]);
        const Fraction lead = a[r][c];
        for (auto& x : a[r]) x = x / lead;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i == r || a[i][c].zero()) continue;
            const Fraction f = a[i][c];
            for (int j = 0; j <= cols; ++j) a[i][j] = a[i][j] - f * a[r][j];
        }
        pivot_col.push_back(c);
        ++r;
    }
    for (std::size_t i = r; i < a.size(); ++i)
        if (!a[i][cols].zero()) return std::nullopt;
    std::vector<long long> m(cols, 0);
    for (std::size_t i = 0; i < r; ++i) {
        if (a[i][cols].den != 1) return std::nullopt;
        m[pivot_col[i]] = a[i][cols].num;
    }
    cplx coefficient = 1.0;
    for (int k = 0; k < cols; ++k) coefficient *= std::pow(eqs[k].coefficient, static_cast<int>(m[k]));
    if (coefficient != target.coefficient) return std::nullopt;
    return m;
}

} // namespace xdv
