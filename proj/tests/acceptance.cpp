#include "xdv/errors.hpp"
#include "xdv/extended.hpp"
#include "xdv/fixtures.hpp"
#include "xdv/gluing.hpp"
#include "xdv/horonormal.hpp"
#include "xdv/representation.hpp"
#include "xdv/reproduce.hpp"
#include "xdv/retriangulate.hpp"
#include "xdv/series.hpp"
#include "xdv/solver.hpp"

#include <chrono>
#include <cstdio>
#include <deque>
#include <functional>
#include <random>
#include <set>
#include <string>

using namespace xdv;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + ("failed: " + what);
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

bool run(int id, const char* title, double limit, const std::function<void(Outcome&)>& body) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(out);
    } catch (const std::exception& e) {
        out.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.require(secs < limit, "runtime " + sci(secs) + " s over " + sci(limit) + " s");
    std::printf("%s criterion %d: %s (%.2f s) %s\n", out.pass ? "PASS" : "FAIL", id, title, secs, out.detail.c_str());
    std::fflush(stdout);
    return out.pass;
}

cplx rc(std::mt19937& g) {
    std::normal_distribution<double> n;
    return {n(g), n(g)};
}

/// Coefficients decay like 2^-k, so the series converge on a disc of radius about 2.
Series random_series(std::mt19937& g, int order) {
    std::vector<cplx> c(series_settings().width);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = std::ldexp(1.0, -static_cast<int>(k)) * rc(g);
    while (std::abs(c[0]) < 0.3) c[0] = rc(g);
    return Series::from_coeffs(order, c);
}

/// Largest coefficient gap over the window, relative to the larger series.
double series_gap(const Series& a, const Series& b) {
    if (a.order() != b.order()) return 1e300;
    double gap = 0, scale = 0;
    for (int k = a.order(); k < std::min(a.valid_until(), b.valid_until()); ++k) {
        gap = std::max(gap, std::abs(a.coeff(k) - b.coeff(k)));
        scale = std::max({scale, std::abs(a.coeff(k)), std::abs(b.coeff(k))});
    }
    return gap / scale;
}

/// Finite points with coefficients below 100 whose constant terms are pairwise at least 0.5 apart.
/// Rounding in the top window coefficient grows like the inverse gap to the window width.
bool separated(const Series (&w)[4]) {
    for (int i = 0; i < 4; ++i) {
        if (w[i].is_infinity() || w[i].order() < 0) return false;
        for (cplx c : w[i].coeffs())
            if (std::abs(c) > 100) return false;
        for (int j = 0; j < i; ++j)
            if (std::abs(w[i].coeff(0) - w[j].coeff(0)) < 0.5) return false;
    }
    return true;
}

std::vector<cplx> random_shapes(std::mt19937& g, int n) {
    std::vector<cplx> z(n);
    for (auto& x : z) {
        do x = std::polar(0.3 + 2 * std::abs(rc(g).real()), 3.0 * rc(g).imag());
        while (std::abs(x - 1.0) < 0.1 || std::abs(x) < 0.1);
    }
    return z;
}

std::vector<PillowSite> all_sites(const Triangulation& t) {
    std::vector<PillowSite> out;
    for (const auto& e : t.edges())
        for (int i = 0; i < e.valence; ++i)
            for (int j = 0; j < e.valence; ++j) out.push_back({e.id, i, j});
    return out;
}

/// A face word of the old triangulation rewritten for the new one, crossing any pillow that now
/// sits between two old faces. Old tets keep their indices and faces.
std::vector<int> through_pillows(const Triangulation& old, const Triangulation& now, const std::vector<int>& word) {
    std::vector<int> out;
    int tet = 0;
    for (int f : word) {
        const int target = old.tet(tet).neighbor[f], target_face = old.tet(tet).gluing[f][f];
        struct State {
            int tet, entry;
            std::vector<int> path;
        };
        std::deque<State> queue;
        std::set<std::pair<int, int>> seen;
        auto cross = [&](int from, int face, std::vector<int> path) {
            path.push_back(face);
            const int to = now.tet(from).neighbor[face], entry = now.tet(from).gluing[face][face];
            if (seen.insert({to, entry}).second) queue.push_back({to, entry, std::move(path)});
        };
        cross(tet, f, {});
        bool done = false;
        while (!queue.empty() && !done) {
            State s = std::move(queue.front());
            queue.pop_front();
            if (s.tet == target && s.entry == target_face) {
                out.insert(out.end(), s.path.begin(), s.path.end());
                done = true;
                break;
            }
            if (s.tet < old.size()) continue;
            for (int e = 0; e < 4; ++e)
                if (e != s.entry) cross(s.tet, e, s.path);
        }
        if (!done) throw DomainError("face word does not survive the pillow");
        tet = target;
    }
    return out;
}

ExtendedPoint geometric_point(const std::vector<cplx>& z) {
    ExtendedPoint p;
    for (cplx v : z) {
        p.types.push_back(TetType::T1111);
        p.data.push_back({v});
    }
    return p;
}

std::map<std::string, cplx> as_assignment(const Classification& cls, const std::vector<std::string>& tet_names,
                                          const ExtendedPoint& z) {
    const auto names = extended_variable_names(cls, tet_names);
    std::map<std::string, cplx> a;
    for (std::size_t k = 0; k < names.size(); ++k)
        for (std::size_t j = 0; j < names[k].size(); ++j) a[names[k][j]] = z.data[k][j];
    return a;
}

void round_trip(Outcome& out, const std::string& label, const Triangulation& t, const EdgeSelection& sel,
                const std::vector<std::string>& tet_names, const RationalSystem& sys, const ExtendedPoint& z) {
    const auto cls = classify(sel, t);
    const auto m = develop_map(t, sel, z);
    const auto rho = holonomy(m);
    const double dev = verify_homomorphism(rho, m.pres);
    const auto psi = psi_from_rep(t, m.pres, rho, cusp_points(m));
    const auto sel2 = selection_from_rep(t, psi);
    const auto z2 = point_from_rep(t, m.pres, rho, psi, sel2);
    const double res = max_residual(sys, as_assignment(cls, tet_names, z2));
    const double gap = trace_mismatch(rho, holonomy(develop_map(t, sel2, z2)));
    out.require(dev < 1e-8, label + " relator deviation " + sci(dev));
    out.require(sel2 == sel, label + " selection " + sel2.str());
    out.require(res < 1e-8, label + " recovered residual " + sci(res));
    out.require(gap < 1e-7, label + " trace gap " + sci(gap));
    out.note(label + ": deviation " + sci(dev) + ", residual " + sci(res) + ", traces " + sci(gap));
}

} // namespace

int main() {
    bool all = true;

    all &= run(1, "four-tetrahedron degenerate component hk=1", 10, [](Outcome& out) {
        const auto sys = fixture_system("llr-t4");
        SolveConfig cfg;
        cfg.pins = {"h*k = 1"};
        cfg.restarts = 40;
        const auto samples = solve(sys, cfg);
        double res = 0, ij = 0;
        for (const auto& s : samples) {
            res = std::max(res, s.residual);
            ij = std::max(ij, std::abs(s.assignment.at("i") * s.assignment.at("j") - 1.0));
        }
        const int dim = dimension_estimate(pinned(sys, cfg.pins), samples.front());
        out.require(res < 1e-9, "residual " + sci(res));
        out.require(ij < 1e-8, "|ij-1| " + sci(ij));
        out.require(dim == 1, "dimension " + std::to_string(dim));
        out.note(std::to_string(samples.size()) + " samples, residual " + sci(res) + ", |ij-1| " + sci(ij) +
                 ", dimension " + std::to_string(dim));
    });

    all &= run(2, "five-tetrahedron system with ij=1 forces p=1", 30, [](Outcome& out) {
        const auto sys = fixture_system("llr-t5-simplified");
        SolveConfig cfg;
        cfg.pins = {"i*j = 1"};
        cfg.restarts = 200;
        const auto report = try_solve(sys, cfg);
        int offending = 0;
        for (const auto& s : report.samples)
            if (s.residual < 1e-9 && std::abs(s.assignment.at("p") - 1.0) > 1e-6) ++offending;
        out.require(report.attempts >= 200, "only " + std::to_string(report.attempts) + " restarts");
        out.require(offending == 0, std::to_string(offending) + " samples with p != 1");

        const auto full = pinned(sys, cfg.pins);
        const auto& eqs = full.equations();
        std::vector<Monomial> used;
        for (std::size_t k : {std::size_t{0}, std::size_t{1}, eqs.size() - 1}) used.push_back(monomial_equation(full, eqs[k]).value());
        Monomial p;
        p.exponents[full.find_variable("p")] = 1;
        const auto combo = monomial_combination(used, p);
        out.require(combo.has_value(), "no exact derivation of p = 1");
        std::string how;
        if (combo)
            for (long long c : *combo) how += std::to_string(c) + " ";
        out.note(std::to_string(report.attempts) + " restarts, " + std::to_string(report.samples.size()) +
                 " converged samples, none with p != 1; p = 1 as product of equations with exponents " + how);
    });

    all &= run(3, "extended variety: residual, dimension 2, scaling", 30, [](Outcome& out) {
        const auto sys = fixture_system("llr-extended");
        SolveConfig cfg;
        const auto samples = solve(sys, cfg);
        const auto& s = samples.front();
        const int dim = dimension_estimate(sys, s);
        const auto base = word_traces(llr_extended_holonomy(s.assignment));
        std::mt19937 g(17);
        double scaled = 0, gap = 0;
        for (int k = 0; k < 20; ++k) {
            cplx lambda;
            do lambda = 2.0 * rc(g);
            while (std::abs(lambda) < 0.2);
            auto a = s.assignment;
            for (const char* v : {"p", "q", "r"}) a[v] *= lambda;
            scaled = std::max(scaled, max_residual(sys, a));
            const auto tr = word_traces(llr_extended_holonomy(a));
            for (std::size_t w = 0; w < tr.size(); ++w) gap = std::max(gap, trace_distance(tr[w], base[w]));
        }
        out.require(s.residual < 1e-10, "residual " + sci(s.residual));
        out.require(dim == 2, "dimension " + std::to_string(dim));
        out.require(scaled < 1e-9, "scaled residual " + sci(scaled));
        out.require(gap < 1e-7, "trace gap " + sci(gap));
        out.note("residual " + sci(s.residual) + ", dimension " + std::to_string(dim) + ", scaled residual " +
                 sci(scaled) + ", trace gap " + sci(gap) + " over " + std::to_string(base.size()) + " words");
    });

    all &= run(4, "figure-eight with empty selection is the gluing variety", 5, [](Outcome& out) {
        const auto t = figure_eight();
        const auto ext = consistency_system(t, EdgeSelection{});
        const auto glu = to_rational_system(gluing_system(t), t.size());
        out.require(ext.variables() == glu.variables(), "variables differ");
        out.require(ext.equations().size() == glu.equations().size(), "equation counts differ");
        std::mt19937 g(4);
        double worst = 0;
        for (int k = 0; k < 50; ++k) {
            const auto z = random_shapes(g, t.size());
            const Eigen::VectorXcd x = Eigen::Map<const Eigen::VectorXcd>(z.data(), z.size());
            const Eigen::VectorXcd r = glu.residual(x);
            worst = std::max(worst, (ext.residual(x) - r).cwiseAbs().maxCoeff() / (1 + r.cwiseAbs().maxCoeff()));
        }
        out.require(worst < 1e-9, "residual gap " + sci(worst));
        out.note("50 points, largest residual gap " + sci(worst));
    });

    all &= run(5, "series property suites", 60, [](Outcome& out) {
        std::mt19937 g(5);
        const int trials = 1000;
        int attempts = 0;

        double worst = 0;
        for (int done = 0; done < trials && attempts < 100 * trials; ++attempts) {
            Series w[4];
            for (auto& x : w) x = random_series(g, 0);
            if (attempts % 3 == 1) w[2] = w[0] + random_series(g, 1);
            if (attempts % 3 == 2) w[3] = w[1] + random_series(g, 2);
            const Series cr = cross_ratio(w[0], w[1], w[2], w[3]);
            Series z;
            try {
                z = preferred_cross_ratio(cr);
            } catch (const Error&) {
                continue;
            }
            static constexpr int perms[3][4] = {{0, 1, 2, 3}, {0, 3, 1, 2}, {0, 2, 3, 1}};
            const int* q = perms[preferred_index(cr)];
            const Series& a = w[q[0]];
            const Series& b = w[q[1]];
            const Series& c = w[q[2]];
            const Series& d = w[q[3]];
            worst = std::max(worst, series_gap(z, cross_ratio(a, b, c, d)));
            const cplx expect = ((a - c).leading() * (b - d).leading()) / ((a - d).leading() * (b - c).leading());
            worst = std::max(worst, std::abs(z.leading() - expect) / std::abs(expect));
            ++done;
        }
        out.require(worst < 1e-9, "leading cross ratio gap " + sci(worst));
        out.note("a: leading cross ratio " + sci(worst));

        worst = 0;
        int done = 0, refused = 0;
        for (attempts = 0; done < trials && attempts < 100 * trials; ++attempts) {
            Series a = random_series(g, 0), b = random_series(g, 0), c = random_series(g, 0);
            const int kind = attempts % 4;
            if (kind == 1) b = a + random_series(g, 1 + attempts % 2);
            if (kind == 2) c = a + random_series(g, 1);
            if (kind == 3) c = b + random_series(g, 1);
            if (!is_domestic(a, b, c)) continue;
            const Series z = preferred_cross_ratio(random_series(g, attempts % 5 == 0 ? 1 : 0));
            const LowestOrderInput in{a.direction_from_home(), b.direction_from_home(), c.direction_from_home(),
                                      lead_of(a - b), lead_of(a - c), lead_of(b - c), lead_of(z)};
            Series d;
            try {
                d = develop_fourth(a, b, c, z);
            } catch (const Error&) {
                continue;
            }
            ++done;
            if (d.order() < 0) {
                bool threw = false;
                try {
                    lowest_order_develop(in);
                } catch (const DevelopError&) {
                    threw = true;
                }
                out.require(threw, "lowest-order development accepted a point outside the power series");
                ++refused;
                continue;
            }
            const auto r = lowest_order_develop(in);
            for (const auto& [lead, s] : {std::pair{r.da, d - a}, std::pair{r.db, d - b}, std::pair{r.dc, d - c}}) {
                if (lead.order != s.order()) worst = 1e300;
                else worst = std::max(worst, std::abs(lead.lead - s.leading()) / std::abs(s.leading()));
            }
            worst = std::max(worst, std::abs(r.d.value - d.direction_from_home().value) / std::max(1.0, std::abs(r.d.value)));
        }
        out.require(done == trials, "only " + std::to_string(done) + " developable trials");
        out.require(worst < 1e-9, "lowest-order gap " + sci(worst));
        out.note("b: lowest-order development " + sci(worst) + " (" + std::to_string(refused) + " refusals checked)");

        worst = 0;
        for (int k = 0; k < trials; ++k) {
            Series w[4];
            do
                for (int i = 0; i < 4; ++i) w[i] = Series(1.5 * i) + random_series(g, k % 2);
            while (!separated(w));
            worst = std::max(worst, series_gap(develop_fourth(w[0], w[1], w[2], cross_ratio(w[0], w[1], w[2], w[3])), w[3]));
        }
        out.require(worst < 1e-9, "round trip gap " + sci(worst));
        out.note("c: develop/cross-ratio round trip " + sci(worst));

        worst = 0;
        for (int k = 0; k < trials; ++k) {
            MobiusSeries m{random_series(g, 0), random_series(g, 0), random_series(g, 0), random_series(g, 0)};
            if (std::abs(m.det().coeff(0)) < 0.5) {
                --k;
                continue;
            }
            Series x[4], mx[4];
            bool ok = true;
            for (int i = 0; i < 4; ++i) {
                x[i] = Series(1.5 * i) + random_series(g, 1);
                ok &= std::abs((m.c * x[i] + m.d).coeff(0)) > 0.5;
            }
            if (!ok) {
                --k;
                continue;
            }
            for (int i = 0; i < 4; ++i) mx[i] = m.apply(x[i]);
            if (!separated(mx)) {
                --k;
                continue;
            }
            worst = std::max(worst, series_gap(cross_ratio(x[0], x[1], x[2], x[3]), cross_ratio(mx[0], mx[1], mx[2], mx[3])));
        }
        out.require(worst < 1e-9, "Mobius invariance gap " + sci(worst));
        out.note("d: Mobius invariance " + sci(worst));
    });

    all &= run(6, "product of edge equations is one", 30, [](Outcome& out) {
        std::mt19937 g(6);
        std::vector<Triangulation> ts{figure_eight()};
        while (ts.size() < 6) {
            Triangulation cur = figure_eight();
            const int pillows = 1 + static_cast<int>(g() % 3);
            for (int k = 0; k < pillows; ++k) {
                const auto& e = cur.edges()[g() % cur.edges().size()];
                cur = insert_pillow(cur, {e.id, int(g() % e.valence), int(g() % e.valence)}).triangulation;
            }
            ts.push_back(cur);
        }
        double worst = 0;
        for (const auto& t : ts) {
            const auto eqs = gluing_system(t);
            for (int k = 0; k < 100; ++k) {
                const auto z = random_shapes(g, t.size());
                cplx p = 1;
                for (const auto& e : eqs) p *= e.lhs(z);
                worst = std::max(worst, std::abs(p - 1.0));
            }
        }
        out.require(worst < 1e-9, "product gap " + sci(worst));
        std::string sizes;
        for (const auto& t : ts) sizes += std::to_string(t.size()) + " ";
        out.note("triangulations of sizes " + sizes + "; largest |prod - 1| " + sci(worst));
    });

    all &= run(7, "pillow insertion: structure, parents and geometric persistence", 20, [](Outcome& out) {
        const auto split = split_inside_fixture();
        int insertions = 0, broken = 0;
        for (const auto& t : {figure_eight(), llr_t4_triangulation(), split.triangulation}) {
            const auto sels = enumerate_selections(t, 3);
            for (const auto& site : all_sites(t)) {
                const auto r = insert_pillow(t, site);
                const auto& n = r.triangulation;
                bool ok = n.size() == t.size() + 2 && n.edges().size() == t.edges().size() + 2 &&
                          n.cusps().size() == t.cusps().size() && n.closed() &&
                          n.is_cusped_manifold() == t.is_cusped_manifold() &&
                          static_cast<int>(n.edges().size()) == n.size() && n.edges()[r.record.diagonal].valence == 2 &&
                          product(gluing_system(n)).trivial();
                for (int i = 0; i < n.size(); ++i)
                    for (int f = 0; f < 4; ++f) {
                        const int m = n.tet(i).neighbor[f];
                        const Perm& p = n.tet(i).gluing[f];
                        ok &= n.tet(m).neighbor[p[f]] == i && n.tet(m).gluing[p[f]] == p.inverse() && p.sign() == -1;
                    }
                Ball ball(n);
                ball.expand(3);
                for (const auto& s : sels) {
                    std::vector<EdgeSelection> kids;
                    try {
                        kids = children(s, r.record, ball);
                    } catch (const DomainError&) {
                        continue;
                    }
                    ok &= !kids.empty();
                    for (const auto& k : kids) ok &= parent(k, r.record) == s;
                }
                broken += !ok;
                ++insertions;
            }
        }
        out.require(broken == 0, std::to_string(broken) + " insertions broke an invariant");
        out.note(std::to_string(insertions) + " insertions checked");

        const auto t = figure_eight();
        SolveConfig cfg;
        cfg.pins = {"z0 = z1"};
        const auto sys = pinned(to_rational_system(gluing_system(t), t.size()), cfg.pins);
        const auto sol = solve(sys, cfg).front();
        const std::vector<cplx> z(sol.x.begin(), sol.x.end());
        const auto m = develop_map(t, EdgeSelection{}, geometric_point(z));
        const auto rho = holonomy(m);
        double res = 0, gap = 0;
        int persisted = 0;
        for (const auto& site : all_sites(t)) {
            if (effective_site(t, site).folded()) continue;
            const auto r = insert_pillow(t, site);
            const auto w = pillow_shapes(t, site, z);
            for (const auto& eq : gluing_system(r.triangulation)) res = std::max(res, std::abs(eq.lhs(w) - 1.0));
            const auto mn = develop_map(r.triangulation, EdgeSelection{}, geometric_point(w));
            const auto rho_n = holonomy(mn);
            for (int k = 0; k < m.pres.generators(); ++k) {
                const auto word = through_pillows(t, r.triangulation, generator_path(t, m.pres, k));
                const cplx before = normalized(rho.generators[k]).trace();
                const cplx after = normalized(word_image(rho_n, letters_of(r.triangulation, mn.pres, word))).trace();
                gap = std::max(gap, trace_distance(before, after));
            }
            ++persisted;
        }
        out.require(persisted > 0, "no unfolded site");
        out.require(res < 1e-9, "pillow shapes residual " + sci(res));
        out.require(gap < 1e-7, "trace gap " + sci(gap));
        out.note(std::to_string(persisted) + " geometric insertions, residual " + sci(res) + ", trace gap " + sci(gap));
    });

    all &= run(8, "repair of a selection whose inside region splits in the cover", 60, [](Outcome& out) {
        const auto fx = split_inside_fixture();
        const auto before = omnipresence(fx.selection, fx.triangulation, 4);
        out.require(before.ball_components >= 2, "inside region is connected at depth 4");
        out.require(before.cond1 != Cond1::Proved, "condition 1 already holds");
        RepairConfig cfg;
        const auto r = make_omnipresent(fx.triangulation, fx.selection, cfg);
        out.require(r.pillows <= cfg.max_pillows, "pillow budget exceeded");
        out.require(!r.descendants.empty(), "no descendants");
        for (const auto& d : r.descendants) {
            const auto rep = omnipresence(d, r.triangulation, 4);
            out.require(rep.cond1 == Cond1::Proved && rep.cond2 && rep.cond3, d.str() + " " + rep.str());
        }
        int checked = 0;
        for (unsigned seed : {11u, 12u, 13u}) {
            std::mt19937 g(seed);
            Triangulation cur = r.triangulation;
            auto desc = r.descendants;
            for (int step = 0; step < 3; ++step) {
                const auto& e = cur.edges()[g() % cur.edges().size()];
                auto ins = insert_pillow(cur, {e.id, int(g() % e.valence), int(g() % e.valence)});
                std::vector<EdgeSelection> next;
                for (const auto& d : desc)
                    for (const auto& k : children(d, ins.record, ins.triangulation, 4)) next.push_back(k);
                cur = ins.triangulation;
                desc = next;
                for (const auto& d : desc) {
                    const auto rep = omnipresence(d, cur, 4);
                    out.require(rep.omnipresent(), "after pillow: " + d.str() + " " + rep.str());
                    ++checked;
                }
            }
        }
        out.note("before: " + before.str() + ", " + std::to_string(before.ball_components) + " inside components at depth 4; " +
                 std::to_string(r.pillows) + " pillows, " + std::to_string(r.descendants.size()) + " descendants; " +
                 std::to_string(checked) + " reports after further pillows");
    });

    all &= run(9, "representation round trip", 30, [](Outcome& out) {
        const auto fig8 = figure_eight();
        const auto sys8 = consistency_system(fig8, EdgeSelection{});
        const auto s8 = solve(sys8, SolveConfig{}).front();
        const auto cls8 = classify(EdgeSelection{}, fig8);
        round_trip(out, "figure-eight", fig8, EdgeSelection{}, {}, sys8, extended_point(sys8, s8.x, cls8, {}));

        const auto t5 = llr_t5_triangulation();
        const EdgeSelection sel({llr_t5_valence3_edge()});
        ExtendedConfig ecfg;
        ecfg.tet_names = llr_t5_names();
        const auto sys5 = consistency_system(t5, sel, ecfg);
        const auto s5 = solve(fixture_system("llr-extended"), SolveConfig{}).front();
        out.require(max_residual(sys5, s5.assignment) < 1e-9, "extended fixture solution is not a consistency solution");
        round_trip(out, "llr-extended", t5, sel, llr_t5_names(), sys5,
                   extended_point(sys5, sys5.assignment(s5.assignment), classify(sel, t5), llr_t5_names()));
    });

    return all ? 0 : 1;
}
