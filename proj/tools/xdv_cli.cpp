#include "xdv/errors.hpp"
#include "xdv/extended.hpp"
#include "xdv/fixtures.hpp"
#include "xdv/gluing.hpp"
#include "xdv/horonormal.hpp"
#include "xdv/representation.hpp"
#include "xdv/reproduce.hpp"
#include "xdv/retriangulate.hpp"
#include "xdv/solver.hpp"
#include "xdv/triangulation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace xdv;

namespace {

struct Globals {
    std::uint64_t seed = 1;
    int depth = 4;
    double tol = 1e-10;
    int truncation = 8;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// A built-in triangulation or a triangulation file, with tet names where the fixture has them.
struct NamedTriangulation {
    Triangulation t;
    std::vector<std::string> names;
};

NamedTriangulation load_input(const std::string& what) {
    if (what == "fig8") return {figure_eight(), {}};
    if (what == "llr-t4") return {llr_t4_triangulation(), llr_t4_names()};
    if (what == "llr-t5" || what == "llr-t5-simplified" || what == "llr-extended") return {llr_t5_triangulation(), llr_t5_names()};
    if (what == "split-inside") return {split_inside_fixture().triangulation, {}};
    return {load_triangulation(read_file(what), what), {}};
}

RationalSystem load_system(const std::string& what) {
    if (is_equation_fixture(what)) return fixture_system(what);
    bool triangulation = what == "fig8" || what == "split-inside";
    if (!triangulation) {
        std::istringstream in(read_file(what));
        std::string line;
        while (std::getline(in, line)) {
            line = line.substr(0, line.find('#'));
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            triangulation = line.substr(line.find_first_not_of(" \t"), 5) == "tets ";
            break;
        }
        if (!triangulation) return parse_equations(read_file(what));
    }
    const auto nt = load_input(what);
    return to_rational_system(gluing_system(nt.t), nt.t.size(), nt.names);
}

/// "name=re,im" or "name=re".
std::map<std::string, cplx> parse_assignments(const std::vector<std::string>& items) {
    std::map<std::string, cplx> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw CLI::ValidationError("--at", "expected name=re,im");
        const std::string value = item.substr(eq + 1);
        const auto comma = value.find(',');
        const double re = std::stod(value.substr(0, comma));
        const double im = comma == std::string::npos ? 0.0 : std::stod(value.substr(comma + 1));
        out[item.substr(0, eq)] = {re, im};
    }
    return out;
}

void print_matrix(const Mobius& m) {
    std::cout << "  [" << format_complex(m(0, 0)) << ", " << format_complex(m(0, 1)) << "; " << format_complex(m(1, 0))
              << ", " << format_complex(m(1, 1)) << "]\n";
}

int run_reproduce(const std::string& which, const Globals& g) {
    if (which != "llr") throw CLI::ValidationError("reproduce", "only 'llr' is known");
    const auto rows = reproduce_llr(g.seed);
    bool all = true;
    for (const auto& r : rows) {
        std::printf("%-4s  %-40s %6.2fs  %s\n", r.passed ? "pass" : "FAIL", r.name.c_str(), r.seconds, r.detail.c_str());
        all &= r.passed;
    }
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"extended deformation varieties of ideal triangulations"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--depth", g.depth, "cover search depth")->capture_default_str();
    app.add_option("--tol", g.tol, "solver tolerance")->capture_default_str();
    app.add_option("--truncation", g.truncation, "series window width")->capture_default_str();

    std::string input, selection_text, which;
    std::vector<std::string> pins, at;
    bool show_traces = false, all_omni = false;
    std::string omni_text;
    int restarts = 64;

    auto* validate = app.add_subcommand("validate", "check a triangulation and print its counts");
    validate->add_option("input", input, "fixture name or triangulation file")->required();

    auto* gluing = app.add_subcommand("gluing-eqs", "print the gluing equations");
    gluing->add_option("input", input)->required();

    auto* enumerate = app.add_subcommand("enumerate-horonormal", "list selections with type census and omnipresence");
    enumerate->add_option("input", input)->required();

    auto* extended = app.add_subcommand("extended-eqs", "print the consistency system of a selection");
    extended->add_option("input", input)->required();
    extended->add_option("--selection", selection_text, "edge classes in E0, e.g. {4}");

    auto* solve_cmd = app.add_subcommand("solve", "sample solutions of an equation system");
    solve_cmd->add_option("input", input, "equation fixture, equation file or triangulation")->required();
    solve_cmd->add_option("--pin", pins, "extra equation, repeatable");
    solve_cmd->add_option("--restarts", restarts)->capture_default_str();

    auto* holo = app.add_subcommand("holonomy", "generator matrices of a point of the extended variety");
    holo->add_option("input", input)->required();
    holo->add_option("--selection", selection_text);
    holo->add_option("--at", at, "variable value name=re,im, repeatable; solved when absent");
    holo->add_flag("--traces", show_traces, "print generator traces");

    auto* retri = app.add_subcommand("retriangulate", "insert pillows to make selections omnipresent");
    retri->add_option("input", input)->required();
    auto* omni_opt = retri->add_option("--make-omnipresent", omni_text, "selection to repair");
    auto* all_opt = retri->add_flag("--make-all-omnipresent", all_omni);
    omni_opt->excludes(all_opt);

    auto* fixtures = app.add_subcommand("fixtures", "list or show built-in fixtures");
    fixtures->add_option("action", which, "list or show")->required()->check(CLI::IsMember({"list", "show"}));
    fixtures->add_option("name", input);

    auto* reproduce = app.add_subcommand("reproduce", "run a reproduction table");
    reproduce->add_option("which", which)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    series_settings().width = g.truncation;
    try {
        if (*validate) {
            const auto t = load_input(input).t;
            std::cout << "ok, N=" << t.size() << ", edges=" << t.edges().size() << ", cusps=" << t.cusps().size()
                      << (t.closed() ? "" : ", boundary") << (t.is_cusped_manifold() ? "" : ", not a cusped manifold") << "\n";
        } else if (*gluing) {
            const auto nt = load_input(input);
            std::cout << print_system(to_rational_system(gluing_system(nt.t), nt.t.size(), nt.names));
        } else if (*enumerate) {
            const auto t = load_input(input).t;
            for (const auto& sel : enumerate_selections(t, g.depth)) {
                const auto c = classify(sel, t);
                std::map<std::string, int> census;
                for (const auto& tc : c.tets) ++census[to_string(tc.type)];
                std::cout << sel.str() << " ";
                for (const auto& [type, n] : census) std::cout << type << ":" << n << " ";
                std::cout << omnipresence(sel, t, g.depth).str() << "\n";
            }
        } else if (*extended) {
            const auto nt = load_input(input);
            ExtendedConfig cfg;
            cfg.tet_names = nt.names;
            cfg.anchor_seed = g.seed;
            std::cout << print_system(consistency_system(nt.t, EdgeSelection::parse(selection_text), cfg));
        } else if (*solve_cmd) {
            SolveConfig cfg;
            cfg.seed = g.seed;
            cfg.tolerance = g.tol;
            cfg.pins = pins;
            cfg.restarts = restarts;
            const auto sys = load_system(input);
            const auto full = pinned(sys, pins);
            const auto samples = solve(sys, cfg);
            for (std::size_t k = 0; k < samples.size(); ++k) {
                const auto& s = samples[k];
                std::cout << "# sample " << k << "\n";
                for (const auto& [name, v] : s.assignment) std::cout << name << " = " << format_complex(v) << "\n";
                std::printf("# residual %.3e rank %d gap %.3e dimension %d\n", s.residual, s.rank.rank, s.rank.gap,
                            dimension_estimate(full, s));
            }
        } else if (*holo) {
            const auto nt = load_input(input);
            const auto sel = EdgeSelection::parse(selection_text);
            ExtendedConfig cfg;
            cfg.tet_names = nt.names;
            cfg.anchor_seed = g.seed;
            const auto sys = consistency_system(nt.t, sel, cfg);
            std::map<std::string, cplx> a = parse_assignments(at);
            if (a.empty()) {
                SolveConfig sc;
                sc.seed = g.seed;
                sc.tolerance = g.tol;
                a = solve(sys, sc).front().assignment;
            }
            const auto m = develop_map(nt.t, sel, extended_point(sys, sys.assignment(a), classify(sel, nt.t), nt.names));
            const auto rho = holonomy(m);
            for (int k = 0; k < static_cast<int>(rho.generators.size()); ++k) {
                std::cout << "g" << k + 1 << " (face " << m.pres.generator_face[k] << ")\n";
                print_matrix(normalized(rho.generators[k]));
            }
            for (std::size_t r = 0; r < m.pres.relators.size(); ++r)
                std::printf("relator %zu deviation %.3e\n", r, distance_to_identity(word_image(rho, m.pres.relators[r])));
            if (show_traces)
                for (const auto& tr : traces(rho)) std::cout << "trace " << format_complex(tr) << "\n";
            std::cout << "class " << to_string(screen_rep(rho)) << "\n";
        } else if (*retri) {
            const auto t = load_input(input).t;
            RepairConfig cfg;
            cfg.depth = g.depth;
            if (all_omni) {
                const auto r = make_all_omnipresent(t, cfg);
                std::cout << save_triangulation(r.triangulation);
                std::cout << "# pillows " << r.pillows << "\n";
                for (const auto& s : r.selections) std::cout << "# " << s.str() << " " << omnipresence(s, r.triangulation, g.depth).str() << "\n";
            } else if (!omni_text.empty()) {
                const auto r = make_omnipresent(t, EdgeSelection::parse(omni_text), cfg);
                std::cout << save_triangulation(r.triangulation);
                std::cout << "# pillows " << r.pillows << " detours " << r.detours << "\n";
                for (const auto& rec : r.records)
                    std::cout << "# split edge " << rec.split_edge << " -> " << rec.up << "," << rec.down << " diagonal " << rec.diagonal << "\n";
                for (const auto& s : r.descendants) std::cout << "# " << s.str() << " " << omnipresence(s, r.triangulation, g.depth).str() << "\n";
            } else {
                throw CLI::ValidationError("retriangulate", "give --make-omnipresent or --make-all-omnipresent");
            }
        } else if (*fixtures) {
            if (which == "list") {
                for (const auto& n : fixture_names()) std::cout << n << "\n";
            } else {
                if (input.empty()) throw CLI::ValidationError("fixtures show", "name required");
                std::cout << fixture_text(input);
            }
        } else if (*reproduce) {
            return run_reproduce(which, g);
        }
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
