#include "xdv/fixtures.hpp"

#include "xdv/errors.hpp"
#include "xdv/retriangulate.hpp"

#include <map>

namespace xdv {

namespace {

const std::map<std::string, std::string>& texts() {
    static const std::map<std::string, std::string> m = {
        {"llr-t4",
         "h*i*j*k = 1\n"
         "((i-1)/i)*j*(1/(1-h)) = 1\n"
         "i*(1/(1-i))*((j-1)/j)*(1/(1-j))*(1/(1-h))*((k-1)/k)*((k-1)/k) = 1\n"
         "((i-1)/i)*(1/(1-i))*((j-1)/j)*(1/(1-j))*h*((h-1)/h)*((h-1)/h)*k*(1/(1-k))*(1/(1-k)) = 1\n"},
        {"llr-t5",
         "p*q*r = 1\n"
         "i*j*((q-1)/q)*(1/(1-q))*((r-1)/r)*(1/(1-r)) = 1\n"
         "((i-1)/i)*j*(1/(1-p))*((q-1)/q) = 1\n"
         "i*(1/(1-i))*((j-1)/j)*(1/(1-j))*((p-1)/p)*(1/(1-q))*r = 1\n"
         "((i-1)/i)*(1/(1-i))*((j-1)/j)*(1/(1-j))*p*((p-1)/p)*(1/(1-p))*q*((r-1)/r)*(1/(1-r)) = 1\n"},
        {"llr-t5-simplified",
         "p*q*r = 1\n"
         "i*j*(1/q)*(1/r) = 1\n"
         "((i-1)/i)*j*(1/(1-p))*((q-1)/q) = 1\n"
         "(i/(1-i))*(-1/j)*((p-1)/p)*(1/(1-q))*r = 1\n"},
        {"llr-extended",
         "i*j = 1\n"
         "((i-1)/i)*j*(-q/p) = 1\n"
         "(i/(i-1))*(1/j)*(-p/q) = 1\n"
         "1/(i*j) = 1\n"
         "p + q + r = 0  # around the degenerate edge\n"},
    };
    return m;
}

const char* kT4 =
    "tets 4\n"
    "tet 0 : 2 1 3 2 | 0132 1023 3201 1302\n"
    "tet 1 : 0 3 3 2 | 1023 3201 3012 2103\n"
    "tet 2 : 0 3 0 1 | 0132 2310 2031 2103\n"
    "tet 3 : 0 1 1 2 | 2310 1230 2310 3201\n";

const char* kT5 =
    "tets 5\n"
    "tet 0 : 3 3 2 1 | 1302 3012 2103 2103\n"
    "tet 1 : 4 4 2 0 | 1230 2031 0213 2103\n"
    "tet 2 : 0 1 4 3 | 2103 0213 0132 0132\n"
    "tet 3 : 0 0 2 4 | 1230 2031 0132 0132\n"
    "tet 4 : 1 1 3 2 | 1302 3012 0132 0132\n";

} // namespace

std::vector<std::string> fixture_names() { return {"fig8", "llr-t4", "llr-t5", "llr-t5-simplified", "llr-extended"}; }

bool is_equation_fixture(const std::string& name) { return texts().count(name) > 0; }

std::string fixture_text(const std::string& name) {
    if (name == "fig8") return save_triangulation(figure_eight());
    auto it = texts().find(name);
    if (it == texts().end()) throw DomainError("unknown fixture '" + name + "'");
    return it->second;
}

RationalSystem fixture_system(const std::string& name) {
    if (!is_equation_fixture(name)) throw DomainError("'" + name + "' is not an equation fixture");
    return parse_equations(fixture_text(name));
}

Triangulation llr_t4_triangulation() { return load_triangulation(kT4, "llr-t4"); }
Triangulation llr_t5_triangulation() { return load_triangulation(kT5, "llr-t5"); }
std::vector<std::string> llr_t4_names() { return {"h", "i", "j", "k"}; }
std::vector<std::string> llr_t5_names() { return {"i", "j", "p", "q", "r"}; }

int llr_t5_valence3_edge() {
    const auto t = llr_t5_triangulation();
    for (const auto& e : t.edges())
        if (e.valence == 3) return e.id;
    throw Error("no valence-3 edge");
}

SelectedTriangulation split_inside_fixture() {
    auto t = load_triangulation("tets 3\n"
                                "tet 0 : 2 2 2 1 | 2031 2031 0132 3201\n"
                                "tet 1 : 2 0 1 1 | 1302 2310 1230 3012\n"
                                "tet 2 : 0 1 0 0 | 1302 2031 1302 0132\n",
                                "split-inside");
    return {t, EdgeSelection({0})};
}

} // namespace xdv
