#include "xdv/gluing.hpp"

#include "xdv/errors.hpp"

namespace xdv {

ShapeTriple shape_triple(cplx z) {
    if (z == cplx(0) || z == cplx(1)) throw DomainError("degenerate shape");
    return {z, (z - 1.0) / z, 1.0 / (1.0 - z)};
}

cplx slot_value(cplx z, int slot) {
    const auto s = shape_triple(z);
    return slot == 0 ? s.x1 : slot == 1 ? s.x2 : s.x3;
}

void MonomialEquation::add_slot(int tet, int slot) {
    auto& [a, b] = exponents[tet];
    switch (slot) {
    case 0: a += 1; break;
    case 1:
        a -= 1;
        b += 1;
        sign = -sign;
        break;
    default: b -= 1; break;
    }
    if (a == 0 && b == 0) exponents.erase(tet);
}

cplx MonomialEquation::lhs(const std::vector<cplx>& z) const {
    cplx v = double(sign);
    for (const auto& [t, ab] : exponents) v *= std::pow(z[t], ab.first) * std::pow(1.0 - z[t], ab.second);
    return v;
}

bool MonomialEquation::trivial() const { return sign == 1 && exponents.empty(); }

std::vector<MonomialEquation> gluing_system(const Triangulation& t) {
    t.require_closed("gluing equations");
    std::vector<MonomialEquation> out;
    for (const auto& e : t.edges()) {
        MonomialEquation m;
        m.edge = e.id;
        for (const auto& c : e.cycle) m.add_slot(c.tet, shape_slot(c.edge()));
        out.push_back(std::move(m));
    }
    return out;
}

MonomialEquation product(const std::vector<MonomialEquation>& eqs) {
    MonomialEquation p;
    for (const auto& e : eqs) {
        p.sign *= e.sign;
        for (const auto& [t, ab] : e.exponents) {
            auto& [a, b] = p.exponents[t];
            a += ab.first;
            b += ab.second;
            if (a == 0 && b == 0) p.exponents.erase(t);
        }
    }
    return p;
}

std::vector<std::string> default_shape_names(int n) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back("z" + std::to_string(i));
    return v;
}

RationalSystem to_rational_system(const std::vector<MonomialEquation>& eqs, int ntets, std::vector<std::string> names) {
    if (names.empty()) names = default_shape_names(ntets);
    if (static_cast<int>(names.size()) != ntets) throw DomainError("wrong number of shape names");
    RationalSystem sys;
    std::vector<int> sym;
    for (const auto& n : names) sym.push_back(sys.symbol(n));
    auto& A = sys.arena();
    const int one = A.constant(1);
    for (const auto& e : eqs) {
        int lhs = A.constant(double(e.sign));
        for (const auto& [t, ab] : e.exponents) {
            lhs = A.mul(lhs, A.pow(sym[t], ab.first));
            lhs = A.mul(lhs, A.pow(A.sub(one, sym[t]), ab.second));
        }
        sys.add_equation(lhs, one, e.edge >= 0 ? "edge " + std::to_string(e.edge) : "");
    }
    return sys;
}

} // namespace xdv
