#include "xdv/expr.hpp"

#include "xdv/errors.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace xdv {

double& pole_tolerance() {
    static double t = 1e-13;
    return t;
}

int ExprArena::intern(Node n) {
    std::ostringstream key;
    key << int(n.op) << ':' << n.a << ':' << n.b << ':' << n.value.real() << ':' << n.value.imag();
    auto [it, fresh] = index_.emplace(key.str(), size());
    if (fresh) nodes_.push_back(n);
    return it->second;
}

int ExprArena::constant(cplx c) { return intern({Op::Const, c}); }
int ExprArena::symbol(int index) { return intern({Op::Sym, {}, index}); }

int ExprArena::add(int x, int y) {
    if (is_const(x, 0)) return y;
    if (is_const(y, 0)) return x;
    if (node(x).op == Op::Const && node(y).op == Op::Const) return constant(node(x).value + node(y).value);
    return intern({Op::Add, {}, x, y});
}

int ExprArena::sub(int x, int y) {
    if (is_const(y, 0)) return x;
    if (is_const(x, 0)) return neg(y);
    if (x == y) return constant(0);
    if (node(x).op == Op::Const && node(y).op == Op::Const) return constant(node(x).value - node(y).value);
    return intern({Op::Sub, {}, x, y});
}

int ExprArena::mul(int x, int y) {
    if (is_const(x, 0) || is_const(y, 0)) return constant(0);
    if (is_const(x, 1)) return y;
    if (is_const(y, 1)) return x;
    if (is_const(x, -1)) return neg(y);
    if (is_const(y, -1)) return neg(x);
    if (node(x).op == Op::Const && node(y).op == Op::Const) return constant(node(x).value * node(y).value);
    return intern({Op::Mul, {}, x, y});
}

int ExprArena::div(int x, int y) {
    if (is_const(y, 0)) throw PoleError("division by the constant 0");
    if (is_const(y, 1)) return x;
    if (is_const(x, 0)) return x;
    if (x == y) return constant(1);
    if (node(x).op == Op::Const && node(y).op == Op::Const) return constant(node(x).value / node(y).value);
    return intern({Op::Div, {}, x, y});
}

int ExprArena::neg(int x) {
    if (node(x).op == Op::Const) return constant(-node(x).value);
    if (node(x).op == Op::Neg) return node(x).a;
    return intern({Op::Neg, {}, x});
}

int ExprArena::pow(int x, int n) {
    if (n == 0) return constant(1);
    if (n == 1) return x;
    if (node(x).op == Op::Const) return constant(std::pow(node(x).value, n));
    return intern({Op::Pow, cplx(n), x});
}

int RationalSystem::variable(const std::string& name) {
    auto it = var_index_.find(name);
    if (it != var_index_.end()) return it->second;
    const int i = static_cast<int>(vars_.size());
    vars_.push_back(name);
    var_index_[name] = i;
    return i;
}

int RationalSystem::find_variable(const std::string& name) const {
    auto it = var_index_.find(name);
    return it == var_index_.end() ? -1 : it->second;
}

void RationalSystem::add_equation(int lhs, int rhs, std::string note) { eqs_.push_back({lhs, rhs, std::move(note)}); }

RationalSystem RationalSystem::merged(const RationalSystem& extra) const {
    RationalSystem out = *this;
    out.arena_ = std::make_shared<ExprArena>(*arena_);
    // Re-intern the extra equations node by node.
    std::vector<int> map(extra.arena().size(), -1);
    auto& A = out.arena();
    for (int id = 0; id < extra.arena().size(); ++id) {
        const auto& n = extra.arena().node(id);
        using Op = ExprArena::Op;
        switch (n.op) {
        case Op::Const: map[id] = A.constant(n.value); break;
        case Op::Sym: map[id] = A.symbol(out.variable(extra.variables()[n.a])); break;
        case Op::Add: map[id] = A.add(map[n.a], map[n.b]); break;
        case Op::Sub: map[id] = A.sub(map[n.a], map[n.b]); break;
        case Op::Mul: map[id] = A.mul(map[n.a], map[n.b]); break;
        case Op::Div: map[id] = A.div(map[n.a], map[n.b]); break;
        case Op::Neg: map[id] = A.neg(map[n.a]); break;
        case Op::Pow: map[id] = A.pow(map[n.a], int(n.value.real())); break;
        }
    }
    for (const auto& e : extra.equations()) out.add_equation(map[e.lhs], map[e.rhs], e.note);
    return out;
}

std::vector<int> RationalSystem::reachable() const {
    std::vector<char> need(arena_->size(), 0);
    for (const auto& e : eqs_) need[e.lhs] = need[e.rhs] = 1;
    for (int id = arena_->size() - 1; id >= 0; --id) {
        if (!need[id]) continue;
        const auto& n = arena_->node(id);
        if (n.op == ExprArena::Op::Const || n.op == ExprArena::Op::Sym) continue;
        need[n.a] = 1;
        if (n.b >= 0) need[n.b] = 1;
    }
    std::vector<int> out;
    for (int id = 0; id < arena_->size(); ++id)
        if (need[id]) out.push_back(id);
    return out;
}

namespace {

void check_pole(cplx den, cplx num) {
    if (std::abs(den) <= pole_tolerance() * std::max(1.0, std::abs(num))) throw PoleError("denominator vanishes");
}

} // namespace

cplx RationalSystem::value(int expr, const Eigen::VectorXcd& x) const {
    std::vector<cplx> v(expr + 1);
    for (int id = 0; id <= expr; ++id) {
        const auto& n = arena_->node(id);
        using Op = ExprArena::Op;
        switch (n.op) {
        case Op::Const: v[id] = n.value; break;
        case Op::Sym: v[id] = x[n.a]; break;
        case Op::Add: v[id] = v[n.a] + v[n.b]; break;
        case Op::Sub: v[id] = v[n.a] - v[n.b]; break;
        case Op::Mul: v[id] = v[n.a] * v[n.b]; break;
        case Op::Div: check_pole(v[n.b], v[n.a]); v[id] = v[n.a] / v[n.b]; break;
        case Op::Neg: v[id] = -v[n.a]; break;
        case Op::Pow: {
            const int k = int(n.value.real());
            if (k < 0) check_pole(v[n.a], 1.0);
            v[id] = std::pow(v[n.a], k);
            break;
        }
        }
    }
    return v[expr];
}

Eigen::VectorXcd RationalSystem::residual(const Eigen::VectorXcd& x) const {
    std::vector<cplx> v(arena_->size());
    for (int id : reachable()) {
        const auto& n = arena_->node(id);
        using Op = ExprArena::Op;
        switch (n.op) {
        case Op::Const: v[id] = n.value; break;
        case Op::Sym: v[id] = x[n.a]; break;
        case Op::Add: v[id] = v[n.a] + v[n.b]; break;
        case Op::Sub: v[id] = v[n.a] - v[n.b]; break;
        case Op::Mul: v[id] = v[n.a] * v[n.b]; break;
        case Op::Div: check_pole(v[n.b], v[n.a]); v[id] = v[n.a] / v[n.b]; break;
        case Op::Neg: v[id] = -v[n.a]; break;
        case Op::Pow: {
            const int k = int(n.value.real());
            if (k < 0) check_pole(v[n.a], 1.0);
            v[id] = std::pow(v[n.a], k);
            break;
        }
        }
    }
    Eigen::VectorXcd r(eqs_.size());
    for (size_t i = 0; i < eqs_.size(); ++i) r[i] = v[eqs_[i].lhs] - v[eqs_[i].rhs];
    return r;
}

void RationalSystem::residual_and_jacobian(const Eigen::VectorXcd& x, Eigen::VectorXcd& r, Eigen::MatrixXcd& J) const {
    const int nv = static_cast<int>(vars_.size());
    std::vector<cplx> v(arena_->size());
    std::vector<Eigen::VectorXcd> d(arena_->size());
    for (int id : reachable()) {
        const auto& n = arena_->node(id);
        using Op = ExprArena::Op;
        switch (n.op) {
        case Op::Const:
            v[id] = n.value;
            d[id] = Eigen::VectorXcd::Zero(nv);
            break;
        case Op::Sym:
            v[id] = x[n.a];
            d[id] = Eigen::VectorXcd::Zero(nv);
            d[id][n.a] = 1;
            break;
        case Op::Add:
            v[id] = v[n.a] + v[n.b];
            d[id] = d[n.a] + d[n.b];
            break;
        case Op::Sub:
            v[id] = v[n.a] - v[n.b];
            d[id] = d[n.a] - d[n.b];
            break;
        case Op::Mul:
            v[id] = v[n.a] * v[n.b];
            d[id] = d[n.a] * v[n.b] + d[n.b] * v[n.a];
            break;
        case Op::Div: {
            check_pole(v[n.b], v[n.a]);
            const cplx q = v[n.a] / v[n.b];
            v[id] = q;
            d[id] = (d[n.a] - d[n.b] * q) / v[n.b];
            break;
        }
        case Op::Neg:
            v[id] = -v[n.a];
            d[id] = -d[n.a];
            break;
        case Op::Pow: {
            const int k = int(n.value.real());
            if (k < 0) check_pole(v[n.a], 1.0);
            v[id] = std::pow(v[n.a], k);
            d[id] = d[n.a] * (double(k) * std::pow(v[n.a], k - 1));
            break;
        }
        }
    }
    r.resize(eqs_.size());
    J.resize(eqs_.size(), nv);
    for (size_t i = 0; i < eqs_.size(); ++i) {
        r[i] = v[eqs_[i].lhs] - v[eqs_[i].rhs];
        J.row(i) = (d[eqs_[i].lhs] - d[eqs_[i].rhs]).transpose();
    }
}

Eigen::VectorXcd RationalSystem::assignment(const std::map<std::string, cplx>& values) const {
    Eigen::VectorXcd x(vars_.size());
    for (size_t i = 0; i < vars_.size(); ++i) {
        auto it = values.find(vars_[i]);
        if (it == values.end()) throw DomainError("no value for variable '" + vars_[i] + "'");
        x[i] = it->second;
    }
    return x;
}

double max_residual(const RationalSystem& sys, const std::map<std::string, cplx>& values) {
    return sys.residual(sys.assignment(values)).cwiseAbs().maxCoeff();
}

namespace {

class Parser {
public:
    Parser(RationalSystem& sys, std::string_view s, int line) : sys_(sys), s_(s), line_(line) {}

    void equation(std::string note) {
        int lhs = sum();
        expect('=');
        int rhs = sum();
        skip();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        sys_.add_equation(lhs, rhs, std::move(note));
    }

private:
    [[noreturn]] void fail(const std::string& what) { throw ParseError(what, line_, int(pos_) + 1); }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }
    void expect(char c) {
        if (!peek(c)) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    int sum() {
        int x = product();
        while (true) {
            if (peek('+')) {
                ++pos_;
                x = sys_.arena().add(x, product());
            } else if (peek('-')) {
                ++pos_;
                x = sys_.arena().sub(x, product());
            } else {
                return x;
            }
        }
    }
    int product() {
        int x = unary();
        while (true) {
            if (peek('*')) {
                ++pos_;
                x = sys_.arena().mul(x, unary());
            } else if (peek('/')) {
                ++pos_;
                x = sys_.arena().div(x, unary());
            } else {
                return x;
            }
        }
    }
    int unary() {
        if (peek('-')) {
            ++pos_;
            return sys_.arena().neg(unary());
        }
        if (peek('+')) {
            ++pos_;
            return unary();
        }
        return atom();
    }
    int atom() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            int x = sum();
            expect(')');
            return x;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            size_t start = pos_;
            while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
                size_t save = pos_++;
                if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
                if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
                } else {
                    pos_ = save;
                }
            }
            const std::string num(s_.substr(start, pos_ - start));
            try {
                return sys_.arena().constant(std::stod(num));
            } catch (const std::exception&) {
                pos_ = start;
                fail("bad number '" + num + "'");
            }
        }
        if (c >= 'a' && c <= 'z') {
            size_t start = pos_;
            while (pos_ < s_.size() && (std::islower(static_cast<unsigned char>(s_[pos_])) ||
                                        std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                ++pos_;
            return sys_.symbol(std::string(s_.substr(start, pos_ - start)));
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    RationalSystem& sys_;
    std::string_view s_;
    size_t pos_ = 0;
    int line_;
};

std::string trim(std::string_view s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

} // namespace

void parse_equation_into(RationalSystem& sys, std::string_view raw, int lineno) {
    std::string line(raw), note;
    if (auto h = line.find('#'); h != std::string::npos) {
        note = trim(line.substr(h + 1));
        line.erase(h);
    }
    line = trim(line);
    if (line.empty()) return;
    if (line.rfind("var ", 0) == 0) {
        std::istringstream in(line.substr(4));
        std::string name;
        in >> name;
        if (name.empty() || !(name[0] >= 'a' && name[0] <= 'z')) throw ParseError("bad variable declaration", lineno, 5);
        sys.variable(name);
        sys.header.push_back(line);
        return;
    }
    Parser(sys, line, lineno).equation(note);
}

RationalSystem parse_equations(std::string_view text) {
    RationalSystem sys;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) parse_equation_into(sys, line, ++lineno);
    return sys;
}

namespace {

std::string number(cplx c) {
    if (c.imag() != 0) throw DomainError("complex constants have no text form");
    std::ostringstream out;
    const double r = c.real();
    if (r == std::round(r) && std::abs(r) < 1e15) {
        out << static_cast<long long>(r);
    } else {
        out.precision(17);
        out << r;
    }
    return out.str();
}

/// Precedence: 1 sum, 2 product, 3 unary, 4 atom.
std::string render(const RationalSystem& sys, int id, int& prec) {
    const auto& A = sys.arena();
    const auto& n = A.node(id);
    using Op = ExprArena::Op;
    auto sub = [&](int child, int need, bool strict = false) {
        int p;
        std::string s = render(sys, child, p);
        if (p < need || (strict && p == need)) s = "(" + s + ")";
        return s;
    };
    switch (n.op) {
    case Op::Const: {
        std::string s = number(n.value);
        prec = s[0] == '-' ? 3 : 4;
        return s;
    }
    case Op::Sym: prec = 4; return sys.variables()[n.a];
    case Op::Add: prec = 1; return sub(n.a, 1) + " + " + sub(n.b, 1);
    case Op::Sub: prec = 1; return sub(n.a, 1) + " - " + sub(n.b, 1, true);
    case Op::Mul: prec = 2; return sub(n.a, 2) + "*" + sub(n.b, 2);
    case Op::Div: prec = 2; return sub(n.a, 2) + "/" + sub(n.b, 2, true);
    case Op::Neg: prec = 3; return "-" + sub(n.a, 3);
    case Op::Pow: {
        const int k = int(n.value.real());
        std::string base = sub(n.a, 3);
        std::string s = base;
        for (int i = 1; i < std::abs(k); ++i) s += "*" + base;
        if (k < 0) {
            prec = 2;
            return "1/" + (std::abs(k) > 1 ? "(" + s + ")" : s);
        }
        prec = 2;
        return s;
    }
    }
    prec = 4;
    return "?";
}

} // namespace

std::string print_expr(const RationalSystem& sys, int expr) {
    int p;
    return render(sys, expr, p);
}

std::string print_system(const RationalSystem& sys) {
    std::string out;
    for (const auto& h : sys.header) out += h + "\n";
    for (const auto& e : sys.equations()) {
        out += print_expr(sys, e.lhs) + " = " + print_expr(sys, e.rhs);
        if (!e.note.empty()) out += "  # " + e.note;
        out += "\n";
    }
    return out;
}

} // namespace xdv
