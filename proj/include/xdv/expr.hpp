#pragma once

#include "xdv/series.hpp"

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace xdv {

/// Shared, hash-consed expression DAG. Node ids are topologically ordered.
class ExprArena {
public:
    enum class Op { Const, Sym, Add, Sub, Mul, Div, Neg, Pow };
    struct Node {
        Op op;
        cplx value{};  // constant value, or exponent for Pow
        int a = -1, b = -1;  // children, or symbol index for Sym
    };

    int constant(cplx c);
    int symbol(int index);
    int add(int x, int y);
    int sub(int x, int y);
    int mul(int x, int y);
    int div(int x, int y);
    int neg(int x);
    int pow(int x, int n);

    const Node& node(int id) const { return nodes_[id]; }
    int size() const { return static_cast<int>(nodes_.size()); }
    bool is_const(int id, cplx c) const { return nodes_[id].op == Op::Const && nodes_[id].value == c; }

private:
    int intern(Node n);
    std::vector<Node> nodes_;
    std::unordered_map<std::string, int> index_;
};

struct Equation {
    int lhs;
    int rhs;
    std::string note;
};

/// Variables plus equations lhs = rhs over a shared arena.
class RationalSystem {
public:
    RationalSystem() : arena_(std::make_shared<ExprArena>()) {}

    ExprArena& arena() { return *arena_; }
    const ExprArena& arena() const { return *arena_; }

    /// Index of a variable, declaring it when new.
    int variable(const std::string& name);
    int find_variable(const std::string& name) const;
    const std::vector<std::string>& variables() const { return vars_; }
    int symbol(const std::string& name) { return arena_->symbol(variable(name)); }

    void add_equation(int lhs, int rhs, std::string note = "");
    const std::vector<Equation>& equations() const { return eqs_; }
    /// Copy with extra equations from another system over the same names.
    RationalSystem merged(const RationalSystem& extra) const;

    /// Per-equation complex lhs - rhs. Throws PoleError near a vanishing denominator.
    Eigen::VectorXcd residual(const Eigen::VectorXcd& x) const;
    /// Residuals and d(residual)/dx by forward differentiation.
    void residual_and_jacobian(const Eigen::VectorXcd& x, Eigen::VectorXcd& r, Eigen::MatrixXcd& J) const;
    Eigen::VectorXcd assignment(const std::map<std::string, cplx>& values) const;

    /// Value of one expression node at x.
    cplx value(int expr, const Eigen::VectorXcd& x) const;

    /// Free-form metadata lines kept for printing (e.g. variable manifests).
    std::vector<std::string> header;

private:
    std::vector<int> reachable() const;
    std::shared_ptr<ExprArena> arena_;
    std::vector<std::string> vars_;
    std::map<std::string, int> var_index_;
    std::vector<Equation> eqs_;
};

/// Relative size below which a denominator counts as a pole.
double& pole_tolerance();

/// Parses lines `expr = expr`, with `#` comments and optional `var <name> : ...` manifest lines.
RationalSystem parse_equations(std::string_view text);
/// Adds one parsed equation to an existing system.
void parse_equation_into(RationalSystem& sys, std::string_view line, int lineno = 0);
std::string print_expr(const RationalSystem& sys, int expr);
std::string print_system(const RationalSystem& sys);

/// Max absolute residual, convenient for tests.
double max_residual(const RationalSystem& sys, const std::map<std::string, cplx>& values);

} // namespace xdv
