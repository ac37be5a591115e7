#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "bes/errors.hpp"
#include "bes/jet.hpp"

namespace bes {

enum class NodeKind { Constant, Variable, Parameter, Unary, Binary };

enum class UnaryOp { Neg, Exp, Log, Sin, Cos, Sinh, Cosh, Tanh, Sqrt };

enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct ExprNode {
    NodeKind kind = NodeKind::Constant;
    double value = 0.0;      // Constant
    std::string name;        // Parameter
    UnaryOp uop = UnaryOp::Neg;
    BinaryOp bop = BinaryOp::Add;
    int child0 = -1;
    int child1 = -1;
    std::size_t offset = 0;  // byte offset into the original source
};

using Params = std::map<std::string, double>;

// Immutable expression tree in one variable `t` with named late-bound
// parameters. Nodes live in a flat vector; the tree is append-only during
// parsing and never mutated afterwards, so concurrent read-only evaluation
// is safe.
class ExprAst {
public:
    ExprAst() = default;

    const std::vector<ExprNode> &nodes() const { return nodes_; }
    int root() const { return root_; }
    bool empty() const { return root_ < 0; }

    int add(ExprNode n) {
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }
    void set_root(int r) { root_ = r; }

    /// Structural equality (same shape, same constants bit for bit).
    bool same_tree(const ExprAst &other) const;

private:
    std::vector<ExprNode> nodes_;
    int root_ = -1;
};

/// Parse expression text. Precedence: ^ binds tighter than unary minus,
/// which binds tighter than * and /, which bind tighter than + and -.
/// All binary operators associate left except ^, which associates right.
ExprAst parse(const std::string &source);

/// Render to text such that parse(print(e)) reproduces the identical tree.
std::string print(const ExprAst &expr);

/// Evaluate value, d/dt and d2/dt2 at t. Exact to machine rounding.
Jet2 eval_d2(const ExprAst &expr, double t, const Params &params);

/// Evaluate through third order (d3/dt3).
Jet3 eval_d3(const ExprAst &expr, double t, const Params &params);

/// Convenience: parse and bind no parameters later.
double eval_value(const ExprAst &expr, double t, const Params &params);

} // namespace bes
