#include "bes/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace bes {

namespace {

enum class TokKind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    TokKind kind;
    std::size_t offset;
    double number = 0.0;
    std::string text;
};

std::vector<Token> lex(const std::string &src) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = src.size();
    while (i < n) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            const char *begin = src.c_str() + i;
            char *end = nullptr;
            const double value = std::strtod(begin, &end);
            if (end == begin) throw ParseError("invalid number literal", i);
            Token t{TokKind::Number, i, 0.0, {}};
            t.number = value;
            i += static_cast<std::size_t>(end - begin);
            out.push_back(std::move(t));
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < n && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            Token t{TokKind::Ident, i, 0.0, {}};
            t.text = src.substr(i, j - i);
            i = j;
            out.push_back(std::move(t));
            continue;
        }
        TokKind k;
        switch (c) {
            case '+': k = TokKind::Plus; break;
            case '-': k = TokKind::Minus; break;
            case '*': k = TokKind::Star; break;
            case '/': k = TokKind::Slash; break;
            case '^': k = TokKind::Caret; break;
            case '(': k = TokKind::LParen; break;
            case ')': k = TokKind::RParen; break;
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", i);
        }
        out.push_back(Token{k, i, 0.0, {}});
        ++i;
    }
    out.push_back(Token{TokKind::End, n, 0.0, {}});
    return out;
}

bool unary_name(const std::string &s, UnaryOp &op) {
    if (s == "exp") op = UnaryOp::Exp;
    else if (s == "log") op = UnaryOp::Log;
    else if (s == "sin") op = UnaryOp::Sin;
    else if (s == "cos") op = UnaryOp::Cos;
    else if (s == "sinh") op = UnaryOp::Sinh;
    else if (s == "cosh") op = UnaryOp::Cosh;
    else if (s == "tanh") op = UnaryOp::Tanh;
    else if (s == "sqrt") op = UnaryOp::Sqrt;
    else return false;
    return true;
}

class Parser {
public:
    explicit Parser(const std::string &src) : toks_(lex(src)) {}

    ExprAst run() {
        if (toks_.front().kind == TokKind::End) throw ParseError("empty expression", 0);
        const int root = parse_sum();
        expect(TokKind::End, "trailing input after expression");
        ast_.set_root(root);
        return std::move(ast_);
    }

private:
    const Token &peek() const { return toks_[pos_]; }
    Token take() { return toks_[pos_++]; }
    void expect(TokKind k, const char *msg) {
        if (peek().kind != k) throw ParseError(msg, peek().offset);
        ++pos_;
    }

    int make_binary(BinaryOp op, int l, int r, std::size_t off) {
        ExprNode n;
        n.kind = NodeKind::Binary;
        n.bop = op;
        n.child0 = l;
        n.child1 = r;
        n.offset = off;
        return ast_.add(std::move(n));
    }

    int parse_sum() {
        int lhs = parse_term();
        while (peek().kind == TokKind::Plus || peek().kind == TokKind::Minus) {
            const Token t = take();
            const int rhs = parse_term();
            lhs = make_binary(t.kind == TokKind::Plus ? BinaryOp::Add : BinaryOp::Sub,
                              lhs, rhs, t.offset);
        }
        return lhs;
    }

    int parse_term() {
        int lhs = parse_unary();
        while (peek().kind == TokKind::Star || peek().kind == TokKind::Slash) {
            const Token t = take();
            const int rhs = parse_unary();
            lhs = make_binary(t.kind == TokKind::Star ? BinaryOp::Mul : BinaryOp::Div,
                              lhs, rhs, t.offset);
        }
        return lhs;
    }

    int parse_unary() {
        if (peek().kind == TokKind::Minus) {
            const Token t = take();
            const int child = parse_unary();
            ExprNode n;
            n.kind = NodeKind::Unary;
            n.uop = UnaryOp::Neg;
            n.child0 = child;
            n.offset = t.offset;
            return ast_.add(std::move(n));
        }
        return parse_power();
    }

    int parse_power() {
        const int base = parse_atom();
        if (peek().kind == TokKind::Caret) {
            const Token t = take();
            const int exponent = parse_unary(); // right-associative, allows 2^-3
            return make_binary(BinaryOp::Pow, base, exponent, t.offset);
        }
        return base;
    }

    int parse_atom() {
        const Token t = take();
        switch (t.kind) {
            case TokKind::Number: {
                ExprNode n;
                n.kind = NodeKind::Constant;
                n.value = t.number;
                n.offset = t.offset;
                return ast_.add(std::move(n));
            }
            case TokKind::LParen: {
                const int inner = parse_sum();
                expect(TokKind::RParen, "expected ')'");
                return inner;
            }
            case TokKind::Ident: {
                if (peek().kind == TokKind::LParen) {
                    UnaryOp op;
                    if (!unary_name(t.text, op))
                        throw ParseError("unknown function name '" + t.text + "'", t.offset);
                    ++pos_; // consume '('
                    const int arg = parse_sum();
                    expect(TokKind::RParen, "expected ')' after function argument");
                    ExprNode n;
                    n.kind = NodeKind::Unary;
                    n.uop = op;
                    n.child0 = arg;
                    n.offset = t.offset;
                    return ast_.add(std::move(n));
                }
                UnaryOp op;
                if (unary_name(t.text, op))
                    throw ParseError("function name '" + t.text + "' used without arguments",
                                     t.offset);
                ExprNode n;
                n.offset = t.offset;
                if (t.text == "t") {
                    n.kind = NodeKind::Variable;
                } else {
                    n.kind = NodeKind::Parameter;
                    n.name = t.text;
                }
                return ast_.add(std::move(n));
            }
            default:
                throw ParseError("expected a value", t.offset);
        }
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    ExprAst ast_;
};

bool same_node(const std::vector<ExprNode> &a, int ia,
               const std::vector<ExprNode> &b, int ib) {
    const ExprNode &x = a[static_cast<std::size_t>(ia)];
    const ExprNode &y = b[static_cast<std::size_t>(ib)];
    if (x.kind != y.kind) return false;
    switch (x.kind) {
        case NodeKind::Constant: return x.value == y.value;
        case NodeKind::Variable: return true;
        case NodeKind::Parameter: return x.name == y.name;
        case NodeKind::Unary:
            return x.uop == y.uop && same_node(a, x.child0, b, y.child0);
        case NodeKind::Binary:
            return x.bop == y.bop && same_node(a, x.child0, b, y.child0) &&
                   same_node(a, x.child1, b, y.child1);
    }
    return false;
}

const char *unary_text(UnaryOp op) {
    switch (op) {
        case UnaryOp::Neg: return "-";
        case UnaryOp::Exp: return "exp";
        case UnaryOp::Log: return "log";
        case UnaryOp::Sin: return "sin";
        case UnaryOp::Cos: return "cos";
        case UnaryOp::Sinh: return "sinh";
        case UnaryOp::Cosh: return "cosh";
        case UnaryOp::Tanh: return "tanh";
        case UnaryOp::Sqrt: return "sqrt";
    }
    return "?";
}

// Precedence levels used by the printer: sum=1, product=2, unary minus=3,
// power=4, atom=5.
int node_prec(const ExprNode &n) {
    switch (n.kind) {
        case NodeKind::Binary:
            switch (n.bop) {
                case BinaryOp::Add:
                case BinaryOp::Sub: return 1;
                case BinaryOp::Mul:
                case BinaryOp::Div: return 2;
                case BinaryOp::Pow: return 4;
            }
            return 5;
        case NodeKind::Unary:
            return n.uop == UnaryOp::Neg ? 3 : 5;
        default:
            return 5;
    }
}

void print_node(const std::vector<ExprNode> &nodes, int idx, int context,
                std::string &out) {
    const ExprNode &n = nodes[static_cast<std::size_t>(idx)];
    const int prec = node_prec(n);
    const bool parens = prec < context;
    if (parens) out += '(';
    switch (n.kind) {
        case NodeKind::Constant: {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            out += buf;
            break;
        }
        case NodeKind::Variable:
            out += 't';
            break;
        case NodeKind::Parameter:
            out += n.name;
            break;
        case NodeKind::Unary:
            if (n.uop == UnaryOp::Neg) {
                out += '-';
                print_node(nodes, n.child0, 3, out);
            } else {
                out += unary_text(n.uop);
                out += '(';
                print_node(nodes, n.child0, 0, out);
                out += ')';
            }
            break;
        case NodeKind::Binary: {
            const char *sym = nullptr;
            switch (n.bop) {
                case BinaryOp::Add: sym = "+"; break;
                case BinaryOp::Sub: sym = "-"; break;
                case BinaryOp::Mul: sym = "*"; break;
                case BinaryOp::Div: sym = "/"; break;
                case BinaryOp::Pow: sym = "^"; break;
            }
            if (n.bop == BinaryOp::Pow) {
                // right-associative; the base must be atom-tight
                print_node(nodes, n.child0, 5, out);
                out += sym;
                print_node(nodes, n.child1, 4, out);
            } else {
                print_node(nodes, n.child0, prec, out);
                out += sym;
                print_node(nodes, n.child1, prec + 1, out);
            }
            break;
        }
    }
    if (parens) out += ')';
}

template <class J>
void check_finite(const J &j, std::size_t offset) {
    bool ok = std::isfinite(j.v) && std::isfinite(j.d1) && std::isfinite(j.d2);
    if constexpr (requires { j.d3; }) ok = ok && std::isfinite(j.d3);
    if (!ok) throw EvalError("non-finite value in evaluation", offset);
}

// `coef * base^e`, returning exactly zero when the coefficient vanishes so
// that integer exponents stay total at base = 0.
double pow_term(double coef, double base, double e) {
    if (coef == 0.0) return 0.0;
    return coef * std::pow(base, e);
}

template <class J>
J apply_pow(const J &base, const J &expo, std::size_t offset) {
    constexpr bool third = requires { base.d3; };
    bool expo_is_const = expo.d1 == 0.0 && expo.d2 == 0.0;
    if constexpr (requires { expo.d3; }) expo_is_const = expo_is_const && expo.d3 == 0.0;
    if (expo_is_const) {
        const double c = expo.v;
        const bool integral = c == std::rint(c) && std::abs(c) < 1e15;
        if (!integral && base.v <= 0.0)
            throw EvalError("power of a nonpositive base with non-integer exponent", offset);
        if (integral && base.v == 0.0 && c < 0.0)
            throw EvalError("zero raised to a negative power", offset);
        const double u0 = std::pow(base.v, c);
        const double u1 = pow_term(c, base.v, c - 1.0);
        const double u2 = pow_term(c * (c - 1.0), base.v, c - 2.0);
        if constexpr (third) {
            const double u3 = pow_term(c * (c - 1.0) * (c - 2.0), base.v, c - 3.0);
            return compose(base, u0, u1, u2, u3);
        } else {
            return compose(base, u0, u1, u2);
        }
    }
    if (base.v <= 0.0)
        throw EvalError("power of a nonpositive base with non-constant exponent", offset);
    // b^e = exp(e*log b)
    const double lb = std::log(base.v);
    J logb;
    if constexpr (third) {
        logb = compose(base, lb, 1.0 / base.v, -1.0 / (base.v * base.v),
                       2.0 / (base.v * base.v * base.v));
        const J prod = expo * logb;
        const double ev = std::exp(prod.v);
        return compose(prod, ev, ev, ev, ev);
    } else {
        logb = compose(base, lb, 1.0 / base.v, -1.0 / (base.v * base.v));
        const J prod = expo * logb;
        const double ev = std::exp(prod.v);
        return compose(prod, ev, ev, ev);
    }
}

template <class J>
J apply_unary(UnaryOp op, const J &f, std::size_t offset) {
    constexpr bool third = requires { f.d3; };
    const double x = f.v;
    double u0, u1, u2, u3;
    switch (op) {
        case UnaryOp::Neg:
            return -f;
        case UnaryOp::Exp:
            u0 = std::exp(x); u1 = u0; u2 = u0; u3 = u0;
            break;
        case UnaryOp::Log:
            if (x <= 0.0) throw EvalError("log of a nonpositive value", offset);
            u0 = std::log(x); u1 = 1.0 / x; u2 = -1.0 / (x * x); u3 = 2.0 / (x * x * x);
            break;
        case UnaryOp::Sin:
            u0 = std::sin(x); u1 = std::cos(x); u2 = -u0; u3 = -u1;
            break;
        case UnaryOp::Cos:
            u0 = std::cos(x); u1 = -std::sin(x); u2 = -u0; u3 = -u1;
            break;
        case UnaryOp::Sinh:
            u0 = std::sinh(x); u1 = std::cosh(x); u2 = u0; u3 = u1;
            break;
        case UnaryOp::Cosh:
            u0 = std::cosh(x); u1 = std::sinh(x); u2 = u0; u3 = u1;
            break;
        case UnaryOp::Tanh: {
            const double s = std::tanh(x);
            const double sech2 = 1.0 - s * s;
            u0 = s; u1 = sech2; u2 = -2.0 * s * sech2; u3 = sech2 * (6.0 * s * s - 2.0);
            break;
        }
        case UnaryOp::Sqrt: {
            if (x <= 0.0)
                throw EvalError("sqrt of a nonpositive value (derivative singular at 0)", offset);
            const double r = std::sqrt(x);
            u0 = r; u1 = 0.5 / r; u2 = -0.25 / (x * r); u3 = 0.375 / (x * x * r);
            break;
        }
        default:
            throw EvalError("unhandled unary operation", offset);
    }
    if constexpr (third)
        return compose(f, u0, u1, u2, u3);
    else
        return compose(f, u0, u1, u2);
}

template <class J>
J eval_node(const std::vector<ExprNode> &nodes, int idx, double t, const Params &params) {
    const ExprNode &n = nodes[static_cast<std::size_t>(idx)];
    J result;
    switch (n.kind) {
        case NodeKind::Constant:
            result = J::constant(n.value);
            break;
        case NodeKind::Variable:
            result = J::variable(t);
            break;
        case NodeKind::Parameter: {
            const auto it = params.find(n.name);
            if (it == params.end())
                throw EvalError("unbound parameter '" + n.name + "'", n.offset);
            result = J::constant(it->second);
            break;
        }
        case NodeKind::Unary:
            result = apply_unary(n.uop, eval_node<J>(nodes, n.child0, t, params), n.offset);
            break;
        case NodeKind::Binary: {
            const J a = eval_node<J>(nodes, n.child0, t, params);
            const J b = eval_node<J>(nodes, n.child1, t, params);
            switch (n.bop) {
                case BinaryOp::Add: result = a + b; break;
                case BinaryOp::Sub: result = a - b; break;
                case BinaryOp::Mul: result = a * b; break;
                case BinaryOp::Div:
                    if (b.v == 0.0) throw EvalError("division by zero", n.offset);
                    result = a / b;
                    break;
                case BinaryOp::Pow:
                    result = apply_pow(a, b, n.offset);
                    break;
            }
            break;
        }
    }
    check_finite(result, n.offset);
    return result;
}

} // namespace

bool ExprAst::same_tree(const ExprAst &other) const {
    if (root_ < 0 || other.root_ < 0) return root_ == other.root_;
    return same_node(nodes_, root_, other.nodes_, other.root_);
}

ExprAst parse(const std::string &source) { return Parser(source).run(); }

std::string print(const ExprAst &expr) {
    if (expr.empty()) return {};
    std::string out;
    print_node(expr.nodes(), expr.root(), 0, out);
    return out;
}

Jet2 eval_d2(const ExprAst &expr, double t, const Params &params) {
    if (expr.empty()) throw EvalError("empty expression", 0);
    return eval_node<Jet2>(expr.nodes(), expr.root(), t, params);
}

Jet3 eval_d3(const ExprAst &expr, double t, const Params &params) {
    if (expr.empty()) throw EvalError("empty expression", 0);
    return eval_node<Jet3>(expr.nodes(), expr.root(), t, params);
}

double eval_value(const ExprAst &expr, double t, const Params &params) {
    return eval_d2(expr, t, params).v;
}

} // namespace bes
