// Expression trees over chart coordinates. The grammar is deliberately small:
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' integer)?
//   atom   := number | 'x'<digits> | func '(' expr ')' | '(' expr ')'
//   func   := sin | cos | exp | sqrt | neg
//
// Whitespace is insignificant; exponents are integer literals. Evaluation is
// templated on the scalar so dual-number jets share the one code path.
#pragma once

#include <cctype>
#include <cstdlib>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pnf/dual.hpp"
#include "pnf/errors.hpp"

namespace pnf {

enum class ExprOp { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Sqrt };

struct ExprNode {
    ExprOp op{ExprOp::Const};
    double value{0.0}; // Const
    int index{-1};     // Var (0-based) / Pow exponent
    int lhs{-1};
    int rhs{-1};
};

class Expr {
public:
    Expr() = default;

    static Expr parse(const std::string& source) {
        Parser p{source, 0};
        Expr e;
        e.source_ = source;
        e.root_ = p.parse_expr(e.nodes_);
        p.skip_ws();
        if (p.pos != source.size())
            throw ParseError("unexpected trailing input", p.pos);
        for (const auto& n : e.nodes_)
            if (n.op == ExprOp::Var && n.index + 1 > e.max_var_)
                e.max_var_ = n.index + 1;
        return e;
    }

    static Expr constant(double v) {
        Expr e;
        e.source_ = std::to_string(v);
        e.nodes_.push_back({ExprOp::Const, v, -1, -1, -1});
        e.root_ = 0;
        return e;
    }

    // Highest coordinate index referenced, 1-based (0 for constants).
    int max_var() const { return max_var_; }
    const std::string& source() const { return source_; }
    bool empty() const { return nodes_.empty(); }

    template <typename T>
    T eval(std::span<const T> x) const {
        return eval_node<T>(root_, x);
    }

    double eval(std::span<const double> x) const { return eval_node<double>(root_, x); }

private:
    template <typename T>
    T eval_node(int id, std::span<const T> x) const {
        const ExprNode& n = nodes_[static_cast<std::size_t>(id)];
        switch (n.op) {
            case ExprOp::Const: return T(n.value);
            case ExprOp::Var:
                if (n.index >= static_cast<int>(x.size()))
                    throw UndefinedExpression("coordinate x" + std::to_string(n.index + 1) +
                                              " not available on this chart");
                return x[static_cast<std::size_t>(n.index)];
            case ExprOp::Add: return eval_node<T>(n.lhs, x) + eval_node<T>(n.rhs, x);
            case ExprOp::Sub: return eval_node<T>(n.lhs, x) - eval_node<T>(n.rhs, x);
            case ExprOp::Mul: return eval_node<T>(n.lhs, x) * eval_node<T>(n.rhs, x);
            case ExprOp::Div: return div_of(eval_node<T>(n.lhs, x), eval_node<T>(n.rhs, x));
            case ExprOp::Pow: return powi(eval_node<T>(n.lhs, x), n.index);
            case ExprOp::Neg: return -eval_node<T>(n.lhs, x);
            case ExprOp::Sin: return sin(eval_node<T>(n.lhs, x));
            case ExprOp::Cos: return cos(eval_node<T>(n.lhs, x));
            case ExprOp::Exp: return exp(eval_node<T>(n.lhs, x));
            case ExprOp::Sqrt: return sqrt_of(eval_node<T>(n.lhs, x));
        }
        throw UndefinedExpression("corrupt expression node");
    }

    static double sqrt_of(double v) { return checked_sqrt(v); }
    template <typename T>
    static Dual<T> sqrt_of(const Dual<T>& v) { return sqrt(v); }

    static double div_of(double a, double b) {
        if (b == 0.0) throw UndefinedExpression("division by zero");
        return a / b;
    }
    template <typename T>
    static Dual<T> div_of(const Dual<T>& a, const Dual<T>& b) { return a / b; }

    struct Parser {
        const std::string& s;
        std::size_t pos;

        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }

        bool eat(char c) {
            skip_ws();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        char peek() {
            skip_ws();
            return pos < s.size() ? s[pos] : '\0';
        }

        int parse_expr(std::vector<ExprNode>& out) {
            int lhs = parse_term(out);
            for (;;) {
                if (eat('+')) {
                    int rhs = parse_term(out);
                    lhs = push(out, {ExprOp::Add, 0, -1, lhs, rhs});
                } else if (eat('-')) {
                    int rhs = parse_term(out);
                    lhs = push(out, {ExprOp::Sub, 0, -1, lhs, rhs});
                } else {
                    return lhs;
                }
            }
        }

        int parse_term(std::vector<ExprNode>& out) {
            int lhs = parse_factor(out);
            for (;;) {
                if (eat('*')) {
                    int rhs = parse_factor(out);
                    lhs = push(out, {ExprOp::Mul, 0, -1, lhs, rhs});
                } else if (eat('/')) {
                    int rhs = parse_factor(out);
                    lhs = push(out, {ExprOp::Div, 0, -1, lhs, rhs});
                } else {
                    return lhs;
                }
            }
        }

        int parse_factor(std::vector<ExprNode>& out) {
            if (eat('-')) {
                int inner = parse_factor(out);
                return push(out, {ExprOp::Neg, 0, -1, inner, -1});
            }
            return parse_power(out);
        }

        int parse_power(std::vector<ExprNode>& out) {
            int base = parse_atom(out);
            if (eat('^')) {
                int expn = parse_int_exponent();
                return push(out, {ExprOp::Pow, 0, expn, base, -1});
            }
            return base;
        }

        int parse_int_exponent() {
            skip_ws();
            std::size_t start = pos;
            bool neg = false;
            if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) {
                neg = s[pos] == '-';
                ++pos;
            }
            if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
                throw ParseError("expected integer exponent after '^'", start);
            long v = 0;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                v = v * 10 + (s[pos] - '0');
                if (v > 64) throw ParseError("exponent too large", start);
                ++pos;
            }
            return static_cast<int>(neg ? -v : v);
        }

        int parse_atom(std::vector<ExprNode>& out) {
            skip_ws();
            if (pos >= s.size()) throw ParseError("unexpected end of expression", pos);
            char c = s[pos];
            if (c == '(') {
                ++pos;
                int inner = parse_expr(out);
                if (!eat(')')) throw ParseError("expected ')'", pos);
                return inner;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
                return parse_number(out);
            if (std::isalpha(static_cast<unsigned char>(c)))
                return parse_ident(out);
            throw ParseError(std::string("unexpected character '") + c + "'", pos);
        }

        int parse_number(std::vector<ExprNode>& out) {
            std::size_t start = pos;
            while (pos < s.size() &&
                   (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.'))
                ++pos;
            if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
                std::size_t mark = pos++;
                if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
                if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
                } else {
                    pos = mark; // not an exponent suffix
                }
            }
            std::string tok = s.substr(start, pos - start);
            char* end = nullptr;
            double v = std::strtod(tok.c_str(), &end);
            if (end != tok.c_str() + tok.size())
                throw ParseError("bad numeric literal '" + tok + "'", start);
            return push(out, {ExprOp::Const, v, -1, -1, -1});
        }

        int parse_ident(std::vector<ExprNode>& out) {
            std::size_t start = pos;
            while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
            std::string name = s.substr(start, pos - start);
            if (name == "x") {
                std::size_t dstart = pos;
                long idx = 0;
                while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                    idx = idx * 10 + (s[pos] - '0');
                    if (idx > 1024) throw ParseError("coordinate index too large", dstart);
                    ++pos;
                }
                if (pos == dstart || idx < 1)
                    throw ParseError("coordinates are x1..xN", start);
                return push(out, {ExprOp::Var, 0, static_cast<int>(idx - 1), -1, -1});
            }
            ExprOp op;
            if (name == "sin") op = ExprOp::Sin;
            else if (name == "cos") op = ExprOp::Cos;
            else if (name == "exp") op = ExprOp::Exp;
            else if (name == "sqrt") op = ExprOp::Sqrt;
            else if (name == "neg") op = ExprOp::Neg;
            else throw ParseError("unknown identifier '" + name + "'", start);
            if (!eat('(')) throw ParseError("expected '(' after '" + name + "'", pos);
            int inner = parse_expr(out);
            if (!eat(')')) throw ParseError("expected ')'", pos);
            return push(out, {op, 0, -1, inner, -1});
        }

        static int push(std::vector<ExprNode>& out, ExprNode n) {
            out.push_back(n);
            return static_cast<int>(out.size() - 1);
        }
    };

    std::vector<ExprNode> nodes_;
    int root_{-1};
    int max_var_{0};
    std::string source_;
};

} // namespace pnf
