#pragma once

// Closed-form scalar expressions in chart variables u, v. Source strings come
// from config files; parsing is precedence-climbing (Pratt) with '^'
// right-associative and binding tighter than unary minus, so "-u^2" is -(u^2).
// Evaluation never lets a NaN/Inf escape: every domain violation is reported
// as an EvalError naming the offending function and the point.

#include <array>
#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "folmod/common.hpp"

namespace folmod {

// C^inf cutoff: 1 on |x| <= r_in, 0 on |x| >= r_out, monotone in between.
// Built from the classic exp(-1/s) blend, so all derivatives vanish at both
// ends of the transition.
inline double bump_cutoff(double x, double r_in, double r_out) {
    if (!(r_in >= 0.0) || !(r_out > r_in))
        throw EvalError("bump: radii must satisfy 0 <= r_in < r_out");
    const double ax = std::abs(x);
    if (ax <= r_in) return 1.0;
    if (ax >= r_out) return 0.0;
    const double s = (r_out - ax) / (r_out - r_in);  // in (0,1)
    const double a = std::exp(-1.0 / s);
    const double b = std::exp(-1.0 / (1.0 - s));
    return a / (a + b);
}

namespace detail {

enum class AstKind {
    Number,
    VarU,
    VarV,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Call,
};

struct AstNode;
using AstPtr = std::shared_ptr<const AstNode>;

struct AstNode {
    AstKind kind = AstKind::Number;
    double number = 0.0;
    std::string func;  // for Call
    std::vector<AstPtr> args;
};

struct FunctionInfo {
    const char* name;
    int arity;
};

inline const FunctionInfo* lookup_function(const std::string& name) {
    static const std::array<FunctionInfo, 10> table = {{
        {"sin", 1},
        {"cos", 1},
        {"tan", 1},
        {"exp", 1},
        {"log", 1},
        {"sqrt", 1},
        {"abs", 1},
        {"min", 2},
        {"max", 2},
        {"bump", 3},
    }};
    for (const auto& f : table)
        if (name == f.name) return &f;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class TokKind { Number, Ident, Op, LParen, RParen, Comma, End };

struct Token {
    TokKind kind = TokKind::End;
    double number = 0.0;
    std::string text;
    std::size_t offset = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    Token next() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        Token tok;
        tok.offset = pos_;
        if (pos_ >= src_.size()) return tok;
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
            std::size_t end = 0;
            double value = 0.0;
            try {
                value = std::stod(src_.substr(pos_), &end);
            } catch (const std::exception&) {
                throw ParseError("malformed number", pos_);
            }
            tok.kind = TokKind::Number;
            tok.number = value;
            tok.text = src_.substr(pos_, end);
            pos_ += end;
            return tok;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            tok.kind = TokKind::Ident;
            tok.text = src_.substr(start, pos_ - start);
            return tok;
        }
        ++pos_;
        switch (c) {
            case '(': tok.kind = TokKind::LParen; return tok;
            case ')': tok.kind = TokKind::RParen; return tok;
            case ',': tok.kind = TokKind::Comma; return tok;
            case '+':
            case '-':
            case '*':
            case '/':
            case '^':
                tok.kind = TokKind::Op;
                tok.text = std::string(1, c);
                return tok;
            default:
                throw ParseError(std::string("unexpected character '") + c + "'", tok.offset);
        }
    }

private:
    const std::string& src_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Pratt parser. Binding powers: +,- = 10; *,/ = 20; unary - = 25; ^ = 30
// (right-associative, so the right operand is parsed with power 29).
// ---------------------------------------------------------------------------

class Parser {
public:
    explicit Parser(const std::string& src) : lexer_(src) { advance(); }

    AstPtr parse() {
        AstPtr e = parse_expr(0);
        if (cur_.kind != TokKind::End)
            throw ParseError("unexpected trailing input '" + describe(cur_) + "'", cur_.offset);
        return e;
    }

private:
    void advance() { cur_ = lexer_.next(); }

    static std::string describe(const Token& t) {
        switch (t.kind) {
            case TokKind::Number: return t.text;
            case TokKind::Ident: return t.text;
            case TokKind::Op: return t.text;
            case TokKind::LParen: return "(";
            case TokKind::RParen: return ")";
            case TokKind::Comma: return ",";
            case TokKind::End: return "<end>";
        }
        return "?";
    }

    AstPtr parse_expr(int min_bp) {
        AstPtr lhs = parse_prefix();
        for (;;) {
            if (cur_.kind != TokKind::Op) break;
            const std::string op = cur_.text;
            int lbp, rbp;
            if (op == "+" || op == "-") {
                lbp = 10;
                rbp = 11;
            } else if (op == "*" || op == "/") {
                lbp = 20;
                rbp = 21;
            } else {  // ^ right-assoc
                lbp = 30;
                rbp = 29;
            }
            if (lbp <= min_bp) break;
            advance();
            AstPtr rhs = parse_expr(rbp);
            auto node = std::make_shared<AstNode>();
            node->kind = op == "+"   ? AstKind::Add
                         : op == "-" ? AstKind::Sub
                         : op == "*" ? AstKind::Mul
                         : op == "/" ? AstKind::Div
                                     : AstKind::Pow;
            node->args = {lhs, rhs};
            lhs = node;
        }
        return lhs;
    }

    AstPtr parse_prefix() {
        if (cur_.kind == TokKind::Op && cur_.text == "-") {
            advance();
            AstPtr operand = parse_expr(25);
            auto node = std::make_shared<AstNode>();
            node->kind = AstKind::Neg;
            node->args = {operand};
            return node;
        }
        if (cur_.kind == TokKind::Op && cur_.text == "+") {
            advance();
            return parse_expr(25);
        }
        if (cur_.kind == TokKind::Number) {
            auto node = std::make_shared<AstNode>();
            node->kind = AstKind::Number;
            node->number = cur_.number;
            advance();
            return node;
        }
        if (cur_.kind == TokKind::LParen) {
            advance();
            AstPtr inner = parse_expr(0);
            expect_rparen();
            return inner;
        }
        if (cur_.kind == TokKind::Ident) {
            const std::string name = cur_.text;
            const std::size_t off = cur_.offset;
            advance();
            if (cur_.kind == TokKind::LParen) {
                const FunctionInfo* fi = lookup_function(name);
                if (!fi) throw ParseError("unknown function '" + name + "'", off);
                advance();
                std::vector<AstPtr> args;
                if (cur_.kind != TokKind::RParen) {
                    args.push_back(parse_expr(0));
                    while (cur_.kind == TokKind::Comma) {
                        advance();
                        args.push_back(parse_expr(0));
                    }
                }
                if (static_cast<int>(args.size()) != fi->arity)
                    throw ParseError("function '" + name + "' expects " +
                                         std::to_string(fi->arity) + " argument(s), got " +
                                         std::to_string(args.size()),
                                     off);
                expect_rparen();
                auto node = std::make_shared<AstNode>();
                node->kind = AstKind::Call;
                node->func = name;
                node->args = std::move(args);
                return node;
            }
            if (name == "u") return make_var(AstKind::VarU);
            if (name == "v") return make_var(AstKind::VarV);
            if (name == "pi") return make_number(std::numbers::pi);
            throw ParseError("unknown identifier '" + name + "'", off);
        }
        throw ParseError("expected expression, found '" + describe(cur_) + "'", cur_.offset);
    }

    void expect_rparen() {
        if (cur_.kind != TokKind::RParen)
            throw ParseError("expected ')', found '" + describe(cur_) + "'", cur_.offset);
        advance();
    }

    static AstPtr make_var(AstKind k) {
        auto node = std::make_shared<AstNode>();
        node->kind = k;
        return node;
    }

    static AstPtr make_number(double x) {
        auto node = std::make_shared<AstNode>();
        node->kind = AstKind::Number;
        node->number = x;
        return node;
    }

    Lexer lexer_;
    Token cur_;
};

// ---------------------------------------------------------------------------
// Tape compilation: flat postfix program evaluated on a value stack.
// ---------------------------------------------------------------------------

enum class OpCode : std::uint8_t {
    PushNumber,
    PushU,
    PushV,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
    Bump,
};

struct TapeOp {
    OpCode code;
    double imm = 0.0;
};

inline void compile_ast(const AstPtr& node, std::vector<TapeOp>& tape) {
    switch (node->kind) {
        case AstKind::Number: tape.push_back({OpCode::PushNumber, node->number}); return;
        case AstKind::VarU: tape.push_back({OpCode::PushU}); return;
        case AstKind::VarV: tape.push_back({OpCode::PushV}); return;
        case AstKind::Neg:
            compile_ast(node->args[0], tape);
            tape.push_back({OpCode::Neg});
            return;
        case AstKind::Add:
        case AstKind::Sub:
        case AstKind::Mul:
        case AstKind::Div:
        case AstKind::Pow: {
            compile_ast(node->args[0], tape);
            compile_ast(node->args[1], tape);
            OpCode code = node->kind == AstKind::Add   ? OpCode::Add
                          : node->kind == AstKind::Sub ? OpCode::Sub
                          : node->kind == AstKind::Mul ? OpCode::Mul
                          : node->kind == AstKind::Div ? OpCode::Div
                                                       : OpCode::Pow;
            tape.push_back({code});
            return;
        }
        case AstKind::Call: {
            for (const auto& a : node->args) compile_ast(a, tape);
            OpCode code;
            if (node->func == "sin")
                code = OpCode::Sin;
            else if (node->func == "cos")
                code = OpCode::Cos;
            else if (node->func == "tan")
                code = OpCode::Tan;
            else if (node->func == "exp")
                code = OpCode::Exp;
            else if (node->func == "log")
                code = OpCode::Log;
            else if (node->func == "sqrt")
                code = OpCode::Sqrt;
            else if (node->func == "abs")
                code = OpCode::Abs;
            else if (node->func == "min")
                code = OpCode::Min;
            else if (node->func == "max")
                code = OpCode::Max;
            else
                code = OpCode::Bump;
            tape.push_back({code});
            return;
        }
    }
}

[[noreturn]] inline void eval_fail(const char* what, double u, double v) {
    throw EvalError(std::string(what) + " at (u,v)=(" + format_double(u) + ", " +
                    format_double(v) + ")");
}

inline double eval_tape(const std::vector<TapeOp>& tape, double u, double v) {
    std::array<double, 64> stack;
    std::size_t top = 0;
    auto push = [&](double x) {
        if (top >= stack.size()) throw EvalError("expression too deep");
        stack[top++] = x;
    };
    for (const TapeOp& op : tape) {
        switch (op.code) {
            case OpCode::PushNumber: push(op.imm); break;
            case OpCode::PushU: push(u); break;
            case OpCode::PushV: push(v); break;
            case OpCode::Neg: stack[top - 1] = -stack[top - 1]; break;
            case OpCode::Add: {
                --top;
                stack[top - 1] += stack[top];
                break;
            }
            case OpCode::Sub: {
                --top;
                stack[top - 1] -= stack[top];
                break;
            }
            case OpCode::Mul: {
                --top;
                stack[top - 1] *= stack[top];
                break;
            }
            case OpCode::Div: {
                --top;
                if (stack[top] == 0.0) eval_fail("division by zero", u, v);
                stack[top - 1] /= stack[top];
                break;
            }
            case OpCode::Pow: {
                --top;
                const double r = std::pow(stack[top - 1], stack[top]);
                if (!std::isfinite(r)) eval_fail("pow out of domain", u, v);
                stack[top - 1] = r;
                break;
            }
            case OpCode::Sin: stack[top - 1] = std::sin(stack[top - 1]); break;
            case OpCode::Cos: stack[top - 1] = std::cos(stack[top - 1]); break;
            case OpCode::Tan: {
                const double r = std::tan(stack[top - 1]);
                if (!std::isfinite(r)) eval_fail("tan out of domain", u, v);
                stack[top - 1] = r;
                break;
            }
            case OpCode::Exp: {
                const double r = std::exp(stack[top - 1]);
                if (!std::isfinite(r)) eval_fail("exp overflow", u, v);
                stack[top - 1] = r;
                break;
            }
            case OpCode::Log: {
                if (!(stack[top - 1] > 0.0)) eval_fail("log of non-positive value", u, v);
                stack[top - 1] = std::log(stack[top - 1]);
                break;
            }
            case OpCode::Sqrt: {
                if (stack[top - 1] < 0.0) eval_fail("sqrt of negative value", u, v);
                stack[top - 1] = std::sqrt(stack[top - 1]);
                break;
            }
            case OpCode::Abs: stack[top - 1] = std::abs(stack[top - 1]); break;
            case OpCode::Min: {
                --top;
                stack[top - 1] = std::min(stack[top - 1], stack[top]);
                break;
            }
            case OpCode::Max: {
                --top;
                stack[top - 1] = std::max(stack[top - 1], stack[top]);
                break;
            }
            case OpCode::Bump: {
                top -= 2;
                stack[top - 1] = bump_cutoff(stack[top - 1], stack[top], stack[top + 1]);
                break;
            }
        }
        if (!std::isfinite(stack[top - 1])) eval_fail("non-finite intermediate value", u, v);
    }
    if (top != 1) throw EvalError("corrupt expression tape");
    return stack[0];
}

// Minimal-parenthesis printer; the parse(print(e)) round trip is covered by a
// property test.
inline int node_precedence(const AstNode& n) {
    switch (n.kind) {
        case AstKind::Add:
        case AstKind::Sub: return 10;
        case AstKind::Mul:
        case AstKind::Div: return 20;
        case AstKind::Neg: return 25;
        case AstKind::Pow: return 30;
        default: return 100;
    }
}

inline void print_ast(const AstPtr& node, std::string& out) {
    auto child = [&](const AstPtr& c, int parent_prec, bool needs_higher) {
        const int cp = node_precedence(*c);
        const bool paren = needs_higher ? cp <= parent_prec : cp < parent_prec;
        if (paren) out += '(';
        print_ast(c, out);
        if (paren) out += ')';
    };
    switch (node->kind) {
        case AstKind::Number: {
            if (node->number < 0) {
                out += '(' + format_double(node->number) + ')';
            } else {
                out += format_double(node->number);
            }
            return;
        }
        case AstKind::VarU: out += 'u'; return;
        case AstKind::VarV: out += 'v'; return;
        case AstKind::Add:
            child(node->args[0], 10, false);
            out += " + ";
            child(node->args[1], 10, true);
            return;
        case AstKind::Sub:
            child(node->args[0], 10, false);
            out += " - ";
            child(node->args[1], 10, true);
            return;
        case AstKind::Mul:
            child(node->args[0], 20, false);
            out += "*";
            child(node->args[1], 20, true);
            return;
        case AstKind::Div:
            child(node->args[0], 20, false);
            out += "/";
            child(node->args[1], 20, true);
            return;
        case AstKind::Pow:
            // '^' binds tighter than unary minus, so a Neg base must be
            // parenthesized; the right side is the right-assoc slot.
            child(node->args[0], 30, true);
            out += "^";
            child(node->args[1], 29, false);
            return;
        case AstKind::Neg:
            out += "-";
            child(node->args[0], 25, true);
            return;
        case AstKind::Call: {
            out += node->func;
            out += '(';
            for (std::size_t i = 0; i < node->args.size(); ++i) {
                if (i) out += ", ";
                print_ast(node->args[i], out);
            }
            out += ')';
            return;
        }
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Expr: immutable, cheap to copy, reentrant evaluation.
// ---------------------------------------------------------------------------

class Expr {
public:
    Expr() = default;

    static Expr parse(const std::string& src) {
        if (src.empty()) throw ParseError("empty expression", 0);
        detail::Parser parser(src);
        Expr e;
        e.ast_ = parser.parse();
        auto tape = std::make_shared<std::vector<detail::TapeOp>>();
        detail::compile_ast(e.ast_, *tape);
        e.tape_ = std::move(tape);
        return e;
    }

    double eval(double u, double v) const {
        if (!tape_) throw EvalError("evaluating empty expression");
        return detail::eval_tape(*tape_, u, v);
    }

    std::string print() const {
        if (!ast_) return "0";
        std::string out;
        detail::print_ast(ast_, out);
        return out;
    }

    bool valid() const { return static_cast<bool>(tape_); }

private:
    detail::AstPtr ast_;
    std::shared_ptr<const std::vector<detail::TapeOp>> tape_;

    friend class ExprBuilder;
};

/// Test support: assemble ASTs directly (used by the round-trip property).
class ExprBuilder {
public:
    static Expr from_ast(detail::AstPtr ast) {
        Expr e;
        e.ast_ = std::move(ast);
        auto tape = std::make_shared<std::vector<detail::TapeOp>>();
        detail::compile_ast(e.ast_, *tape);
        e.tape_ = std::move(tape);
        return e;
    }
};

}  // namespace folmod
