#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "driftmle/errors.hpp"

namespace driftmle {

// Closed-form functions of one variable, built from
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-'? power
//   power  := atom ('^' power)?          right-associative
//   atom   := number | 'x' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//   func   := sin cos tan atan exp ln sqrt abs tanh
//
// with the extra rule that a '^' exponent must not contain x.

enum class UnaryOp : std::uint8_t { Neg, Sin, Cos, Tan, Atan, Exp, Ln, Sqrt, Abs, Tanh };
enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Pow };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Const {
    double value;
};
struct Var {};  // the single free variable x
struct Unary {
    UnaryOp op;
    ExprPtr child;
};
struct Binary {
    BinaryOp op;
    ExprPtr lhs;
    ExprPtr rhs;
};

struct Expr {
    std::variant<Const, Var, Unary, Binary> node;
};

ExprPtr make_const(double value);
ExprPtr make_var();
ExprPtr make_unary(UnaryOp op, ExprPtr child);
ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);

// Throws SyntaxError or UnknownIdentifier. Never folds constants: "1+2"
// parses to Binary(Add, Const 1, Const 2).
ExprPtr parse_expression(std::string_view text);

// Throws DomainError naming the offending subexpression when evaluation
// leaves an operation's domain or produces a non-finite value.
double evaluate(const Expr& e, double x);
inline double evaluate(const ExprPtr& e, double x) { return evaluate(*e, x); }

// Exact symbolic derivative followed by best-effort constant folding.
ExprPtr differentiate(const Expr& e);
inline ExprPtr differentiate(const ExprPtr& e) { return differentiate(*e); }

// Minimal-parenthesis text that reparses to the same tree.
std::string render(const Expr& e);
inline std::string render(const ExprPtr& e) { return render(*e); }

bool depends_on_x(const Expr& e);
inline bool depends_on_x(const ExprPtr& e) { return depends_on_x(*e); }

// The tree evaluator chases pointers; per-step simulation cannot afford
// that. CompiledExpr runs the same operations in the same order on a flat
// postfix program, so results and failure points are bit-identical to
// evaluate(). Instances are immutable after construction and safe to share
// across threads, apart from the scratch stack, which lives per call.
class CompiledExpr {
public:
    CompiledExpr() = default;
    explicit CompiledExpr(const ExprPtr& tree);

    double operator()(double x) const;

    const ExprPtr& tree() const { return tree_; }

private:
    enum class Op : std::uint8_t {
        PushConst, PushX,
        Neg, Sin, Cos, Tan, Atan, Exp, Ln, Sqrt, Abs, Tanh,
        Add, Sub, Mul, Div, Pow,
    };
    struct Instr {
        Op op;
        double imm;        // PushConst only
        std::uint32_t node;  // index into node_text_ for error reporting
    };

    void emit(const ExprPtr& e);
    double run(double x, double* stack) const;

    std::vector<Instr> code_;
    std::vector<std::string> node_text_;
    std::size_t stack_need_ = 0;
    ExprPtr tree_;
};

}  // namespace driftmle
