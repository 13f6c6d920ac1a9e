#include "driftmle/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace driftmle {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

const char* func_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::Neg:  return "-";
        case UnaryOp::Sin:  return "sin";
        case UnaryOp::Cos:  return "cos";
        case UnaryOp::Tan:  return "tan";
        case UnaryOp::Atan: return "atan";
        case UnaryOp::Exp:  return "exp";
        case UnaryOp::Ln:   return "ln";
        case UnaryOp::Sqrt: return "sqrt";
        case UnaryOp::Abs:  return "abs";
        case UnaryOp::Tanh: return "tanh";
    }
    return "?";
}

char op_char(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return '+';
        case BinaryOp::Sub: return '-';
        case BinaryOp::Mul: return '*';
        case BinaryOp::Div: return '/';
        case BinaryOp::Pow: return '^';
    }
    return '?';
}

// Both evaluators funnel every operation through apply_unary/apply_binary,
// so they cannot drift apart in arithmetic or in what counts as a domain
// failure. node_text is only called when throwing.
template <class NodeText>
double apply_unary(UnaryOp op, double v, NodeText&& node_text) {
    double r = 0.0;
    switch (op) {
        case UnaryOp::Neg:  r = -v; break;
        case UnaryOp::Sin:  r = std::sin(v); break;
        case UnaryOp::Cos:  r = std::cos(v); break;
        case UnaryOp::Tan:  r = std::tan(v); break;
        case UnaryOp::Atan: r = std::atan(v); break;
        case UnaryOp::Exp:  r = std::exp(v); break;
        case UnaryOp::Ln:
            if (v <= 0.0) throw DomainError("ln of a non-positive value", node_text());
            r = std::log(v);
            break;
        case UnaryOp::Sqrt:
            if (v < 0.0) throw DomainError("sqrt of a negative value", node_text());
            r = std::sqrt(v);
            break;
        case UnaryOp::Abs:  r = std::fabs(v); break;
        case UnaryOp::Tanh: r = std::tanh(v); break;
    }
    if (!std::isfinite(r)) throw DomainError("non-finite value", node_text());
    return r;
}

template <class NodeText>
double apply_binary(BinaryOp op, double l, double r, NodeText&& node_text) {
    double out = 0.0;
    switch (op) {
        case BinaryOp::Add: out = l + r; break;
        case BinaryOp::Sub: out = l - r; break;
        case BinaryOp::Mul: out = l * r; break;
        case BinaryOp::Div:
            if (r == 0.0) throw DomainError("division by zero", node_text());
            out = l / r;
            break;
        case BinaryOp::Pow:
            out = std::pow(l, r);
            if (!std::isfinite(out))
                throw DomainError("power outside its domain", node_text());
            break;
    }
    if (!std::isfinite(out)) throw DomainError("non-finite value", node_text());
    return out;
}

}  // namespace

ExprPtr make_const(double value) {
    return std::make_shared<const Expr>(Expr{Const{value}});
}

ExprPtr make_var() {
    return std::make_shared<const Expr>(Expr{Var{}});
}

ExprPtr make_unary(UnaryOp op, ExprPtr child) {
    // Negated literals are stored as negative constants; with a single
    // representation, render -> parse is the identity on trees.
    if (op == UnaryOp::Neg) {
        if (const Const* c = std::get_if<Const>(&child->node))
            return make_const(-c->value);
    }
    return std::make_shared<const Expr>(Expr{Unary{op, std::move(child)}});
}

ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
    return std::make_shared<const Expr>(Expr{Binary{op, std::move(lhs), std::move(rhs)}});
}

bool depends_on_x(const Expr& e) {
    return std::visit(
        overloaded{
            [](const Const&) { return false; },
            [](const Var&) { return true; },
            [](const Unary& u) { return depends_on_x(*u.child); },
            [](const Binary& b) { return depends_on_x(*b.lhs) || depends_on_x(*b.rhs); },
        },
        e.node);
}

// ---------------- rendering ----------------

namespace {

// 5 self-delimiting atom, 4 '^', 3 unary minus and negative literals,
// 2 '*' '/', 1 '+' '-'.
int precedence(const Expr& e) {
    return std::visit(
        overloaded{
            [](const Const& c) { return std::signbit(c.value) ? 3 : 5; },
            [](const Var&) { return 5; },
            [](const Unary& u) { return u.op == UnaryOp::Neg ? 3 : 5; },
            [](const Binary& b) {
                switch (b.op) {
                    case BinaryOp::Add:
                    case BinaryOp::Sub: return 1;
                    case BinaryOp::Mul:
                    case BinaryOp::Div: return 2;
                    case BinaryOp::Pow: return 4;
                }
                return 0;
            },
        },
        e.node);
}

void render_to(const Expr& e, std::string& out);

void render_child(const Expr& child, std::string& out, bool parens) {
    if (parens) {
        out += '(';
        render_to(child, out);
        out += ')';
    } else {
        render_to(child, out);
    }
}

void render_to(const Expr& e, std::string& out) {
    std::visit(
        overloaded{
            [&](const Const& c) {
                std::array<char, 32> buf;
                auto res = std::to_chars(buf.data(), buf.data() + buf.size(), c.value);
                out.append(buf.data(), res.ptr);
            },
            [&](const Var&) { out += 'x'; },
            [&](const Unary& u) {
                if (u.op == UnaryOp::Neg) {
                    out += '-';
                    render_child(*u.child, out, precedence(*u.child) < 4);
                } else {
                    out += func_name(u.op);
                    out += '(';
                    render_to(*u.child, out);
                    out += ')';
                }
            },
            [&](const Binary& b) {
                if (b.op == BinaryOp::Pow) {
                    // '^' operands must re-read as atoms.
                    render_child(*b.lhs, out, precedence(*b.lhs) < 5);
                    out += '^';
                    render_child(*b.rhs, out, precedence(*b.rhs) < 5);
                    return;
                }
                int p = precedence(e);
                render_child(*b.lhs, out, precedence(*b.lhs) < p);
                out += op_char(b.op);
                render_child(*b.rhs, out, precedence(*b.rhs) <= p);
            },
        },
        e.node);
}

}  // namespace

std::string render(const Expr& e) {
    std::string out;
    render_to(e, out);
    return out;
}

// ---------------- evaluation ----------------

double evaluate(const Expr& e, double x) {
    return std::visit(
        overloaded{
            [&](const Const& c) { return c.value; },
            [&](const Var&) { return x; },
            [&](const Unary& u) {
                double v = evaluate(*u.child, x);
                return apply_unary(u.op, v, [&] { return render(e); });
            },
            [&](const Binary& b) {
                double l = evaluate(*b.lhs, x);
                double r = evaluate(*b.rhs, x);
                return apply_binary(b.op, l, r, [&] { return render(e); });
            },
        },
        e.node);
}

// ---------------- parsing ----------------

namespace {

enum class TokKind : std::uint8_t {
    Num, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End
};

struct Token {
    TokKind kind = TokKind::End;
    std::size_t offset = 0;
    std::string_view text;
    double value = 0.0;  // Num only
};

struct FuncEntry {
    std::string_view name;
    UnaryOp op;
};

constexpr FuncEntry kFuncs[] = {
    {"sin", UnaryOp::Sin},   {"cos", UnaryOp::Cos},   {"tan", UnaryOp::Tan},
    {"atan", UnaryOp::Atan}, {"exp", UnaryOp::Exp},   {"ln", UnaryOp::Ln},
    {"sqrt", UnaryOp::Sqrt}, {"abs", UnaryOp::Abs},   {"tanh", UnaryOp::Tanh},
};

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) { next_token(); }

    ExprPtr parse() {
        ExprPtr e = parse_sum();
        if (tok_.kind != TokKind::End)
            throw SyntaxError(tok_.offset, {"operator", "end of input"},
                              "unexpected trailing input");
        return e;
    }

private:
    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_ident_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

    void next_token() {
        while (pos_ < text_.size() &&
               (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
                text_[pos_] == '\r'))
            ++pos_;
        tok_.offset = pos_;
        if (pos_ >= text_.size()) {
            tok_.kind = TokKind::End;
            tok_.text = {};
            return;
        }
        char c = text_[pos_];
        switch (c) {
            case '+': single(TokKind::Plus); return;
            case '-': single(TokKind::Minus); return;
            case '*': single(TokKind::Star); return;
            case '/': single(TokKind::Slash); return;
            case '^': single(TokKind::Caret); return;
            case '(': single(TokKind::LParen); return;
            case ')': single(TokKind::RParen); return;
            default: break;
        }
        if (is_digit(c) || (c == '.' && pos_ + 1 < text_.size() && is_digit(text_[pos_ + 1]))) {
            lex_number();
            return;
        }
        if (is_ident_start(c)) {
            std::size_t start = pos_;
            while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
            tok_.kind = TokKind::Ident;
            tok_.text = text_.substr(start, pos_ - start);
            return;
        }
        throw SyntaxError(pos_, {}, std::string("unexpected character '") + c + "'");
    }

    void single(TokKind k) {
        tok_.kind = k;
        tok_.text = text_.substr(pos_, 1);
        ++pos_;
    }

    void lex_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && is_digit(text_[pos_])) {
                while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
            } else {
                pos_ = mark;  // bare 'e' is the named constant, not an exponent
            }
        }
        std::string_view span = text_.substr(start, pos_ - start);
        double value = 0.0;
        auto res = std::from_chars(span.data(), span.data() + span.size(), value);
        if (res.ec != std::errc() || res.ptr != span.data() + span.size())
            throw SyntaxError(start, {"number"}, "invalid numeric literal");
        tok_.kind = TokKind::Num;
        tok_.text = span;
        tok_.value = value;
    }

    bool accept(TokKind k) {
        if (tok_.kind != k) return false;
        next_token();
        return true;
    }

    void expect(TokKind k, const char* what) {
        if (tok_.kind != k)
            throw SyntaxError(tok_.offset, {what},
                              tok_.kind == TokKind::End ? "unexpected end of input"
                                                        : "unexpected token");
        next_token();
    }

    ExprPtr parse_sum() {
        ExprPtr lhs = parse_term();
        for (;;) {
            if (accept(TokKind::Plus))
                lhs = make_binary(BinaryOp::Add, lhs, parse_term());
            else if (accept(TokKind::Minus))
                lhs = make_binary(BinaryOp::Sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    ExprPtr parse_term() {
        ExprPtr lhs = parse_factor();
        for (;;) {
            if (accept(TokKind::Star))
                lhs = make_binary(BinaryOp::Mul, lhs, parse_factor());
            else if (accept(TokKind::Slash))
                lhs = make_binary(BinaryOp::Div, lhs, parse_factor());
            else
                return lhs;
        }
    }

    ExprPtr parse_factor() {
        if (accept(TokKind::Minus)) return make_unary(UnaryOp::Neg, parse_power());
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr lhs = parse_atom();
        if (tok_.kind != TokKind::Caret) return lhs;
        std::size_t caret = tok_.offset;
        next_token();
        ExprPtr rhs = parse_power();  // right-associative
        if (depends_on_x(*rhs))
            throw SyntaxError(caret, {"constant expression"},
                              "exponent must not depend on x");
        return make_binary(BinaryOp::Pow, lhs, rhs);
    }

    ExprPtr parse_atom() {
        switch (tok_.kind) {
            case TokKind::Num: {
                double v = tok_.value;
                next_token();
                return make_const(v);
            }
            case TokKind::Ident: {
                std::string_view name = tok_.text;
                std::size_t off = tok_.offset;
                next_token();
                if (name == "x") return make_var();
                if (name == "pi") return make_const(std::numbers::pi);
                if (name == "e") return make_const(std::numbers::e);
                for (const FuncEntry& f : kFuncs) {
                    if (name == f.name) {
                        expect(TokKind::LParen, "'('");
                        ExprPtr arg = parse_sum();
                        expect(TokKind::RParen, "')'");
                        return make_unary(f.op, arg);
                    }
                }
                throw UnknownIdentifier(std::string(name), off);
            }
            case TokKind::LParen: {
                next_token();
                ExprPtr e = parse_sum();
                expect(TokKind::RParen, "')'");
                return e;
            }
            default:
                throw SyntaxError(tok_.offset, {"number", "identifier", "'('"},
                                  tok_.kind == TokKind::End ? "unexpected end of input"
                                                            : "unexpected token");
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    Token tok_;
};

}  // namespace

ExprPtr parse_expression(std::string_view text) {
    return Parser(text).parse();
}

// ---------------- differentiation ----------------

namespace {

bool is_const_value(const ExprPtr& e, double v) {
    const Const* c = std::get_if<Const>(&e->node);
    return c != nullptr && c->value == v;
}

// Bottom-up constant folding plus the cheap identities. Folding is
// best-effort: anything that would raise a domain error stays symbolic.
ExprPtr fold(const ExprPtr& e) {
    return std::visit(
        overloaded{
            [&](const Const&) { return e; },
            [&](const Var&) { return e; },
            [&](const Unary& u) {
                ExprPtr c = fold(u.child);
                if (const Const* k = std::get_if<Const>(&c->node)) {
                    try {
                        return make_const(
                            apply_unary(u.op, k->value, [] { return std::string("fold"); }));
                    } catch (const DomainError&) {
                    }
                }
                if (u.op == UnaryOp::Neg) {
                    if (const Unary* inner = std::get_if<Unary>(&c->node);
                        inner && inner->op == UnaryOp::Neg)
                        return inner->child;
                }
                return make_unary(u.op, c);
            },
            [&](const Binary& b) {
                ExprPtr l = fold(b.lhs);
                ExprPtr r = fold(b.rhs);
                if (std::get_if<Const>(&l->node) && std::get_if<Const>(&r->node)) {
                    try {
                        return make_const(apply_binary(
                            b.op, std::get<Const>(l->node).value,
                            std::get<Const>(r->node).value,
                            [] { return std::string("fold"); }));
                    } catch (const DomainError&) {
                    }
                }
                switch (b.op) {
                    case BinaryOp::Add:
                        if (is_const_value(l, 0.0)) return r;
                        if (is_const_value(r, 0.0)) return l;
                        break;
                    case BinaryOp::Sub:
                        if (is_const_value(r, 0.0)) return l;
                        if (is_const_value(l, 0.0)) return make_unary(UnaryOp::Neg, r);
                        break;
                    case BinaryOp::Mul:
                        if (is_const_value(l, 0.0) || is_const_value(r, 0.0))
                            return make_const(0.0);
                        if (is_const_value(l, 1.0)) return r;
                        if (is_const_value(r, 1.0)) return l;
                        break;
                    case BinaryOp::Div:
                        if (is_const_value(r, 1.0)) return l;
                        break;
                    case BinaryOp::Pow:
                        if (is_const_value(r, 1.0)) return l;
                        if (is_const_value(r, 0.0)) return make_const(1.0);
                        break;
                }
                return make_binary(b.op, l, r);
            },
        },
        e->node);
}

ExprPtr deriv(const Expr& e) {
    return std::visit(
        overloaded{
            [](const Const&) { return make_const(0.0); },
            [](const Var&) { return make_const(1.0); },
            [](const Unary& u) {
                ExprPtr du = deriv(*u.child);
                const ExprPtr& v = u.child;
                switch (u.op) {
                    case UnaryOp::Neg:
                        return make_unary(UnaryOp::Neg, du);
                    case UnaryOp::Sin:
                        return make_binary(BinaryOp::Mul, make_unary(UnaryOp::Cos, v), du);
                    case UnaryOp::Cos:
                        return make_binary(
                            BinaryOp::Mul,
                            make_unary(UnaryOp::Neg, make_unary(UnaryOp::Sin, v)), du);
                    case UnaryOp::Tan:
                        return make_binary(
                            BinaryOp::Div, du,
                            make_binary(BinaryOp::Pow, make_unary(UnaryOp::Cos, v),
                                        make_const(2.0)));
                    case UnaryOp::Atan:
                        return make_binary(
                            BinaryOp::Div, du,
                            make_binary(BinaryOp::Add, make_const(1.0),
                                        make_binary(BinaryOp::Pow, v, make_const(2.0))));
                    case UnaryOp::Exp:
                        return make_binary(BinaryOp::Mul, make_unary(UnaryOp::Exp, v), du);
                    case UnaryOp::Ln:
                        return make_binary(BinaryOp::Div, du, v);
                    case UnaryOp::Sqrt:
                        return make_binary(
                            BinaryOp::Div, du,
                            make_binary(BinaryOp::Mul, make_const(2.0),
                                        make_unary(UnaryOp::Sqrt, v)));
                    case UnaryOp::Abs:
                        // d|v| = v/|v| * v'; undefined at v = 0, as it should be
                        return make_binary(
                            BinaryOp::Mul,
                            make_binary(BinaryOp::Div, v, make_unary(UnaryOp::Abs, v)), du);
                    case UnaryOp::Tanh:
                        return make_binary(
                            BinaryOp::Mul,
                            make_binary(BinaryOp::Sub, make_const(1.0),
                                        make_binary(BinaryOp::Pow,
                                                    make_unary(UnaryOp::Tanh, v),
                                                    make_const(2.0))),
                            du);
                }
                return make_const(0.0);
            },
            [](const Binary& b) {
                switch (b.op) {
                    case BinaryOp::Add:
                        return make_binary(BinaryOp::Add, deriv(*b.lhs), deriv(*b.rhs));
                    case BinaryOp::Sub:
                        return make_binary(BinaryOp::Sub, deriv(*b.lhs), deriv(*b.rhs));
                    case BinaryOp::Mul:
                        return make_binary(
                            BinaryOp::Add,
                            make_binary(BinaryOp::Mul, deriv(*b.lhs), b.rhs),
                            make_binary(BinaryOp::Mul, b.lhs, deriv(*b.rhs)));
                    case BinaryOp::Div:
                        return make_binary(
                            BinaryOp::Div,
                            make_binary(
                                BinaryOp::Sub,
                                make_binary(BinaryOp::Mul, deriv(*b.lhs), b.rhs),
                                make_binary(BinaryOp::Mul, b.lhs, deriv(*b.rhs))),
                            make_binary(BinaryOp::Pow, b.rhs, make_const(2.0)));
                    case BinaryOp::Pow: {
                        // exponent is x-free by construction: (u^k)' = k u^(k-1) u'
                        double k = evaluate(*b.rhs, 0.0);
                        return make_binary(
                            BinaryOp::Mul,
                            make_binary(
                                BinaryOp::Mul, make_const(k),
                                make_binary(BinaryOp::Pow, b.lhs, make_const(k - 1.0))),
                            deriv(*b.lhs));
                    }
                }
                return make_const(0.0);
            },
        },
        e.node);
}

}  // namespace

ExprPtr differentiate(const Expr& e) {
    return fold(deriv(e));
}

// ---------------- compiled form ----------------

CompiledExpr::CompiledExpr(const ExprPtr& tree) : tree_(tree) {
    emit(tree);
    std::size_t depth = 0;
    for (const Instr& ins : code_) {
        switch (ins.op) {
            case Op::PushConst:
            case Op::PushX:
                stack_need_ = std::max(stack_need_, ++depth);
                break;
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::Div:
            case Op::Pow:
                --depth;
                break;
            default:
                break;  // unary: depth unchanged
        }
    }
}

void CompiledExpr::emit(const ExprPtr& e) {
    std::visit(
        overloaded{
            [&](const Const& c) {
                code_.push_back({Op::PushConst, c.value, 0});
            },
            [&](const Var&) { code_.push_back({Op::PushX, 0.0, 0}); },
            [&](const Unary& u) {
                emit(u.child);
                Op op = Op::Neg;
                switch (u.op) {
                    case UnaryOp::Neg:  op = Op::Neg; break;
                    case UnaryOp::Sin:  op = Op::Sin; break;
                    case UnaryOp::Cos:  op = Op::Cos; break;
                    case UnaryOp::Tan:  op = Op::Tan; break;
                    case UnaryOp::Atan: op = Op::Atan; break;
                    case UnaryOp::Exp:  op = Op::Exp; break;
                    case UnaryOp::Ln:   op = Op::Ln; break;
                    case UnaryOp::Sqrt: op = Op::Sqrt; break;
                    case UnaryOp::Abs:  op = Op::Abs; break;
                    case UnaryOp::Tanh: op = Op::Tanh; break;
                }
                node_text_.push_back(render(*e));
                code_.push_back({op, 0.0, static_cast<std::uint32_t>(node_text_.size() - 1)});
            },
            [&](const Binary& b) {
                emit(b.lhs);
                emit(b.rhs);
                Op op = Op::Add;
                switch (b.op) {
                    case BinaryOp::Add: op = Op::Add; break;
                    case BinaryOp::Sub: op = Op::Sub; break;
                    case BinaryOp::Mul: op = Op::Mul; break;
                    case BinaryOp::Div: op = Op::Div; break;
                    case BinaryOp::Pow: op = Op::Pow; break;
                }
                node_text_.push_back(render(*e));
                code_.push_back({op, 0.0, static_cast<std::uint32_t>(node_text_.size() - 1)});
            },
        },
        e->node);
}

double CompiledExpr::operator()(double x) const {
    // Expressions in practice are a handful of nodes deep; fall back to the
    // heap only for pathological inputs.
    constexpr std::size_t kLocal = 48;
    if (stack_need_ <= kLocal) {
        double stack[kLocal];
        return run(x, stack);
    }
    std::vector<double> stack(stack_need_);
    return run(x, stack.data());
}

double CompiledExpr::run(double x, double* st) const {
    std::size_t sp = 0;
    for (const Instr& ins : code_) {
        switch (ins.op) {
            case Op::PushConst: st[sp++] = ins.imm; break;
            case Op::PushX:     st[sp++] = x; break;
            case Op::Neg:
                st[sp - 1] = apply_unary(UnaryOp::Neg, st[sp - 1],
                                         [&] { return node_text_[ins.node]; });
                break;
            case Op::Sin:
                st[sp - 1] = apply_unary(UnaryOp::Sin, st[sp - 1],
                                         [&] { return node_text_[ins.node]; });
                break;
            case Op::Cos:
                st[sp - 1] = apply_unary(UnaryOp::Cos, st[sp - 1],
                                         [&] { return node_text_[ins.node]; });
                break;
            case Op::Tan:
                st[sp - 1] = apply_unary(UnaryOp::Tan, st[sp - 1],
                                         [&] { return node_text_[ins.node]; });
                break;
            case Op::Atan:
                st[sp - 1] = apply_unary(UnaryOp::Atan, st[sp - 1],
                                         [&] { return node_text_[ins.node]; });
                break;
            case Op::Exp:
                st[sp - 1] = apply_unary(UnaryOp::Exp, st[sp - 1],
                                         [&] { return node_text_[ins.node]; });
                break;
            case Op::Ln:
                st[sp - 1] = apply_unary(UnaryOp::Ln, st[sp - 1],
                                         [&] { return node_text_[ins.node]; });
                break;
            case Op::Sqrt:
                st[sp - 1] = apply_unary(UnaryOp::Sqrt, st[sp - 1],
                                         [&] { return node_text_[ins.node]; });
                break;
            case Op::Abs:
                st[sp - 1] = apply_unary(UnaryOp::Abs, st[sp - 1],
                                         [&] { return node_text_[ins.node]; });
                break;
            case Op::Tanh:
                st[sp - 1] = apply_unary(UnaryOp::Tanh, st[sp - 1],
                                         [&] { return node_text_[ins.node]; });
                break;
            case Op::Add:
                --sp;
                st[sp - 1] = apply_binary(BinaryOp::Add, st[sp - 1], st[sp],
                                          [&] { return node_text_[ins.node]; });
                break;
            case Op::Sub:
                --sp;
                st[sp - 1] = apply_binary(BinaryOp::Sub, st[sp - 1], st[sp],
                                          [&] { return node_text_[ins.node]; });
                break;
            case Op::Mul:
                --sp;
                st[sp - 1] = apply_binary(BinaryOp::Mul, st[sp - 1], st[sp],
                                          [&] { return node_text_[ins.node]; });
                break;
            case Op::Div:
                --sp;
                st[sp - 1] = apply_binary(BinaryOp::Div, st[sp - 1], st[sp],
                                          [&] { return node_text_[ins.node]; });
                break;
            case Op::Pow:
                --sp;
                st[sp - 1] = apply_binary(BinaryOp::Pow, st[sp - 1], st[sp],
                                          [&] { return node_text_[ins.node]; });
                break;
        }
    }
    return st[0];
}

}  // namespace driftmle
