#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "driftmle/expr.hpp"

using namespace driftmle;

namespace {

bool same_tree(const Expr& a, const Expr& b) {
    if (a.node.index() != b.node.index()) return false;
    if (const Const* ca = std::get_if<Const>(&a.node)) {
        const Const* cb = std::get_if<Const>(&b.node);
        // 0.0 vs -0.0 render differently, so compare representations
        return ca->value == cb->value &&
               std::signbit(ca->value) == std::signbit(cb->value);
    }
    if (std::get_if<Var>(&a.node)) return true;
    if (const Unary* ua = std::get_if<Unary>(&a.node)) {
        const Unary* ub = std::get_if<Unary>(&b.node);
        return ua->op == ub->op && same_tree(*ua->child, *ub->child);
    }
    const Binary* ba = std::get_if<Binary>(&a.node);
    const Binary* bb = std::get_if<Binary>(&b.node);
    return ba->op == bb->op && same_tree(*ba->lhs, *bb->lhs) &&
           same_tree(*ba->rhs, *bb->rhs);
}

// Random trees for the round-trip property. '^' exponents are built x-free
// to satisfy the grammar.
ExprPtr random_tree(std::mt19937& rng, int depth, bool allow_x) {
    std::uniform_int_distribution<int> leaf_pick(0, 3);
    std::uniform_real_distribution<double> dval(-10.0, 10.0);
    if (depth == 0) {
        switch (leaf_pick(rng)) {
            case 0: return make_const(static_cast<double>(rng() % 17) - 8.0);
            case 1: return make_const(dval(rng));
            default:
                return allow_x ? make_var() : make_const(dval(rng));
        }
    }
    std::uniform_int_distribution<int> node_pick(0, 9);
    int k = node_pick(rng);
    if (k <= 2) return random_tree(rng, 0, allow_x);
    if (k <= 5) {
        std::uniform_int_distribution<int> op_pick(0, 9);
        auto op = static_cast<UnaryOp>(op_pick(rng));
        return make_unary(op, random_tree(rng, depth - 1, allow_x));
    }
    std::uniform_int_distribution<int> op_pick(0, 4);
    auto op = static_cast<BinaryOp>(op_pick(rng));
    ExprPtr lhs = random_tree(rng, depth - 1, allow_x);
    ExprPtr rhs = random_tree(rng, depth - 1, op != BinaryOp::Pow && allow_x);
    return make_binary(op, lhs, rhs);
}

double finite_difference(const ExprPtr& f, double x, double h = 1e-6) {
    return (evaluate(f, x + h) - evaluate(f, x - h)) / (2.0 * h);
}

}  // namespace

TEST_CASE("literal arithmetic parses without folding") {
    ExprPtr e = parse_expression("1+2");
    const Binary* b = std::get_if<Binary>(&e->node);
    REQUIRE(b != nullptr);
    CHECK(b->op == BinaryOp::Add);
    const Const* l = std::get_if<Const>(&b->lhs->node);
    const Const* r = std::get_if<Const>(&b->rhs->node);
    REQUIRE(l != nullptr);
    REQUIRE(r != nullptr);
    CHECK(l->value == 1.0);
    CHECK(r->value == 2.0);
}

TEST_CASE("precedence and grouping") {
    // 2+3*x is Add(2, Mul(3, x))
    ExprPtr e = parse_expression("2+3*x");
    const Binary* add = std::get_if<Binary>(&e->node);
    REQUIRE(add != nullptr);
    CHECK(add->op == BinaryOp::Add);
    const Binary* mul = std::get_if<Binary>(&add->rhs->node);
    REQUIRE(mul != nullptr);
    CHECK(mul->op == BinaryOp::Mul);

    // (2+3)*x is Mul(Add(2, 3), x)
    ExprPtr g = parse_expression("(2+3)*x");
    const Binary* top = std::get_if<Binary>(&g->node);
    REQUIRE(top != nullptr);
    CHECK(top->op == BinaryOp::Mul);
    CHECK(std::get_if<Binary>(&top->lhs->node)->op == BinaryOp::Add);

    CHECK(evaluate(parse_expression("2+3*4"), 0.0) == 14.0);
    CHECK(evaluate(parse_expression("(2+3)*4"), 0.0) == 20.0);
    CHECK(evaluate(parse_expression("2-3-4"), 0.0) == -5.0);   // left assoc
    CHECK(evaluate(parse_expression("24/4/2"), 0.0) == 3.0);   // left assoc
    CHECK(evaluate(parse_expression("2^3^2"), 0.0) == 512.0);  // right assoc
    CHECK(evaluate(parse_expression("-x^2"), 3.0) == -9.0);    // '^' above unary minus
    CHECK(evaluate(parse_expression("-x*2"), 3.0) == -6.0);
}

TEST_CASE("numbers, constants, whitespace") {
    CHECK(evaluate(parse_expression("2.5e-3"), 0.0) == 0.0025);
    CHECK(evaluate(parse_expression("2."), 0.0) == 2.0);
    CHECK(evaluate(parse_expression(".5"), 0.0) == 0.5);
    CHECK(evaluate(parse_expression("1E2"), 0.0) == 100.0);
    CHECK(evaluate(parse_expression("pi"), 0.0) == 3.141592653589793);
    CHECK(evaluate(parse_expression("e"), 0.0) == doctest::Approx(2.718281828459045).epsilon(1e-15));
    CHECK(evaluate(parse_expression(" 1 +\t2 "), 0.0) == 3.0);
    // 'e' after digits only opens an exponent when digits follow
    CHECK(evaluate(parse_expression("2*e"), 0.0) == doctest::Approx(2.0 * 2.718281828459045).epsilon(1e-15));
}

TEST_CASE("function application") {
    CHECK(evaluate(parse_expression("-atan(x)"), 1.0) ==
          doctest::Approx(-0.7853981633974483).epsilon(1e-15));
    CHECK(evaluate(parse_expression("sin(pi/2)"), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(evaluate(parse_expression("sqrt(x^2)"), -3.0) == 3.0);
    CHECK(evaluate(parse_expression("abs(-x)"), 4.0) == 4.0);
    CHECK(evaluate(parse_expression("ln(exp(1))"), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(evaluate(parse_expression("tanh(0)"), 0.0) == 0.0);
    CHECK(evaluate(parse_expression("tan(0.5)"), 0.0) ==
          doctest::Approx(0.5463024898437905).epsilon(1e-15));
    CHECK(evaluate(parse_expression("cos(0)"), 0.0) == 1.0);
}

TEST_CASE("syntax errors carry offset and expectations") {
    CHECK_THROWS_AS(parse_expression(""), SyntaxError);
    CHECK_THROWS_AS(parse_expression("1 +"), SyntaxError);
    CHECK_THROWS_AS(parse_expression("1 + * 2"), SyntaxError);
    CHECK_THROWS_AS(parse_expression("sin x"), SyntaxError);
    CHECK_THROWS_AS(parse_expression("1 2"), SyntaxError);
    CHECK_THROWS_AS(parse_expression("--x"), SyntaxError);

    try {
        parse_expression("(1+2");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& err) {
        CHECK(err.offset == 4);
        REQUIRE(err.expected.size() == 1);
        CHECK(err.expected[0] == "')'");
    }

    try {
        parse_expression("2 @ 3");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& err) {
        CHECK(err.offset == 2);
    }
}

TEST_CASE("exponents must be x-free") {
    CHECK_THROWS_AS(parse_expression("2^x"), SyntaxError);
    CHECK_THROWS_AS(parse_expression("x^x"), SyntaxError);
    CHECK_THROWS_AS(parse_expression("x^(1+x)"), SyntaxError);
    CHECK_NOTHROW(parse_expression("x^(1+1)"));
    CHECK(evaluate(parse_expression("x^(3-1)"), 5.0) == 25.0);
    try {
        parse_expression("2^x");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& err) {
        CHECK(err.offset == 1);  // points at the '^'
    }
}

TEST_CASE("unknown identifiers") {
    try {
        parse_expression("y + 1");
        FAIL("expected UnknownIdentifier");
    } catch (const UnknownIdentifier& err) {
        CHECK(err.name == "y");
        CHECK(err.offset == 0);
    }
    CHECK_THROWS_AS(parse_expression("sin(theta)"), UnknownIdentifier);
    CHECK_THROWS_AS(parse_expression("foo(x)"), UnknownIdentifier);
}

TEST_CASE("domain errors name the offending node") {
    try {
        evaluate(parse_expression("ln(x)"), -1.0);
        FAIL("expected DomainError");
    } catch (const DomainError& err) {
        CHECK(err.node == "ln(x)");
    }
    try {
        evaluate(parse_expression("1/(x-1)"), 1.0);
        FAIL("expected DomainError");
    } catch (const DomainError& err) {
        CHECK(err.node == "1/(x-1)");
    }
    CHECK_THROWS_AS(evaluate(parse_expression("sqrt(x)"), -2.0), DomainError);
    CHECK_THROWS_AS(evaluate(parse_expression("exp(x)"), 1000.0), DomainError);
    CHECK_THROWS_AS(evaluate(parse_expression("x^0.5"), -1.0), DomainError);
    CHECK_THROWS_AS(evaluate(parse_expression("exp(x)*exp(x)"), 600.0), DomainError);
    CHECK_NOTHROW(evaluate(parse_expression("ln(x)"), 1e-300));
}

TEST_CASE("derivatives simplify to readable forms") {
    CHECK(render(differentiate(parse_expression("x^2"))) == "2*x");
    CHECK(render(differentiate(parse_expression("sin(x)"))) == "cos(x)");
    CHECK(render(differentiate(parse_expression("1-x"))) == "-1");
    CHECK(render(differentiate(parse_expression("2+sin(x)"))) == "cos(x)");
    CHECK(render(differentiate(parse_expression("42"))) == "0");
    CHECK(render(differentiate(parse_expression("x"))) == "1");
    CHECK(render(differentiate(parse_expression("exp(x)"))) == "exp(x)");
}

TEST_CASE("derivatives agree with finite differences") {
    const std::vector<std::string> exprs = {
        "1-x",
        "2+sin(x)",
        "-atan(x)",
        "-x/(1+x^2)",
        "sqrt(1+x^2)",
        "exp(-x^2/2)",
        "tanh(x)*cos(2*x)",
        "x^3-2*x+0.5",
        "ln(1+x^2)",
        "abs(x)",
        "tan(x/4)",
        "x^(-2)",
    };
    const std::vector<double> points = {-2.3, -1.0, -0.4, 0.7, 1.9, 3.1};
    for (const std::string& s : exprs) {
        ExprPtr f = parse_expression(s);
        ExprPtr df = differentiate(f);
        for (double x : points) {
            CAPTURE(s);
            CAPTURE(x);
            double sym = evaluate(df, x);
            double fd = finite_difference(f, x);
            CHECK(std::fabs(sym - fd) <= 1e-5 * std::max(1.0, std::fabs(sym)));
        }
    }
}

TEST_CASE("render emits minimal parentheses and reparses") {
    CHECK(render(parse_expression("2+3*x")) == "2+3*x");
    CHECK(render(parse_expression("(2+3)*x")) == "(2+3)*x");
    CHECK(render(parse_expression("-x^2")) == "-x^2");
    CHECK(render(parse_expression("(-x)^2")) == "(-x)^2");
    CHECK(render(parse_expression("x-(1-x)")) == "x-(1-x)");
    CHECK(render(parse_expression("sin(x)^2")) == "sin(x)^2");
    CHECK(render(parse_expression("1/(2*x)")) == "1/(2*x)");
}

TEST_CASE("render to parse round trip is the identity on trees") {
    std::mt19937 rng(20260815);
    int checked = 0;
    for (int i = 0; i < 100; ++i) {
        ExprPtr t = random_tree(rng, 4, true);
        std::string s = render(t);
        CAPTURE(s);
        ExprPtr back = parse_expression(s);
        CHECK(same_tree(*t, *back));
        CHECK(render(back) == s);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("compiled form matches the tree evaluator bit for bit") {
    const std::vector<std::string> exprs = {
        "1-x", "2+sin(x)", "-atan(x)", "-x/(1+x^2)", "(1-x)/(2+sin(x))^2",
        "exp(-x^2/2)/sqrt(2*pi)", "x^(-1.5)", "tanh(x)-abs(x)*0.25",
    };
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> xs(0.05, 8.0);
    for (const std::string& s : exprs) {
        ExprPtr f = parse_expression(s);
        CompiledExpr c(f);
        for (int i = 0; i < 200; ++i) {
            double x = xs(rng);
            double a = evaluate(f, x);
            double b = c(x);
            CAPTURE(s);
            CAPTURE(x);
            CHECK(a == b);  // bitwise: same ops in the same order
        }
    }
}

TEST_CASE("compiled form reproduces domain failures") {
    CompiledExpr c(parse_expression("ln(x)"));
    try {
        c(-1.0);
        FAIL("expected DomainError");
    } catch (const DomainError& err) {
        CHECK(err.node == "ln(x)");
    }
    CompiledExpr d(parse_expression("1/(x-1)"));
    CHECK_THROWS_AS(d(1.0), DomainError);
}

TEST_CASE("compiled form handles deep right-leaning trees") {
    // Right-nested sums force one stack slot per level, past the fast path.
    ExprPtr t = make_var();
    for (int i = 0; i < 200; ++i) t = make_binary(BinaryOp::Add, make_const(1.0), t);
    CompiledExpr c(t);
    CHECK(c(0.5) == evaluate(t, 0.5));
    CHECK(c(0.5) == 200.5);
}

TEST_CASE("programmatic construction matches parsing") {
    // -x/(1+x^2) built by hand
    ExprPtr byhand = make_binary(
        BinaryOp::Div, make_unary(UnaryOp::Neg, make_var()),
        make_binary(BinaryOp::Add, make_const(1.0),
                    make_binary(BinaryOp::Pow, make_var(), make_const(2.0))));
    CHECK(same_tree(*byhand, *parse_expression("-x/(1+x^2)")));
    CHECK(depends_on_x(byhand));
    CHECK_FALSE(depends_on_x(parse_expression("1+2*pi")));
}
