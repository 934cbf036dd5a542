#include "adiabat/expr.hpp"

#include <doctest.h>

#include <random>

using namespace adiabat;

namespace {

cplx fd(const Expr& e, cplx s, double h = 1e-5)
{
    return (evaluate(e, s + h) - evaluate(e, s - h)) / (2 * h);
}

Expr random_tree(std::mt19937& rng, int depth)
{
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 5);
    std::uniform_real_distribution<double> value(0.0, 9.0);
    switch (pick(rng)) {
    case 0: return Expr::constant(std::round(value(rng) * 100) / 100);
    case 1: return Expr::variable();
    case 2: return Expr::neg(random_tree(rng, depth - 1));
    case 3: {
        static const NodeKind ops[] = {NodeKind::add, NodeKind::sub, NodeKind::mul, NodeKind::div, NodeKind::pow};
        NodeKind k = ops[std::uniform_int_distribution<int>(0, 4)(rng)];
        return Expr::binary(k, random_tree(rng, depth - 1), random_tree(rng, depth - 1));
    }
    default: {
        Func f = Func(std::uniform_int_distribution<int>(0, 8)(rng));
        return Expr::call(f, random_tree(rng, depth - 1));
    }
    }
}

} // namespace

TEST_SUITE("expr")
{
    TEST_CASE("parse shapes")
    {
        Expr e = parse("1/(1+s^2)^(3/2)");
        REQUIRE(e.kind() == NodeKind::div);
        CHECK(e.arg(0).kind() == NodeKind::constant);
        const Expr& p = e.arg(1);
        REQUIRE(p.kind() == NodeKind::pow);
        CHECK(p.arg(0).kind() == NodeKind::add);
        CHECK(p.arg(0).arg(1).kind() == NodeKind::pow);
        CHECK(p.arg(1).kind() == NodeKind::div);

        CHECK(parse("s").kind() == NodeKind::variable);

        Expr f = parse("2*s + exp(-s)");
        REQUIRE(f.kind() == NodeKind::add);
        CHECK(f.arg(0).kind() == NodeKind::mul);
        REQUIRE(f.arg(1).kind() == NodeKind::func);
        CHECK(f.arg(1).node().func == Func::exp);
        CHECK(f.arg(1).arg(0).kind() == NodeKind::neg);
    }

    TEST_CASE("precedence and associativity")
    {
        CHECK(print(parse("2^3^2")) == "(2^(3^2))");
        CHECK(print(parse("-s^2")) == "(-(s^2))");
        CHECK(evaluate(parse("1-2-3"), 0.0) == cplx(-4));
        CHECK(evaluate(parse("8/2/2"), 0.0) == cplx(2));
    }

    TEST_CASE("syntax errors carry offset and expectations")
    {
        try {
            parse("2s");
            FAIL("no error");
        } catch (const ParseError& e) {
            CHECK(e.code() == ErrorCode::syntax);
            CHECK(e.offset() == 1);
            CHECK_FALSE(e.expected().empty());
        }
        try {
            parse("foo(s)");
            FAIL("no error");
        } catch (const ParseError& e) {
            CHECK(e.code() == ErrorCode::unknown_identifier);
            CHECK(e.offset() == 0);
        }
        CHECK_THROWS_AS(parse("(s"), ParseError);
        CHECK_THROWS_AS(parse(""), ParseError);
        CHECK_THROWS_AS(parse("s+"), ParseError);
        CHECK_THROWS_AS(parse("1i"), ParseError);
    }

    TEST_CASE("evaluate")
    {
        Expr e = parse("1/(1+s^2)^(3/2)");
        CHECK(std::abs(evaluate(e, 0.0) - 1.0) < 1e-15);
        CHECK(std::abs(evaluate(e, cplx(0, 0.5)) - std::pow(0.75, -1.5)) < 1e-12);
        CHECK(std::abs(evaluate(e, cplx(0, 0.5)) - 1.539601) < 1e-6);
        CHECK(std::abs(evaluate(parse("s^2"), cplx(1, 1)) - cplx(0, 2)) < 1e-15);
        // integer powers are exact products, no branch cut
        CHECK(evaluate(parse("s^3"), cplx(-2, 0)) == cplx(-8, 0));
        CHECK(std::abs(evaluate(parse("sqrt(s)"), cplx(-4, 0)) - cplx(0, 2)) < 1e-15);
    }

    TEST_CASE("evaluation errors")
    {
        try {
            evaluate(parse("1/s"), 0.0);
            FAIL("no error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::pole_at_point);
        }
        try {
            evaluate(parse("log(s)"), 0.0);
            FAIL("no error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::domain_error);
        }
    }

    TEST_CASE("differentiate")
    {
        for (cplx s : {cplx(0.3, 0), cplx(-1.2, 0.4), cplx(2, -1)}) {
            CHECK(std::abs(evaluate(differentiate(parse("s^2")), s) - 2.0 * s) < 1e-14);
            CHECK(std::abs(evaluate(differentiate(parse("exp(-s)")), s) + std::exp(-s)) < 1e-14);
        }
        // -3 s (1+s^2)^(-5/2) at s = 0.3
        Expr d = differentiate(parse("1/(1+s^2)^(3/2)"));
        double exact = -0.9 * std::pow(1.09, -2.5);
        CHECK(std::abs(evaluate(d, 0.3) - exact) < 1e-14);
        CHECK(std::abs(evaluate(d, 0.3).real() - (-0.725565)) < 1e-6);
        CHECK(std::abs(evaluate(d, 0.3) - fd(parse("1/(1+s^2)^(3/2)"), 0.3)) < 1e-9);
    }

    TEST_CASE("derivative matches finite differences")
    {
        const char* exprs[] = {"1/(1+s^2)^(3/2)", "sin(s)*exp(-s^2)", "tanh(s)/(2+cos(s))", "sqrt(4+s^2)",
                               "log(3+s^2)", "cosh(s/3)^2 - sinh(s/3)^2", "s^5 - 3*s^2 + 1/(5+s)",
                               "tan(s/4)", "(1+s^2)^(-0.7)"};
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> re(-1.5, 1.5), im(-0.4, 0.4);
        for (const char* text : exprs) {
            Expr e = parse(text);
            Expr d = differentiate(e);
            double worst = 0;
            for (int i = 0; i < 100; ++i) {
                cplx s(re(rng), im(rng));
                cplx a = evaluate(d, s), b = fd(e, s);
                worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
            }
            INFO(text);
            CHECK(worst < 1e-6);
        }
    }

    TEST_CASE("round trip through print")
    {
        std::mt19937 rng(2024);
        for (int i = 0; i < 500; ++i) {
            Expr e = random_tree(rng, 8);
            std::string text = print(e);
            INFO(text);
            CHECK(structurally_equal(parse(text), e));
        }
    }

    TEST_CASE("branch sensitivity and size")
    {
        CHECK(is_branch_sensitive(parse("sqrt(1+s^2)")));
        CHECK(is_branch_sensitive(parse("(1+s^2)^(3/2)")));
        CHECK_FALSE(is_branch_sensitive(parse("1/(1+s^2)^3")));
        CHECK(node_count(parse("s+1")) == 3);
    }
}
