#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "folmod/expr.hpp"
#include "oracles.hpp"

using folmod::Expr;
using folmod::bump_cutoff;

TEST_CASE("precedence and builtins") {
    CHECK(Expr::parse("1/(2*pi*u)").eval(3.0, 0.0) ==
          doctest::Approx(1.0 / (2.0 * std::numbers::pi * 3.0)));
    CHECK(Expr::parse("u^2*sin(v)").eval(2.0, std::numbers::pi / 2) == doctest::Approx(4.0));
    // unary minus binds looser than '^'
    CHECK(Expr::parse("-u^2").eval(3.0, 0.0) == doctest::Approx(-9.0));
    CHECK(Expr::parse("(-u)^2").eval(3.0, 0.0) == doctest::Approx(9.0));
    CHECK(Expr::parse("2^-3").eval(0.0, 0.0) == doctest::Approx(0.125));
    // '^' is right-associative
    CHECK(Expr::parse("2^3^2").eval(0.0, 0.0) == doctest::Approx(512.0));
    CHECK(Expr::parse("2*u + v").eval(1.5, 0.25) == doctest::Approx(3.25));
    CHECK(Expr::parse("min(u, v) + max(u, v)").eval(0.3, 0.8) == doctest::Approx(1.1));
}

TEST_CASE("parse errors carry byte offsets") {
    CHECK_THROWS_AS(Expr::parse(""), folmod::ParseError);
    try {
        Expr::parse("u + w*2");
        FAIL("expected parse error");
    } catch (const folmod::ParseError& e) {
        CHECK(e.offset() == 4);
        CHECK(std::string(e.what()).find("unknown identifier 'w'") != std::string::npos);
    }
    try {
        Expr::parse("sin(u, v)");
        FAIL("expected arity error");
    } catch (const folmod::ParseError& e) {
        CHECK(std::string(e.what()).find("expects 1 argument") != std::string::npos);
    }
    CHECK_THROWS_AS(Expr::parse("(u + v"), folmod::ParseError);
    CHECK_THROWS_AS(Expr::parse("u + "), folmod::ParseError);
    CHECK_THROWS_AS(Expr::parse("u v"), folmod::ParseError);
}

TEST_CASE("domain violations become errors, not NaN") {
    CHECK_THROWS_AS(Expr::parse("log(u)").eval(-1.0, 0.0), folmod::EvalError);
    CHECK_THROWS_AS(Expr::parse("sqrt(u)").eval(-0.5, 0.0), folmod::EvalError);
    CHECK_THROWS_AS(Expr::parse("1/u").eval(0.0, 0.0), folmod::EvalError);
    CHECK_THROWS_AS(Expr::parse("exp(u)").eval(1e4, 0.0), folmod::EvalError);
    try {
        Expr::parse("log(u - 2)").eval(1.0, 3.0);
        FAIL("expected eval error");
    } catch (const folmod::EvalError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("log") != std::string::npos);
        CHECK(msg.find("(u,v)=(1") != std::string::npos);
    }
}

TEST_CASE("bump cutoff shape") {
    CHECK(bump_cutoff(0.5, 0.2, 0.4) == 0.0);   // outside the outer radius
    CHECK(bump_cutoff(0.0, 0.2, 0.4) == 1.0);   // inside the inner radius
    CHECK(bump_cutoff(-0.45, 0.2, 0.4) == 0.0);
    const double mid = bump_cutoff(0.3, 0.2, 0.4);
    CHECK(mid > 0.0);
    CHECK(mid < 1.0);

    // monotone on the transition (dense sampling)
    double prev = 1.0;
    for (int i = 0; i <= 2000; ++i) {
        const double x = 0.2 + 0.2 * i / 2000.0;
        const double y = bump_cutoff(x, 0.2, 0.4);
        CHECK(y <= prev + 1e-15);
        prev = y;
    }

    // flat derivative at both transition ends
    const double h = 1e-4;
    const double d_in = (bump_cutoff(0.2 + h, 0.2, 0.4) - bump_cutoff(0.2 - h, 0.2, 0.4)) / (2 * h);
    const double d_out =
        (bump_cutoff(0.4 + h, 0.2, 0.4) - bump_cutoff(0.4 - h, 0.2, 0.4)) / (2 * h);
    CHECK(std::abs(d_in) < 1e-6);
    CHECK(std::abs(d_out) < 1e-6);

    CHECK_THROWS_AS(bump_cutoff(0.1, 0.4, 0.2), folmod::EvalError);
    CHECK(Expr::parse("bump(u, 0.2, 0.4)").eval(0.1, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("parse(print(e)) evaluates identically on random ASTs") {
    oracles::Rng rng(20240817);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const auto ast = oracles::random_ast(rng, 6);
        const Expr original = folmod::ExprBuilder::from_ast(ast);
        const Expr reparsed = Expr::parse(original.print());
        for (int k = 0; k < 6; ++k) {
            const double u = rng.uniform(-2.0, 2.0);
            const double v = rng.uniform(-2.0, 2.0);
            double a = 0.0, b = 0.0;
            bool a_threw = false, b_threw = false;
            try {
                a = original.eval(u, v);
            } catch (const folmod::EvalError&) {
                a_threw = true;
            }
            try {
                b = reparsed.eval(u, v);
            } catch (const folmod::EvalError&) {
                b_threw = true;
            }
            REQUIRE(a_threw == b_threw);
            if (!a_threw) {
                REQUIRE(a == b);  // identical operations, identical bits
                ++checked;
            }
        }
    }
    CHECK(checked >= 1000);
}

TEST_CASE("no non-finite value escapes evaluation") {
    oracles::Rng rng(7);
    for (int trial = 0; trial < 400; ++trial) {
        const Expr e = folmod::ExprBuilder::from_ast(oracles::random_ast(rng, 5));
        try {
            const double y = e.eval(rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0));
            CHECK(std::isfinite(y));
        } catch (const folmod::EvalError&) {
            // reported, which is the contract
        }
    }
}
