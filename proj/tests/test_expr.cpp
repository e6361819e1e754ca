#include "catch_amalgamated.hpp"

#include <minsurf/holomorphic.hpp>

#include <cmath>

using namespace minsurf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("parser builds the expected trees", "[expr]") {
    const cplx z(0.3, -0.7);
    SECTION("arithmetic precedence") {
        auto e = parse_expr("1 + 2*z^2 - z/3");
        cplx expected = 1.0 + 2.0 * z * z - z / 3.0;
        REQUIRE(std::abs(e.eval(z) - expected) < 1e-15);
    }
    SECTION("unary minus binds looser than power") {
        auto e = parse_expr("-z^2");
        REQUIRE(std::abs(e.eval(z) + z * z) < 1e-15);
    }
    SECTION("functions and constants") {
        auto e = parse_expr("exp(i*pi*z) + cosh(z) - sinh(z) + log(e)");
        cplx expected = std::exp(kI * kPi * z) + std::cosh(z) - std::sinh(z) + 1.0;
        REQUIRE(std::abs(e.eval(z) - expected) < 1e-14);
    }
    SECTION("imaginary literals and negative exponents") {
        auto e = parse_expr("2.5i * zeta^-2");
        REQUIRE(std::abs(e.eval(z) - cplx(0, 2.5) / (z * z)) < 1e-14);
    }
    SECTION("non-integer exponent uses the principal branch") {
        auto e = parse_expr("z^0.5");
        REQUIRE(e.op() == Op::Pow);
        REQUIRE(std::abs(e.eval(z) - std::sqrt(z)) < 1e-15);
    }
    SECTION("malformed input") {
        REQUIRE_THROWS_AS(parse_expr("exp(z"), Error);
        REQUIRE_THROWS_AS(parse_expr("foo(z)"), Error);
        REQUIRE_THROWS_AS(parse_expr("z^z"), Error);
        REQUIRE_THROWS_AS(parse_expr("1 +"), Error);
        REQUIRE_THROWS_AS(parse_expr("2 z"), Error);
    }
}

TEST_CASE("compiled programs agree with tree evaluation", "[expr]") {
    for (const char* text : {"exp(z^2)", "(1/z - z)/2 * (1/z)", "sinh(z)*cosh(2*z)^3 - 4/(z+3)", "z^0.3 + log(z)"}) {
        auto e = parse_expr(text);
        Program p(e);
        for (cplx z : {cplx(0.4, 0.1), cplx(-1.2, 0.9), cplx(2.0, -0.5)})
            REQUIRE(std::abs(p(z) - e.eval(z)) <= 1e-14 * std::max(1.0, std::abs(e.eval(z))));
    }
}

TEST_CASE("symbolic derivative matches finite differences", "[expr]") {
    const double h = 1e-6;
    for (const char* text : {"z^3 - 2*z", "exp(z^2)", "1/(z - 2)", "sin(z)*cos(z)", "log(z+3)", "z^1.5", "cosh(exp(z))"}) {
        auto e = parse_expr(text);
        auto d = derivative(e);
        for (cplx z : {cplx(0.4, 0.1), cplx(-0.2, 0.9)}) {
            cplx fd = (e.eval(z + h) - e.eval(z - h)) / (2 * h);
            REQUIRE(std::abs(d.eval(z) - fd) <= 1e-7 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST_CASE("simplifier cancels structurally equal factors", "[expr]") {
    auto e = simplify(parse_expr("(1/z) * z"));
    REQUIRE(e.is_const(1.0));
    auto f = simplify(parse_expr("z^3 / z^2 * exp(z) / exp(z)"));
    REQUIRE(f.to_string() == "z");
    auto g = simplify(parse_expr("0*z + 1*z - 0"));
    REQUIRE(g.to_string() == "z");
    auto h = simplify(parse_expr("(2*z)^2 / z"));
    REQUIRE(std::abs(h.eval(cplx(0.5, 0.5)) - 4.0 * cplx(0.5, 0.5)) < 1e-15);
}

TEST_CASE("composition substitutes the variable", "[expr]") {
    auto outer = parse_expr("exp(z)");
    auto inner = parse_expr("z^2 / 4");
    auto c = compose(outer, inner);
    cplx z(0.7, 0.2);
    REQUIRE(std::abs(c.eval(z) - std::exp(z * z / 4.0)) < 1e-15);
}

TEST_CASE("expression JSON round trip", "[expr][json]") {
    auto e = parse_expr("exp(-z^2)*(1/z - 2.5i) + z^0.5");
    auto j = to_json(e);
    auto back = expr_from_json(j);
    REQUIRE(back.to_string() == e.to_string());
    REQUIRE(expr_from_json(nlohmann::json("z^2")).to_string() == parse_expr("z^2").to_string());
    REQUIRE_THROWS_AS(expr_from_json(nlohmann::json{{"op", "bogus"}}), Error);
    REQUIRE_THROWS_AS(expr_from_json(nlohmann::json{{"op", "add"}, {"args", {nlohmann::json{{"op", "var"}}}}}), Error);
}

TEST_CASE("derivative_at", "[holomorphic]") {
    const Domain disc = Domain::disc(3.0);
    SECTION("closed form") {
        REQUIRE_THAT(derivative_at(HolomorphicFn::parse("z^2"), 1.0, disc).real(), WithinAbs(2.0, 1e-15));
        REQUIRE_THAT(derivative_at(HolomorphicFn::parse("exp(z)"), 0.0, disc).real(), WithinAbs(1.0, 1e-15));
    }
    SECTION("Cauchy estimate for an opaque function") {
        auto f = HolomorphicFn::opaque([](cplx z) { return std::exp(z * z); });
        REQUIRE_FALSE(f.has_derivative());
        cplx d = derivative_at(f, 1.0, disc);
        // chain rule: d/dz exp(z^2) = 2 z exp(z^2)
        REQUIRE(std::abs(d - 2.0 * std::exp(1.0)) <= 1e-8);
    }
    SECTION("too close to the boundary") {
        auto f = HolomorphicFn::opaque([](cplx z) { return z; });
        REQUIRE_THROWS_AS(derivative_at(f, cplx(3.0 - 1e-9, 0), disc), Error);
        REQUIRE_THROWS_AS(derivative_at(HolomorphicFn::parse("z"), cplx(4, 0), disc), Error);
    }
}

TEST_CASE("Cauchy-Riemann residual separates holomorphic from non-holomorphic", "[holomorphic]") {
    const Domain annulus = Domain::annulus(0.5, 2.0);
    REQUIRE(cauchy_riemann_residual(HolomorphicFn::parse("exp(z^2)/z"), annulus) < 1e-8);
    auto conj_fn = HolomorphicFn::opaque([](cplx z) { return std::conj(z); });
    REQUIRE(cauchy_riemann_residual(conj_fn, annulus) > 0.1);
}

TEST_CASE("closed-form derivative agrees with Cauchy estimate", "[holomorphic]") {
    const Domain disc = Domain::disc(1.0);
    for (const char* text : {"exp(z^2)", "1/(z-2)", "sinh(3*z)"}) {
        auto f = HolomorphicFn::parse(text);
        for (cplx p : {cplx(0.1, 0.2), cplx(-0.4, 0.3)}) {
            cplx exact = f.derivative()(p);
            cplx est = cauchy_derivative(f, p, 0.1);
            REQUIRE(std::abs(exact - est) <= 1e-6 * std::abs(exact));
        }
    }
}
