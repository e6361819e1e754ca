#include "catch_amalgamated.hpp"

#include <minsurf/projective.hpp>

#include <cmath>
#include <random>

using namespace minsurf;

namespace {

CVector vec(std::initializer_list<cplx> xs) {
    CVector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (auto x : xs) v[k++] = x;
    return v;
}

CVector random_vec(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    CVector v(n);
    for (int k = 0; k < n; ++k) v[k] = cplx(g(rng), g(rng));
    return v;
}

} // namespace

TEST_CASE("Fubini-Study distance", "[projective]") {
    REQUIRE(std::abs(fs_distance(vec({1, 0}), vec({0, 1})) - kPi / 2) < 1e-15);
    REQUIRE(std::abs(fs_distance(vec({1, 0}), vec({1, 1})) - kPi / 4) < 1e-15);
    REQUIRE(fs_distance(vec({1, kI}), vec({cplx(0, 2), -2.0})) < 1e-15);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        CVector z = random_vec(rng, 3), w = random_vec(rng, 3), u = random_vec(rng, 3);
        cplx lambda(std::normal_distribution<double>()(rng), std::normal_distribution<double>()(rng));
        double d = fs_distance(z, w);
        REQUIRE(d >= 0.0);
        REQUIRE(d <= kPi / 2 + 1e-15);
        REQUIRE(std::abs(d - fs_distance(w, z)) < 1e-14);
        REQUIRE(std::abs(d - fs_distance(lambda * z, w)) < 1e-14);
        REQUIRE(fs_distance(z, lambda * z) < 1e-7);
        REQUIRE(d <= fs_distance(z, u) + fs_distance(u, w) + 1e-14);
        // closed form oracle
        double c = std::abs(z.dot(w)) / (z.norm() * w.norm());
        REQUIRE(std::abs(d - std::acos(std::min(1.0, c))) < 1e-7);
    }
    REQUIRE_THROWS_AS(fs_distance(vec({0, 0}), vec({1, 0})), Error);
}

TEST_CASE("projective points have a canonical representative", "[projective]") {
    ProjectivePoint p(vec({kI, 1.0}));
    REQUIRE(std::abs(p.coords().norm() - 1.0) < 1e-15);
    REQUIRE(p.coords()[0].imag() == 0.0);
    REQUIRE(p.coords()[0].real() > 0.0);
    REQUIRE(std::abs(p.coords()[1] - cplx(0, -1) / std::sqrt(2.0)) < 1e-15);
    ProjectivePoint q(vec({0.0, cplx(3, 4), 1.0}));
    REQUIRE(q.coords()[1].imag() == 0.0);
    ProjectivePoint null(vec({1.0, kI, 0.0}));
    REQUIRE(std::abs(null.quadric_residual()) < 1e-15);
}

TEST_CASE("winding numbers", "[projective]") {
    auto circle = PathPolyline::circle(0.0, 1.0, 256);
    REQUIRE(winding_number(HolomorphicFn::parse("z^3"), circle) == 3);
    REQUIRE(winding_number(HolomorphicFn::parse("(z-0.5)/(z-2)"), circle) == 1);
    REQUIRE(winding_number(HolomorphicFn::parse("1/(z-0.1)^2"), circle) == -2);
    REQUIRE(winding_number(HolomorphicFn::parse("exp(z)"), circle) == 0);
    REQUIRE(winding_number(HolomorphicFn::parse("z^2"), circle.reversed()) == -2);
    auto opaque = HolomorphicFn::opaque([](cplx z) { return z * z * std::exp(z); });
    REQUIRE(winding_number(opaque, circle) == 2);
    try {
        winding_number(HolomorphicFn::parse("z-1"), circle);
        FAIL("zero on the contour accepted");
    } catch (const Error& e) {
        REQUIRE(e.code() == ErrorCode::ZeroOnContour);
    }
    try {
        winding_number(HolomorphicFn::parse("z^0.5"), circle);
        FAIL("branch cut accepted");
    } catch (const Error& e) {
        REQUIRE(e.code() == ErrorCode::NonIntegerResult);
    }
}

TEST_CASE("zero location from power sums", "[projective]") {
    auto f = HolomorphicFn::parse("(z-0.3)*(z+0.2i)*(z-0.5-0.5i)*exp(z)");
    auto roots = locate_zeros(f, {PathPolyline::circle(0.0, 1.0, 256)});
    REQUIRE(roots.size() == 3);
    std::vector<cplx> expected{cplx(0, -0.2), cplx(0.3, 0), cplx(0.5, 0.5)};
    for (std::size_t k = 0; k < 3; ++k) REQUIRE(std::abs(roots[k] - expected[k]) < 1e-9);
    auto d = Divisor::from_roots(locate_zeros(HolomorphicFn::parse("(z-0.4)^2*(z+0.1)"), {PathPolyline::circle(0.0, 1.0, 256)}), 1e-6);
    REQUIRE(d.points().size() == 2);
    REQUIRE(d.order() == 3);
}

TEST_CASE("divisor multipliers", "[projective]") {
    const auto L = CompactL::disc(0.0, 1.0);
    const std::vector<HolomorphicFn> chart{HolomorphicFn::parse("z")};
    SECTION("double point split into two") {
        const double rho = 0.01;
        Divisor e0({{0.0, 2}});
        Divisor e({{cplx(rho, 0), 1}, {cplx(0, -rho), 1}});
        auto m = divisor_multiplier(e0, e, L, chart);
        REQUIRE(m.divisor_verified);
        REQUIRE(std::abs(m.psi(cplx(rho, 0))) < 1e-15);
        // independent oracle: sup of |Psi - 1| on |z| = 1
        double sup = 0.0;
        for (int k = 0; k < 20000; ++k) {
            cplx z = std::polar(1.0, 2 * kPi * k / 20000);
            sup = std::max(sup, std::abs((z - rho) * (z + cplx(0, rho)) / (z * z) - 1.0));
        }
        REQUIRE(std::abs(m.boundary_deviation - sup) < 1e-6);
        REQUIRE(m.boundary_deviation <= 2 * rho + rho * rho);
    }
    SECTION("simple point") {
        auto m = divisor_multiplier(Divisor({{0.0, 1}}), Divisor({{cplx(0.02, 0.01), 1}}), L, chart);
        REQUIRE(m.divisor_verified);
        REQUIRE(m.boundary_deviation <= std::abs(cplx(0.02, 0.01)) * (1 + 1e-9));
    }
    SECTION("opaque chart") {
        std::vector<HolomorphicFn> op{HolomorphicFn::opaque([](cplx z) { return z * std::exp(z); })};
        auto m = divisor_multiplier(Divisor({{0.0, 1}}), Divisor({{cplx(0.05, 0), 1}}), L, op);
        REQUIRE(m.divisor_verified);
    }
    SECTION("failures") {
        try {
            divisor_multiplier(Divisor({{0.0, 2}}), Divisor({{0.01, 1}}), L, chart);
            FAIL("order mismatch accepted");
        } catch (const Error& e) {
            REQUIRE(e.code() == ErrorCode::OrderMismatch);
        }
        try {
            divisor_multiplier(Divisor({{0.0, 1}}), Divisor({{0.95, 1}}), L, chart, {0.5});
            FAIL("far point accepted");
        } catch (const Error& e) {
            REQUIRE(e.code() == ErrorCode::PointOutsideNeighborhood);
        }
    }
}

TEST_CASE("projective proximity is monotone in the sample count", "[projective]") {
    const auto L = CompactL::annulus(0.0, 0.5, 1.5);
    FunctionTuple f{HolomorphicFn::parse("z"), HolomorphicFn::parse("1")};
    FunctionTuple g{HolomorphicFn::parse("z + 0.01*z^2"), HolomorphicFn::parse("1")};
    double prev = 0.0;
    for (int n : {10, 50, 200, 1000}) {
        double d = projective_proximity(f, g, L, n).delta;
        REQUIRE(d >= prev);
        prev = d;
    }
    REQUIRE(prev > 0.0);
    REQUIRE(prev < 0.02);
}

TEST_CASE("gauge alignment with a zero-free reference", "[projective][gauge]") {
    const auto L = CompactL::annulus(0.0, 0.8, 1.2);
    FunctionTuple f{HolomorphicFn::parse("(z^-2 - 1)/2"), HolomorphicFn::parse("i*(z^-2 + 1)/2"), HolomorphicFn::parse("1/z")};
    FunctionTuple g;
    for (const auto& c : f) g.push_back(HolomorphicFn(c.expression() * parse_expr("exp(0.01*z)")));
    auto a = gauge_align(f, g, L, 1e-6);
    REQUIRE(a.case_id == 2);
    REQUIRE(a.reference == 2);
    REQUIRE(a.reindexed);
    REQUIRE(a.success);
    REQUIRE(a.deviation < 1e-13);
    REQUIRE(a.interior_deviation <= a.deviation + 1e-15);
    REQUIRE(std::abs(a.multiplier(1.0) - std::exp(-0.01)) < 1e-14);
    // multiplying by phi does not move the projective class
    for (cplx z : {cplx(1.0, 0.1), cplx(-0.9, 0.3)})
        REQUIRE(fs_distance(a.multiplier(z) * eval_tuple(g, z), eval_tuple(g, z)) < 1e-7);
    auto j = to_json(a);
    REQUIRE(j.at("case") == 2);
}

TEST_CASE("gauge alignment across zeros of the reference", "[projective][gauge]") {
    const auto L = CompactL::disc(0.0, 0.5);
    FunctionTuple f{HolomorphicFn::parse("z^2"), HolomorphicFn::parse("0.1"), HolomorphicFn::parse("0.1*z")};
    FunctionTuple g{HolomorphicFn::parse("(z^2 - 1e-4)*exp(0.01*z)"), HolomorphicFn::parse("0.1*exp(0.01*z)"),
                    HolomorphicFn::parse("0.1*z*exp(0.01*z)")};
    auto a = gauge_align(f, g, L, 1e-3);
    REQUIRE(a.case_id == 1);
    REQUIRE(a.reference == 0);
    REQUIRE(a.discs.size() == 1);
    REQUIRE(a.discs[0].zeros_f == 2);
    REQUIRE(a.discs[0].zeros_g == 2);
    REQUIRE(a.divisor->divisor_verified);
    // phi = exp(-0.01 z) exactly, so phi g - f = (-1e-4, 0, 0)
    REQUIRE(std::abs(a.deviation - 1e-4) < 1e-12);
    REQUIRE(std::abs(a.multiplier(cplx(0.2, 0.1)) - std::exp(cplx(-0.002, -0.001))) < 1e-12);
    REQUIRE(a.success);
    SECTION("proximity too large") {
        FunctionTuple bad{HolomorphicFn::parse("1 + 0*z"), HolomorphicFn::parse("0.1"), HolomorphicFn::parse("0.1*z")};
        try {
            gauge_align(f, bad, L, 1e-3);
            FAIL("mismatched zero counts accepted");
        } catch (const Error& e) {
            REQUIRE(e.code() == ErrorCode::ProximityTooLarge);
        }
    }
    SECTION("degenerate reference") {
        FunctionTuple zf{HolomorphicFn::parse("z - 0.5"), HolomorphicFn::parse("z + 0.5")};
        try {
            gauge_align(zf, zf, L, 1e-3);
            FAIL("degenerate reference accepted");
        } catch (const Error& e) {
            REQUIRE(e.code() == ErrorCode::ReferenceComponentDegenerate);
        }
    }
}
