#include "catch_amalgamated.hpp"

#include <minsurf/weierstrass.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace minsurf;

namespace {

// closed-form catenoid with u(1) = 0 in polar coordinates z = r e^{i theta}
Eigen::Vector3d catenoid_oracle(cplx z) {
    double r = std::abs(z), t = std::arg(z), c = std::cosh(std::log(r));
    return {1.0 - c * std::cos(t), -c * std::sin(t), std::log(r)};
}

} // namespace

TEST_CASE("spinor assembly", "[weierstrass]") {
    const Domain annulus = Domain::annulus(0.5, 2.0);
    SECTION("catenoid") {
        auto form = assemble_null_form(builtin::catenoid(), &annulus);
        for (cplx z : {cplx(0.7, 0.2), cplx(-1.5, 0.4), cplx(0.1, -0.9)}) {
            CVector v = form(z);
            REQUIRE(std::abs(v[0] - (1.0 / (z * z) - 1.0) / 2.0) < 1e-14);
            REQUIRE(std::abs(v[1] - kI * (1.0 / (z * z) + 1.0) / 2.0) < 1e-14);
            REQUIRE(std::abs(v[2] - 1.0 / z) < 1e-14);
        }
    }
    SECTION("plane") {
        auto form = assemble_null_form(builtin::plane(), &annulus);
        CVector v = form(cplx(0.3, 1.1));
        REQUIRE(std::abs(v[0]) == 0.0);
        REQUIRE(v[1] == kI);
        REQUIRE(v[2] == cplx(1.0));
    }
    SECTION("helicoid data agrees with its spinor pair") {
        const Domain wedge = Domain::wedge(10.0);
        auto from_pair = assemble_null_form(builtin::helicoid(), &wedge);
        auto direct = builtin::helicoid_form();
        for (cplx z : {cplx(0.0, 1.0), cplx(0.3, 2.0), cplx(-1.0, 3.0)}) {
            REQUIRE((from_pair(z) - direct(z)).norm() < 1e-13 * direct(z).norm());
            CVector v = direct(z);
            REQUIRE(std::abs((v.array() * v.array()).sum()) < 1e-12 * v.squaredNorm());
        }
        auto g = gauss_function(direct);
        REQUIRE(std::abs(g(cplx(0.2, 1.5)) + std::exp(cplx(0.2, 1.5))) < 1e-12);
    }
    SECTION("pole of g cancelled by a zero of phi3") {
        const Domain disc = Domain::disc(1.0);
        WeierstrassPair p{HolomorphicFn::parse("1/z"), HolomorphicFn::parse("z")};
        auto form = assemble_null_form(p, &disc);
        CVector v = form(0.0);
        REQUIRE(v.allFinite());
        REQUIRE(std::abs(v[0] + 0.5) < 1e-15);
    }
    SECTION("mismatched pole and zero data") {
        const Domain disc = Domain::disc(1.0);
        for (auto p : {WeierstrassPair{HolomorphicFn::parse("z"), HolomorphicFn::parse("1")},
                       WeierstrassPair{HolomorphicFn::parse("1"), HolomorphicFn::parse("z - 0.3")},
                       WeierstrassPair{HolomorphicFn::parse("1/(z-0.2)"), HolomorphicFn::parse("1")},
                       WeierstrassPair{HolomorphicFn::parse("1/z"), HolomorphicFn::parse("z^2")}}) {
            try {
                assemble_null_form(p, &disc);
                FAIL("pole mismatch accepted");
            } catch (const Error& e) {
                REQUIRE(e.code() == ErrorCode::PoleMismatch);
            }
        }
        REQUIRE_NOTHROW(assemble_null_form({HolomorphicFn::parse("z"), HolomorphicFn::parse("z")}, &disc));
    }
}

TEST_CASE("nullity validation", "[weierstrass]") {
    const Domain annulus = Domain::annulus(0.5, 2.0);
    auto cat = assemble_null_form(builtin::catenoid());
    auto good = validate_null(cat, annulus, 10000);
    REQUIRE(good.pass);
    REQUIRE(good.max_residual <= 1e-10);
    REQUIRE(good.min_modulus > 0.0);
    NullForm broken({cat[0], cat[1], HolomorphicFn(cat[2].expression() + Expr::constant(0.1))});
    auto bad = validate_null(broken, annulus, 1000);
    REQUIRE_FALSE(bad.pass);
    REQUIRE(bad.max_abs_residual > 0.01);
    NullForm constant({HolomorphicFn(1.0), HolomorphicFn(kI), HolomorphicFn(0.0)});
    REQUIRE(validate_null(constant, annulus, 100).pass);
}

TEST_CASE("catenoid immersion matches the closed form", "[weierstrass][immersion]") {
    const Domain annulus = Domain::annulus(0.5, 2.0);
    auto form = assemble_null_form(builtin::catenoid());
    std::vector<PathPolyline> basis{PathPolyline::circle(0.0, 1.0, 256)};
    Immersion u(form, basis, 1.0, Eigen::Vector3d::Zero(), build_mesh(annulus, 0.1));
    REQUIRE(u(1.0) == Eigen::VectorXd(Eigen::Vector3d::Zero()));
    REQUIRE((u(-1.0) - catenoid_oracle(-1.0)).cwiseAbs().maxCoeff() < 1e-8);
    for (int v = 0; v < static_cast<int>(u.mesh().vertex_count()); v += 97)
        REQUIRE((u.at_vertex(v) - catenoid_oracle(u.mesh().vertex(v))).cwiseAbs().maxCoeff() < 1e-8);
    // two routes to the same point
    auto upper = u.along(PathPolyline({1.0, cplx(0, 1), cplx(-1.2, 0.1)}, false));
    auto lower = u.along(PathPolyline({1.0, cplx(0, -1), cplx(-1, -1), cplx(-1.2, 0.1)}, false));
    REQUIRE((upper - lower).cwiseAbs().maxCoeff() < 1e-10);
    auto conf = u.conformality_check();
    REQUIRE(conf.pass);
    std::ostringstream csv;
    u.write_csv(csv);
    REQUIRE(csv.str().rfind("re,im,u1,u2,u3\n", 0) == 0);
}

TEST_CASE("plane immersion is planar and isometric", "[weierstrass][immersion]") {
    const Domain disc = Domain::disc(1.0);
    NullForm plane({HolomorphicFn(0.0), HolomorphicFn(kI), HolomorphicFn(1.0)});
    Immersion u(plane, {}, 0.0, Eigen::Vector3d::Zero(), build_mesh(disc, 0.1));
    for (int v = 0; v < static_cast<int>(u.mesh().vertex_count()); ++v) {
        cplx z = u.mesh().vertex(v);
        Eigen::VectorXd x = u.at_vertex(v);
        REQUIRE(std::abs(x[0]) < 1e-12);
        REQUIRE(std::abs(x[1] + z.imag()) < 1e-12);
        REQUIRE(std::abs(x[2] - z.real()) < 1e-12);
    }
}

TEST_CASE("annulus family exactness", "[weierstrass][immersion]") {
    const Domain annulus = Domain::annulus(0.5, 2.0);
    const auto mesh = build_mesh(annulus, 0.1);
    std::vector<PathPolyline> basis{PathPolyline::circle(0.0, 1.0, 512)};
    auto form = [](int j) { return assemble_null_form(builtin::annulus_family(j)); };
    REQUIRE_NOTHROW(Immersion(form(2), basis, 1.0, Eigen::Vector3d::Zero(), mesh));
    auto f2 = flux(form(2), basis);
    REQUIRE(f2.values[0].cwiseAbs().maxCoeff() < 1e-8);
    // odd j = 3: residues of z^-3 e^{+-z^2} are +-1, so the periods are (2 pi i, 0, 0)
    auto f3 = flux(form(3), basis);
    REQUIRE(std::abs(f3.values[0][0] - 2 * kPi) < 1e-8);
    // odd j = 5: the second component has residue i/2, a real period -pi
    try {
        Immersion(form(5), basis, 1.0, Eigen::Vector3d::Zero(), mesh);
        FAIL("non-exact form accepted");
    } catch (const Error& e) {
        REQUIRE(e.code() == ErrorCode::RealPeriodsNonzero);
    }
}

TEST_CASE("Gauss map", "[weierstrass]") {
    auto form = assemble_null_form(builtin::catenoid());
    ProjectivePoint p = gauss_map(form, 1.0);
    CVector expected(3);
    expected << 0.0, kI, 1.0;
    REQUIRE(fs_distance(p.coords(), expected) == 0.0);
    REQUIRE(std::abs(p.quadric_residual()) <= 1e-10);
    for (cplx c : {cplx(2.5, 0), cplx(0, -3), cplx(1e-3, 7)}) {
        auto q = gauss_map(form.scaled(c), cplx(0.8, 0.6));
        REQUIRE((q.coords() - gauss_map(form, cplx(0.8, 0.6)).coords()).cwiseAbs().maxCoeff() < 4e-16);
    }
    // helicoid: g = -e^z moves along the imaginary axis
    auto hel = builtin::helicoid_form();
    REQUIRE(fs_distance(gauss_map(hel, cplx(0, 1)), gauss_map(hel, cplx(0, 2))) > 0.1);
}

TEST_CASE("flux", "[weierstrass][flux]") {
    auto form = assemble_null_form(builtin::catenoid());
    auto f = flux(form, {PathPolyline::circle(0.0, 1.0, 256)});
    REQUIRE(f.values.size() == 1);
    REQUIRE(std::abs(f.values[0][0]) < 1e-8);
    REQUIRE(std::abs(f.values[0][1]) < 1e-8);
    REQUIRE(std::abs(f.values[0][2] - 2 * kPi) < 1e-8);
    auto a = flux(form, {PathPolyline::circle(0.0, 0.8, 256)});
    auto b = flux(form, {PathPolyline::circle(0.0, 1.5, 256)});
    REQUIRE((a.values[0] - b.values[0]).cwiseAbs().maxCoeff() < 2e-11);
    REQUIRE(flux(form, {}).values.empty());
}

TEST_CASE("fullness", "[weierstrass]") {
    const Domain annulus = Domain::annulus(0.5, 2.0);
    NullForm plane({HolomorphicFn(0.0), HolomorphicFn(kI), HolomorphicFn(1.0)});
    auto p = fullness_test(plane, annulus, 20);
    REQUIRE(p.rank == 1);
    REQUIRE_FALSE(p.full);
    auto cat = assemble_null_form(builtin::catenoid());
    REQUIRE(fullness_test(cat, annulus, 20).full);
    // determinant oracle on three points
    Eigen::Matrix3cd m;
    m << cat(cplx(0.7, 0)), cat(cplx(0, 1.1)), cat(cplx(-1.3, 0.2));
    REQUIRE(std::abs(m.determinant()) > 1e-3);
    REQUIRE(fullness_test(builtin::helicoid_form(), Domain::wedge(10.0), 20).full);
}

TEST_CASE("nullity survives arbitrary spinor data", "[weierstrass][property]") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> c(-2, 2);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        std::ostringstream g;
        g << "(" << c(rng) << " + " << c(rng) << "i)*exp(" << c(rng) << "*z) + (z - " << c(rng) << ")/(z + 3)";
        WeierstrassPair p{HolomorphicFn::parse(g.str()), HolomorphicFn::parse("exp(z)")};
        auto form = assemble_null_form(p);
        for (int k = 0; k < 50; ++k) {
            CVector v = form(cplx(c(rng) / 2, c(rng) / 2));
            if (!v.allFinite()) continue;
            double s = v.cwiseAbs().sum();
            worst = std::max(worst, std::abs((v.array() * v.array()).sum()) / (s * s));
        }
    }
    REQUIRE(worst <= 1e-10);
}

TEST_CASE("Weierstrass JSON round trip", "[weierstrass][json]") {
    auto p = builtin::catenoid();
    auto back = pair_from_json(to_json(p));
    REQUIRE(std::abs(back.g(cplx(0.3, 0.2)) - cplx(0.3, 0.2)) < 1e-15);
    auto form = assemble_null_form(p);
    auto fb = null_form_from_json(to_json(form));
    REQUIRE((fb(cplx(1.1, 0.3)) - form(cplx(1.1, 0.3))).norm() < 1e-15);
    REQUIRE_THROWS_AS(pair_from_json(nlohmann::json{{"g", "z"}}), Error);
}
