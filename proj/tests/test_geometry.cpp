#include "catch_amalgamated.hpp"

#include <minsurf/geometry.hpp>

#include <cmath>
#include <random>

using namespace minsurf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ConformalMetric constant_metric(double c) {
    return ConformalMetric::from_function([c](cplx) { return c; }, "const");
}

bool nonincreasing(const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k)
        if (v[k] > v[k - 1] + 1e-12) return false;
    return true;
}

} // namespace

TEST_CASE("flat metrics give Euclidean distance to the boundary", "[geometry]") {
    const Domain disc = Domain::disc(1.0);
    const Mesh mesh = build_mesh(disc, 0.05);
    for (double c : {1.0, 2.0}) {
        for (cplx p : {cplx(0, 0), cplx(0.3, 0.2), cplx(-0.5, -0.1)}) {
            auto d = geodesic_distance(constant_metric(c), p, mesh);
            const double exact = c * (1.0 - std::abs(p));
            REQUIRE_THAT(d.value, WithinRel(exact, 0.02));
            REQUIRE(d.lower <= d.upper);
            REQUIRE(d.level_values.size() == 3);
            REQUIRE(nonincreasing(d.level_values));
        }
    }
}

TEST_CASE("artificial pieces are not exits", "[geometry]") {
    const Domain annulus = Domain::annulus(0.5, 2.0).with_artificial(1);
    const Mesh mesh = build_mesh(annulus, 0.1);
    auto d = geodesic_distance(constant_metric(1.0), cplx(1.8, 0.0), mesh);
    REQUIRE_THAT(d.value, WithinRel(1.3, 0.02));
    const Domain closed = Domain::annulus(0.5, 2.0).with_artificial(0).with_artificial(1);
    REQUIRE_THROWS_MATCHES(geodesic_distance(constant_metric(1.0), cplx(1.0, 0.0), build_mesh(closed, 0.2)), Error,
                           Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == ErrorCode::UnreachableBoundary; }));
}

TEST_CASE("Gauss curvature of the standard surfaces", "[geometry]") {
    SECTION("catenoid on the unit circle") {
        auto cat = builtin::catenoid();
        for (double th : {0.0, 1.0, 2.5, -2.0}) REQUIRE_THAT(gauss_curvature(cat, std::polar(1.0, th)), WithinAbs(-1.0, 1e-13));
        const double r = 1.7;
        REQUIRE_THAT(gauss_curvature(cat, r), WithinRel(-16 * std::pow(r, 4) / std::pow(1 + r * r, 4), 1e-13));
    }
    SECTION("helicoid along the imaginary axis") {
        auto hel = builtin::helicoid();
        for (double t : {0.5, 1.0, 2.0, 4.0}) REQUIRE_THAT(gauss_curvature(hel, cplx(0, t)), WithinAbs(-1.0, 1e-12));
    }
    SECTION("plane is flat") { REQUIRE(gauss_curvature(builtin::plane(), cplx(0.3, 0.1)) == 0.0); }
    SECTION("annulus family at 1") {
        const double e2 = std::exp(2.0);
        const double A = 64 * e2 * e2 / std::pow(1 + e2, 4);
        for (int j : {2, 4, 12}) REQUIRE_THAT(std::abs(gauss_curvature(builtin::annulus_family(j), 1.0)), WithinRel(A, 1e-12));
    }
    SECTION("large |g| stays finite") {
        WeierstrassPair p{HolomorphicFn::parse("exp(z)"), HolomorphicFn(1.0)};
        // (1 + |g|^2)^4 overflows here
        REQUIRE_THAT(gauss_curvature(p, 100.0), WithinRel(-16.0 * std::exp(-400.0), 1e-12));
    }
    SECTION("degenerate metric") {
        WeierstrassPair p{HolomorphicFn::parse("z"), HolomorphicFn::parse("z")};
        REQUIRE_THROWS_MATCHES(gauss_curvature(p, 0.0), Error,
                               Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == ErrorCode::MetricDegenerate; }));
    }
    SECTION("opaque Gauss map via the domain") {
        WeierstrassPair p{HolomorphicFn::opaque([](cplx z) { return z; }), HolomorphicFn::parse("1/z")};
        const Domain ann = Domain::annulus(0.5, 2.0);
        REQUIRE_THAT(gauss_curvature(p, 1.0, &ann), WithinAbs(-1.0, 1e-8));
        REQUIRE_THROWS_AS(gauss_curvature(p, 1.0), Error);
    }
}

TEST_CASE("helicoid distances along the imaginary axis", "[geometry]") {
    const Domain wedge = Domain::wedge(4.0);
    const auto hierarchy = detail::mesh_hierarchy(build_mesh(wedge, 0.05), 3);
    const auto metric = ConformalMetric::from_form(builtin::helicoid_form());
    double previous = 0.0;
    for (double t : {0.5, 1.0, 2.0}) {
        auto d = geodesic_distance(metric, cplx(0, t), hierarchy);
        REQUIRE(d.value >= 0.95 * t);
        REQUIRE(d.value > previous);
        REQUIRE(nonincreasing(d.level_values));
        // the perpendicular path to a ray is explicit
        const double perp = std::sqrt(2.0) * 2.0 * std::sinh(t / 2.0);
        REQUIRE(d.upper <= perp * (1 + 1e-9));
        previous = d.value;
    }
}

TEST_CASE("distances scale with the metric", "[geometry]") {
    const Domain ann = Domain::annulus(0.5, 2.0);
    const auto hierarchy = detail::mesh_hierarchy(build_mesh(ann, 0.1), 3);
    const auto form = builtin::helicoid_form();
    const auto metric = ConformalMetric::from_form(form);
    const cplx p(1.1, 0.3);
    auto d1 = geodesic_distance(metric, p, hierarchy);
    auto d3 = geodesic_distance(metric.scaled(3.0), p, hierarchy);
    REQUIRE_THAT(d3.value, WithinRel(3.0 * d1.value, 1e-12));
    REQUIRE_THAT(d3.upper, WithinRel(3.0 * d1.upper, 1e-12));
}

TEST_CASE("Osserman product is homothety invariant", "[geometry][property]") {
    const Domain ann = Domain::annulus(0.5, 2.0);
    const auto hierarchy = detail::mesh_hierarchy(build_mesh(ann, 0.1), 3);
    const auto pair = builtin::catenoid();
    const cplx p(1.2, 0.4);
    auto base = osserman_quantity(pair, assemble_null_form(pair), p, hierarchy);
    for (double c : {0.25, 3.0, 40.0}) {
        WeierstrassPair scaled{pair.g, HolomorphicFn(c) * pair.phi3};
        auto r = osserman_quantity(scaled, assemble_null_form(scaled), p, hierarchy);
        REQUIRE_THAT(r.K, WithinRel(base.K / (c * c), 1e-12));
        REQUIRE_THAT(r.product, WithinRel(base.product, 1e-10));
    }
}

TEST_CASE("profile reports first threshold crossings", "[geometry]") {
    const Domain ann = Domain::annulus(0.5, 2.0);
    const auto hierarchy = detail::mesh_hierarchy(build_mesh(ann, 0.1), 3);
    std::vector<FamilyMember> family;
    for (double c : {1.0, 2.0, 4.0}) {
        WeierstrassPair p{HolomorphicFn::parse("z"), HolomorphicFn(1.0 / c) * HolomorphicFn::parse("1/z")};
        family.push_back({"c" + std::to_string(c), p, assemble_null_form(p)});
    }
    auto prof = osserman_profile(family, cplx(1.0, 0.0), hierarchy, {0.0, 1e9});
    REQUIRE(prof.records.size() == 3);
    for (const auto& r : prof.records) REQUIRE_THAT(r.product, WithinRel(prof.records[0].product, 1e-10));
    REQUIRE(prof.first_entry[0].second == 0);
    REQUIRE(prof.first_entry[1].second == -1);
}

TEST_CASE("completeness probe against a closed-form metric", "[geometry]") {
    // lambda = 1/(1 - r): d(0, |z| = r) = -log(1 - r)
    const Domain disc = Domain::disc(1.0);
    const auto hierarchy = detail::mesh_hierarchy(build_mesh(disc, 0.02), 3);
    auto metric = ConformalMetric::from_function([](cplx z) { return 1.0 / (1.0 - std::abs(z)); });
    std::vector<double> radii = {0.5, 0.9, 0.99};
    auto rep = completeness_probe(metric, hierarchy, 0.0, radii, {1.0, 4.0});
    REQUIRE(rep.distances.size() == 3);
    for (std::size_t k = 0; k < radii.size(); ++k) REQUIRE_THAT(rep.distances[k].value, WithinRel(-std::log(1 - radii[k]), 1e-3));
    REQUIRE(rep.verdict == "completeness-consistent");
    auto flat = completeness_probe(constant_metric(1.0), hierarchy, 0.0, radii, {1.0, 4.0});
    REQUIRE_THAT(flat.distances.back().value, WithinRel(0.99, 1e-9));
    REQUIRE(flat.verdict == "bounded");
    REQUIRE_THROWS_AS(completeness_probe(metric, hierarchy, 0.0, {0.9, 0.5}, {}), Error);
}

TEST_CASE("angle defect matches the curvature formula on the catenoid", "[geometry]") {
    const Domain ann = Domain::annulus(0.8, 1.25);
    const auto pair = builtin::catenoid();
    Immersion u(assemble_null_form(pair), {PathPolyline::circle(0.0, 1.0, 64)}, 1.0, Eigen::VectorXd::Zero(3), build_mesh(ann, 0.05));
    auto samples = angle_defect_curvature(u);
    REQUIRE(samples.size() > 50);
    double worst = 0.0;
    for (const auto& s : samples) {
        const double K = gauss_curvature(pair, s.z);
        worst = std::max(worst, std::abs(s.K - K) / std::abs(K));
    }
    REQUIRE(worst < 0.05);
}

TEST_CASE("curvature sign and critical points", "[geometry][property]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto rc = [&] { return cplx(U(rng), U(rng)); };
    SECTION("K <= 0 for random rational Gauss maps") {
        for (int trial = 0; trial < 200; ++trial) {
            const cplx a = rc(), b = rc(), c = rc(), d = 3.0 + rc();
            WeierstrassPair p{HolomorphicFn((a * pow(zeta(), 2) + b * zeta() + c) / (zeta() - d)), HolomorphicFn(1.0 + 0.1 * a)};
            for (int s = 0; s < 10; ++s) {
                const cplx z = rc();
                if (std::abs(p.g(z)) < 1e-3) continue;
                REQUIRE(gauss_curvature(p, z) <= 0.0);
            }
        }
    }
    SECTION("K vanishes exactly at critical points of g") {
        WeierstrassPair p{HolomorphicFn::parse("z^3 - 3*z"), HolomorphicFn(1.0)};
        auto critical = [&](cplx z) {
            const double g = std::abs(p.g(z));
            return std::abs(p.g.derivative()(z)) < 1e-8 * (1 + g * g);
        };
        std::vector<cplx> pts = {1.0, -1.0};
        for (int s = 0; s < 500; ++s) pts.push_back(2.0 * rc());
        for (cplx z : pts) REQUIRE((std::abs(gauss_curvature(p, z)) < 1e-12) == critical(z));
        REQUIRE(critical(1.0));
    }
}

TEST_CASE("metric from the form matches the spinor formula", "[geometry]") {
    for (const auto& pair : {builtin::catenoid(), builtin::helicoid(), builtin::annulus_family(4)}) {
        const auto metric = ConformalMetric::from_form(assemble_null_form(pair));
        for (cplx z : {cplx(1.0, 0.0), cplx(0.9, 0.4), cplx(-0.6, 1.1)}) {
            const double l = metric(z);
            REQUIRE_THAT(l * l, WithinRel(spinor_lambda_squared(pair, z), 1e-10));
        }
    }
    REQUIRE_THAT(ConformalMetric::from_form(builtin::helicoid_form())(cplx(0, 2.0)), WithinRel(std::sqrt(2.0), 1e-14));
    REQUIRE_THAT(ConformalMetric::from_form(assemble_null_form(builtin::catenoid()))(std::polar(1.0, 0.3)), WithinRel(std::sqrt(2.0), 1e-14));
}

TEST_CASE("the plane has zero Osserman product", "[geometry]") {
    const auto hierarchy = detail::mesh_hierarchy(build_mesh(Domain::disc(1.0), 0.1), 3);
    auto r = osserman_quantity(builtin::plane(), assemble_null_form(builtin::plane()), 0.0, hierarchy, {}, "plane");
    REQUIRE(r.K == 0.0);
    REQUIRE(r.product == 0.0);
    REQUIRE_THAT(r.d, WithinRel(std::sqrt(2.0), 0.02));
}
