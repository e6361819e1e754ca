#include "catch_amalgamated.hpp"

#include <minsurf/labyrinth.hpp>

#include <cmath>
#include <sstream>

using namespace minsurf;
using Catch::Matchers::WithinAbs;

namespace {

auto has_code(ErrorCode c) {
    return Catch::Matchers::Predicate<Error>([c](const Error& e) { return e.code() == c; }, "error code");
}

Labyrinth two_arcs() { return Labyrinth({{0.5, 0.05, 0.0, 1.5 * kPi}, {0.8, 0.01, 0.0, 1.5 * kPi}}); }

} // namespace

TEST_CASE("two-arc labyrinth", "[labyrinth]") {
    auto lab = two_arcs();
    SECTION("target on the compacts is read back exactly") {
        REQUIRE(lab.compact_value(1) == 0.05);
        REQUIRE(lab.target(0.5) == 0.05);
        REQUIRE(lab.target(0.46) == 0.05);
        REQUIRE(lab.target(0.8) == std::pow(0.01, 2));
    }
    SECTION("gap integral") {
        auto gaps = lab.gap_integrals();
        REQUIRE(gaps.size() == 1);
        REQUIRE_THAT(gaps[0].second, WithinAbs(100.0, 1e-12));
        REQUIRE(gaps[0].first > gaps[0].second);
        // a constant on (0.55, 0.79) would need more than 100 / 0.24
        REQUIRE(lab.target(0.67) > 100.0 / 0.24);
    }
    SECTION("target is continuous") {
        double worst = 0.0;
        for (int k = 1; k < 100000; ++k) {
            double t = 0.85 * k / 100000.0, dt = 1e-9;
            worst = std::max(worst, std::abs(lab.target(t + dt) - lab.target(t - dt)));
        }
        REQUIRE(worst < 1e-3);
    }
    SECTION("membership") {
        REQUIRE(lab.in_compact(0.52, 0));
        REQUIRE_FALSE(lab.in_compact(0.6, 0));
        REQUIRE_FALSE(lab.in_labyrinth(-0.5));  // the gap of the arc
        REQUIRE(lab.in_labyrinth(std::polar(0.805, 1.0)));
    }
    SECTION("table") {
        std::ostringstream os;
        lab.write_target_table(os, 10);
        REQUIRE(os.str().rfind("radius,f\n", 0) == 0);
    }
}

TEST_CASE("invalid schedules", "[labyrinth]") {
    auto invalid = [](std::vector<LabyrinthArc> arcs) {
        REQUIRE_THROWS_MATCHES(Labyrinth(arcs), Error, has_code(ErrorCode::ScheduleInvalid));
    };
    invalid({{0.5, 0.2, 0.0, 4.0}, {0.8, 0.15, 0.0, 4.0}});     // C_1 meets C_2
    invalid({{0.5, 0.05, 0.0, 4.0}});                           // single arc
    invalid({{0.8, 0.05, 0.0, 4.0}, {0.5, 0.01, 0.0, 4.0}});    // radii decrease
    invalid({{0.5, 0.01, 0.0, 4.0}, {0.8, 0.05, 0.0, 4.0}});    // widths increase
    invalid({{0.5, 0.05, 3.0, 1.0}, {0.8, 0.01, 0.0, 4.0}});    // misses (0, 1)
    invalid({{0.5, 0.05, 0.0, 4.0}, {0.97, 0.04, 0.0, 4.0}});   // leaves the disc
    invalid({{0.5, 0.05, 0.0, 6.2}, {0.8, 0.01, 0.0, 4.0}});    // closes into an annulus
    REQUIRE_NOTHROW(Labyrinth::geometric(5));
}

TEST_CASE("crossing-cost check", "[labyrinth]") {
    auto lab = two_arcs();
    const Mesh mesh = build_mesh(Domain::disc(0.99), 0.008);
    SECTION("g = 1 fails every threshold") {
        auto rep = labyrinth_completeness_check(lab, HolomorphicFn(1.0), mesh);
        REQUIRE(rep.bands.size() == 2);
        for (const auto& b : rep.bands) {
            REQUIRE_FALSE(b.meets);
            REQUIRE(b.min_weight == 2.0);
            REQUIRE(b.avoiding_length > lab.arcs()[static_cast<std::size_t>(b.band - 1)].radius);
        }
        REQUIRE(rep.verdict == "inconclusive");
        // both gaps face the negative axis
        REQUIRE_THAT(rep.bands[1].avoiding_length, WithinAbs(0.81, 0.01));
    }
    SECTION("staggered gaps force a detour") {
        Labyrinth staggered({{0.5, 0.05, 0.0, 1.5 * kPi}, {0.8, 0.01, 0.7 * kPi, 1.5 * kPi}});
        auto rep = labyrinth_completeness_check(staggered, HolomorphicFn(1.0), mesh);
        REQUIRE(rep.bands[1].avoiding_length > 0.83);
    }
    SECTION("g = exp(c/(1 - z)) is large only near the positive axis") {
        auto g = HolomorphicFn::parse("exp(40/(1 - z))");
        auto rep = labyrinth_completeness_check(lab, g, mesh);
        REQUIRE(rep.bands[0].meets);
        REQUIRE_FALSE(rep.bands[1].meets);
        REQUIRE(rep.verdict == "inconclusive");
    }
    SECTION("a radial modulus meeting all thresholds") {
        auto g = HolomorphicFn::opaque([](cplx z) { return cplx(std::exp(200.0 * std::abs(z))); }, std::nullopt, "table");
        auto rep = labyrinth_completeness_check(lab, g, mesh);
        for (const auto& b : rep.bands) REQUIRE(b.meets);
        REQUIRE(rep.verdict == "completeness-consistent");
    }
    SECTION("coarse mesh rejected") {
        REQUIRE_THROWS_AS(labyrinth_completeness_check(lab, HolomorphicFn(1.0), build_mesh(Domain::disc(0.99), 0.05)), Error);
    }
}
