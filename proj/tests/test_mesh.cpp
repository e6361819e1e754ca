#include "catch_amalgamated.hpp"

#include <minsurf/mesh.hpp>

#include <cmath>
#include <map>

using namespace minsurf;

TEST_CASE("mesh edges respect the target length", "[mesh]") {
    for (const auto& d : {Domain::disc(1.0), Domain::annulus(0.5, 2.0), Domain::wedge(10.0), Domain::rectangle(cplx(0, 0), cplx(2, 1))}) {
        for (double h : {0.2, 0.1}) {
            auto m = build_mesh(d, h);
            INFO(to_string(d.kind()) << " h=" << h);
            REQUIRE(m.max_edge_length() <= h * (1 + 1e-12));
            REQUIRE(m.connected());
            REQUIRE(m.triangles().size() > 0);
            for (std::size_t v = 0; v < m.vertex_count(); ++v)
                REQUIRE(d.signed_distance(m.vertex(static_cast<int>(v))) >= -1e-9);
        }
    }
}

TEST_CASE("boundary flags follow the domain pieces", "[mesh]") {
    SECTION("annulus flags both circles") {
        auto m = build_mesh(Domain::annulus(0.5, 2.0), 0.1);
        bool inner = false, outer = false;
        for (std::size_t v = 0; v < m.vertex_count(); ++v) {
            int iv = static_cast<int>(v);
            if (!m.is_boundary(iv)) continue;
            double r = std::abs(m.vertex(iv));
            if (m.boundary_piece(iv) == 0) {
                inner = true;
                REQUIRE(std::abs(r - 0.5) < 1e-9);
            } else {
                outer = true;
                REQUIRE(std::abs(r - 2.0) < 1e-9);
            }
            REQUIRE(m.is_ideal_boundary(iv));
        }
        REQUIRE(inner);
        REQUIRE(outer);
    }
    SECTION("wedge arc is not ideal") {
        auto m = build_mesh(Domain::wedge(4.0), 0.2);
        int rays = 0, arc = 0;
        for (std::size_t v = 0; v < m.vertex_count(); ++v) {
            int iv = static_cast<int>(v);
            if (!m.is_boundary(iv)) continue;
            if (m.boundary_piece(iv) == 2) {
                ++arc;
                REQUIRE_FALSE(m.is_ideal_boundary(iv));
            } else {
                ++rays;
                REQUIRE(m.is_ideal_boundary(iv));
            }
        }
        REQUIRE(rays > 0);
        REQUIRE(arc > 0);
    }
}

TEST_CASE("refinement is nested", "[mesh]") {
    auto coarse = build_mesh(Domain::annulus(0.5, 2.0), 0.2);
    auto fine = refine(coarse);
    REQUIRE(fine.level() == coarse.level() + 1);
    REQUIRE(fine.spacing() == coarse.spacing() / 2);
    REQUIRE(fine.vertex_count() > 3 * coarse.vertex_count());
    for (std::size_t v = 0; v < coarse.vertex_count(); ++v) {
        int iv = static_cast<int>(v);
        if (!coarse.on_lattice(iv)) continue;
        auto [i, j] = coarse.lattice_index(iv);
        int w = fine.lattice_vertex(2 * i, 2 * j);
        REQUIRE(w >= 0);
        REQUIRE(fine.vertex(w) == coarse.vertex(iv));
    }
}

TEST_CASE("too coarse an edge is rejected", "[mesh]") {
    REQUIRE_THROWS_AS(build_mesh(Domain::annulus(1.0, 1.2), 0.5), Error);
}

TEST_CASE("path integration follows the mesh", "[mesh][quadrature]") {
    auto m = build_mesh(Domain::annulus(0.5, 2.0), 0.1);
    auto inv = [](cplx z) {
        CVector v(1);
        v[0] = 1.0 / z;
        return v;
    };
    auto upper = path_integrate(inv, -1.5, 1.5, m, 1e-11, {cplx(0, 1.2)});
    auto lower = path_integrate(inv, -1.5, 1.5, m, 1e-11, {cplx(0, -1.2)});
    // log branch: the routes differ by the residue at the hole
    REQUIRE(std::abs(upper.value[0] - (-kPi * kI)) < 1e-9);
    REQUIRE(std::abs(lower.value[0] - kPi * kI) < 1e-9);
    REQUIRE(std::abs(lower.value[0] - upper.value[0] - 2.0 * kPi * kI) < 1e-9);

    auto poly = [](cplx z) {
        CVector v(1);
        v[0] = 3.0 * z * z;
        return v;
    };
    auto r = path_integrate(poly, cplx(0.7, 0.1), cplx(-1.1, 0.9), m, 1e-12);
    cplx expected = std::pow(cplx(-1.1, 0.9), 3) - std::pow(cplx(0.7, 0.1), 3);
    REQUIRE(std::abs(r.value[0] - expected) < 1e-11);
    REQUIRE_THROWS_AS(path_integrate(poly, cplx(0.1, 0), 1.0, m, 1e-10), Error);
}

TEST_CASE("mesh JSON round trip", "[mesh][json]") {
    auto m = build_mesh(Domain::disc(1.0), 0.25);
    auto j = to_json(m);
    REQUIRE(j.dump().find("nan") == std::string::npos);
    auto back = mesh_from_json(j);
    REQUIRE(back.vertex_count() == m.vertex_count());
    j["vertices"].erase(0);
    REQUIRE_THROWS_AS(mesh_from_json(j), Error);
}
