#pragma once

// Structured triangle meshes of planar domains and mesh-guided path integrals.
//
// Vertices sit on the square lattice (i s, j s) anchored at the origin, with
// s = h / sqrt(2) so the diagonal edges have length h. Each lattice square is
// split along its (1,1) diagonal. Lattice edges that leave the domain are cut
// at the boundary, and the cut point becomes a boundary vertex. Because the
// lattice is anchored, halving h gives a mesh that contains every vertex and
// (subdivided) edge of the coarser one.

#include "domain.hpp"
#include "errors.hpp"
#include "quadrature.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <climits>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

namespace minsurf {

class Mesh {
public:
    static constexpr int kNoLattice = INT_MIN;

    const Domain& domain() const { return domain_; }
    double target_edge() const { return target_; }
    double spacing() const { return spacing_; }
    int level() const { return level_; }

    std::size_t vertex_count() const { return vertices_.size(); }
    cplx vertex(int v) const { return vertices_[static_cast<std::size_t>(v)]; }
    const std::vector<cplx>& vertices() const { return vertices_; }

    bool is_boundary(int v) const { return piece_[static_cast<std::size_t>(v)] >= 0; }
    int boundary_piece(int v) const { return piece_[static_cast<std::size_t>(v)]; }
    /// Boundary vertex on a piece that belongs to the ideal boundary.
    bool is_ideal_boundary(int v) const { return is_boundary(v) && !domain_.is_artificial(boundary_piece(v)); }

    /// Lattice coordinates, or {kNoLattice, kNoLattice} for boundary cut points.
    std::array<int, 2> lattice_index(int v) const { return lattice_[static_cast<std::size_t>(v)]; }
    bool on_lattice(int v) const { return lattice_[static_cast<std::size_t>(v)][0] != kNoLattice; }

    /// Vertex at lattice position (i, j), or -1.
    int lattice_vertex(int i, int j) const {
        long long di = static_cast<long long>(i) - i0_, dj = static_cast<long long>(j) - j0_;
        if (di < 0 || dj < 0 || di >= ni_ || dj >= nj_) return -1;
        return grid_[static_cast<std::size_t>(dj * ni_ + di)];
    }

    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    double edge_length(std::size_t e) const { return edge_length_[e]; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }

    /// Neighbours of v as (vertex, edge index) pairs.
    std::vector<std::pair<int, int>> neighbors(int v) const {
        std::vector<std::pair<int, int>> out;
        for (int k = adj_offset_[static_cast<std::size_t>(v)]; k < adj_offset_[static_cast<std::size_t>(v) + 1]; ++k)
            out.emplace_back(adj_vertex_[static_cast<std::size_t>(k)], adj_edge_[static_cast<std::size_t>(k)]);
        return out;
    }

    double max_edge_length() const {
        double m = 0;
        for (double l : edge_length_) m = std::max(m, l);
        return m;
    }

    /// Closest mesh vertex (searches the lattice neighbourhood, then all cut points).
    int nearest_vertex(cplx z) const {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        const int ci = static_cast<int>(std::lround(z.real() / spacing_));
        const int cj = static_cast<int>(std::lround(z.imag() / spacing_));
        for (int dj = -2; dj <= 2; ++dj)
            for (int di = -2; di <= 2; ++di) {
                int v = lattice_vertex(ci + di, cj + dj);
                if (v >= 0 && std::abs(vertices_[static_cast<std::size_t>(v)] - z) < best_d) {
                    best_d = std::abs(vertices_[static_cast<std::size_t>(v)] - z);
                    best = v;
                }
            }
        if (best < 0 || best_d > spacing_) {
            for (std::size_t v = 0; v < vertices_.size(); ++v)
                if (std::abs(vertices_[v] - z) < best_d) {
                    best_d = std::abs(vertices_[v] - z);
                    best = static_cast<int>(v);
                }
        }
        return best;
    }

    bool connected() const {
        if (vertices_.empty()) return false;
        return component_sizes_of(0) == vertices_.size();
    }

    /// Vertices of a shortest Euclidean mesh-edge path from a to b (empty if none).
    std::vector<int> shortest_path(int a, int b) const {
        std::vector<double> dist(vertices_.size(), std::numeric_limits<double>::infinity());
        std::vector<int> prev(vertices_.size(), -1);
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        dist[static_cast<std::size_t>(a)] = 0;
        heap.push({0.0, a});
        while (!heap.empty()) {
            auto [d, v] = heap.top();
            heap.pop();
            if (d > dist[static_cast<std::size_t>(v)]) continue;
            if (v == b) break;
            for (int k = adj_offset_[static_cast<std::size_t>(v)]; k < adj_offset_[static_cast<std::size_t>(v) + 1]; ++k) {
                int w = adj_vertex_[static_cast<std::size_t>(k)];
                double nd = d + edge_length_[static_cast<std::size_t>(adj_edge_[static_cast<std::size_t>(k)])];
                if (nd < dist[static_cast<std::size_t>(w)]) {
                    dist[static_cast<std::size_t>(w)] = nd;
                    prev[static_cast<std::size_t>(w)] = v;
                    heap.push({nd, w});
                }
            }
        }
        if (!std::isfinite(dist[static_cast<std::size_t>(b)])) return {};
        std::vector<int> path;
        for (int v = b; v != -1; v = prev[static_cast<std::size_t>(v)]) path.push_back(v);
        std::reverse(path.begin(), path.end());
        return path;
    }

    double path_length(const std::vector<int>& path) const {
        double len = 0;
        for (std::size_t k = 0; k + 1 < path.size(); ++k)
            len += std::abs(vertex(path[k + 1]) - vertex(path[k]));
        return len;
    }

    friend Mesh build_mesh(const Domain& domain, double target_edge, int level);
    friend Mesh mesh_from_json(const nlohmann::json& j);

private:
    explicit Mesh(Domain d) : domain_(std::move(d)) {}

    std::size_t component_sizes_of(int start) const {
        std::vector<char> seen(vertices_.size(), 0);
        std::vector<int> stack{start};
        seen[static_cast<std::size_t>(start)] = 1;
        std::size_t count = 0;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            ++count;
            for (int k = adj_offset_[static_cast<std::size_t>(v)]; k < adj_offset_[static_cast<std::size_t>(v) + 1]; ++k) {
                int w = adj_vertex_[static_cast<std::size_t>(k)];
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = 1;
                    stack.push_back(w);
                }
            }
        }
        return count;
    }

    void build_adjacency() {
        edge_length_.clear();
        std::vector<int> degree(vertices_.size(), 0);
        for (auto [a, b] : edges_) {
            ++degree[static_cast<std::size_t>(a)];
            ++degree[static_cast<std::size_t>(b)];
            edge_length_.push_back(std::abs(vertices_[static_cast<std::size_t>(a)] - vertices_[static_cast<std::size_t>(b)]));
        }
        adj_offset_.assign(vertices_.size() + 1, 0);
        for (std::size_t v = 0; v < vertices_.size(); ++v) adj_offset_[v + 1] = adj_offset_[v] + degree[v];
        adj_vertex_.assign(static_cast<std::size_t>(adj_offset_.back()), 0);
        adj_edge_.assign(static_cast<std::size_t>(adj_offset_.back()), 0);
        std::vector<int> fill(adj_offset_.begin(), adj_offset_.end() - 1);
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            auto [a, b] = edges_[e];
            adj_vertex_[static_cast<std::size_t>(fill[static_cast<std::size_t>(a)])] = b;
            adj_edge_[static_cast<std::size_t>(fill[static_cast<std::size_t>(a)]++)] = static_cast<int>(e);
            adj_vertex_[static_cast<std::size_t>(fill[static_cast<std::size_t>(b)])] = a;
            adj_edge_[static_cast<std::size_t>(fill[static_cast<std::size_t>(b)]++)] = static_cast<int>(e);
        }
    }

    Domain domain_;
    double target_ = 0.0;
    double spacing_ = 0.0;
    int level_ = 0;
    std::vector<cplx> vertices_;
    std::vector<int> piece_;
    std::vector<std::array<int, 2>> lattice_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<double> edge_length_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<int> adj_offset_, adj_vertex_, adj_edge_;
    int i0_ = 0, j0_ = 0;
    long long ni_ = 0, nj_ = 0;
    std::vector<int> grid_;
};

/// Mesh with maximum edge length <= target_edge. `level` is a free label for
/// refinement bookkeeping.
inline Mesh build_mesh(const Domain& domain, double target_edge, int level = 0) {
    if (!(target_edge > 0.0) || !std::isfinite(target_edge))
        fail(ErrorCode::DegenerateDomain, "target edge length must be positive");
    if (target_edge >= domain.thickness())
        fail(ErrorCode::DegenerateDomain, "target edge length is not smaller than the domain thickness");

    Mesh mesh(domain);
    const double s = target_edge / std::sqrt(2.0);
    mesh.target_ = target_edge;
    mesh.spacing_ = s;
    mesh.level_ = level;

    auto [lo, hi] = domain.bounding_box();
    mesh.i0_ = static_cast<int>(std::floor(lo.real() / s)) - 1;
    mesh.j0_ = static_cast<int>(std::floor(lo.imag() / s)) - 1;
    mesh.ni_ = static_cast<long long>(std::ceil(hi.real() / s)) + 2 - mesh.i0_;
    mesh.nj_ = static_cast<long long>(std::ceil(hi.imag() / s)) + 2 - mesh.j0_;
    if (mesh.ni_ * mesh.nj_ > 400'000'000LL) fail(ErrorCode::DegenerateDomain, "mesh would be too large");
    mesh.grid_.assign(static_cast<std::size_t>(mesh.ni_ * mesh.nj_), -1);

    const double on_boundary_tol = 1e-9 * s;
    auto lattice_point = [&](int i, int j) { return cplx(i * s, j * s); };

    // 0 outside, 1 interior, 2 on the boundary
    std::vector<char> state(mesh.grid_.size(), 0);
    auto cell = [&](int i, int j) -> std::size_t {
        return static_cast<std::size_t>((static_cast<long long>(j) - mesh.j0_) * mesh.ni_ + (i - mesh.i0_));
    };
    auto in_grid = [&](int i, int j) {
        return i >= mesh.i0_ && j >= mesh.j0_ && i < mesh.i0_ + mesh.ni_ && j < mesh.j0_ + mesh.nj_;
    };
    for (int j = mesh.j0_; j < mesh.j0_ + mesh.nj_; ++j)
        for (int i = mesh.i0_; i < mesh.i0_ + mesh.ni_; ++i) {
            double sd = domain.signed_distance(lattice_point(i, j));
            state[cell(i, j)] = sd > on_boundary_tol ? 1 : (sd >= -on_boundary_tol ? 2 : 0);
        }

    std::vector<cplx> vertices;
    std::vector<int> piece;
    std::vector<std::array<int, 2>> lattice;
    for (int j = mesh.j0_; j < mesh.j0_ + mesh.nj_; ++j)
        for (int i = mesh.i0_; i < mesh.i0_ + mesh.ni_; ++i) {
            char st = state[cell(i, j)];
            if (st == 0) continue;
            mesh.grid_[cell(i, j)] = static_cast<int>(vertices.size());
            vertices.push_back(lattice_point(i, j));
            piece.push_back(st == 2 ? domain.nearest_piece(lattice_point(i, j)) : -1);
            lattice.push_back({i, j});
        }

    std::vector<std::pair<int, int>> edges;
    const std::array<std::array<int, 2>, 3> dirs = {{{1, 0}, {0, 1}, {1, 1}}};
    const std::array<std::array<int, 2>, 6> all_dirs = {{{1, 0}, {0, 1}, {1, 1}, {-1, 0}, {0, -1}, {-1, -1}}};
    // lattice-lattice edges
    for (int j = mesh.j0_; j < mesh.j0_ + mesh.nj_; ++j)
        for (int i = mesh.i0_; i < mesh.i0_ + mesh.ni_; ++i) {
            int a = mesh.grid_[cell(i, j)];
            if (a < 0) continue;
            for (auto [di, dj] : dirs) {
                if (!in_grid(i + di, j + dj)) continue;
                int b = mesh.grid_[cell(i + di, j + dj)];
                if (b < 0) continue;
                cplx za = vertices[static_cast<std::size_t>(a)], zb = vertices[static_cast<std::size_t>(b)];
                if (state[cell(i, j)] == 2 && state[cell(i + di, j + dj)] == 2 &&
                    domain.signed_distance(0.5 * (za + zb)) < -on_boundary_tol)
                    continue;
                if (!domain.segment_inside(za, zb, -on_boundary_tol)) continue;
                edges.emplace_back(a, b);
            }
        }
    // cut lattice edges at the boundary
    for (int j = mesh.j0_; j < mesh.j0_ + mesh.nj_; ++j)
        for (int i = mesh.i0_; i < mesh.i0_ + mesh.ni_; ++i) {
            if (state[cell(i, j)] != 1) continue;
            int a = mesh.grid_[cell(i, j)];
            for (auto [di, dj] : all_dirs) {
                if (!in_grid(i + di, j + dj) || state[cell(i + di, j + dj)] != 0) continue;
                cplx za = lattice_point(i, j), zb = lattice_point(i + di, j + dj);
                double t_in = 0.0, t_out = 1.0;
                for (int it = 0; it < 80; ++it) {
                    double tm = 0.5 * (t_in + t_out);
                    if (domain.signed_distance(za + tm * (zb - za)) > 0.0) t_in = tm;
                    else t_out = tm;
                }
                cplx zc = za + t_in * (zb - za);
                if (std::abs(zc - za) <= on_boundary_tol) continue;
                int c = static_cast<int>(vertices.size());
                vertices.push_back(zc);
                piece.push_back(domain.nearest_piece(zc));
                lattice.push_back({Mesh::kNoLattice, Mesh::kNoLattice});
                edges.emplace_back(a, c);
            }
        }

    mesh.vertices_ = std::move(vertices);
    mesh.piece_ = std::move(piece);
    mesh.lattice_ = std::move(lattice);
    mesh.edges_ = std::move(edges);
    mesh.build_adjacency();

    // Keep the largest connected component (stray lattice points near corners).
    if (!mesh.connected()) {
        std::vector<int> comp(mesh.vertices_.size(), -1);
        std::vector<std::size_t> sizes;
        for (std::size_t s0 = 0; s0 < mesh.vertices_.size(); ++s0) {
            if (comp[s0] >= 0) continue;
            int id = static_cast<int>(sizes.size());
            std::size_t count = 0;
            std::vector<int> stack{static_cast<int>(s0)};
            comp[s0] = id;
            while (!stack.empty()) {
                int v = stack.back();
                stack.pop_back();
                ++count;
                for (auto [w, e] : mesh.neighbors(v))
                    if (comp[static_cast<std::size_t>(w)] < 0) {
                        comp[static_cast<std::size_t>(w)] = id;
                        stack.push_back(w);
                    }
            }
            sizes.push_back(count);
        }
        int keep = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
        if (sizes[static_cast<std::size_t>(keep)] * 2 < mesh.vertices_.size())
            fail(ErrorCode::DegenerateDomain, "mesh falls apart into small components");
        std::vector<int> remap(mesh.vertices_.size(), -1);
        std::vector<cplx> nv;
        std::vector<int> np;
        std::vector<std::array<int, 2>> nl;
        for (std::size_t v = 0; v < mesh.vertices_.size(); ++v)
            if (comp[v] == keep) {
                remap[v] = static_cast<int>(nv.size());
                nv.push_back(mesh.vertices_[v]);
                np.push_back(mesh.piece_[v]);
                nl.push_back(mesh.lattice_[v]);
            }
        std::vector<std::pair<int, int>> ne;
        for (auto [a, b] : mesh.edges_)
            if (remap[static_cast<std::size_t>(a)] >= 0 && remap[static_cast<std::size_t>(b)] >= 0)
                ne.emplace_back(remap[static_cast<std::size_t>(a)], remap[static_cast<std::size_t>(b)]);
        for (auto& g : mesh.grid_)
            if (g >= 0) g = remap[static_cast<std::size_t>(g)];
        mesh.vertices_ = std::move(nv);
        mesh.piece_ = std::move(np);
        mesh.lattice_ = std::move(nl);
        mesh.edges_ = std::move(ne);
        mesh.build_adjacency();
    }
    if (mesh.vertices_.size() < 3) fail(ErrorCode::DegenerateDomain, "mesh has too few vertices");

    // Triangles from complete lattice squares halves.
    auto has_edge_between = [&](int a, int b) {
        for (auto [w, e] : mesh.neighbors(a))
            if (w == b) return true;
        return false;
    };
    for (std::size_t v = 0; v < mesh.vertices_.size(); ++v) {
        auto [i, j] = mesh.lattice_[v];
        if (i == Mesh::kNoLattice) continue;
        int a = static_cast<int>(v);
        int b = mesh.lattice_vertex(i + 1, j);
        int c = mesh.lattice_vertex(i + 1, j + 1);
        int d = mesh.lattice_vertex(i, j + 1);
        if (b >= 0 && c >= 0 && has_edge_between(a, b) && has_edge_between(b, c) && has_edge_between(a, c))
            mesh.triangles_.push_back({a, b, c});
        if (c >= 0 && d >= 0 && has_edge_between(a, c) && has_edge_between(c, d) && has_edge_between(a, d))
            mesh.triangles_.push_back({a, c, d});
    }
    return mesh;
}

/// The next mesh in the nested sequence (edge length halved).
inline Mesh refine(const Mesh& mesh) { return build_mesh(mesh.domain(), mesh.target_edge() / 2, mesh.level() + 1); }

/// Integral of form dzeta from p0 to p1 along a mesh-guided path: straight to
/// the nearest vertex, a shortest mesh path, then straight to p1. Optional
/// waypoints force the route (e.g. above or below a hole).
template <class Form>
ContourResult path_integrate(const Form& form, cplx p0, cplx p1, const Mesh& mesh, double tol,
                             const std::vector<cplx>& waypoints = {}) {
    const Domain& dom = mesh.domain();
    std::vector<cplx> stops{p0};
    stops.insert(stops.end(), waypoints.begin(), waypoints.end());
    stops.push_back(p1);
    for (auto z : stops)
        if (!dom.contains(z)) fail(ErrorCode::PathNotFound, "path endpoint lies outside the domain");

    std::vector<cplx> route{p0};
    auto push = [&](cplx z) {
        if (z != route.back()) route.push_back(z);
    };
    for (std::size_t k = 0; k + 1 < stops.size(); ++k) {
        int a = mesh.nearest_vertex(stops[k]);
        int b = mesh.nearest_vertex(stops[k + 1]);
        if (a < 0 || b < 0) fail(ErrorCode::PathNotFound, "no mesh vertex near an endpoint");
        if (!dom.segment_inside(stops[k], mesh.vertex(a)) || !dom.segment_inside(mesh.vertex(b), stops[k + 1]))
            fail(ErrorCode::PathNotFound, "endpoint cannot be joined to the mesh");
        auto verts = mesh.shortest_path(a, b);
        if (verts.empty()) fail(ErrorCode::PathNotFound, "mesh has no path between the endpoints");
        for (int v : verts) push(mesh.vertex(v));
        push(stops[k + 1]);
    }
    if (route.size() < 2) route.push_back(route.back());
    return contour_integrate(form, PathPolyline(route, false), tol, &dom);
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const Mesh& m) {
    nlohmann::json verts = nlohmann::json::array(), edges = nlohmann::json::array(), flags = nlohmann::json::array();
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
        verts.push_back(detail::complex_to_json(m.vertex(static_cast<int>(v))));
        flags.push_back(m.boundary_piece(static_cast<int>(v)));
    }
    for (auto [a, b] : m.edges()) edges.push_back({a, b});
    return {{"domain", to_json(m.domain())}, {"target_edge", m.target_edge()}, {"level", m.level()},
            {"vertices", verts}, {"edges", edges}, {"boundary_piece", flags}};
}

/// Rebuilds the mesh from its domain and target edge, then checks the stored
/// vertex count (meshes are a deterministic function of those two values).
inline Mesh mesh_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("domain") || !j.contains("target_edge"))
        fail(ErrorCode::ParseError, "mesh needs 'domain' and 'target_edge'");
    Mesh m = build_mesh(domain_from_json(j.at("domain")), detail::finite_number(j, "target_edge"),
                        j.contains("level") ? j.at("level").get<int>() : 0);
    if (j.contains("vertices") && j.at("vertices").size() != m.vertex_count())
        fail(ErrorCode::ParseError, "stored mesh does not match its domain and edge length");
    return m;
}

} // namespace minsurf
