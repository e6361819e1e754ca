#pragma once

// Conformal metrics lambda^2 |dzeta|^2, Gauss curvature from spinor data,
// geodesic distance to the ideal boundary by stencil shortest paths on nested
// lattices, and the Osserman quantity |K| d^2.

#include "domain.hpp"
#include "errors.hpp"
#include "holomorphic.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"
#include "weierstrass.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <future>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

namespace minsurf {

/// Conformal factor lambda of the metric lambda^2 |dzeta|^2.
class ConformalMetric {
public:
    using Fn = std::function<double(cplx)>;

    /// lambda^2 = sum |f_k|^2.
    static ConformalMetric from_form(const NullForm& form) {
        return ConformalMetric([form](cplx z) { return std::sqrt(form(z).squaredNorm()); }, "form:" + form.label());
    }
    static ConformalMetric from_function(Fn lambda, std::string label = "lambda") { return ConformalMetric(std::move(lambda), std::move(label)); }

    double operator()(cplx z) const { return lambda_(z); }
    const std::string& label() const { return label_; }

    ConformalMetric scaled(double c) const {
        auto f = lambda_;
        return ConformalMetric([f, c](cplx z) { return c * f(z); }, label_ + "*" + std::to_string(c));
    }

private:
    ConformalMetric(Fn f, std::string label) : lambda_(std::move(f)), label_(std::move(label)) {}
    Fn lambda_;
    std::string label_;
};

/// (1 + |g|^2)^2 |phi3|^2 / (2 |g|^2).
inline double spinor_lambda_squared(const WeierstrassPair& pair, cplx z) {
    const double a = std::abs(pair.g(z));
    const double p = std::abs(pair.phi3(z));
    const double s = a + 1.0 / a;
    return s * s * p * p / 2.0;
}

/// K = -16 |g|^2 |g'|^2 / (|phi3|^2 (1 + |g|^2)^4). For |g| > 1 it is
/// evaluated as -16 (|g'|/|g|)^2 s^4 / |phi3|^2 with s = 1 / (|g| + 1/|g|) to
/// stay finite. An opaque g needs the domain for its Cauchy derivative
/// estimate.
inline double gauss_curvature(const WeierstrassPair& pair, cplx p, const Domain* domain = nullptr) {
    const double phi = std::abs(pair.phi3(p));
    if (!(phi >= 1e-12)) fail(ErrorCode::MetricDegenerate, "phi3 vanishes at the probe point");
    cplx dg;
    if (pair.g.has_derivative()) dg = pair.g.derivative()(p);
    else if (domain) dg = derivative_at(pair.g, p, *domain);
    else fail(ErrorCode::InvalidArgument, "opaque Gauss map needs a domain for its derivative");
    const double a = std::abs(pair.g(p));
    if (a <= 1.0) {
        const double t = 1.0 + a * a;
        return -16.0 * a * a * std::norm(dg) / (phi * phi * t * t * t * t);
    }
    const double s = 1.0 / (a + 1.0 / a);
    const double q = std::abs(dg) / a;
    return -16.0 * q * q * s * s * s * s / (phi * phi);
}

// ---------------------------------------------------------------------------
// Geodesic distance

struct GeodesicOptions {
    int levels = 3;   // mesh levels h, 2h, 4h, ...
    int stencil = 4;  // primitive lattice steps (a, b) with |a|, |b| <= stencil
};

struct GeodesicEstimate {
    double value = 0.0;  // extrapolated
    double lower = 0.0;
    double upper = 0.0;  // finest level
    double order = 0.0;  // observed convergence order (0 if not extrapolated)
    std::vector<double> edge_lengths;  // coarse to fine
    std::vector<double> level_values;  // coarse to fine
};

namespace detail {

inline std::vector<std::array<int, 2>> stencil_vectors(int k) {
    std::vector<std::array<int, 2>> out;
    for (int a = -k; a <= k; ++a)
        for (int b = -k; b <= k; ++b)
            if ((a != 0 || b != 0) && std::gcd(a, b) == 1) out.push_back({a, b});
    return out;
}

/// Five-point Gauss-Legendre line integral of lambda |dz| over [a, b].
inline double segment_cost(const ConformalMetric& m, cplx a, cplx b) {
    static constexpr std::array<double, 5> x = {-0.906179845938663992797627, -0.538469310105683091036314, 0.0,
                                                0.538469310105683091036314, 0.906179845938663992797627};
    static constexpr std::array<double, 5> w = {0.236926885056189087514264, 0.478628670499366468041292, 0.568888888888888888888889,
                                                0.478628670499366468041292, 0.236926885056189087514264};
    const cplx mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double sum = 0.0;
    for (int k = 0; k < 5; ++k) sum += w[static_cast<std::size_t>(k)] * m(mid + half * x[static_cast<std::size_t>(k)]);
    return sum * std::abs(half);
}

/// Adaptive line integral for long segments (source links and exits).
inline double long_segment_cost(const ConformalMetric& m, cplx a, cplx b) {
    const double len = std::abs(b - a);
    if (len == 0.0) return 0.0;
    const double scale = len * std::max(m(0.5 * (a + b)), 1e-300);
    try {
        auto [v, err] = contour_integrate_scalar([&](cplx z) { return cplx(m(z)); }, PathPolyline::segment(a, b), 1e-10 * scale);
        (void)err;
        return std::abs(v);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NonConvergent) return std::numeric_limits<double>::infinity();
        throw;
    }
}

/// Cheapest straight exit from z to a non-artificial boundary piece.
inline double exit_cost(const ConformalMetric& m, const Domain& dom, cplx z, double margin) {
    double best = std::numeric_limits<double>::infinity();
    for (int piece = 0; piece < dom.boundary_piece_count(); ++piece) {
        if (dom.is_artificial(piece)) continue;
        cplx q = dom.project_to_piece(z, piece);
        if (!dom.segment_inside(z, q, -margin)) continue;
        best = std::min(best, long_segment_cost(m, z, q));
    }
    return best;
}

/// Single-source shortest paths over the lattice of `mesh` with stencil edges.
/// The source links to every lattice vertex within `source_radius`. With
/// `to_boundary` the search stops once no cheaper exit can appear and returns
/// the distance to the ideal boundary; otherwise all distances are filled in.
inline double lattice_dijkstra(const ConformalMetric& m, const Mesh& mesh, cplx p, int stencil, double source_radius,
                               bool to_boundary, std::vector<double>* all = nullptr) {
    const Domain& dom = mesh.domain();
    const double s = mesh.spacing();
    const double margin = 1e-9 * s;
    const auto steps = stencil_vectors(stencil);
    const int V = static_cast<int>(mesh.vertex_count());
    const int source = V;
    std::vector<double> dist(static_cast<std::size_t>(V) + 1, std::numeric_limits<double>::infinity());
    std::vector<char> done(static_cast<std::size_t>(V) + 1, 0);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[static_cast<std::size_t>(source)] = 0.0;
    heap.push({0.0, source});
    double best = std::numeric_limits<double>::infinity();

    auto relax = [&](int v, double d, int w, cplx from, cplx to, bool long_edge) {
        if (done[static_cast<std::size_t>(w)]) return;
        if (!dom.segment_inside(from, to, -margin)) return;
        double nd = d + (long_edge ? long_segment_cost(m, from, to) : segment_cost(m, from, to));
        (void)v;
        if (nd < dist[static_cast<std::size_t>(w)]) {
            dist[static_cast<std::size_t>(w)] = nd;
            heap.push({nd, w});
        }
    };

    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (done[static_cast<std::size_t>(v)] || d > dist[static_cast<std::size_t>(v)]) continue;
        if (to_boundary && d >= best) break;
        done[static_cast<std::size_t>(v)] = 1;
        const cplx z = v == source ? p : mesh.vertex(v);
        if (to_boundary) best = std::min(best, d + exit_cost(m, dom, z, margin));
        if (v == source) {
            const int r = static_cast<int>(std::ceil(source_radius / s));
            const int ci = static_cast<int>(std::lround(p.real() / s)), cj = static_cast<int>(std::lround(p.imag() / s));
            for (int i = ci - r; i <= ci + r; ++i)
                for (int j = cj - r; j <= cj + r; ++j) {
                    int w = mesh.lattice_vertex(i, j);
                    if (w < 0 || std::abs(mesh.vertex(w) - p) > source_radius) continue;
                    relax(v, d, w, p, mesh.vertex(w), true);
                }
            continue;
        }
        if (!mesh.on_lattice(v)) continue;
        auto [i, j] = mesh.lattice_index(v);
        for (auto [a, b] : steps) {
            int w = mesh.lattice_vertex(i + a, j + b);
            if (w >= 0) relax(v, d, w, z, mesh.vertex(w), false);
        }
    }
    if (all) {
        dist.pop_back();
        *all = std::move(dist);
    }
    return best;
}

inline std::vector<Mesh> mesh_hierarchy(const Mesh& finest, int levels) {
    std::vector<Mesh> out{finest};
    for (int k = 1; k < levels; ++k) out.push_back(build_mesh(finest.domain(), finest.target_edge() * std::ldexp(1.0, k), finest.level() - k));
    return out;
}

/// Richardson extrapolation of values at h, 2h, 4h (finest first).
inline void extrapolate(const std::vector<double>& fine_first, GeodesicEstimate& est) {
    const double d0 = fine_first.front();
    est.upper = d0;
    est.value = d0;
    est.order = 0.0;
    if (fine_first.size() >= 3) {
        const double diff1 = fine_first[1] - fine_first[0];
        const double diff2 = fine_first[2] - fine_first[1];
        if (diff1 > 0 && diff2 > diff1) {
            est.order = std::clamp(std::log2(diff2 / diff1), 0.5, 4.0);
            est.value = d0 - diff1 / (std::exp2(est.order) - 1.0);
        }
    }
    est.lower = std::min(est.value, d0);
}

} // namespace detail

/// Metric distance from p to the ideal boundary on a hierarchy of nested
/// lattices (finest first). Each level value is the length of an explicit
/// polyline to the boundary, hence an upper bound up to quadrature error.
inline GeodesicEstimate geodesic_distance(const ConformalMetric& metric, cplx p, const std::vector<Mesh>& hierarchy,
                                          const GeodesicOptions& opt = {}) {
    if (hierarchy.empty()) fail(ErrorCode::InvalidArgument, "empty mesh hierarchy");
    const Domain& dom = hierarchy.front().domain();
    if (!dom.contains(p)) fail(ErrorCode::InvalidArgument, "probe point outside the domain");
    bool any_ideal = false;
    for (int k = 0; k < dom.boundary_piece_count(); ++k) any_ideal = any_ideal || !dom.is_artificial(k);
    if (!any_ideal) fail(ErrorCode::UnreachableBoundary, "domain has no ideal boundary");
    const double source_radius = opt.stencil * hierarchy.back().spacing();
    std::vector<double> values;
    for (const auto& mesh : hierarchy) {
        double d = detail::lattice_dijkstra(metric, mesh, p, opt.stencil, source_radius, true);
        if (!std::isfinite(d)) fail(ErrorCode::UnreachableBoundary, "no path to the ideal boundary");
        values.push_back(d);
    }
    GeodesicEstimate est;
    detail::extrapolate(values, est);
    for (auto it = hierarchy.rbegin(); it != hierarchy.rend(); ++it) est.edge_lengths.push_back(it->target_edge());
    est.level_values.assign(values.rbegin(), values.rend());
    return est;
}

inline GeodesicEstimate geodesic_distance(const ConformalMetric& metric, cplx p, const Mesh& mesh, const GeodesicOptions& opt = {}) {
    return geodesic_distance(metric, p, detail::mesh_hierarchy(mesh, opt.levels), opt);
}

// ---------------------------------------------------------------------------
// Osserman quantity

struct OssermanRecord {
    std::string label;
    double K = 0.0;
    double d = 0.0;
    double d_lower = 0.0;
    double d_upper = 0.0;
    double product = 0.0;  // |K| d^2
    double product_lower = 0.0;
    double product_upper = 0.0;
    GeodesicEstimate distance;
};

inline OssermanRecord make_record(std::string label, double K, const GeodesicEstimate& d) {
    OssermanRecord r;
    r.label = std::move(label);
    r.K = K;
    r.distance = d;
    r.d = d.value;
    r.d_lower = d.lower;
    r.d_upper = d.upper;
    r.product = std::abs(K) * r.d * r.d;
    r.product_lower = std::abs(K) * r.d_lower * r.d_lower;
    r.product_upper = std::abs(K) * r.d_upper * r.d_upper;
    return r;
}

/// Curvature from the spinor data, distance from the metric of `form`.
inline OssermanRecord osserman_quantity(const WeierstrassPair& pair, const NullForm& form, cplx p,
                                        const std::vector<Mesh>& hierarchy, const GeodesicOptions& opt = {},
                                        std::string label = "") {
    const double K = gauss_curvature(pair, p, &hierarchy.front().domain());
    return make_record(std::move(label), K, geodesic_distance(ConformalMetric::from_form(form), p, hierarchy, opt));
}

struct FamilyMember {
    std::string label;
    WeierstrassPair pair;
    NullForm form;
};

struct OssermanProfile {
    std::vector<OssermanRecord> records;
    std::vector<std::pair<double, int>> first_entry;  // (threshold, first index with product > threshold, or -1)
};

/// Records for every member (computed concurrently) plus, per threshold, the
/// first member whose product exceeds it.
inline OssermanProfile osserman_profile(const std::vector<FamilyMember>& family, cplx p0, const std::vector<Mesh>& hierarchy,
                                        const std::vector<double>& thresholds = {}, const GeodesicOptions& opt = {}) {
    std::vector<std::future<OssermanRecord>> jobs;
    for (const auto& m : family)
        jobs.push_back(std::async(std::launch::async, [&m, &hierarchy, p0, opt] {
            return osserman_quantity(m.pair, m.form, p0, hierarchy, opt, m.label);
        }));
    OssermanProfile out;
    for (auto& j : jobs) out.records.push_back(j.get());
    for (double t : thresholds) {
        int first = -1;
        for (std::size_t k = 0; k < out.records.size(); ++k)
            if (out.records[k].product > t) {
                first = static_cast<int>(k);
                break;
            }
        out.first_entry.push_back({t, first});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Completeness probe

struct GrowthReport {
    std::vector<double> radii;
    std::vector<GeodesicEstimate> distances;  // d(p, |zeta| = r_j)
    std::vector<double> thresholds;
    std::string verdict;  // "completeness-consistent" or "bounded"
};

/// Distances from p to the circles |zeta| = r_j of an exhaustion by discs
/// about the origin. Consistency with completeness means the last distance
/// passes every threshold; nothing beyond the probed scale is claimed.
inline GrowthReport completeness_probe(const ConformalMetric& metric, const std::vector<Mesh>& hierarchy, cplx p,
                                       const std::vector<double>& radii, const std::vector<double>& thresholds,
                                       const GeodesicOptions& opt = {}) {
    if (radii.empty()) fail(ErrorCode::InvalidArgument, "need at least one exhaustion radius");
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (k > 0 && !(radii[k] > radii[k - 1])) fail(ErrorCode::InvalidArgument, "exhaustion radii must increase");
        if (!(radii[k] > std::abs(p))) fail(ErrorCode::InvalidArgument, "probe point must lie inside every exhaustion disc");
    }
    const Domain& dom = hierarchy.front().domain();
    const double source_radius = opt.stencil * hierarchy.back().spacing();
    std::vector<std::vector<double>> per_level(radii.size());
    for (const auto& mesh : hierarchy) {
        std::vector<double> dist;
        detail::lattice_dijkstra(metric, mesh, p, opt.stencil, source_radius, false, &dist);
        const double band = 2.0 * opt.stencil * mesh.spacing();
        for (std::size_t k = 0; k < radii.size(); ++k) {
            const double r = radii[k];
            double best = std::numeric_limits<double>::infinity();
            auto consider = [&](cplx z, double d) {
                double rz = std::abs(z);
                if (!std::isfinite(d) || rz >= r || r - rz > band) return;
                cplx q = rz > 0 ? z * (r / rz) : cplx(r, 0);
                if (!dom.segment_inside(z, q, -1e-12)) return;
                best = std::min(best, d + detail::long_segment_cost(metric, z, q));
            };
            for (std::size_t v = 0; v < dist.size(); ++v) consider(mesh.vertex(static_cast<int>(v)), dist[v]);
            if (r - std::abs(p) <= band) consider(p, 0.0);
            per_level[k].push_back(best);
        }
    }
    GrowthReport rep;
    rep.radii = radii;
    rep.thresholds = thresholds;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        if (!std::isfinite(per_level[k].front())) fail(ErrorCode::UnreachableBoundary, "exhaustion circle not reachable");
        GeodesicEstimate est;
        detail::extrapolate(per_level[k], est);
        for (auto it = hierarchy.rbegin(); it != hierarchy.rend(); ++it) est.edge_lengths.push_back(it->target_edge());
        est.level_values.assign(per_level[k].rbegin(), per_level[k].rend());
        rep.distances.push_back(est);
    }
    const double last = rep.distances.back().lower;
    bool beyond = !thresholds.empty();
    for (double t : thresholds) beyond = beyond && last > t;
    rep.verdict = beyond ? "completeness-consistent" : "bounded";
    return rep;
}

// ---------------------------------------------------------------------------
// Discrete curvature of the immersed mesh

struct DiscreteCurvature {
    int vertex;
    cplx z;
    double K;
};

/// Angle-defect curvature (2 pi - sum of angles) / (area / 3) of the image of
/// every interior lattice vertex with its full ring of six triangles.
inline std::vector<DiscreteCurvature> angle_defect_curvature(const Immersion& u) {
    const Mesh& mesh = u.mesh();
    const std::size_t V = mesh.vertex_count();
    std::vector<double> angle(V, 0.0), area(V, 0.0);
    std::vector<int> count(V, 0);
    for (const auto& t : mesh.triangles()) {
        std::array<Eigen::VectorXd, 3> x{u.at_vertex(t[0]), u.at_vertex(t[1]), u.at_vertex(t[2])};
        const double a = 0.5 * std::sqrt(std::max(0.0, (x[1] - x[0]).squaredNorm() * (x[2] - x[0]).squaredNorm() -
                                                        std::pow((x[1] - x[0]).dot(x[2] - x[0]), 2)));
        for (int k = 0; k < 3; ++k) {
            const Eigen::VectorXd e1 = x[static_cast<std::size_t>((k + 1) % 3)] - x[static_cast<std::size_t>(k)];
            const Eigen::VectorXd e2 = x[static_cast<std::size_t>((k + 2) % 3)] - x[static_cast<std::size_t>(k)];
            const double cross = std::sqrt(std::max(0.0, e1.squaredNorm() * e2.squaredNorm() - std::pow(e1.dot(e2), 2)));
            const auto v = static_cast<std::size_t>(t[static_cast<std::size_t>(k)]);
            angle[v] += std::atan2(cross, e1.dot(e2));
            area[v] += a / 3.0;
            ++count[v];
        }
    }
    std::vector<DiscreteCurvature> out;
    for (std::size_t v = 0; v < V; ++v) {
        const int iv = static_cast<int>(v);
        if (count[v] != 6 || mesh.is_boundary(iv)) continue;
        out.push_back({iv, mesh.vertex(iv), (2 * kPi - angle[v]) / area[v]});
    }
    return out;
}

} // namespace minsurf
