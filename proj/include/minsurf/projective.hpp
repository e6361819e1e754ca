#pragma once

// Projective points, the Fubini-Study distance, argument-principle tools, and
// the multiplier constructions used to move a holomorphic n-tuple inside its
// projective class: divisor multipliers built from elementary factors
// (h - h(q)) / h, and gauge alignment phi * g ~ f on a compact set.

#include "domain.hpp"
#include "errors.hpp"
#include "holomorphic.hpp"
#include "quadrature.hpp"
#include "sampling.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace minsurf {

// ---------------------------------------------------------------------------
// Projective points

/// Point of CP^{n-1} stored as its canonical representative: unit Euclidean
/// norm, first nonzero coordinate real and positive.
class ProjectivePoint {
public:
    explicit ProjectivePoint(const CVector& homogeneous) {
        const double norm = homogeneous.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) fail(ErrorCode::InvalidArgument, "projective point needs a nonzero finite vector");
        const double cutoff = 1e-14 * homogeneous.cwiseAbs().maxCoeff();
        Eigen::Index lead = 0;
        while (std::abs(homogeneous[lead]) <= cutoff) ++lead;
        const cplx phase = std::conj(homogeneous[lead]) / std::abs(homogeneous[lead]);
        coords_ = homogeneous * (phase / norm);
        coords_[lead] = std::abs(coords_[lead]);
    }

    const CVector& coords() const { return coords_; }
    Eigen::Index dimension() const { return coords_.size(); }

    /// sum_k z_k^2 of the representative; zero on the quadric.
    cplx quadric_residual() const { return (coords_.array() * coords_.array()).sum(); }

private:
    CVector coords_;
};

/// arccos(|z . conj(w)| / (|z| |w|)) for any nonzero representatives, computed
/// as atan2(|z ^ w|, |z . conj(w)|) to stay accurate near 0.
inline double fs_distance(const CVector& z, const CVector& w) {
    if (z.size() != w.size()) fail(ErrorCode::InvalidArgument, "projective points of different dimension");
    const double nz = z.norm(), nw = w.norm();
    if (!(nz > 0.0) || !(nw > 0.0)) fail(ErrorCode::InvalidArgument, "zero vector is not a projective point");
    const CVector zu = z / nz, wu = w / nw;
    const double inner = std::abs(zu.dot(wu)); // Eigen's dot conjugates the first argument
    double wedge2 = 0.0;
    for (Eigen::Index i = 0; i < zu.size(); ++i)
        for (Eigen::Index j = i + 1; j < zu.size(); ++j) wedge2 += std::norm(zu[i] * wu[j] - zu[j] * wu[i]);
    return std::atan2(std::sqrt(wedge2), inner);
}

inline double fs_distance(const ProjectivePoint& z, const ProjectivePoint& w) { return fs_distance(z.coords(), w.coords()); }

// ---------------------------------------------------------------------------
// Winding numbers

struct WindingResult {
    int value = 0;
    double raw = 0.0;       // pre-rounding value
    double min_modulus = 0; // of f on the loop samples
};

namespace detail {

inline double min_modulus_on(const HolomorphicFn& f, const PathPolyline& loop, int per_segment = 8) {
    double m = std::numeric_limits<double>::infinity();
    const auto& v = loop.vertices();
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        for (int k = 0; k < per_segment; ++k) m = std::min(m, std::abs(f(v[i] + (v[i + 1] - v[i]) * (double(k) / per_segment))));
    return m;
}

/// Continuous-argument tracking along a segment, subdividing until each step
/// turns by less than pi/8.
inline double arg_increment(const HolomorphicFn& f, cplx a, cplx b, cplx fa, cplx fb, int depth) {
    double step = std::arg(fb / fa);
    if (std::abs(step) < kPi / 8 || depth > 40) return step;
    cplx m = 0.5 * (a + b);
    cplx fm = f(m);
    return arg_increment(f, a, m, fa, fm, depth + 1) + arg_increment(f, m, b, fm, fb, depth + 1);
}

} // namespace detail

/// (1 / 2 pi i) times the integral of f'/f around a closed loop, rounded. Uses
/// the closed-form derivative when available and continuous-argument tracking
/// otherwise. Rejects loops where |f| < 1e-10 and results farther than 1e-3
/// from an integer.
inline WindingResult winding_number_detail(const HolomorphicFn& f, const PathPolyline& loop, double tol = 1e-9) {
    if (!loop.closed()) fail(ErrorCode::InvalidArgument, "winding number needs a closed loop");
    WindingResult r;
    r.min_modulus = detail::min_modulus_on(f, loop);
    if (!(r.min_modulus >= 1e-10)) fail(ErrorCode::ZeroOnContour, "function (nearly) vanishes on the loop");
    if (f.has_derivative()) {
        const HolomorphicFn df = f.derivative();
        auto [val, err] = contour_integrate_scalar([&](cplx z) { return df(z) / f(z); }, loop, tol);
        (void)err;
        cplx w = val / (2.0 * kPi * kI);
        r.raw = w.real();
        if (std::abs(w.imag()) > 1e-3) fail(ErrorCode::NonIntegerResult, "winding integral has an imaginary part");
    } else {
        const auto& v = loop.vertices();
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < v.size(); ++i) total += detail::arg_increment(f, v[i], v[i + 1], f(v[i]), f(v[i + 1]), 0);
        r.raw = total / (2 * kPi);
    }
    r.value = static_cast<int>(std::lround(r.raw));
    if (std::abs(r.raw - r.value) > 1e-3) fail(ErrorCode::NonIntegerResult, "winding number is not close to an integer");
    return r;
}

inline int winding_number(const HolomorphicFn& f, const PathPolyline& loop) { return winding_number_detail(f, loop).value; }

/// Sum of winding numbers over the oriented boundary components of a region.
inline int zero_count(const HolomorphicFn& f, const std::vector<PathPolyline>& boundary) {
    int total = 0;
    for (const auto& b : boundary) total += winding_number(f, b);
    return total;
}

/// Zeros of f enclosed by the oriented boundary, located from the power sums
/// s_k = (1/2 pi i) * integral of zeta^k f'/f (Newton identities, then the
/// companion matrix). Multiple zeros appear repeated.
inline std::vector<cplx> locate_zeros(const HolomorphicFn& f, const std::vector<PathPolyline>& boundary, double tol = 1e-11) {
    const int m = zero_count(f, boundary);
    if (m < 0) fail(ErrorCode::InvalidArgument, "function has poles inside the region");
    if (m == 0) return {};
    const HolomorphicFn df = f.derivative();
    std::vector<cplx> power(static_cast<std::size_t>(m) + 1, 0.0);
    for (const auto& b : boundary) {
        auto r = contour_integrate(
            [&](cplx z) {
                CVector out(m);
                cplx ratio = df(z) / f(z);
                cplx zk = z;
                for (int k = 0; k < m; ++k) {
                    out[k] = zk * ratio;
                    zk *= z;
                }
                return out;
            },
            b, tol);
        for (int k = 0; k < m; ++k) power[static_cast<std::size_t>(k) + 1] += r.value[k] / (2.0 * kPi * kI);
    }
    // Elementary symmetric polynomials e_k from power sums.
    std::vector<cplx> e(static_cast<std::size_t>(m) + 1, 0.0);
    e[0] = 1.0;
    for (int k = 1; k <= m; ++k) {
        cplx acc = 0.0;
        for (int i = 1; i <= k; ++i) acc += (i % 2 == 1 ? 1.0 : -1.0) * e[static_cast<std::size_t>(k - i)] * power[static_cast<std::size_t>(i)];
        e[static_cast<std::size_t>(k)] = acc / double(k);
    }
    // monic polynomial z^m - e1 z^{m-1} + e2 z^{m-2} - ...
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(m, m);
    for (int k = 1; k <= m; ++k) companion(0, k - 1) = -(k % 2 == 1 ? -1.0 : 1.0) * e[static_cast<std::size_t>(k)];
    for (int k = 1; k < m; ++k) companion(k, k - 1) = 1.0;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion);
    std::vector<cplx> roots;
    for (int k = 0; k < m; ++k) roots.push_back(solver.eigenvalues()[k]);
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
    return roots;
}

// ---------------------------------------------------------------------------
// Divisors and compact sets

/// Finite formal product of points with positive multiplicities.
class Divisor {
public:
    Divisor() = default;
    explicit Divisor(std::vector<std::pair<cplx, int>> points, double min_separation = 1e-12) : points_(std::move(points)) {
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (points_[i].second < 1) fail(ErrorCode::InvalidArgument, "divisor multiplicities must be >= 1");
            for (std::size_t j = i + 1; j < points_.size(); ++j)
                if (std::abs(points_[i].first - points_[j].first) <= min_separation)
                    fail(ErrorCode::InvalidArgument, "divisor points must be pairwise distinct");
        }
    }

    const std::vector<std::pair<cplx, int>>& points() const { return points_; }
    int order() const {
        int m = 0;
        for (const auto& p : points_) m += p.second;
        return m;
    }

    /// Group nearly coincident points (e.g. numerically located multiple zeros).
    static Divisor from_roots(const std::vector<cplx>& roots, double cluster_tol) {
        std::vector<std::pair<cplx, int>> pts;
        std::vector<std::vector<cplx>> members;
        for (auto r : roots) {
            bool placed = false;
            for (std::size_t k = 0; k < pts.size(); ++k)
                if (std::abs(pts[k].first - r) <= cluster_tol) {
                    members[k].push_back(r);
                    cplx mean = 0.0;
                    for (auto x : members[k]) mean += x;
                    pts[k] = {mean / double(members[k].size()), pts[k].second + 1};
                    placed = true;
                    break;
                }
            if (!placed) {
                pts.push_back({r, 1});
                members.push_back({r});
            }
        }
        return Divisor(pts, 0.0);
    }

private:
    std::vector<std::pair<cplx, int>> points_;
};

/// Closed disc or closed round annulus (about `center`) playing the role of the
/// compact set L. bL is oriented with the region on the left.
class CompactL {
public:
    static CompactL disc(cplx center, double radius) {
        if (!(radius > 0.0)) fail(ErrorCode::InvalidArgument, "compact disc needs a positive radius");
        CompactL l;
        l.center_ = center;
        l.outer_ = radius;
        return l;
    }
    static CompactL annulus(cplx center, double inner, double outer) {
        if (!(inner > 0.0 && inner < outer)) fail(ErrorCode::InvalidArgument, "compact annulus needs 0 < inner < outer");
        CompactL l;
        l.center_ = center;
        l.inner_ = inner;
        l.outer_ = outer;
        return l;
    }

    bool is_annulus() const { return inner_ > 0.0; }
    cplx center() const { return center_; }
    double inner_radius() const { return inner_; }
    double outer_radius() const { return outer_; }

    bool contains(cplx z) const {
        double r = std::abs(z - center_);
        return r <= outer_ && r >= inner_;
    }
    /// Distance from an interior point to bL.
    double boundary_distance(cplx z) const {
        double r = std::abs(z - center_);
        return is_annulus() ? std::min(r - inner_, outer_ - r) : outer_ - r;
    }
    /// Whether L sits inside the host domain (checked on bL).
    bool inside(const Domain& host) const {
        for (const auto& b : boundary(256))
            if (!b.inside(host)) return false;
        return true;
    }

    std::vector<PathPolyline> boundary(int n = 512) const {
        std::vector<PathPolyline> out{PathPolyline::circle(center_, outer_, n)};
        if (is_annulus()) out.push_back(PathPolyline::circle(center_, -inner_, n));
        return out;
    }

    /// Deterministic nested point sequence: the first n points of a longer
    /// request are exactly the shorter request. Even indices lie on bL (van der
    /// Corput in angle), odd indices in the interior (Halton 2,3).
    std::vector<cplx> samples(int n) const {
        std::vector<cplx> pts;
        pts.reserve(static_cast<std::size_t>(n));
        int boundary_k = 0, interior_k = 0;
        for (int i = 0; i < n; ++i) {
            if (i % 2 == 0) {
                int k = boundary_k++;
                bool inner = is_annulus() && (k % 2 == 1);
                double t = radical_inverse(is_annulus() ? k / 2 + 1 : k + 1, 2);
                pts.push_back(center_ + std::polar(inner ? inner_ : outer_, 2 * kPi * t));
            } else {
                for (;;) {
                    int k = ++interior_k;
                    cplx p = center_ + cplx((2 * radical_inverse(k, 2) - 1) * outer_, (2 * radical_inverse(k, 3) - 1) * outer_);
                    if (contains(p)) {
                        pts.push_back(p);
                        break;
                    }
                }
            }
        }
        return pts;
    }

    /// Dense samples on bL only.
    std::vector<cplx> boundary_samples(int per_component) const {
        std::vector<cplx> pts;
        for (int k = 0; k < per_component; ++k) {
            double a = 2 * kPi * (k + 0.5) / per_component;
            pts.push_back(center_ + std::polar(outer_, a));
            if (is_annulus()) pts.push_back(center_ + std::polar(inner_, a));
        }
        return pts;
    }

private:
    cplx center_{};
    double inner_ = 0.0;
    double outer_ = 0.0;
};

// ---------------------------------------------------------------------------
// Divisor multipliers

struct WindingCheck {
    cplx point;
    double radius;
    int expected;
    int measured;
};

struct DivisorMultiplier {
    HolomorphicFn psi;
    double boundary_deviation = 0.0; // ||psi - 1|| on bL
    std::vector<WindingCheck> checks;
    bool divisor_verified = false;
};

namespace detail {

inline std::vector<double> default_disc_radii(const std::vector<cplx>& centers, const CompactL& L) {
    std::vector<double> radii;
    for (std::size_t j = 0; j < centers.size(); ++j) {
        double r = L.boundary_distance(centers[j]);
        for (std::size_t k = 0; k < centers.size(); ++k)
            if (k != j) r = std::min(r, 0.5 * std::abs(centers[j] - centers[k]));
        radii.push_back(0.9 * r);
    }
    return radii;
}

inline double sup_on(const std::vector<cplx>& pts, const std::function<double(cplx)>& fn) {
    double m = 0.0;
    for (auto p : pts) m = std::max(m, fn(p));
    return m;
}

inline double inf_on(const std::vector<cplx>& pts, const std::function<double(cplx)>& fn) {
    double m = std::numeric_limits<double>::infinity();
    for (auto p : pts) m = std::min(m, fn(p));
    return m;
}

} // namespace detail

/// Meromorphic Psi on L with divisor E * E0^{-1}: the product of elementary
/// factors (h_j - h_j(q)) / h_j over the points q of E lying in the disc D_j
/// around the j-th support point of E0. `charts[j]` must vanish simply at the
/// j-th support point and nowhere else on L; `disc_radii` defaults to 0.9 of
/// the largest admissible radius.
inline DivisorMultiplier divisor_multiplier(const Divisor& E0, const Divisor& E, const CompactL& L,
                                            const std::vector<HolomorphicFn>& charts,
                                            std::vector<double> disc_radii = {}) {
    if (E0.order() != E.order()) fail(ErrorCode::OrderMismatch, "divisors have different orders");
    const auto& support = E0.points();
    if (charts.size() != support.size()) fail(ErrorCode::InvalidArgument, "need one chart per support point of E0");
    std::vector<cplx> centers;
    for (const auto& [p, nu] : support) {
        if (!L.contains(p) || L.boundary_distance(p) <= 0.0) fail(ErrorCode::InvalidArgument, "E0 must lie in the interior of L");
        centers.push_back(p);
    }
    if (disc_radii.empty()) disc_radii = detail::default_disc_radii(centers, L);
    if (disc_radii.size() != centers.size()) fail(ErrorCode::InvalidArgument, "need one disc radius per support point");

    for (std::size_t j = 0; j < centers.size(); ++j) {
        if (std::abs(charts[j](centers[j])) > 1e-12) fail(ErrorCode::InvalidArgument, "chart does not vanish at its point");
        if (winding_number(charts[j], PathPolyline::circle(centers[j], disc_radii[j], 128)) != 1 ||
            zero_count(charts[j], L.boundary()) != 1)
            fail(ErrorCode::InvalidArgument, "chart must vanish simply at its point and nowhere else on L");
    }

    // Assign the points of E to discs.
    std::vector<std::vector<cplx>> assigned(centers.size());
    for (const auto& [q, mult] : E.points()) {
        int home = -1;
        for (std::size_t j = 0; j < centers.size(); ++j)
            if (std::abs(q - centers[j]) < disc_radii[j]) home = static_cast<int>(j);
        if (home < 0) fail(ErrorCode::PointOutsideNeighborhood, "a point of E lies outside every disc D_j");
        for (int k = 0; k < mult; ++k) assigned[static_cast<std::size_t>(home)].push_back(q);
    }
    for (std::size_t j = 0; j < centers.size(); ++j)
        if (static_cast<int>(assigned[j].size()) != support[j].second)
            fail(ErrorCode::PointOutsideNeighborhood, "disc D_j does not hold exactly nu_j points of E");

    bool symbolic = std::all_of(charts.begin(), charts.end(), [](const HolomorphicFn& h) { return h.has_expression(); });
    DivisorMultiplier out;
    if (symbolic) {
        Expr prod = Expr::constant(1.0);
        for (std::size_t j = 0; j < centers.size(); ++j)
            for (cplx q : assigned[j]) {
                const Expr& h = charts[j].expression();
                prod = prod * ((h - Expr::constant(charts[j](q))) / h);
            }
        out.psi = HolomorphicFn(prod);
    } else {
        auto charts_copy = charts;
        std::vector<std::vector<cplx>> values(centers.size());
        for (std::size_t j = 0; j < centers.size(); ++j)
            for (cplx q : assigned[j]) values[j].push_back(charts[j](q));
        out.psi = HolomorphicFn::opaque(
            [charts_copy, values](cplx z) {
                cplx prod = 1.0;
                for (std::size_t j = 0; j < charts_copy.size(); ++j) {
                    cplx h = charts_copy[j](z);
                    for (cplx hq : values[j]) prod *= (h - hq) / h;
                }
                return prod;
            },
            std::nullopt, "divisor multiplier");
    }

    // Verify the divisor with small circles around every point of supp(E) u supp(E0).
    std::map<std::pair<double, double>, std::pair<cplx, int>> expected;
    auto key = [](cplx z) { return std::make_pair(z.real(), z.imag()); };
    for (const auto& [q, mult] : E.points()) expected[key(q)].first = q, expected[key(q)].second += mult;
    for (const auto& [p, nu] : support) expected[key(p)].first = p, expected[key(p)].second -= nu;
    std::vector<std::pair<cplx, int>> pts;
    for (const auto& [k, v] : expected) pts.push_back(v);
    out.divisor_verified = true;
    for (std::size_t a = 0; a < pts.size(); ++a) {
        double r = L.boundary_distance(pts[a].first);
        for (std::size_t b = 0; b < pts.size(); ++b)
            if (b != a) r = std::min(r, std::abs(pts[a].first - pts[b].first));
        r *= 0.4;
        auto w = winding_number(out.psi, PathPolyline::circle(pts[a].first, r, 128));
        out.checks.push_back({pts[a].first, r, pts[a].second, w});
        out.divisor_verified = out.divisor_verified && (w == pts[a].second);
    }
    out.divisor_verified = out.divisor_verified && zero_count(out.psi, L.boundary()) == 0;
    out.boundary_deviation = detail::sup_on(L.boundary_samples(2048), [&](cplx z) { return std::abs(out.psi(z) - 1.0); });
    return out;
}

// ---------------------------------------------------------------------------
// Gauge alignment

using FunctionTuple = std::vector<HolomorphicFn>;

inline CVector eval_tuple(const FunctionTuple& f, cplx z) {
    CVector v(static_cast<Eigen::Index>(f.size()));
    for (std::size_t k = 0; k < f.size(); ++k) v[static_cast<Eigen::Index>(k)] = f[k](z);
    return v;
}

struct ProximityReport {
    double delta = 0.0;
    int samples = 0;
    double sample_density = 0.0; // samples per unit area of L
};

/// sup over the nested sample sequence of the Fubini-Study distance between
/// pi(f) and pi(g).
inline ProximityReport projective_proximity(const FunctionTuple& f, const FunctionTuple& g, const CompactL& L, int samples) {
    if (f.size() != g.size()) fail(ErrorCode::InvalidArgument, "tuples of different length");
    ProximityReport r;
    r.samples = samples;
    const double area = kPi * (L.outer_radius() * L.outer_radius() - L.inner_radius() * L.inner_radius());
    r.sample_density = samples / area;
    for (auto p : L.samples(samples)) r.delta = std::max(r.delta, fs_distance(eval_tuple(f, p), eval_tuple(g, p)));
    return r;
}

struct DiscReport {
    cplx center;
    double radius;
    int zeros_f;
    int zeros_g;
};

struct GaugeOptions {
    int proximity_samples = 2000;
    int boundary_samples = 2048; // per boundary component
    std::vector<double> disc_radii;  // Case 1 discs; default from the zero geometry
    std::optional<int> reference;    // force the reference component
};

struct GaugeAlignment {
    HolomorphicFn multiplier;
    int case_id = 2;              // 1: reference component has zeros on L, 2: zero free
    int reference = 0;            // index of the reference component
    bool reindexed = false;       // reference differs from component 0
    double delta = 0.0;           // projective proximity of f and g on L
    double epsilon = 0.0;
    double deviation = 0.0;       // ||phi g - f|| on bL
    double interior_deviation = 0.0;
    std::vector<DiscReport> discs;
    std::optional<DivisorMultiplier> divisor;
    bool success = false;
};

/// A nowhere-vanishing phi on L with phi * g close to f, so pi(phi g) = pi(g)
/// while phi g lands in the epsilon-ball around f. Case 2: phi = f_r / g_r.
/// Case 1: phi = Psi * f_r / g_r where Psi moves the zeros of g_r onto those
/// of f_r.
inline GaugeAlignment gauge_align(const FunctionTuple& f, const FunctionTuple& g, const CompactL& L, double epsilon,
                                  const GaugeOptions& opt = {}) {
    if (f.size() != g.size() || f.empty()) fail(ErrorCode::InvalidArgument, "tuples must be nonempty and of equal length");
    GaugeAlignment out;
    out.epsilon = epsilon;
    const auto bl = L.boundary();
    const auto bl_samples = L.boundary_samples(opt.boundary_samples);

    // Reference component: largest minimum modulus on bL.
    std::vector<double> min_mod(f.size());
    for (std::size_t k = 0; k < f.size(); ++k)
        min_mod[k] = detail::inf_on(bl_samples, [&](cplx z) { return std::abs(f[k](z)); });
    std::size_t ref = opt.reference ? static_cast<std::size_t>(*opt.reference)
                                    : static_cast<std::size_t>(std::max_element(min_mod.begin(), min_mod.end()) - min_mod.begin());
    if (ref >= f.size() || !(min_mod[ref] > 1e-10))
        fail(ErrorCode::ReferenceComponentDegenerate, "no component of f is zero free on bL");
    out.reference = static_cast<int>(ref);
    out.reindexed = ref != 0;
    out.delta = projective_proximity(f, g, L, opt.proximity_samples).delta;

    const HolomorphicFn& fr = f[ref];
    const HolomorphicFn& gr = g[ref];
    int m = 0;
    try {
        m = zero_count(fr, bl);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ZeroOnContour) fail(ErrorCode::ReferenceComponentDegenerate, "every component of f vanishes on bL");
        throw;
    }
    int m_g = 0;
    try {
        m_g = zero_count(gr, bl);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ZeroOnContour) fail(ErrorCode::ProximityTooLarge, "g_r vanishes on bL");
        throw;
    }
    if (m_g != m) fail(ErrorCode::ProximityTooLarge, "g_r and f_r have different numbers of zeros on L");

    if (m == 0) {
        out.case_id = 2;
        out.multiplier = HolomorphicFn::opaque([fr, gr](cplx z) { return fr(z) / gr(z); }, std::nullopt, "f_r/g_r");
    } else {
        out.case_id = 1;
        const double scale = L.outer_radius();
        Divisor e0 = Divisor::from_roots(locate_zeros(fr, bl), 1e-6 * scale);
        std::vector<cplx> centers;
        for (const auto& pt : e0.points()) centers.push_back(pt.first);
        std::vector<double> radii = opt.disc_radii.empty() ? detail::default_disc_radii(centers, L) : opt.disc_radii;
        if (radii.size() != centers.size()) fail(ErrorCode::InvalidArgument, "need one disc radius per zero of f_r");

        std::vector<cplx> g_roots;
        for (std::size_t j = 0; j < centers.size(); ++j) {
            auto circle = PathPolyline::circle(centers[j], radii[j], 256);
            int zf = e0.points()[j].second;
            int zg = 0;
            try {
                zg = winding_number(gr, circle);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::ZeroOnContour) fail(ErrorCode::ProximityTooLarge, "g_r vanishes on a disc boundary");
                throw;
            }
            out.discs.push_back({centers[j], radii[j], zf, zg});
            if (zg != zf) fail(ErrorCode::ProximityTooLarge, "zero counts of f_r and g_r differ on a disc");
            auto local = locate_zeros(gr, {circle});
            g_roots.insert(g_roots.end(), local.begin(), local.end());
        }
        Divisor e = Divisor::from_roots(g_roots, 1e-9 * scale);
        std::vector<HolomorphicFn> charts;
        for (auto p : centers) charts.emplace_back(Expr::var() - Expr::constant(p));
        out.divisor = divisor_multiplier(e0, e, L, charts, radii);
        HolomorphicFn psi = out.divisor->psi;
        out.multiplier = HolomorphicFn::opaque(
            [psi, fr, gr](cplx z) {
                cplx v = psi(z) * fr(z) / gr(z);
                if (std::isfinite(v.real()) && std::isfinite(v.imag())) return v;
                // removable singularity: mean value over a small circle
                cplx sum = 0.0;
                const int n = 32;
                for (int k = 0; k < n; ++k) {
                    cplx w = z + std::polar(1e-6, 2 * kPi * (k + 0.5) / n);
                    sum += psi(w) * fr(w) / gr(w);
                }
                return sum / double(n);
            },
            std::nullopt, "Psi*f_r/g_r");
    }

    auto deviation_at = [&](cplx z) { return (out.multiplier(z) * eval_tuple(g, z) - eval_tuple(f, z)).norm(); };
    out.deviation = detail::sup_on(bl_samples, deviation_at);
    std::vector<cplx> interior;
    for (auto p : L.samples(400))
        if (L.boundary_distance(p) > 0) interior.push_back(p);
    out.interior_deviation = detail::sup_on(interior, deviation_at);
    out.success = out.deviation < epsilon;
    return out;
}

inline nlohmann::json to_json(const GaugeAlignment& a) {
    nlohmann::json discs = nlohmann::json::array();
    for (const auto& d : a.discs)
        discs.push_back({{"center", {d.center.real(), d.center.imag()}}, {"radius", d.radius}, {"zeros_f", d.zeros_f}, {"zeros_g", d.zeros_g}});
    return {{"case", a.case_id},           {"reference_component", a.reference}, {"reindexed", a.reindexed},
            {"delta", a.delta},            {"epsilon", a.epsilon},              {"deviation", a.deviation},
            {"interior_deviation", a.interior_deviation}, {"winding", discs},   {"success", a.success}};
}

} // namespace minsurf
