#pragma once

// Jorge-Xavier labyrinth in the unit disc: concentric arcs c_j of radius r_j,
// their closed eps_j-neighbourhoods C_j, a continuous target function f on
// the union of the C_j and [0, 1), and a crossing-cost check for a candidate
// g against |g| > exp(1/eps_j) on C_j.

#include "domain.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "holomorphic.hpp"
#include "mesh.hpp"

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace minsurf {

struct LabyrinthArc {
    double radius;
    double width;        // eps_j
    double center;       // centre angle
    double span;         // angular extent, < 2 pi
};

namespace detail {

inline double wrap_angle(double a) { return std::remainder(a, 2 * kPi); }

inline double arc_distance(const LabyrinthArc& c, cplx z) {
    const double off = std::abs(wrap_angle(std::arg(z) - c.center));
    if (std::abs(z) > 0 && off <= c.span / 2) return std::abs(std::abs(z) - c.radius);
    const cplx e1 = std::polar(c.radius, c.center - c.span / 2), e2 = std::polar(c.radius, c.center + c.span / 2);
    return std::min(std::abs(z - e1), std::abs(z - e2));
}

} // namespace detail

class Labyrinth {
public:
    /// Validates (a) increasing radii below 1, strictly decreasing widths,
    /// (b) every arc meets (0, 1), (c) the C_j are pairwise disjoint discs
    /// inside the unit disc.
    explicit Labyrinth(std::vector<LabyrinthArc> arcs, double margin = 0.1) : arcs_(std::move(arcs)) {
        const std::size_t J = arcs_.size();
        if (J < 2) fail(ErrorCode::ScheduleInvalid, "a labyrinth needs at least two arcs");
        for (std::size_t j = 0; j < J; ++j) {
            const auto& c = arcs_[j];
            const std::string tag = "arc " + std::to_string(j + 1) + ": ";
            if (!(c.radius > 0 && c.radius < 1)) fail(ErrorCode::ScheduleInvalid, tag + "radius outside (0, 1)");
            if (!(c.width > 0)) fail(ErrorCode::ScheduleInvalid, tag + "width must be positive");
            if (!(c.span > 0 && c.span < 2 * kPi)) fail(ErrorCode::ScheduleInvalid, tag + "span must lie in (0, 2 pi)");
            if (j > 0 && !(c.radius > arcs_[j - 1].radius)) fail(ErrorCode::ScheduleInvalid, tag + "radii must increase");
            if (j > 0 && !(c.width < arcs_[j - 1].width)) fail(ErrorCode::ScheduleInvalid, tag + "widths must decrease");
            if (std::abs(detail::wrap_angle(c.center)) > c.span / 2) fail(ErrorCode::ScheduleInvalid, tag + "arc misses (0, 1)");
            if (!(c.radius - c.width > 0 && c.radius + c.width < 1)) fail(ErrorCode::ScheduleInvalid, tag + "C_j leaves the disc");
            // endpoint caps must not touch, otherwise C_j closes up into an annulus
            if (!(2 * c.radius * std::sin(kPi - c.span / 2) > 2 * c.width))
                fail(ErrorCode::ScheduleInvalid, tag + "C_j is not a disc");
            // every arc crosses (0, 1), so disjointness is radial separation
            if (j > 0 && !(c.radius - c.width > arcs_[j - 1].radius + arcs_[j - 1].width))
                fail(ErrorCode::ScheduleInvalid, tag + "C_j meets C_" + std::to_string(j));
        }
        build_target(margin);
    }

    /// r_j = 1 - a q^(j-1), eps_j = e0 q^(2j-2), gaps on alternating sides of
    /// the negative axis.
    static Labyrinth geometric(int J, double a = 0.5, double q = 0.6, double e0 = 0.05, double span = 1.5 * kPi) {
        std::vector<LabyrinthArc> arcs;
        for (int j = 1; j <= J; ++j) {
            const double r = 1 - a * std::pow(q, j - 1);
            const double e = e0 * std::pow(q, 2 * (j - 1));
            const double c = (j % 2 ? 1.0 : -1.0) * 0.25 * (2 * kPi - span);
            arcs.push_back({r, e, c, span});
        }
        return Labyrinth(std::move(arcs));
    }

    const std::vector<LabyrinthArc>& arcs() const { return arcs_; }
    std::size_t size() const { return arcs_.size(); }

    bool in_compact(cplx z, std::size_t j) const { return detail::arc_distance(arcs_[j], z) <= arcs_[j].width; }
    bool in_labyrinth(cplx z) const {
        for (std::size_t j = 0; j < arcs_.size(); ++j)
            if (in_compact(z, j)) return true;
        return false;
    }

    /// eps_j^j, the prescribed value of f on C_j (1-based j).
    double compact_value(std::size_t j) const { return std::pow(arcs_[j - 1].width, static_cast<double>(j)); }

    /// f on [0, 1): eps_1 below C_1, eps_j^j across C_j, a trapezoid between
    /// consecutive compacts whose plateau makes the gap integral exceed
    /// (1 + margin) / eps_{j+1}; constant after the last compact.
    double target(double t) const {
        if (t <= knots_.front().first) return knots_.front().second;
        for (std::size_t k = 1; k < knots_.size(); ++k)
            if (t <= knots_[k].first) {
                const auto [t0, f0] = knots_[k - 1];
                const auto [t1, f1] = knots_[k];
                if (t == t1) return f1;
                return t1 > t0 ? f0 + (f1 - f0) * (t - t0) / (t1 - t0) : f1;
            }
        return knots_.back().second;
    }

    /// Gap integrals of f over (r_j + eps_j, r_{j+1} - eps_{j+1}) by 5-point
    /// Gauss-Legendre on each linear piece, against 1/eps_{j+1}.
    std::vector<std::pair<double, double>> gap_integrals() const {
        std::vector<std::pair<double, double>> out;
        const auto flat = ConformalMetric::from_function([this](cplx z) { return target(z.real()); });
        for (std::size_t j = 0; j + 1 < arcs_.size(); ++j) {
            const double a = arcs_[j].radius + arcs_[j].width, b = arcs_[j + 1].radius - arcs_[j + 1].width;
            std::vector<double> cuts{a};
            for (const auto& [t, f] : knots_)
                if (t > a && t < b) cuts.push_back(t);
            cuts.push_back(b);
            double sum = 0.0;
            for (std::size_t k = 0; k + 1 < cuts.size(); ++k) sum += detail::segment_cost(flat, cuts[k], cuts[k + 1]);
            out.push_back({sum, 1.0 / arcs_[j + 1].width});
        }
        return out;
    }

    /// (radius, f) rows: every knot plus a uniform grid.
    void write_target_table(std::ostream& os, int samples = 400) const {
        std::vector<double> ts;
        for (const auto& k : knots_) ts.push_back(k.first);
        const double end = arcs_.back().radius + arcs_.back().width;
        for (int k = 0; k <= samples; ++k) ts.push_back(end * k / samples);
        std::sort(ts.begin(), ts.end());
        ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
        os << "radius,f\n";
        os.precision(17);
        for (double t : ts) os << t << ',' << target(t) << '\n';
    }

private:
    void build_target(double margin) {
        knots_.clear();
        const auto& A = arcs_;
        knots_.push_back({0.0, A[0].width});
        knots_.push_back({A[0].radius - A[0].width, A[0].width});
        for (std::size_t j = 0; j < A.size(); ++j) {
            const double fj = compact_value(j + 1);
            knots_.push_back({A[j].radius - A[j].width, fj});
            knots_.push_back({A[j].radius + A[j].width, fj});
            if (j + 1 == A.size()) break;
            const double a = A[j].radius + A[j].width, b = A[j + 1].radius - A[j + 1].width;
            const double fa = fj, fb = compact_value(j + 2);
            const double L = b - a, w = 0.05 * L;
            // (fa + M) w / 2 + M (L - 2w) + (M + fb) w / 2 = goal
            const double goal = (1.0 + margin) / A[j + 1].width;
            const double M = std::max({(goal - 0.5 * w * (fa + fb)) / (L - w), fa, fb});
            knots_.push_back({a + w, M});
            knots_.push_back({b - w, M});
        }
        // knots may repeat a position at a junction; values there agree
        std::stable_sort(knots_.begin(), knots_.end(), [](auto& x, auto& y) { return x.first < y.first; });
        for (std::size_t k = 1; k < knots_.size(); ++k)
            if (knots_[k].first == knots_[k - 1].first && knots_[k].second != knots_[k - 1].second)
                fail(ErrorCode::ScheduleInvalid, "target function is discontinuous at " + std::to_string(knots_[k].first));
        auto gaps = gap_integrals();
        for (std::size_t j = 0; j < gaps.size(); ++j)
            if (!(gaps[j].first > gaps[j].second))
                fail(ErrorCode::ScheduleInvalid, "gap integral " + std::to_string(j + 1) + " does not exceed 1/eps");
    }

    std::vector<LabyrinthArc> arcs_;
    std::vector<std::pair<double, double>> knots_;
};

struct BandReport {
    int band;                  // 1-based
    double min_modulus;        // min |g| on C_j samples
    double min_weight;         // min |g| + 1/|g|
    double crossing_cost;      // 2 eps_j * min_weight
    double threshold;          // exp(1/eps_j)
    double log_margin;         // log min|g| - 1/eps_j
    bool meets;
    double avoiding_length;    // Euclidean length to get past C_j without touching any C_i
};

struct LabyrinthReport {
    std::vector<BandReport> bands;
    std::string verdict;  // "completeness-consistent" or "inconclusive"
};

namespace detail {

inline std::vector<cplx> compact_samples(const LabyrinthArc& c, int per_arc = 256) {
    std::vector<cplx> out;
    for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0})
        for (int k = 0; k <= per_arc; ++k)
            out.push_back(std::polar(c.radius + s * c.width, c.center - c.span / 2 + c.span * k / per_arc));
    for (double side : {-1.0, 1.0}) {
        const cplx e = std::polar(c.radius, c.center + side * c.span / 2);
        for (int k = 0; k < 32; ++k) out.push_back(e + std::polar(c.width, 2 * kPi * k / 32));
    }
    return out;
}

} // namespace detail

/// Per band: min of |g| and |g| + 1/|g| over C_j, the crossing cost bound
/// 2 eps_j min(|g| + 1/|g|), the threshold test |g| > exp(1/eps_j), and the
/// Euclidean length of the shortest mesh path from 0 that gets past C_j
/// while avoiding every C_i. The mesh must resolve the narrowest C_j.
inline LabyrinthReport labyrinth_completeness_check(const Labyrinth& lab, const HolomorphicFn& g, const Mesh& mesh) {
    const auto& arcs = lab.arcs();
    if (!(mesh.max_edge_length() < arcs.back().width))
        fail(ErrorCode::InvalidArgument, "mesh too coarse for the narrowest labyrinth band");
    auto avoid = ConformalMetric::from_function(
        [&lab](cplx z) { return lab.in_labyrinth(z) ? std::numeric_limits<double>::infinity() : 1.0; }, "avoid");
    std::vector<double> radii;
    for (const auto& c : arcs) radii.push_back(c.radius + c.width + 0.25 * mesh.spacing());
    GeodesicOptions opt;
    opt.levels = 1;
    opt.stencil = 3;
    auto growth = completeness_probe(avoid, {mesh}, 0.0, radii, {}, opt);

    LabyrinthReport rep;
    bool all = true;
    for (std::size_t j = 0; j < arcs.size(); ++j) {
        BandReport b{};
        b.band = static_cast<int>(j + 1);
        b.min_modulus = std::numeric_limits<double>::infinity();
        b.min_weight = std::numeric_limits<double>::infinity();
        for (cplx z : detail::compact_samples(arcs[j])) {
            const double m = std::abs(g(z));
            if (!(m > 0)) fail(ErrorCode::InvalidArgument, "candidate g vanishes on the labyrinth");
            b.min_modulus = std::min(b.min_modulus, m);
            b.min_weight = std::min(b.min_weight, m + 1.0 / m);
        }
        b.crossing_cost = 2 * arcs[j].width * b.min_weight;
        b.threshold = std::exp(1.0 / arcs[j].width);
        b.log_margin = std::log(b.min_modulus) - 1.0 / arcs[j].width;
        b.meets = b.log_margin > 0;
        b.avoiding_length = growth.distances[j].value;
        all = all && b.meets;
        rep.bands.push_back(b);
    }
    rep.verdict = all ? "completeness-consistent" : "inconclusive";
    return rep;
}

} // namespace minsurf
