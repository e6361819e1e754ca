#pragma once

// Planar domains with the identity chart, and polyline paths inside them.

#include "errors.hpp"
#include "expr.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace minsurf {

enum class DomainKind { Disc, Annulus, Wedge, Rectangle };

inline std::string to_string(DomainKind k) {
    switch (k) {
    case DomainKind::Disc: return "disc";
    case DomainKind::Annulus: return "annulus";
    case DomainKind::Wedge: return "wedge";
    case DomainKind::Rectangle: return "rectangle";
    }
    return "?";
}

class PathPolyline;

/// A finitely connected planar domain. Boundary pieces are numbered per kind:
///   disc:      0 circle
///   annulus:   0 inner circle, 1 outer circle
///   wedge:     0 right ray, 1 left ray, 2 truncation arc (always artificial)
///   rectangle: 0 bottom, 1 right, 2 top, 3 left
/// Artificial pieces are meshed and flagged but never count as ideal boundary.
class Domain {
public:
    static Domain disc(double radius) {
        if (!(radius > 0.0) || !std::isfinite(radius)) fail(ErrorCode::DegenerateDomain, "disc needs radius > 0");
        Domain d(DomainKind::Disc, 1);
        d.outer_ = radius;
        return d;
    }

    static Domain annulus(double inner, double outer) {
        if (!(inner > 0.0 && inner < outer) || !std::isfinite(outer))
            fail(ErrorCode::DegenerateDomain, "annulus needs 0 < inner < outer");
        Domain d(DomainKind::Annulus, 2);
        d.inner_ = inner;
        d.outer_ = outer;
        return d;
    }

    /// {zeta : |arg(zeta) - pi/2| < half_angle}, truncated at |zeta| <= truncation
    /// for meshing. half_angle = pi/4 gives {Im zeta > |Re zeta|}.
    static Domain wedge(double truncation = 10.0, double half_angle = kPi / 4) {
        if (!(half_angle > 0.0 && half_angle < kPi / 2) || !(truncation > 0.0) || !std::isfinite(truncation))
            fail(ErrorCode::DegenerateDomain, "wedge needs 0 < half angle < pi/2 and truncation > 0");
        Domain d(DomainKind::Wedge, 3);
        d.outer_ = truncation;
        d.half_angle_ = half_angle;
        d.artificial_[2] = true;
        return d;
    }

    static Domain rectangle(cplx lo, cplx hi) {
        if (!(lo.real() < hi.real() && lo.imag() < hi.imag()) || !std::isfinite(std::abs(hi - lo)))
            fail(ErrorCode::DegenerateDomain, "rectangle needs lo < hi componentwise");
        Domain d(DomainKind::Rectangle, 4);
        d.lo_ = lo;
        d.hi_ = hi;
        return d;
    }

    DomainKind kind() const { return kind_; }
    double radius() const { return outer_; }
    double inner_radius() const { return inner_; }
    double outer_radius() const { return outer_; }
    double truncation() const { return outer_; }
    double half_angle() const { return half_angle_; }
    cplx lower_corner() const { return lo_; }
    cplx upper_corner() const { return hi_; }

    int boundary_piece_count() const { return static_cast<int>(artificial_.size()); }
    bool is_artificial(int piece) const { return artificial_.at(static_cast<std::size_t>(piece)); }

    /// Returns a copy where the given boundary piece is excluded from the ideal
    /// boundary (used when an end is known to lie at infinite distance).
    Domain with_artificial(int piece, bool flag = true) const {
        Domain d = *this;
        d.artificial_.at(static_cast<std::size_t>(piece)) = flag;
        return d;
    }

    int betti_number() const { return kind_ == DomainKind::Annulus ? 1 : 0; }

    /// Signed distance (positive inside) to each boundary piece. Exact for
    /// points inside; the sign is reliable everywhere.
    std::vector<double> piece_distances(cplx z) const {
        switch (kind_) {
        case DomainKind::Disc: return {outer_ - std::abs(z)};
        case DomainKind::Annulus: return {std::abs(z) - inner_, outer_ - std::abs(z)};
        case DomainKind::Wedge: {
            const cplx d_right = std::polar(1.0, kPi / 2 - half_angle_);
            const cplx d_left = std::polar(1.0, kPi / 2 + half_angle_);
            // Interior lies to the left of the right ray and to the right of the left ray.
            auto ray_distance = [&](cplx dir, double side) {
                double cross = side * (dir.real() * z.imag() - dir.imag() * z.real());
                double along = dir.real() * z.real() + dir.imag() * z.imag();
                double dist = along >= 0 ? std::abs(cross) : std::abs(z);
                return cross >= 0 ? dist : -dist;
            };
            return {ray_distance(d_right, 1.0), ray_distance(d_left, -1.0), outer_ - std::abs(z)};
        }
        case DomainKind::Rectangle:
            return {z.imag() - lo_.imag(), hi_.real() - z.real(), hi_.imag() - z.imag(), z.real() - lo_.real()};
        }
        return {};
    }

    double signed_distance(cplx z) const {
        auto d = piece_distances(z);
        return *std::min_element(d.begin(), d.end());
    }

    /// Euclidean distance to the nearest non-artificial boundary piece.
    double ideal_boundary_distance(cplx z) const {
        auto d = piece_distances(z);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < d.size(); ++i)
            if (!artificial_[i]) best = std::min(best, d[i]);
        return best;
    }

    /// Nearest point of boundary piece `piece` (circles, rays clipped to the
    /// truncation radius, rectangle sides).
    cplx project_to_piece(cplx z, int piece) const {
        auto radial = [&](double r) { return std::abs(z) > 0 ? z * (r / std::abs(z)) : cplx(r, 0.0); };
        auto onto_segment = [&](cplx a, cplx b) {
            cplx d = b - a;
            double t = std::clamp(((z - a) * std::conj(d)).real() / std::norm(d), 0.0, 1.0);
            return a + t * d;
        };
        switch (kind_) {
        case DomainKind::Disc: return radial(outer_);
        case DomainKind::Annulus: return radial(piece == 0 ? inner_ : outer_);
        case DomainKind::Wedge:
            if (piece == 2) return radial(outer_);
            return onto_segment(0.0, std::polar(outer_, kPi / 2 + (piece == 0 ? -half_angle_ : half_angle_)));
        case DomainKind::Rectangle: {
            const cplx a(lo_.real(), lo_.imag()), b(hi_.real(), lo_.imag()), c(hi_.real(), hi_.imag()), d(lo_.real(), hi_.imag());
            const std::array<std::pair<cplx, cplx>, 4> sides{{{a, b}, {b, c}, {c, d}, {d, a}}};
            auto [p, q] = sides.at(static_cast<std::size_t>(piece));
            return onto_segment(p, q);
        }
        }
        return z;
    }

    int nearest_piece(cplx z) const {
        auto d = piece_distances(z);
        std::size_t best = 0;
        for (std::size_t i = 1; i < d.size(); ++i)
            if (std::abs(d[i]) < std::abs(d[best])) best = i;
        return static_cast<int>(best);
    }

    bool contains(cplx z, double margin = 0.0) const { return signed_distance(z) > margin; }

    /// Whether the closed segment [a, b] stays within the closure of the domain
    /// shrunk by `margin`.
    bool segment_inside(cplx a, cplx b, double margin = 0.0) const {
        if (signed_distance(a) < margin || signed_distance(b) < margin) return false;
        if (kind_ != DomainKind::Annulus) return true; // remaining kinds are convex
        cplx d = b - a;
        double len2 = std::norm(d);
        double t = len2 > 0 ? std::clamp(-(a.real() * d.real() + a.imag() * d.imag()) / len2, 0.0, 1.0) : 0.0;
        return std::abs(a + t * d) - inner_ >= margin;
    }

    /// Width of the thinnest part; meshes need an edge length below this.
    double thickness() const {
        switch (kind_) {
        case DomainKind::Disc: return 2 * outer_;
        case DomainKind::Annulus: return outer_ - inner_;
        case DomainKind::Wedge: return outer_ * std::sin(half_angle_);
        case DomainKind::Rectangle: return std::min(hi_.real() - lo_.real(), hi_.imag() - lo_.imag());
        }
        return 0.0;
    }

    /// Axis-aligned bounding box as (lower-left, upper-right).
    std::pair<cplx, cplx> bounding_box() const {
        switch (kind_) {
        case DomainKind::Disc:
        case DomainKind::Annulus: return {cplx(-outer_, -outer_), cplx(outer_, outer_)};
        case DomainKind::Wedge: {
            double x = outer_ * std::sin(half_angle_);
            return {cplx(-x, 0.0), cplx(x, outer_)};
        }
        case DomainKind::Rectangle: return {lo_, hi_};
        }
        return {};
    }

    /// Boundary pieces as polylines with roughly `samples_per_unit` vertices per
    /// unit length (at least 16 per piece).
    std::vector<PathPolyline> boundary(double samples_per_unit = 64.0) const;

private:
    Domain(DomainKind k, int pieces) : kind_(k), artificial_(static_cast<std::size_t>(pieces), false) {}

    DomainKind kind_;
    double inner_ = 0.0;
    double outer_ = 0.0;
    double half_angle_ = kPi / 4;
    cplx lo_{};
    cplx hi_{};
    std::vector<bool> artificial_;
};

/// Ordered vertex list; closed paths repeat the first vertex at the end.
class PathPolyline {
public:
    PathPolyline() = default;
    PathPolyline(std::vector<cplx> vertices, bool closed) : vertices_(std::move(vertices)), closed_(closed) {
        if (vertices_.size() < 2) fail(ErrorCode::InvalidArgument, "a path needs at least two vertices");
        for (auto v : vertices_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                fail(ErrorCode::InvalidArgument, "path vertices must be finite");
        if (closed_ && std::abs(vertices_.front() - vertices_.back()) > 1e-14)
            fail(ErrorCode::InvalidArgument, "closed path must end at its first vertex");
    }

    static PathPolyline segment(cplx a, cplx b) { return PathPolyline({a, b}, false); }

    /// Counter-clockwise circle with `n` segments (negative radius flips the orientation).
    static PathPolyline circle(cplx center, double radius, int n = 256) {
        std::vector<cplx> v;
        v.reserve(static_cast<std::size_t>(n) + 1);
        const double sign = radius < 0 ? -1.0 : 1.0;
        for (int k = 0; k < n; ++k) v.push_back(center + std::polar(std::abs(radius), sign * 2 * kPi * k / n));
        v.push_back(v.front());
        return PathPolyline(std::move(v), true);
    }

    /// Arc of the circle |zeta - center| = radius from angle a0 to a1.
    static PathPolyline arc(cplx center, double radius, double a0, double a1, int n = 128) {
        std::vector<cplx> v;
        for (int k = 0; k <= n; ++k) v.push_back(center + std::polar(radius, a0 + (a1 - a0) * k / n));
        return PathPolyline(std::move(v), false);
    }

    const std::vector<cplx>& vertices() const { return vertices_; }
    bool closed() const { return closed_; }
    std::size_t segment_count() const { return vertices_.size() - 1; }

    double length() const {
        double len = 0;
        for (std::size_t i = 0; i + 1 < vertices_.size(); ++i) len += std::abs(vertices_[i + 1] - vertices_[i]);
        return len;
    }

    PathPolyline reversed() const {
        std::vector<cplx> v(vertices_.rbegin(), vertices_.rend());
        return PathPolyline(std::move(v), closed_);
    }

    /// Concatenation; the second path must start where this one ends.
    PathPolyline then(const PathPolyline& next) const {
        if (std::abs(vertices_.back() - next.vertices_.front()) > 1e-14)
            fail(ErrorCode::InvalidArgument, "paths do not join");
        std::vector<cplx> v = vertices_;
        v.insert(v.end(), next.vertices_.begin() + 1, next.vertices_.end());
        bool closed = std::abs(v.front() - v.back()) <= 1e-14;
        if (closed) v.back() = v.front();
        return PathPolyline(std::move(v), closed);
    }

    bool inside(const Domain& d, double margin = 0.0) const {
        for (std::size_t i = 0; i + 1 < vertices_.size(); ++i)
            if (!d.segment_inside(vertices_[i], vertices_[i + 1], margin)) return false;
        return true;
    }

private:
    std::vector<cplx> vertices_;
    bool closed_ = false;
};

inline std::vector<PathPolyline> Domain::boundary(double samples_per_unit) const {
    auto count = [&](double len) { return std::max(16, static_cast<int>(std::ceil(len * samples_per_unit))); };
    switch (kind_) {
    case DomainKind::Disc: return {PathPolyline::circle(0.0, outer_, count(2 * kPi * outer_))};
    case DomainKind::Annulus:
        return {PathPolyline::circle(0.0, -inner_, count(2 * kPi * inner_)),
                PathPolyline::circle(0.0, outer_, count(2 * kPi * outer_))};
    case DomainKind::Wedge: {
        const double a_right = kPi / 2 - half_angle_;
        const double a_left = kPi / 2 + half_angle_;
        int n = count(outer_);
        std::vector<cplx> right, left;
        for (int k = 0; k <= n; ++k) {
            right.push_back(std::polar(outer_ * k / n, a_right));
            left.push_back(std::polar(outer_ * (n - k) / n, a_left));
        }
        return {PathPolyline(right, false), PathPolyline(left, false),
                PathPolyline::arc(0.0, outer_, a_right, a_left, count(2 * half_angle_ * outer_))};
    }
    case DomainKind::Rectangle: {
        const std::array<cplx, 5> c = {lo_, cplx(hi_.real(), lo_.imag()), hi_, cplx(lo_.real(), hi_.imag()), lo_};
        std::vector<PathPolyline> sides;
        for (int s = 0; s < 4; ++s) {
            int n = count(std::abs(c[s + 1] - c[s]));
            std::vector<cplx> v;
            for (int k = 0; k <= n; ++k) v.push_back(c[s] + (c[s + 1] - c[s]) * (double(k) / n));
            sides.emplace_back(std::move(v), false);
        }
        return sides;
    }
    }
    return {};
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline double finite_number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number())
        fail(ErrorCode::ParseError, std::string("missing numeric field '") + key + "'");
    double v = j.at(key).get<double>();
    if (!std::isfinite(v)) fail(ErrorCode::ParseError, std::string("field '") + key + "' must be finite");
    return v;
}

inline cplx complex_from_json(const nlohmann::json& j) {
    if (j.is_number()) {
        double v = j.get<double>();
        if (!std::isfinite(v)) fail(ErrorCode::ParseError, "non-finite number");
        return v;
    }
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        fail(ErrorCode::ParseError, "complex numbers are [re, im] pairs");
    cplx c(j[0].get<double>(), j[1].get<double>());
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) fail(ErrorCode::ParseError, "non-finite number");
    return c;
}

inline nlohmann::json complex_to_json(cplx c) {
    require_finite(c);
    return nlohmann::json::array({c.real(), c.imag()});
}

} // namespace detail

inline nlohmann::json to_json(const Domain& d) {
    nlohmann::json j;
    j["kind"] = to_string(d.kind());
    switch (d.kind()) {
    case DomainKind::Disc: j["radius"] = d.radius(); break;
    case DomainKind::Annulus:
        j["inner"] = d.inner_radius();
        j["outer"] = d.outer_radius();
        break;
    case DomainKind::Wedge:
        j["half_angle"] = d.half_angle();
        j["truncation"] = d.truncation();
        break;
    case DomainKind::Rectangle:
        j["lo"] = detail::complex_to_json(d.lower_corner());
        j["hi"] = detail::complex_to_json(d.upper_corner());
        break;
    }
    nlohmann::json art = nlohmann::json::array();
    for (int p = 0; p < d.boundary_piece_count(); ++p)
        if (d.is_artificial(p)) art.push_back(p);
    j["artificial"] = art;
    return j;
}

inline Domain domain_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        fail(ErrorCode::ParseError, "domain needs a 'kind' tag");
    const auto kind = j.at("kind").get<std::string>();
    auto check_keys = [&](std::initializer_list<const char*> allowed) {
        for (const auto& [key, value] : j.items()) {
            bool ok = key == "kind" || key == "artificial";
            for (const char* a : allowed) ok = ok || key == a;
            if (!ok) fail(ErrorCode::ParseError, "unknown domain key '" + key + "'");
        }
    };
    Domain d = [&] {
        if (kind == "disc") {
            check_keys({"radius"});
            return Domain::disc(detail::finite_number(j, "radius"));
        }
        if (kind == "annulus") {
            check_keys({"inner", "outer"});
            return Domain::annulus(detail::finite_number(j, "inner"), detail::finite_number(j, "outer"));
        }
        if (kind == "wedge") {
            check_keys({"half_angle", "truncation"});
            double trunc = j.contains("truncation") ? detail::finite_number(j, "truncation") : 10.0;
            double half = j.contains("half_angle") ? detail::finite_number(j, "half_angle") : kPi / 4;
            return Domain::wedge(trunc, half);
        }
        if (kind == "rectangle") {
            check_keys({"lo", "hi"});
            if (!j.contains("lo") || !j.contains("hi")) fail(ErrorCode::ParseError, "rectangle needs lo and hi");
            return Domain::rectangle(detail::complex_from_json(j.at("lo")), detail::complex_from_json(j.at("hi")));
        }
        fail(ErrorCode::ParseError, "unknown domain kind '" + kind + "'");
    }();
    if (j.contains("artificial")) {
        for (const auto& p : j.at("artificial")) {
            if (!p.is_number_integer() || p.get<int>() < 0 || p.get<int>() >= d.boundary_piece_count())
                fail(ErrorCode::ParseError, "bad artificial boundary index");
            d = d.with_artificial(p.get<int>());
        }
    }
    return d;
}

inline nlohmann::json to_json(const PathPolyline& p) {
    nlohmann::json v = nlohmann::json::array();
    for (auto z : p.vertices()) v.push_back(detail::complex_to_json(z));
    return {{"vertices", v}, {"closed", p.closed()}};
}

inline PathPolyline path_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("vertices") || !j.at("vertices").is_array())
        fail(ErrorCode::ParseError, "path needs a 'vertices' array");
    std::vector<cplx> v;
    for (const auto& z : j.at("vertices")) v.push_back(detail::complex_from_json(z));
    bool closed = j.contains("closed") && j.at("closed").get<bool>();
    return PathPolyline(std::move(v), closed);
}

} // namespace minsurf
