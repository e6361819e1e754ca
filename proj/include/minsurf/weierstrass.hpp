#pragma once

// Null holomorphic 1-forms Phi = f dzeta (stored as 2 du), spinor assembly from
// Weierstrass data (g, phi3), immersions u = x0 + Re int Phi, Gauss maps, flux.

#include "domain.hpp"
#include "errors.hpp"
#include "holomorphic.hpp"
#include "mesh.hpp"
#include "projective.hpp"
#include "quadrature.hpp"
#include "sampling.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <deque>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace minsurf {

/// Complex Gauss map g and the third coefficient phi3 (against dzeta).
struct WeierstrassPair {
    HolomorphicFn g;
    HolomorphicFn phi3;
};

/// n holomorphic coefficients of Phi / dzeta.
class NullForm {
public:
    NullForm() = default;
    explicit NullForm(std::vector<HolomorphicFn> coefficients, std::string label = "")
        : coef_(std::move(coefficients)), label_(std::move(label)) {
        if (coef_.size() < 3) fail(ErrorCode::InvalidArgument, "null forms need at least 3 components");
    }

    int dimension() const { return static_cast<int>(coef_.size()); }
    const std::vector<HolomorphicFn>& coefficients() const { return coef_; }
    const HolomorphicFn& operator[](int k) const { return coef_.at(static_cast<std::size_t>(k)); }
    const std::string& label() const { return label_; }

    /// Coefficient vector at z. A non-finite value (a removable singularity hit
    /// exactly) is replaced by the mean over a tiny circle.
    CVector operator()(cplx z) const {
        CVector v = raw(z);
        if (v.allFinite()) return v;
        const double r = 1e-7 * std::max(1.0, std::abs(z));
        CVector sum = CVector::Zero(dimension());
        const int n = 16;
        for (int k = 0; k < n; ++k) sum += raw(z + std::polar(r, 2 * kPi * (k + 0.5) / n));
        return sum / double(n);
    }

    CVector raw(cplx z) const {
        CVector v(dimension());
        for (int k = 0; k < dimension(); ++k) v[k] = coef_[static_cast<std::size_t>(k)](z);
        return v;
    }

    /// h * Phi for a scalar holomorphic h (stays null).
    NullForm multiplied(const HolomorphicFn& h) const {
        std::vector<HolomorphicFn> out;
        for (const auto& c : coef_) out.push_back(h * c);
        return NullForm(out, label_);
    }
    NullForm scaled(cplx c) const { return multiplied(HolomorphicFn(c)); }

    bool has_expressions() const {
        return std::all_of(coef_.begin(), coef_.end(), [](const HolomorphicFn& h) { return h.has_expression(); });
    }

private:
    std::vector<HolomorphicFn> coef_;
    std::string label_;
};

// ---------------------------------------------------------------------------
// Spinor assembly

namespace detail {

inline HolomorphicFn quotient(const HolomorphicFn& a, const HolomorphicFn& b) {
    if (a.has_expression() && b.has_expression()) return HolomorphicFn(a.expression() / b.expression());
    return HolomorphicFn::opaque([a, b](cplx z) { return a(z) / b(z); }, std::nullopt, "(" + a.label() + ")/(" + b.label() + ")");
}

/// Winding numbers of phi3/g and phi3*g around one square cell, subdividing
/// when both are positive (possible common zero) or when a loop passes too
/// close to a zero.
inline void check_cell(const HolomorphicFn& lo, const HolomorphicFn& hi, cplx corner, double side, int depth) {
    std::vector<cplx> v{corner, corner + side, corner + cplx(side, side), corner + cplx(0, side), corner};
    std::vector<cplx> dense;
    const int per_side = 16;
    for (int s = 0; s < 4; ++s)
        for (int k = 0; k < per_side; ++k) dense.push_back(v[static_cast<std::size_t>(s)] + (v[static_cast<std::size_t>(s) + 1] - v[static_cast<std::size_t>(s)]) * (double(k) / per_side));
    dense.push_back(corner);
    PathPolyline loop(dense, true);
    int w_lo = 0, w_hi = 0;
    try {
        w_lo = winding_number(lo, loop);
        w_hi = winding_number(hi, loop);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroOnContour && e.code() != ErrorCode::NonIntegerResult) throw;
        if (depth >= 4) fail(ErrorCode::PoleMismatch, "cannot separate zeros of phi3*g and phi3/g");
        const double h = side / 2;
        for (cplx c : {corner, corner + h, corner + cplx(0, h), corner + cplx(h, h)}) check_cell(lo, hi, c, h, depth + 1);
        return;
    }
    if (w_lo < 0 || w_hi < 0) fail(ErrorCode::PoleMismatch, "a pole or zero of g is not cancelled by phi3");
    if (w_lo > 0 && w_hi > 0) {
        if (depth >= 4) fail(ErrorCode::PoleMismatch, "phi3 vanishes where g has neither zero nor pole");
        const double h = side / 2;
        for (cplx c : {corner, corner + h, corner + cplx(0, h), corner + cplx(h, h)}) check_cell(lo, hi, c, h, depth + 1);
    }
}

} // namespace detail

/// Verifies that phi3*g and phi3/g are holomorphic without common zeros, by
/// winding numbers over squares tiling the domain at three scales (squares
/// must fit inside the domain, so a band of width ~thickness/32 along the
/// boundary is not examined).
inline void check_pair(const WeierstrassPair& pair, const Domain& domain) {
    const HolomorphicFn lo = detail::quotient(pair.phi3, pair.g);
    const HolomorphicFn hi = pair.phi3 * pair.g;
    auto [bl, bh] = domain.bounding_box();
    double side = domain.thickness() / 8;
    for (int scale = 0; scale < 3; ++scale, side /= 2) {
        const double offset = 0.1234567 * side;
        for (double y = bl.imag() + offset; y + side <= bh.imag(); y += side)
            for (double x = bl.real() + offset; x + side <= bh.real(); x += side) {
                cplx c(x, y);
                std::array<cplx, 4> corners{c, c + side, c + cplx(side, side), c + cplx(0, side)};
                bool inside = true;
                for (int k = 0; k < 4; ++k)
                    inside = inside && domain.segment_inside(corners[static_cast<std::size_t>(k)], corners[static_cast<std::size_t>((k + 1) % 4)], 1e-9);
                if (!inside) continue;
                // cells already covered at a coarser scale are inside a checked square
                if (scale > 0) {
                    const double coarse = 2 * side;
                    bool covered = true;
                    for (auto z : corners) covered = covered && domain.contains(z, coarse * 1.5);
                    if (covered) continue;
                }
                detail::check_cell(lo, hi, c, side, 0);
            }
    }
}

/// Phi = (1/2 (1/g - g), i/2 (1/g + g), 1) phi3, expanded termwise so poles of g
/// cancel symbolically against zeros of phi3. With a domain, the pole/zero
/// matching of the pair is verified first.
inline NullForm assemble_null_form(const WeierstrassPair& pair, const Domain* domain = nullptr) {
    if (domain) check_pair(pair, *domain);
    const auto& g = pair.g;
    const auto& p3 = pair.phi3;
    if (g.has_expression() && p3.has_expression()) {
        const Expr over = simplify(p3.expression() / g.expression());
        const Expr times = simplify(p3.expression() * g.expression());
        return NullForm({HolomorphicFn(cplx(0.5) * over - cplx(0.5) * times),
                         HolomorphicFn(cplx(0, 0.5) * over + cplx(0, 0.5) * times), p3},
                        "spinor");
    }
    auto phi1 = HolomorphicFn::opaque([g, p3](cplx z) {
        cplx gz = g(z), pz = p3(z);
        return 0.5 * (pz / gz - pz * gz);
    });
    auto phi2 = HolomorphicFn::opaque([g, p3](cplx z) {
        cplx gz = g(z), pz = p3(z);
        return cplx(0, 0.5) * (pz / gz + pz * gz);
    });
    return NullForm({phi1, phi2, p3}, "spinor");
}

/// g = phi3 / (phi1 - i phi2) of a 3-component form, the inverse of the spinor
/// assembly.
inline HolomorphicFn gauss_function(const NullForm& form) {
    if (form.dimension() != 3) fail(ErrorCode::InvalidArgument, "spinor Gauss map needs n = 3");
    if (form.has_expressions())
        return HolomorphicFn(form[2].expression() / (form[0].expression() - kI * form[1].expression()));
    auto f = form;
    return HolomorphicFn::opaque([f](cplx z) { return f[2](z) / (f[0](z) - kI * f[1](z)); });
}

// ---------------------------------------------------------------------------
// Validation

struct NullReport {
    double max_residual = 0.0;      // |sum f_k^2| / (sum |f_k|)^2
    double max_abs_residual = 0.0;  // |sum f_k^2|
    double min_modulus = 0.0;       // min sum |f_k|
    int samples = 0;
    bool pass = false;
};

/// `skip` offsets the quasi-random sample sequence.
inline NullReport validate_null(const NullForm& form, const Domain& domain, int samples, double tol = 1e-10, int skip = 0) {
    if (samples < 1) fail(ErrorCode::InvalidArgument, "need at least one sample");
    NullReport r;
    r.samples = samples;
    r.min_modulus = std::numeric_limits<double>::infinity();
    for (cplx p : interior_samples(domain, samples, 1e-6, skip)) {
        CVector v = form(p);
        double mod = v.cwiseAbs().sum();
        double res = std::abs((v.array() * v.array()).sum());
        r.min_modulus = std::min(r.min_modulus, mod);
        r.max_abs_residual = std::max(r.max_abs_residual, res);
        r.max_residual = std::max(r.max_residual, mod > 0 ? res / (mod * mod) : std::numeric_limits<double>::infinity());
    }
    r.pass = r.max_residual <= tol && r.min_modulus > 0.0;
    return r;
}

struct FullnessReport {
    bool full = false;
    int rank = 0;
    std::vector<double> singular_values;
};

/// Complex rank of the coefficient vectors at sampled points.
inline FullnessReport fullness_test(const NullForm& form, const Domain& domain, int samples) {
    const int n = form.dimension();
    if (samples < n) fail(ErrorCode::InvalidArgument, "need at least n samples");
    auto pts = interior_samples(domain, samples, 1e-6);
    Eigen::MatrixXcd m(n, samples);
    for (int k = 0; k < samples; ++k) {
        CVector v = form(pts[static_cast<std::size_t>(k)]);
        m.col(k) = v / v.norm();
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    FullnessReport r;
    const auto& s = svd.singularValues();
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        r.singular_values.push_back(s[k]);
        if (s[k] > 1e-8 * s[0]) ++r.rank;
    }
    r.full = r.rank == n;
    return r;
}

inline ProjectivePoint gauss_map(const NullForm& form, cplx p) { return ProjectivePoint(form(p)); }

// ---------------------------------------------------------------------------
// Flux

struct FluxMap {
    std::vector<PathPolyline> cycles;
    std::vector<Eigen::VectorXd> values;   // -i * integral, real part
    std::vector<double> imaginary_residual; // max |Re integral| per cycle
};

/// Flux(C) = -i * integral_C Phi for every cycle. Refuses cycles on which the
/// form has real periods above `real_tol` (the flux would not be real).
inline FluxMap flux(const NullForm& form, const std::vector<PathPolyline>& cycles, double tol = 1e-11,
                    double real_tol = 1e-8) {
    FluxMap out;
    for (std::size_t c = 0; c < cycles.size(); ++c) {
        if (!cycles[c].closed()) fail(ErrorCode::InvalidArgument, "flux cycles must be closed");
        auto r = contour_integrate(form, cycles[c], tol);
        CVector f = -kI * r.value;
        double imag = f.imag().cwiseAbs().maxCoeff();
        if (imag > real_tol)
            fail(ErrorCode::RealPeriodsNonzero, "cycle " + std::to_string(c) + " has real period " + std::to_string(imag));
        out.cycles.push_back(cycles[c]);
        out.values.push_back(f.real());
        out.imaginary_residual.push_back(imag);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Immersions

struct ConformalityReport {
    int vertices_checked = 0;
    double max_angle_defect = 0.0;   // |<ux, uy>| / (|ux||uy|)
    double max_length_ratio = 0.0;   // | |ux| / |uy| - 1 |
    bool pass = false;
};

/// u(p) = x0 + Re int_{p0}^p Phi, tabulated on every mesh vertex along a
/// breadth-first spanning tree.
class Immersion {
public:
    Immersion(NullForm form, const std::vector<PathPolyline>& basis, cplx p0, Eigen::VectorXd x0, Mesh mesh,
              double tol = 1e-12, double exact_tol = 1e-8)
        : form_(std::move(form)), p0_(p0), x0_(std::move(x0)), mesh_(std::move(mesh)), tol_(tol) {
        const int n = form_.dimension();
        if (x0_.size() != n) fail(ErrorCode::InvalidArgument, "initial value has the wrong dimension");
        for (std::size_t c = 0; c < basis.size(); ++c) {
            auto r = contour_integrate(form_, basis[c], 1e-11);
            double re = r.value.real().cwiseAbs().maxCoeff();
            period_residuals_.push_back(re);
            if (re > exact_tol)
                fail(ErrorCode::RealPeriodsNonzero,
                     "cycle " + std::to_string(c) + " has real period residual " + std::to_string(re));
        }
        const Domain& dom = mesh_.domain();
        if (!dom.contains(p0_)) fail(ErrorCode::EvaluationOutsideDomain, "base point outside the domain");
        int root = mesh_.nearest_vertex(p0_);
        if (root < 0 || !dom.segment_inside(p0_, mesh_.vertex(root), -1e-10))
            fail(ErrorCode::PathNotFound, "base point cannot be joined to the mesh");
        values_ = Eigen::MatrixXd::Constant(n, static_cast<Eigen::Index>(mesh_.vertex_count()), std::numeric_limits<double>::quiet_NaN());
        values_.col(root) = x0_ + segment(p0_, mesh_.vertex(root));
        std::deque<int> queue{root};
        std::vector<char> seen(mesh_.vertex_count(), 0);
        seen[static_cast<std::size_t>(root)] = 1;
        while (!queue.empty()) {
            int v = queue.front();
            queue.pop_front();
            for (auto [w, e] : mesh_.neighbors(v)) {
                if (seen[static_cast<std::size_t>(w)]) continue;
                seen[static_cast<std::size_t>(w)] = 1;
                values_.col(w) = values_.col(v) + segment(mesh_.vertex(v), mesh_.vertex(w));
                queue.push_back(w);
            }
        }
    }

    const NullForm& form() const { return form_; }
    const Mesh& mesh() const { return mesh_; }
    cplx base_point() const { return p0_; }
    const std::vector<double>& period_residuals() const { return period_residuals_; }

    Eigen::VectorXd at_vertex(int v) const { return values_.col(v); }

    /// u(p) for any domain point: nearest vertex plus a straight segment.
    Eigen::VectorXd operator()(cplx p) const {
        if (p == p0_) return x0_;
        int v = mesh_.nearest_vertex(p);
        if (v < 0 || !mesh_.domain().segment_inside(mesh_.vertex(v), p, -1e-10))
            fail(ErrorCode::PathNotFound, "point cannot be joined to the mesh");
        return values_.col(v) + segment(mesh_.vertex(v), p);
    }

    /// x0 + Re of the integral along an explicit path starting at p0.
    Eigen::VectorXd along(const PathPolyline& path) const {
        if (std::abs(path.vertices().front() - p0_) > 1e-14) fail(ErrorCode::InvalidArgument, "path must start at the base point");
        return x0_ + contour_integrate(form_, path, tol_, &mesh_.domain()).value.real();
    }

    /// Orthogonality and equal length of central lattice differences in x and y.
    ConformalityReport conformality_check(int max_vertices = 64, double tol = 0.01) const {
        ConformalityReport r;
        const int stride = std::max<int>(1, static_cast<int>(mesh_.vertex_count()) / (4 * max_vertices));
        for (int v = 0; v < static_cast<int>(mesh_.vertex_count()) && r.vertices_checked < max_vertices; v += stride) {
            if (!mesh_.on_lattice(v) || mesh_.is_boundary(v)) continue;
            auto [i, j] = mesh_.lattice_index(v);
            int xp = mesh_.lattice_vertex(i + 1, j), xm = mesh_.lattice_vertex(i - 1, j);
            int yp = mesh_.lattice_vertex(i, j + 1), ym = mesh_.lattice_vertex(i, j - 1);
            if (xp < 0 || xm < 0 || yp < 0 || ym < 0) continue;
            Eigen::VectorXd ux = values_.col(xp) - values_.col(xm), uy = values_.col(yp) - values_.col(ym);
            r.max_angle_defect = std::max(r.max_angle_defect, std::abs(ux.dot(uy)) / (ux.norm() * uy.norm()));
            r.max_length_ratio = std::max(r.max_length_ratio, std::abs(ux.norm() / uy.norm() - 1.0));
            ++r.vertices_checked;
        }
        r.pass = r.vertices_checked > 0 && r.max_angle_defect <= tol && r.max_length_ratio <= tol;
        return r;
    }

    /// CSV rows (re, im, u1..un), one per mesh vertex.
    void write_csv(std::ostream& os) const {
        os << "re,im";
        for (int k = 0; k < form_.dimension(); ++k) os << ",u" << (k + 1);
        os << '\n';
        os.precision(17);
        for (std::size_t v = 0; v < mesh_.vertex_count(); ++v) {
            cplx z = mesh_.vertex(static_cast<int>(v));
            os << z.real() << ',' << z.imag();
            for (int k = 0; k < form_.dimension(); ++k) os << ',' << values_(k, static_cast<Eigen::Index>(v));
            os << '\n';
        }
    }

private:
    Eigen::VectorXd segment(cplx a, cplx b) const {
        if (a == b) return Eigen::VectorXd::Zero(form_.dimension());
        return contour_integrate(form_, PathPolyline::segment(a, b), tol_ * std::max(1.0, std::abs(b - a))).value.real();
    }

    NullForm form_;
    cplx p0_;
    Eigen::VectorXd x0_;
    Mesh mesh_;
    double tol_;
    Eigen::MatrixXd values_;
    std::vector<double> period_residuals_;
};

// ---------------------------------------------------------------------------
// Built-in data

namespace builtin {

inline WeierstrassPair catenoid() { return {HolomorphicFn::parse("z"), HolomorphicFn::parse("1/z")}; }
inline WeierstrassPair plane() { return {HolomorphicFn(1.0), HolomorphicFn(1.0)}; }

/// Helicoid piece on the wedge: 2 du = (i sinh z, cosh z, i) dz, i.e. half the
/// stated 4 du with its second entry read as e^z + e^-z. Its spinor Gauss map
/// phi3 / (phi1 - i phi2) is -e^z.
inline NullForm helicoid_form() {
    return NullForm({HolomorphicFn::parse("i*(exp(z) - exp(-z))/2"), HolomorphicFn::parse("(exp(z) + exp(-z))/2"),
                     HolomorphicFn::parse("i")},
                    "helicoid");
}
inline WeierstrassPair helicoid() { return {HolomorphicFn::parse("-exp(z)"), HolomorphicFn::parse("i")}; }

/// Member j of the annulus family: Phi = 1/2 (G - 1/G, i (G + 1/G), 2) z^-j,
/// whose spinor data is g = 1/G, phi3 = z^-j.
inline WeierstrassPair annulus_family(int j, const Expr& G = parse_expr("exp(z^2)")) {
    return {HolomorphicFn(Expr::constant(1.0) / G), HolomorphicFn(pow(zeta(), -j))};
}

} // namespace builtin

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const WeierstrassPair& p) { return {{"g", to_json(p.g.expression())}, {"phi3", to_json(p.phi3.expression())}}; }

inline WeierstrassPair pair_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("g") || !j.contains("phi3") || j.size() != 2)
        fail(ErrorCode::ParseError, "Weierstrass pair needs exactly 'g' and 'phi3'");
    return {HolomorphicFn(expr_from_json(j.at("g"))), HolomorphicFn(expr_from_json(j.at("phi3")))};
}

inline nlohmann::json to_json(const NullForm& f) {
    nlohmann::json c = nlohmann::json::array();
    for (const auto& h : f.coefficients()) c.push_back(to_json(h.expression()));
    return {{"coefficients", c}};
}

inline NullForm null_form_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("coefficients") || !j.at("coefficients").is_array() || j.size() != 1)
        fail(ErrorCode::ParseError, "null form needs exactly 'coefficients'");
    std::vector<HolomorphicFn> c;
    for (const auto& e : j.at("coefficients")) c.emplace_back(expr_from_json(e));
    return NullForm(c);
}

} // namespace minsurf
