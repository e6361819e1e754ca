#pragma once

// Adaptive Gauss-Kronrod (7/15) integration of vector-valued forms f(zeta) dzeta
// along polylines.

#include "domain.hpp"
#include "errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace minsurf {

using CVector = Eigen::VectorXcd;

struct QuadratureOptions {
    double tol = 1e-12;          // absolute, per component, for the whole path
    int max_intervals = 200000;  // subdivision budget
};

struct ContourResult {
    CVector value;
    double error = 0.0; // estimated absolute error (max over components)
    int intervals = 0;
};

namespace detail {

// Kronrod abscissae (descending, last is the centre) and weights; every other
// abscissa starting from index 1 is a Gauss-7 node.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
    cplx mid;
    CVector value;
};

/// One G7/K15 pair on the straight segment [a, b] (complex line integral).
template <class Form>
std::pair<CVector, double> gk15(const Form& form, cplx a, cplx b) {
    const cplx center = (a + b) * 0.5;
    const cplx half = (b - a) * 0.5;
    CVector fc = form(center);
    CVector kron = kWgk[7] * fc;
    CVector gauss = kWg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const cplx dx = half * kXgk[i];
        CVector pair = form(center + dx) + form(center - dx);
        kron += kWgk[i] * pair;
        if (i % 2 == 1) gauss += kWg[i / 2] * pair;
    }
    kron *= half;
    gauss *= half;
    for (Eigen::Index k = 0; k < kron.size(); ++k)
        if (!std::isfinite(kron[k].real()) || !std::isfinite(kron[k].imag()))
            fail(ErrorCode::NonConvergent, "integrand is not finite on the path");
    double err = (kron - gauss).cwiseAbs().maxCoeff();
    return {kron, err};
}

template <class Form>
void adapt(const Form& form, cplx a, cplx b, double tol_per_length, double min_len, int& budget,
           std::vector<Piece>& pieces, double& error) {
    auto [value, err] = gk15(form, a, b);
    const double len = std::abs(b - a);
    if (err <= tol_per_length * len) {
        pieces.push_back({(a + b) * 0.5, std::move(value)});
        error += err;
        return;
    }
    if (len < min_len || --budget <= 0)
        fail(ErrorCode::NonConvergent, "quadrature subdivision budget exhausted before reaching tolerance");
    const cplx m = (a + b) * 0.5;
    adapt(form, a, m, tol_per_length, min_len, budget, pieces, error);
    adapt(form, m, b, tol_per_length, min_len, budget, pieces, error);
}

} // namespace detail

/// Integral of form(zeta) dzeta along the polyline. The tolerance is split over
/// segments in proportion to length. Accepted sub-interval contributions are
/// summed in an orientation-independent order, so reversing the path negates
/// the result exactly. If `domain` is given the path must stay inside it.
template <class Form>
ContourResult contour_integrate(const Form& form, const PathPolyline& path, double tol,
                                const Domain* domain = nullptr, int max_intervals = 200000) {
    if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "tolerance must be positive");
    // mesh vertices may sit on the boundary up to rounding
    if (domain && !path.inside(*domain, -1e-10))
        fail(ErrorCode::EvaluationOutsideDomain, "integration path leaves the domain");
    const auto& v = path.vertices();
    const double total = path.length();
    std::vector<detail::Piece> pieces;
    double error = 0.0;
    int budget = max_intervals;
    if (total > 0.0) {
        const double tol_per_length = tol / total;
        const double min_len = total * 1e-13;
        for (std::size_t i = 0; i + 1 < v.size(); ++i)
            if (v[i] != v[i + 1]) detail::adapt(form, v[i], v[i + 1], tol_per_length, min_len, budget, pieces, error);
    }
    ContourResult result;
    result.intervals = static_cast<int>(pieces.size());
    result.error = error;
    if (pieces.empty()) {
        result.value = CVector::Zero(form(v.front()).size());
        return result;
    }
    std::sort(pieces.begin(), pieces.end(), [](const detail::Piece& x, const detail::Piece& y) {
        if (x.mid.real() != y.mid.real()) return x.mid.real() < y.mid.real();
        return x.mid.imag() < y.mid.imag();
    });
    result.value = CVector::Zero(pieces.front().value.size());
    for (const auto& p : pieces) result.value += p.value;
    return result;
}

/// Scalar convenience wrapper.
template <class F>
std::pair<cplx, double> contour_integrate_scalar(const F& f, const PathPolyline& path, double tol,
                                                 const Domain* domain = nullptr) {
    auto r = contour_integrate(
        [&](cplx z) {
            CVector out(1);
            out[0] = f(z);
            return out;
        },
        path, tol, domain);
    return {r.value[0], r.error};
}

} // namespace minsurf
