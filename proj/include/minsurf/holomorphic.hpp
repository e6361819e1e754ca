#pragma once

#include "domain.hpp"
#include "errors.hpp"
#include "expr.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>

namespace minsurf {

/// A holomorphic (or meromorphic) function of the coordinate zeta: either a
/// closed-form expression tree, which also provides a symbolic derivative, or an
/// opaque evaluator with an optional derivative.
class HolomorphicFn {
public:
    using Evaluator = std::function<cplx(cplx)>;

    HolomorphicFn() : HolomorphicFn(Expr::constant(0.0)) {}
    HolomorphicFn(cplx c) : HolomorphicFn(Expr::constant(c)) {}
    HolomorphicFn(double c) : HolomorphicFn(Expr::constant(c)) {}

    HolomorphicFn(const Expr& e) : impl_(std::make_shared<Impl>()) {
        impl_->expr = simplify(e);
        impl_->program = Program(impl_->expr);
        impl_->label = impl_->expr.to_string();
    }

    static HolomorphicFn parse(std::string_view text) { return HolomorphicFn(parse_expr(text)); }

    static HolomorphicFn opaque(Evaluator f, std::optional<Evaluator> df = std::nullopt, std::string label = "opaque") {
        HolomorphicFn h;
        h.impl_ = std::make_shared<Impl>();
        h.impl_->evaluator = std::move(f);
        h.impl_->derivative = std::move(df);
        h.impl_->label = std::move(label);
        return h;
    }

    cplx operator()(cplx z) const { return impl_->expr_based() ? impl_->program(z) : impl_->evaluator(z); }

    bool has_expression() const { return impl_->expr_based(); }
    const Expr& expression() const {
        if (!has_expression()) fail(ErrorCode::InvalidArgument, "function '" + impl_->label + "' is opaque");
        return impl_->expr;
    }

    bool has_derivative() const { return has_expression() || impl_->derivative.has_value(); }

    /// Closed-form derivative as a function (symbolic for expressions).
    HolomorphicFn derivative() const {
        if (has_expression()) {
            std::call_once(impl_->derivative_once, [this] {
                impl_->derivative_fn = std::make_shared<HolomorphicFn>(::minsurf::derivative(impl_->expr));
            });
            return *impl_->derivative_fn;
        }
        if (impl_->derivative) return opaque(*impl_->derivative, std::nullopt, "d/dz " + impl_->label);
        fail(ErrorCode::InvalidArgument, "function '" + impl_->label + "' has no closed-form derivative");
    }

    const std::string& label() const { return impl_->label; }

    /// True when the tree does not depend on zeta (opaque functions never are).
    bool is_constant() const { return has_expression() && impl_->expr.is_constant_tree(); }

private:
    struct Impl {
        Expr expr;
        Program program;
        Evaluator evaluator;
        std::optional<Evaluator> derivative;
        std::string label;
        std::once_flag derivative_once;
        std::shared_ptr<HolomorphicFn> derivative_fn;
        bool expr_based() const { return !evaluator; }
    };
    std::shared_ptr<Impl> impl_;
};

inline HolomorphicFn operator*(const HolomorphicFn& a, const HolomorphicFn& b) {
    if (a.has_expression() && b.has_expression()) return HolomorphicFn(a.expression() * b.expression());
    return HolomorphicFn::opaque([a, b](cplx z) { return a(z) * b(z); }, std::nullopt, "(" + a.label() + ")*(" + b.label() + ")");
}

/// Cauchy-integral estimate of f'(p) from the circle of the given radius:
/// f'(p) = (1/(N r)) sum_k f(p + r w_k) conj(w_k). The trapezoidal rule is
/// spectrally accurate on circles, so N doubles until two estimates agree.
inline cplx cauchy_derivative(const HolomorphicFn& f, cplx p, double radius, double rel_tol = 1e-12) {
    auto estimate = [&](int n) {
        cplx sum = 0.0;
        for (int k = 0; k < n; ++k) {
            cplx w = std::polar(1.0, 2 * kPi * (k + 0.5) / n);
            sum += f(p + radius * w) * std::conj(w);
        }
        return sum / (double(n) * radius);
    };
    cplx prev = estimate(16);
    for (int n = 32; n <= 4096; n *= 2) {
        cplx cur = estimate(n);
        if (std::abs(cur - prev) <= rel_tol * std::max(std::abs(cur), 1e-300)) return cur;
        prev = cur;
    }
    return prev;
}

/// Derivative at an interior point: closed form when available, otherwise a
/// Cauchy-integral estimate on a circle of radius min(dist/2, 0.1).
inline cplx derivative_at(const HolomorphicFn& f, cplx p, const Domain& domain, double min_radius = 1e-6) {
    double dist = domain.signed_distance(p);
    if (f.has_derivative()) {
        if (dist <= 0.0) fail(ErrorCode::TooCloseToBoundary, "point is not interior");
        return f.derivative()(p);
    }
    double radius = std::min(0.5 * dist, 0.1);
    if (radius < min_radius) fail(ErrorCode::TooCloseToBoundary, "no room for a Cauchy circle around the point");
    return cauchy_derivative(f, p, radius);
}

/// Largest Cauchy-Riemann residual |f_y - i f_x| / (|f_x| + |f|) over random
/// interior points, with central differences of step `h`.
inline double cauchy_riemann_residual(const HolomorphicFn& f, const Domain& domain, int samples = 64,
                                      unsigned seed = 7, double h = 1e-5) {
    auto [lo, hi] = domain.bounding_box();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(lo.real(), hi.real()), uy(lo.imag(), hi.imag());
    double worst = 0.0;
    int taken = 0;
    for (int attempt = 0; taken < samples && attempt < samples * 1000; ++attempt) {
        cplx p(ux(rng), uy(rng));
        if (!domain.contains(p, 4 * h)) continue;
        ++taken;
        cplx fx = (f(p + h) - f(p - h)) / (2 * h);
        cplx fy = (f(p + kI * h) - f(p - kI * h)) / (2 * h);
        double scale = std::abs(fx) + std::abs(f(p));
        if (scale == 0.0) continue;
        worst = std::max(worst, std::abs(fy - kI * fx) / scale);
    }
    return worst;
}

} // namespace minsurf
