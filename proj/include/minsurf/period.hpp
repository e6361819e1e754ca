#pragma once

// Period map of a null form over a homology basis, period-dominating spray
// multipliers exp(sum zeta_i g_i), and a damped Newton solve that prescribes
// the periods (hence the flux) of the multiplied form.

#include "domain.hpp"
#include "errors.hpp"
#include "holomorphic.hpp"
#include "projective.hpp"
#include "quadrature.hpp"
#include "weierstrass.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace minsurf {

struct HomologyBasis {
    std::vector<PathPolyline> cycles;

    std::size_t size() const { return cycles.size(); }

    /// One counter-clockwise circle per hole: for an annulus the circle at
    /// the geometric mean radius, otherwise empty.
    static HomologyBasis standard(const Domain& d, int segments = 256) {
        HomologyBasis b;
        if (d.kind() == DomainKind::Annulus)
            b.cycles.push_back(PathPolyline::circle(0.0, std::sqrt(d.inner_radius() * d.outer_radius()), segments));
        return b;
    }

    /// Cycle count equals the Betti number, every cycle is closed, lies in the
    /// domain and winds around the hole.
    void validate(const Domain& d) const {
        if (static_cast<int>(cycles.size()) != d.betti_number())
            fail(ErrorCode::InvalidArgument, "homology basis has " + std::to_string(cycles.size()) + " cycles, domain needs " +
                                                 std::to_string(d.betti_number()));
        const auto around_hole = HolomorphicFn::parse("z");
        for (const auto& c : cycles) {
            if (!c.closed()) fail(ErrorCode::InvalidArgument, "homology cycle is not closed");
            if (!c.inside(d)) fail(ErrorCode::InvalidArgument, "homology cycle leaves the domain");
            if (winding_number(around_hole, c) == 0) fail(ErrorCode::InvalidArgument, "homology cycle is null-homologous");
        }
    }
};

/// Xi(zeta, p) = prod exp(zeta_i g_i(p)).
class SprayMultiplier {
public:
    SprayMultiplier() = default;
    explicit SprayMultiplier(std::vector<HolomorphicFn> generators)
        : generators_(std::move(generators)), zeta_(Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(generators_.size()))) {}

    const std::vector<HolomorphicFn>& generators() const { return generators_; }
    const Eigen::VectorXcd& coefficients() const { return zeta_; }
    std::size_t size() const { return generators_.size(); }

    SprayMultiplier with_coefficients(Eigen::VectorXcd zeta) const {
        if (zeta.size() != zeta_.size()) fail(ErrorCode::InvalidArgument, "coefficient count does not match the generators");
        SprayMultiplier s = *this;
        s.zeta_ = std::move(zeta);
        return s;
    }

    /// Exponent sum zeta_i g_i(p); exactly 0 when all coefficients vanish.
    cplx exponent(cplx p, const Eigen::VectorXcd& zeta) const {
        cplx s = 0.0;
        for (std::size_t i = 0; i < generators_.size(); ++i) {
            const cplx c = zeta[static_cast<Eigen::Index>(i)];
            if (c != cplx(0.0)) s += c * generators_[i](p);
        }
        return s;
    }
    cplx operator()(cplx p) const { return std::exp(exponent(p, zeta_)); }

    /// The multiplier as a holomorphic function (symbolic when possible).
    HolomorphicFn as_function() const {
        bool symbolic = true;
        for (const auto& g : generators_) symbolic = symbolic && g.has_expression();
        if (symbolic) {
            Expr e = Expr::constant(0.0);
            for (std::size_t i = 0; i < generators_.size(); ++i) {
                const cplx c = zeta_[static_cast<Eigen::Index>(i)];
                if (c != cplx(0.0)) e = e + c * generators_[i].expression();
            }
            return HolomorphicFn(exp(e));
        }
        auto self = *this;
        return HolomorphicFn::opaque([self](cplx p) { return self(p); }, std::nullopt, "spray");
    }

private:
    std::vector<HolomorphicFn> generators_;
    Eigen::VectorXcd zeta_;
};

inline nlohmann::json to_json(const SprayMultiplier& s) {
    nlohmann::json gens = nlohmann::json::array(), coef = nlohmann::json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.generators()[i].has_expression()) fail(ErrorCode::InvalidArgument, "opaque generators cannot be serialized");
        gens.push_back(to_json(s.generators()[i].expression()));
        coef.push_back(detail::complex_to_json(s.coefficients()[static_cast<Eigen::Index>(i)]));
    }
    return {{"generators", gens}, {"coefficients", coef}};
}

inline SprayMultiplier spray_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail(ErrorCode::ParseError, "spray must be an object");
    for (const auto& [k, v] : j.items())
        if (k != "generators" && k != "coefficients") fail(ErrorCode::ParseError, "unknown spray key '" + k + "'");
    std::vector<HolomorphicFn> gens;
    for (const auto& g : j.at("generators")) gens.push_back(HolomorphicFn(expr_from_json(g)));
    SprayMultiplier s(std::move(gens));
    if (j.contains("coefficients")) {
        const auto& c = j.at("coefficients");
        if (c.size() != s.size()) fail(ErrorCode::ParseError, "coefficient count does not match the generators");
        Eigen::VectorXcd z(static_cast<Eigen::Index>(c.size()));
        for (std::size_t i = 0; i < c.size(); ++i) z[static_cast<Eigen::Index>(i)] = detail::complex_from_json(c[i]);
        s = s.with_coefficients(z);
    }
    return s;
}

/// Column j is the integral of h * form over cycle j.
inline Eigen::MatrixXcd period_map(const HolomorphicFn& h, const NullForm& form, const HomologyBasis& basis, double tol = 1e-12) {
    const int n = form.dimension();
    Eigen::MatrixXcd P(n, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j) {
        auto r = contour_integrate([&](cplx z) -> CVector { return h(z) * form(z); }, basis.cycles[j], tol);
        P.col(static_cast<Eigen::Index>(j)) = r.value;
    }
    return P;
}

namespace detail {

inline Eigen::VectorXcd flatten(const Eigen::MatrixXcd& m) { return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size()); }

/// Periods of Xi(zeta) * form and their derivatives in zeta, integrated in a
/// single pass: the derivative in zeta_i is the period of g_i * Xi * form.
struct PeriodJet {
    Eigen::VectorXcd value;     // n*l
    Eigen::MatrixXcd jacobian;  // n*l x N
};

inline PeriodJet period_jet(const SprayMultiplier& spray, const Eigen::VectorXcd& zeta, const NullForm& form,
                            const HomologyBasis& basis, double tol, bool with_jacobian = true) {
    const int n = form.dimension();
    const auto N = static_cast<Eigen::Index>(spray.size());
    const auto l = static_cast<Eigen::Index>(basis.size());
    const Eigen::Index blocks = with_jacobian ? N + 1 : 1;
    PeriodJet jet{Eigen::VectorXcd::Zero(n * l), Eigen::MatrixXcd::Zero(n * l, N)};
    for (Eigen::Index j = 0; j < l; ++j) {
        auto integrand = [&](cplx z) -> CVector {
            const CVector f = std::exp(spray.exponent(z, zeta)) * form(z);
            CVector out(n * blocks);
            out.head(n) = f;
            for (Eigen::Index i = 1; i < blocks; ++i) out.segment(i * n, n) = spray.generators()[static_cast<std::size_t>(i - 1)](z) * f;
            return out;
        };
        auto r = contour_integrate(integrand, basis.cycles[static_cast<std::size_t>(j)], tol);
        jet.value.segment(j * n, n) = r.value.head(n);
        for (Eigen::Index i = 1; i < blocks; ++i) jet.jacobian.block(j * n, i - 1, n, 1) = r.value.segment(i * n, n);
    }
    return jet;
}

inline Eigen::VectorXd singular_values(const Eigen::MatrixXcd& J) {
    if (J.size() == 0) return Eigen::VectorXd();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(J);
    return svd.singularValues();
}

inline int numerical_rank(const Eigen::VectorXd& sv, double rel = 1e-10) {
    if (sv.size() == 0) return 0;
    int r = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k)
        if (sv[k] > rel * sv[0]) ++r;
    return sv[0] > 0 ? r : 0;
}

/// Laurent monomials z^k, k = -ceil(N/2) .. floor(N/2).
inline std::vector<HolomorphicFn> laurent_generators(int N) {
    std::vector<HolomorphicFn> out;
    for (int k = -(N + 1) / 2; k <= N / 2; ++k) out.push_back(k == 0 ? HolomorphicFn(1.0) : HolomorphicFn(pow(zeta(), k)));
    return out;
}

} // namespace detail

struct SprayReport {
    SprayMultiplier spray;
    int rank = 0;
    int required = 0;  // n * l
    Eigen::VectorXd singular_values;
    Eigen::MatrixXcd jacobian;  // derivative of the flattened periods at zeta = 0
};

/// Differential at zeta = 0 has columns P(g_i * form); the family is period
/// dominating when its numerical rank reaches n * l.
inline SprayReport build_spray(const NullForm& form, const HomologyBasis& basis, std::vector<HolomorphicFn> generators,
                               double tol = 1e-12) {
    SprayReport rep;
    rep.required = form.dimension() * static_cast<int>(basis.size());
    if (static_cast<int>(generators.size()) < rep.required)
        fail(ErrorCode::ConstructionFailed, "need at least n*l = " + std::to_string(rep.required) + " generators");
    rep.spray = SprayMultiplier(std::move(generators));
    auto jet = detail::period_jet(rep.spray, rep.spray.coefficients(), form, basis, tol);
    rep.jacobian = jet.jacobian;
    rep.singular_values = detail::singular_values(rep.jacobian);
    rep.rank = detail::numerical_rank(rep.singular_values);
    if (rep.rank < rep.required)
        fail(ErrorCode::ConstructionFailed, "spray rank " + std::to_string(rep.rank) + " < " + std::to_string(rep.required) +
                                                "; enlarge the generator family");
    return rep;
}

/// Default family: Laurent monomials with N = 2 n l, doubled up to three
/// times on rank deficiency.
inline SprayReport build_spray(const NullForm& form, const HomologyBasis& basis, double tol = 1e-12) {
    const int nl = form.dimension() * static_cast<int>(basis.size());
    int N = 2 * nl;
    for (int attempt = 0;; ++attempt) {
        try {
            return build_spray(form, basis, detail::laurent_generators(N), tol);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ConstructionFailed || attempt == 3) throw;
        }
        N *= 2;
    }
}

struct NewtonTraceRow {
    int iteration;
    double residual;
    double step;
    int halvings;
};

struct PeriodSolution {
    SprayMultiplier spray;  // with the solved coefficients
    int iterations = 0;
    double residual = 0.0;
    std::vector<NewtonTraceRow> trace;
};

inline void write_trace_csv(std::ostream& os, const std::vector<NewtonTraceRow>& trace) {
    os << "iteration,residual,step,halvings\n";
    os.precision(17);
    for (const auto& r : trace) os << r.iteration << ',' << r.residual << ',' << r.step << ',' << r.halvings << '\n';
}

/// Newton iteration for P(Xi(zeta) * form) = target (n x l). Steps are
/// minimal-norm least-squares solutions, halved while the residual does not
/// decrease.
inline PeriodSolution solve_periods(const SprayMultiplier& spray, const NullForm& form, const HomologyBasis& basis,
                                    const Eigen::MatrixXcd& target, double tol = 1e-10, int max_iterations = 20) {
    const int n = form.dimension();
    if (target.rows() != n || target.cols() != static_cast<Eigen::Index>(basis.size()))
        fail(ErrorCode::InvalidArgument, "target must be n x l");
    const double quad_tol = std::min(1e-12, 1e-2 * tol);
    const Eigen::VectorXcd t = detail::flatten(target);
    const Eigen::Index nl = t.size();

    PeriodSolution sol;
    Eigen::VectorXcd zeta = spray.coefficients();
    auto jet = detail::period_jet(spray, zeta, form, basis, quad_tol);
    Eigen::VectorXcd F = jet.value - t;
    double res = F.norm();
    sol.trace.push_back({0, res, 0.0, 0});
    while (res > tol) {
        if (sol.iterations >= max_iterations)
            fail(ErrorCode::NoConvergence, "period residual " + std::to_string(res) + " after " + std::to_string(max_iterations) + " iterations");
        const auto sv = detail::singular_values(jet.jacobian);
        if (detail::numerical_rank(sv) < nl) fail(ErrorCode::SingularJacobian, "period Jacobian lost rank");
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(jet.jacobian);
        const Eigen::VectorXcd step = -cod.solve(F);
        double scale = 1.0;
        int halvings = 0;
        detail::PeriodJet trial;
        double trial_res = 0.0;
        for (;;) {
            try {
                trial = detail::period_jet(spray, zeta + scale * step, form, basis, quad_tol);
                trial_res = (trial.value - t).norm();
            } catch (const Error& e) {
                // overflow of the multiplier counts as a residual increase
                if (e.code() != ErrorCode::NonConvergent) throw;
                trial_res = std::numeric_limits<double>::infinity();
            }
            if (trial_res < res) break;
            if (++halvings > 30) fail(ErrorCode::NoConvergence, "step halving did not reduce the period residual");
            scale *= 0.5;
        }
        zeta += scale * step;
        jet = std::move(trial);
        F = jet.value - t;
        res = trial_res;
        ++sol.iterations;
        sol.trace.push_back({sol.iterations, res, scale * step.norm(), halvings});
    }
    sol.spray = spray.with_coefficients(zeta);
    sol.residual = res;
    return sol;
}

struct PrescribedFlux {
    PeriodSolution solution;
    HolomorphicFn multiplier;
    NullForm form;               // multiplier * input form
    Eigen::MatrixXd achieved;    // re-measured flux, n x l
    double flux_error = 0.0;     // max abs deviation from the request
};

/// Multiplier h with periods of h * form equal to i F on every cycle, so the
/// new form is exact in the real part and has flux F. The achieved flux is
/// re-measured by fresh quadrature.
inline PrescribedFlux prescribe_flux(const NullForm& form, const HomologyBasis& basis, const Eigen::MatrixXd& F,
                                     double tol = 1e-10, int max_iterations = 20, const SprayReport* spray = nullptr) {
    const int n = form.dimension();
    if (F.rows() != n || F.cols() != static_cast<Eigen::Index>(basis.size())) fail(ErrorCode::InvalidArgument, "flux target must be n x l");
    PrescribedFlux out;
    if (basis.size() == 0) {
        out.multiplier = HolomorphicFn(1.0);
        out.form = form;
        out.achieved = Eigen::MatrixXd(n, 0);
        return out;
    }
    const SprayReport rep = spray ? *spray : build_spray(form, basis);
    const Eigen::MatrixXcd target = kI * F.cast<cplx>();
    out.solution = solve_periods(rep.spray, form, basis, target, tol, max_iterations);
    out.multiplier = out.solution.spray.as_function();
    out.form = form.multiplied(out.multiplier);
    auto fm = flux(out.form, basis.cycles, 1e-12);
    out.achieved = Eigen::MatrixXd(n, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j) out.achieved.col(static_cast<Eigen::Index>(j)) = fm.values[j];
    out.flux_error = (out.achieved - F).cwiseAbs().maxCoeff();
    return out;
}

} // namespace minsurf
