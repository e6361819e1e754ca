// Prints one PASS/FAIL line per acceptance criterion; exit 0 iff all pass.

#include <minsurf/scenarios.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <random>

using namespace minsurf;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

const fs::path kScratch = fs::temp_directory_path() / "minsurf_acceptance";

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

RunOutcome run(const std::string& name, const json& cfg) { return run_scenario(cfg, kScratch / name); }

const json* find_check(const RunOutcome& out, const std::string& name) {
    for (const auto& c : out.summary.at("checks"))
        if (c.at("name") == name) return &c;
    return nullptr;
}

double value_of(const json& check) { return std::stod(check.at("value").get<std::string>()); }

// all checks whose name starts with `prefix` exist and pass; returns the worst value
bool prefix_pass(const RunOutcome& out, const std::string& prefix, double& worst, int& count) {
    bool ok = true;
    count = 0;
    worst = 0.0;
    for (const auto& c : out.summary.at("checks")) {
        const std::string n = c.at("name");
        if (n.rfind(prefix, 0) != 0) continue;
        ++count;
        ok = ok && c.at("passed").get<bool>();
        worst = std::max(worst, value_of(c));
    }
    return ok && count > 0;
}

std::string error_detail(const RunOutcome& out) { return out.error ? "error: " + out.message : ""; }

Verdict criterion1() {
    json cfg = {{"scenario", "catenoid"},
                {"curvature_patch", {{"h", 0.05}}},
                {"tolerances", {{"flux_abs", 1e-8}, {"nullity_rel", 1e-10}, {"curvature_rel", 0.02}}}};
    auto t0 = std::chrono::steady_clock::now();
    auto out = run("catenoid_flux", cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out.error) return {false, error_detail(out)};
    double worst;
    int n;
    bool ok = prefix_pass(out, "flux_", worst, n) && n == 3 && secs < 5.0;
    return {ok, "max |flux - (0,0,2pi)| = " + fmt(worst) + " (<= 1e-8), " + fmt(secs) + " s (< 5 s)"};
}

Verdict criterion2() {
    json cfg = {{"scenario", "helicoid_wedge"},
                {"truncation", 6.0},
                {"t", {0.5, 1.0, 2.0, 4.0}},
                {"mesh_h", 0.02},
                {"tolerances", {{"curvature_abs", 1e-6}, {"distance_factor", 0.95}}}};
    auto t0 = std::chrono::steady_clock::now();
    auto out = run("helicoid_wedge", cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out.error) return {false, error_detail(out)};
    double wk, wd;
    int nk, nd;
    bool ok = prefix_pass(out, "K(", wk, nk) && nk == 4;
    ok = prefix_pass(out, "d(", wd, nd) && nd == 4 && ok;
    const json* inc = find_check(out, "d_increasing");
    ok = ok && inc && inc->at("passed").get<bool>() && secs < 60.0;
    std::string ds;
    for (const auto& c : out.summary.at("checks"))
        if (c.at("name").get<std::string>().rfind("d(", 0) == 0) ds += (ds.empty() ? "" : ", ") + fmt(value_of(c));
    return {ok, "max |K+1| = " + fmt(wk) + ", d = (" + ds + ") for t = (0.5, 1, 2, 4), increasing, " + fmt(secs) + " s"};
}

Verdict criterion3() {
    // absolute |sum phi_k^2| over 10^4 points per built-in form
    struct Case {
        std::string label;
        NullForm form;
        Domain domain;
    };
    const Domain ann = Domain::annulus(0.5, 2.0);
    std::vector<Case> cases{{"catenoid", assemble_null_form(builtin::catenoid()), ann},
                            {"helicoid", builtin::helicoid_form(), Domain::wedge(6.0)},
                            {"helicoid spinor", assemble_null_form(builtin::helicoid()), Domain::wedge(6.0)},
                            {"plane", assemble_null_form(builtin::plane()), Domain::disc(1.0)}};
    for (int j = 2; j <= 12; j += 2) cases.push_back({"family j=" + std::to_string(j), assemble_null_form(builtin::annulus_family(j)), ann});
    const auto basis = HomologyBasis::standard(ann);
    const auto spray = build_spray(cases[0].form, basis);
    for (auto target : {std::array<double, 3>{0, 0, 2 * kPi + 1}, std::array<double, 3>{1, 0, 2 * kPi}}) {
        Eigen::MatrixXd F(3, 1);
        F << target[0], target[1], target[2];
        cases.push_back({"solved flux (" + fmt(target[0]) + ",0," + fmt(target[2]) + ")", prescribe_flux(cases[0].form, basis, F, 1e-10, 20, &spray).form, ann});
    }
    double worst_abs = 0.0, worst_rel = 0.0;
    std::string worst_label, failing;
    for (const auto& c : cases) {
        auto r = validate_null(c.form, c.domain, 10000);
        if (r.max_abs_residual > worst_abs) {
            worst_abs = r.max_abs_residual;
            worst_label = c.label;
        }
        worst_rel = std::max(worst_rel, r.max_residual);
        if (r.max_abs_residual > 1e-10) failing += (failing.empty() ? "" : ", ") + c.label + " " + fmt(r.max_abs_residual);
    }
    std::string d = std::to_string(cases.size()) + " forms, max |sum phi^2| = " + fmt(worst_abs) + " (" + worst_label + "), max relative " +
                    fmt(worst_rel);
    if (!failing.empty()) d += "; above 1e-10: " + failing;
    return {failing.empty(), d};
}

Verdict criterion4() {
    json cfg = {{"scenario", "catenoid"},
                {"curvature_patch", {{"inner", 0.8}, {"outer", 1.25}, {"h", 0.01}}},
                {"tolerances", {{"curvature_rel", 0.02}}}};
    auto out = run("catenoid_curvature", cfg);
    if (out.error) return {false, error_detail(out)};
    const json* c = find_check(out, "angle_defect_curvature");
    if (!c) return {false, "no curvature check"};
    return {c->at("passed").get<bool>(), "max relative error " + fmt(value_of(*c)) + " over " + c->at("detail").get<std::string>() + " (<= 0.02)"};
}

Verdict criterion5() {
    json cfg = {{"scenario", "annulus_family"},
                {"R", 2.0},
                {"g0", "exp(z^2)"},
                {"zeta0", 1.0},
                {"j", {2, 4, 6, 8, 10, 12}},
                {"mesh_h", 0.02},
                {"tolerances",
                 {{"period_abs", 1e-8}, {"curvature_rel", 1e-6}, {"distance_factor", 0.95}, {"nullity_rel", 1e-10}, {"final_product_min", 1000.0}}}};
    auto t0 = std::chrono::steady_clock::now();
    auto out = run("annulus_family", cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out.error) return {false, error_detail(out)};
    double wp, wk, wd, wo;
    int np, nk, nd, no;
    bool a = prefix_pass(out, "exact_j", wp, np) && np == 6;
    bool b = prefix_pass(out, "K_j", wk, nk) && nk == 6;
    bool c = prefix_pass(out, "d_j", wd, nd) && nd == 6;
    bool o = prefix_pass(out, "product_oracle_j", wo, no) && no == 6;
    const json* inc = find_check(out, "product_increasing");
    const json* fin = find_check(out, "final_product");
    bool d = inc && fin && inc->at("passed").get<bool>() && fin->at("passed").get<bool>() && o;
    const bool ok = a && b && c && d && secs < 300.0;
    return {ok, std::string("(a) ") + (a ? "ok" : "FAIL") + " max period " + fmt(wp) + "; (b) " + (b ? "ok" : "FAIL") + " max rel K error " +
                    fmt(wk) + "; (c) " + (c ? "ok" : "FAIL") + "; (d) " + (d ? "ok" : "FAIL") + " product(12) = " + (fin ? fmt(value_of(*fin)) : "?") +
                    "; " + fmt(secs) + " s"};
}

Verdict criterion6() {
    json cfg = {{"scenario", "period_solver"},
                {"targets", {{0.0, 0.0, 2 * kPi + 1}}},
                {"max_iterations", 20},
                {"tolerances", {{"solve_residual", 1e-10}, {"flux_abs", 1e-8}}}};
    auto out = run("period_solver", cfg);
    if (out.error) return {false, error_detail(out)};
    bool ok = true;
    std::string d;
    for (const char* name : {"spray_rank", "iterations_target1", "flux_error_target1", "identity_zeta"}) {
        const json* c = find_check(out, name);
        ok = ok && c && c->at("passed").get<bool>();
        d += std::string(d.empty() ? "" : ", ") + name + " " + (c ? fmt(value_of(*c)) : "missing");
    }
    return {ok, d};
}

Verdict criterion7() {
    json cfg = {{"scenario", "divisor"}, {"radius", 1.0}, {"multiplicities", {1, 2}}, {"rho", {1e-1, 1e-2, 1e-3}}, {"tolerances", {{"bound_slack", 0.0}}}};
    auto out = run("divisor", cfg);
    if (out.error) return {false, error_detail(out)};
    double wv, wd;
    int nv, nd;
    bool ok = prefix_pass(out, "verified_", wv, nv) && nv == 6;
    ok = prefix_pass(out, "deviation_", wd, nd) && nd == 6 && ok;
    return {ok, std::to_string(nv) + " divisors verified, all deviations within m*rho + m*rho^2"};
}

Verdict criterion8() {
    json cfg = {{"scenario", "gauge"},
                {"L", {{"inner", 0.8}, {"outer", 1.25}}},
                {"factor", "exp(0.01*z)"},
                {"tolerances", {{"proximity", 0.02}, {"deviation", 1e-6}, {"case1_oracle", 1e-10}}}};
    auto out = run("gauge", cfg);
    if (out.error) return {false, error_detail(out)};
    bool ok = true;
    std::string d;
    for (const char* name : {"proximity", "deviation", "case1_path", "case1_oracle", "case1_deviation"}) {
        const json* c = find_check(out, name);
        ok = ok && c && c->at("passed").get<bool>();
        d += std::string(d.empty() ? "" : ", ") + name + " " + (c ? fmt(value_of(*c)) : "missing");
    }
    return {ok, d};
}

// ---------------------------------------------------------------------------
// property suite

CVector random_vector(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> N;
    CVector v(n);
    for (auto& x : v) x = cplx(N(rng), N(rng));
    return v;
}

std::string fs_axioms(std::mt19937_64& rng, bool& ok) {
    double worst = 0.0;
    std::normal_distribution<double> N;
    for (int k = 0; k < 1000; ++k) {
        const int n = 2 + k % 4;
        CVector x = random_vector(rng, n), y = random_vector(rng, n), z = random_vector(rng, n);
        const cplx lambda(N(rng), N(rng));
        const double dxy = fs_distance(x, y), dyz = fs_distance(y, z), dxz = fs_distance(x, z);
        worst = std::max({worst, fs_distance(x, x), fs_distance(x, lambda * x), std::abs(dxy - fs_distance(y, x)),
                          std::abs(dxy - fs_distance(lambda * x, y)), dxz - dxy - dyz, -dxy, dxy - kPi / 2});
    }
    ok = worst <= 1e-12;
    return "fs axioms on 1000 triples, worst violation " + fmt(std::max(worst, 0.0));
}

HolomorphicFn random_rational(std::mt19937_64& rng, int& expected) {
    // prod (z - a_k)^(+-1) with |a_k| away from the unit circle
    std::uniform_real_distribution<double> r(0.0, 1.0), ang(0.0, 2 * kPi);
    std::uniform_int_distribution<int> count(1, 4);
    Expr e = Expr::constant(1.0);
    expected = 0;
    const int n = count(rng);
    for (int k = 0; k < n; ++k) {
        const bool inside = r(rng) < 0.5;
        const double rad = inside ? 0.8 * r(rng) : 1.25 + 2.0 * r(rng);
        const Expr factor = zeta() - Expr::constant(std::polar(rad, ang(rng)));
        const bool pole = r(rng) < 0.4;
        e = pole ? e / factor : e * factor;
        if (inside) expected += pole ? -1 : 1;
    }
    return HolomorphicFn(e);
}

std::string winding_additivity(std::mt19937_64& rng, bool& ok) {
    const auto circle = PathPolyline::circle(0.0, 1.0, 256);
    int mismatches = 0;
    for (int k = 0; k < 100; ++k) {
        int ef, eg;
        auto f = random_rational(rng, ef);
        auto g = random_rational(rng, eg);
        const int wf = winding_number(f, circle), wg = winding_number(g, circle), wfg = winding_number(f * g, circle);
        if (wfg != wf + wg || wf != ef || wg != eg) ++mismatches;
    }
    ok = mismatches == 0;
    return "winding additivity on 100 pairs, " + std::to_string(mismatches) + " mismatches";
}

std::string gauss_invariance(std::mt19937_64& rng, bool& ok) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Domain ann = Domain::annulus(0.5, 2.0);
    double worst = 0.0;
    for (const auto& pair : {builtin::catenoid(), builtin::annulus_family(4)}) {
        const auto form = assemble_null_form(pair);
        const auto basis = HomologyBasis::standard(ann);
        const Mesh mesh = build_mesh(ann, 0.25);
        Eigen::VectorXd shift(3);
        shift << u(rng), u(rng), u(rng);
        Immersion a(form, basis.cycles, 1.0, Eigen::VectorXd::Zero(3), mesh), b(form, basis.cycles, 1.0, shift, mesh);
        for (int v = 0; v < static_cast<int>(mesh.vertex_count()); v += 7)
            worst = std::max(worst, ((b.at_vertex(v) - a.at_vertex(v)) - shift).cwiseAbs().maxCoeff() / std::max(1.0, a.at_vertex(v).norm()));
        for (cplx z : interior_samples(ann, 200, 1e-3)) {
            const auto base = gauss_map(form, z).coords();
            for (double c : {0.5, 3.0, 1e3}) worst = std::max(worst, (gauss_map(form.scaled(c), z).coords() - base).cwiseAbs().maxCoeff());
        }
    }
    ok = worst <= 1e-14;
    return "Gauss map under homothety/translation, worst " + fmt(worst);
}

std::string osserman_homothety(bool& ok) {
    const Domain ann = Domain::annulus(0.5, 2.0);
    const auto hierarchy = detail::mesh_hierarchy(build_mesh(ann, 0.1), 3);
    const auto pair = builtin::catenoid();
    double worst = 0.0;
    for (cplx p : {cplx(1.2, 0.4), cplx(-0.7, 0.3)}) {
        auto base = osserman_quantity(pair, assemble_null_form(pair), p, hierarchy);
        for (double c : {0.25, 3.0, 40.0}) {
            WeierstrassPair scaled{pair.g, HolomorphicFn(c) * pair.phi3};
            auto r = osserman_quantity(scaled, assemble_null_form(scaled), p, hierarchy);
            worst = std::max(worst, std::abs(r.product - base.product) / base.product);
        }
    }
    ok = worst <= 1e-10;
    return "Osserman product under homothety, worst relative " + fmt(worst);
}

std::string flux_homotopy(std::mt19937_64& rng, bool& ok) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double tol = 1e-11;
    const auto form = assemble_null_form(builtin::catenoid());
    const auto base = flux(form, {PathPolyline::circle(0.0, 1.0, 256)}, tol).values[0];
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        // random star-shaped loop about the origin inside 0.5 < |z| < 2
        std::vector<cplx> pts;
        const int n = 12 + static_cast<int>(20 * u(rng));
        for (int i = 0; i < n; ++i) pts.push_back(std::polar(0.6 + 1.3 * u(rng), 2 * kPi * i / n));
        pts.push_back(pts.front());
        auto f = flux(form, {PathPolyline(pts, true)}, tol).values[0];
        worst = std::max(worst, (f - base).cwiseAbs().maxCoeff());
    }
    ok = worst <= 2 * tol;
    return "flux over 20 homotopic loops, worst " + fmt(worst) + " (<= " + fmt(2 * tol) + ")";
}

Verdict criterion9() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(20240607);
    bool a, b, c, d, e;
    std::string detail = fs_axioms(rng, a) + "; " + winding_additivity(rng, b) + "; " + gauss_invariance(rng, c) + "; " + osserman_homothety(d) +
                         "; " + flux_homotopy(rng, e);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {a && b && c && d && e && secs < 120.0, detail + "; " + fmt(secs) + " s"};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, Verdict (*)()>> criteria = {
        {"catenoid flux", criterion1},      {"helicoid wedge", criterion2},    {"nullity suite", criterion3},
        {"curvature oracle", criterion4},   {"annulus family divergence", criterion5}, {"period solver", criterion6},
        {"divisor multipliers", criterion7}, {"gauge alignment", criterion8},   {"property suites", criterion9},
    };
    // optional arguments select criteria by number
    std::vector<std::size_t> selected;
    for (int a = 1; a < argc; ++a) {
        const int n = std::atoi(argv[a]);
        if (n < 1 || n > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "unknown criterion '%s'\n", argv[a]);
            return 2;
        }
        selected.push_back(static_cast<std::size_t>(n - 1));
    }
    if (selected.empty())
        for (std::size_t k = 0; k < criteria.size(); ++k) selected.push_back(k);
    bool all = true;
    for (std::size_t k : selected) {
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        all = all && v.pass;
        std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, v.detail.c_str());
        std::fflush(stdout);
    }
    return all ? 0 : 1;
}
