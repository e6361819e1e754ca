#pragma once

// Config-driven scenarios. Each scenario reads a JSON document, runs the
// library, and produces checks plus CSV tables; run_scenario writes them to an
// output directory together with a schema-versioned summary.json.

#include "domain.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "holomorphic.hpp"
#include "labyrinth.hpp"
#include "mesh.hpp"
#include "period.hpp"
#include "projective.hpp"
#include "weierstrass.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace minsurf {

inline constexpr const char* kSummarySchemaVersion = "1.0";

enum class LogLevel { Debug, Info, Warn, Error };
using LogSink = std::function<void(LogLevel, const std::string&)>;

// ---------------------------------------------------------------------------
// Report building blocks

struct Check {
    std::string name;
    double value = 0.0;
    std::string relation;  // how value compares to limit: "<=", ">=", ">", "==", "increasing"
    double limit = 0.0;
    bool passed = false;
    std::string detail;
};

struct ColumnMeta {
    std::string provenance;  // "computed", "analytic", "config", ...
    std::optional<double> tolerance;
};

using Cell = std::variant<double, long long, std::string>;

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

inline std::string format_cell(const Cell& c) {
    if (auto d = std::get_if<double>(&c)) return format_double(*d);
    if (auto i = std::get_if<long long>(&c)) return std::to_string(*i);
    return std::get<std::string>(c);
}

struct Table {
    std::string name;  // file stem
    std::vector<std::string> columns;
    std::map<std::string, ColumnMeta> meta;
    std::vector<std::vector<Cell>> rows;
    bool dat = false;  // also emit a whitespace-separated .dat file

    Table(std::string n, std::vector<std::pair<std::string, ColumnMeta>> cols, bool with_dat = false) : name(std::move(n)), dat(with_dat) {
        for (auto& [c, m] : cols) {
            columns.push_back(c);
            meta[c] = m;
        }
    }
    void add(std::vector<Cell> row) {
        if (row.size() != columns.size()) fail(ErrorCode::InvalidArgument, "row width does not match table '" + name + "'");
        rows.push_back(std::move(row));
    }
    void write_csv(std::ostream& os) const {
        for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << columns[k];
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << format_cell(r[k]);
            os << '\n';
        }
    }
    void write_dat(std::ostream& os) const {
        os << '#';
        for (const auto& c : columns) os << ' ' << c;
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t k = 0; k < r.size(); ++k) os << (k ? " " : "") << format_cell(r[k]);
            os << '\n';
        }
    }
};

struct ScenarioReport {
    std::string scenario;
    std::vector<Check> checks;
    std::vector<Table> tables;
    std::map<std::string, double> tolerances;
    nlohmann::json results = nlohmann::json::object();
    std::vector<std::string> notes;

    bool passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    Check& check(std::string name, double value, const std::string& relation, double limit, std::string detail = "") {
        bool ok = false;
        if (relation == "<=") ok = value <= limit;
        else if (relation == "<") ok = value < limit;
        else if (relation == ">=") ok = value >= limit;
        else if (relation == ">") ok = value > limit;
        else if (relation == "==") ok = value == limit;
        else fail(ErrorCode::InvalidArgument, "unknown relation " + relation);
        checks.push_back({std::move(name), value, relation, limit, ok, std::move(detail)});
        return checks.back();
    }
    Check& flag(std::string name, bool ok, std::string detail = "") {
        checks.push_back({std::move(name), ok ? 1.0 : 0.0, "==", 1.0, ok, std::move(detail)});
        return checks.back();
    }
};

// ---------------------------------------------------------------------------
// Config reading

/// Typed access to a JSON object; every key must be read, anything left over
/// is rejected by finish().
class ConfigReader {
public:
    ConfigReader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) invalid("must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        const auto* v = get(key, fallback.has_value());
        if (!v) return *fallback;
        if (!v->is_number()) invalid("'" + key + "' must be a number");
        double x = v->get<double>();
        if (!std::isfinite(x)) invalid("'" + key + "' must be finite");
        return x;
    }
    int integer(const std::string& key, std::optional<int> fallback = std::nullopt) {
        const auto* v = get(key, fallback.has_value());
        if (!v) return *fallback;
        if (!v->is_number_integer()) invalid("'" + key + "' must be an integer");
        return v->get<int>();
    }
    std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        const auto* v = get(key, fallback.has_value());
        if (!v) return *fallback;
        if (!v->is_string()) invalid("'" + key + "' must be a string");
        return v->get<std::string>();
    }
    cplx complex(const std::string& key, std::optional<cplx> fallback = std::nullopt) {
        const auto* v = get(key, fallback.has_value());
        if (!v) return *fallback;
        try {
            return detail::complex_from_json(*v);
        } catch (const Error& e) {
            invalid("'" + key + "': " + e.what());
        }
    }
    std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) {
        const auto* v = get(key, fallback.has_value());
        if (!v) return *fallback;
        if (!v->is_array()) invalid("'" + key + "' must be an array");
        std::vector<double> out;
        for (const auto& x : *v) {
            if (!x.is_number() || !std::isfinite(x.get<double>())) invalid("'" + key + "' must hold finite numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }
    std::vector<int> integers(const std::string& key, std::optional<std::vector<int>> fallback = std::nullopt) {
        const auto* v = get(key, fallback.has_value());
        if (!v) return *fallback;
        if (!v->is_array()) invalid("'" + key + "' must be an array");
        std::vector<int> out;
        for (const auto& x : *v) {
            if (!x.is_number_integer()) invalid("'" + key + "' must hold integers");
            out.push_back(x.get<int>());
        }
        return out;
    }
    HolomorphicFn function(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        const auto* v = get(key, fallback.has_value());
        try {
            if (!v) return HolomorphicFn::parse(*fallback);
            if (v->is_string()) return HolomorphicFn::parse(v->get<std::string>());
            return HolomorphicFn(expr_from_json(*v));
        } catch (const Error& e) {
            invalid("'" + key + "': " + e.what());
        }
    }
    /// Nested object (an empty object when absent and optional).
    ConfigReader child(const std::string& key, bool optional = true) {
        const auto* v = get(key, optional);
        static const nlohmann::json empty = nlohmann::json::object();
        return ConfigReader(v ? *v : empty, where_ + "." + key);
    }
    const nlohmann::json& raw(const std::string& key) {
        const auto* v = get(key, false);
        return *v;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) invalid("unknown key '" + k + "'");
    }

    [[noreturn]] void invalid(const std::string& what) const { fail(ErrorCode::ConfigInvalid, where_ + ": " + what); }

private:
    const nlohmann::json* get(const std::string& key, bool optional) {
        used_.insert(key);
        if (!j_.contains(key)) {
            if (!optional) invalid("missing key '" + key + "'");
            return nullptr;
        }
        return &j_.at(key);
    }

    const nlohmann::json& j_;
    std::string where_;
    std::set<std::string> used_;
};

/// Tolerance block: defaults declared by the scenario, overrides from config.
class Tolerances {
public:
    explicit Tolerances(ConfigReader reader) : reader_(std::move(reader)) {}
    double operator()(const std::string& key, double fallback) {
        double v = reader_.number(key, fallback);
        if (!(v >= 0)) reader_.invalid("tolerance '" + key + "' must be non-negative");
        values_[key] = v;
        return v;
    }
    void finish() const { reader_.finish(); }
    const std::map<std::string, double>& values() const { return values_; }

private:
    ConfigReader reader_;
    std::map<std::string, double> values_;
};

namespace detail {

inline const ColumnMeta kComputed{"computed", std::nullopt};
inline const ColumnMeta kConfig{"config", std::nullopt};
inline ColumnMeta analytic(std::optional<double> tol = std::nullopt) { return {"analytic", tol}; }
inline ColumnMeta computed(double tol) { return {"computed", tol}; }

inline void log(const LogSink& sink, LogLevel level, const std::string& msg) {
    if (sink) sink(level, msg);
}

inline Domain annulus_from(ConfigReader& c, double inner, double outer) {
    auto d = c.child("domain");
    const double in = d.number("inner", inner), out = d.number("outer", outer);
    d.finish();
    try {
        return Domain::annulus(in, out);
    } catch (const Error& e) {
        c.invalid(e.what());
    }
}

inline WeierstrassPair pair_from(ConfigReader& c, const std::string& g, const std::string& phi3) {
    return {c.function("g", g), c.function("phi3", phi3)};
}

} // namespace detail

// ---------------------------------------------------------------------------
// Scenarios

inline ScenarioReport scenario_catenoid(ConfigReader& c, Tolerances& tol, const LogSink& log, int seed) {
    ScenarioReport rep;
    const Domain domain = detail::annulus_from(c, 0.5, 2.0);
    const auto pair = detail::pair_from(c, "z", "1/z");
    const auto expected = c.numbers("expected_flux", std::vector<double>{0.0, 0.0, 2 * kPi});
    const double h = c.number("mesh_h", 0.1);
    const int nsamples = c.integer("nullity_samples", 10000);
    auto patch = c.child("curvature_patch");
    const double pin = patch.number("inner", 0.8), pout = patch.number("outer", 1.25), ph = patch.number("h", 0.05);
    patch.finish();
    const double flux_tol = tol("flux_abs", 1e-8);
    const double null_tol = tol("nullity_rel", 1e-10);
    const double curv_tol = tol("curvature_rel", 0.02);
    if (expected.size() != 3) c.invalid("'expected_flux' needs 3 components");

    const auto form = assemble_null_form(pair);
    const auto basis = HomologyBasis::standard(domain);
    basis.validate(domain);

    detail::log(log, LogLevel::Info, "flux over the core circle");
    auto fm = flux(form, basis.cycles, 1e-12);
    Table ft("flux", {{"component", detail::kComputed}, {"value", detail::computed(flux_tol)}, {"expected", detail::analytic()},
                      {"abs_error", detail::computed(flux_tol)}});
    for (int k = 0; k < 3; ++k) {
        const double v = fm.values[0][k], err = std::abs(v - expected[static_cast<std::size_t>(k)]);
        ft.add({static_cast<long long>(k + 1), v, expected[static_cast<std::size_t>(k)], err});
        rep.check("flux_" + std::to_string(k + 1), err, "<=", flux_tol);
    }
    rep.tables.push_back(std::move(ft));

    auto nr = validate_null(form, domain, nsamples, null_tol, seed);
    rep.check("nullity", nr.max_residual, "<=", null_tol, "abs " + format_double(nr.max_abs_residual));

    detail::log(log, LogLevel::Info, "immersion");
    Immersion u(form, basis.cycles, std::sqrt(domain.inner_radius() * domain.outer_radius()), Eigen::VectorXd::Zero(3), build_mesh(domain, h));
    auto conf = u.conformality_check();
    rep.flag("conformality", conf.pass, "angle " + format_double(conf.max_angle_defect) + ", ratio " + format_double(conf.max_length_ratio));
    Table im("immersion", {{"re", detail::kComputed}, {"im", detail::kComputed}, {"x1", detail::kComputed}, {"x2", detail::kComputed},
                           {"x3", detail::kComputed}}, true);
    for (std::size_t v = 0; v < u.mesh().vertex_count(); ++v) {
        const auto x = u.at_vertex(static_cast<int>(v));
        const cplx z = u.mesh().vertex(static_cast<int>(v));
        im.add({z.real(), z.imag(), x[0], x[1], x[2]});
    }
    rep.tables.push_back(std::move(im));

    detail::log(log, LogLevel::Info, "angle-defect curvature at h = " + format_double(ph));
    const Domain pd = Domain::annulus(pin, pout);
    Immersion patch_u(form, HomologyBasis::standard(pd).cycles, std::sqrt(pin * pout), Eigen::VectorXd::Zero(3), build_mesh(pd, ph));
    Table kt("curvature", {{"re", detail::kComputed}, {"im", detail::kComputed}, {"K_formula", detail::kComputed},
                           {"K_discrete", detail::kComputed}, {"rel_error", detail::computed(curv_tol)}});
    double worst = 0.0;
    for (const auto& s : angle_defect_curvature(patch_u)) {
        const double K = gauss_curvature(pair, s.z, &pd);
        const double err = std::abs(s.K - K) / std::abs(K);
        worst = std::max(worst, err);
        kt.add({s.z.real(), s.z.imag(), K, s.K, err});
    }
    rep.check("angle_defect_curvature", worst, "<=", curv_tol, std::to_string(kt.rows.size()) + " vertices");
    rep.tables.push_back(std::move(kt));
    rep.results["flux"] = std::vector<double>(fm.values[0].data(), fm.values[0].data() + 3);
    return rep;
}

inline ScenarioReport scenario_helicoid_wedge(ConfigReader& c, Tolerances& tol, const LogSink& log, int) {
    ScenarioReport rep;
    const double trunc = c.number("truncation", 6.0);
    const double half = c.number("half_angle", kPi / 4);
    const auto ts = c.numbers("t", std::vector<double>{0.5, 1.0, 2.0, 4.0});
    const double h = c.number("mesh_h", 0.02);
    GeodesicOptions opt;
    opt.levels = c.integer("levels", 3);
    opt.stencil = c.integer("stencil", 4);
    const double k_tol = tol("curvature_abs", 1e-6);
    const double factor = tol("distance_factor", 0.95);

    const Domain wedge = Domain::wedge(trunc, half);
    const auto pair = builtin::helicoid();
    const auto form = builtin::helicoid_form();
    rep.notes.push_back("form (i sinh z, cosh z, i); spinor data g = -exp(z), phi3 = i; a Gauss map e^z gives the same surface up to orientation");
    // the assembled spinor form must reproduce the closed form
    double diff = 0.0;
    for (cplx z : interior_samples(wedge, 200, 1e-3)) diff = std::max(diff, (assemble_null_form(pair)(z) - form(z)).norm());
    rep.check("spinor_form_agreement", diff, "<=", 1e-12);

    detail::log(log, LogLevel::Info, "mesh hierarchy at h = " + format_double(h));
    const auto hierarchy = detail::mesh_hierarchy(build_mesh(wedge, h), opt.levels);
    const auto metric = ConformalMetric::from_form(form);
    Table t("helicoid", {{"t", detail::kConfig}, {"K", detail::computed(k_tol)}, {"d", detail::kComputed}, {"d_lower", detail::kComputed},
                         {"d_upper", detail::kComputed}, {"lower_bound", detail::analytic()}, {"product", detail::kComputed}},
            true);
    double previous = -1.0;
    bool increasing = true;
    for (double ti : ts) {
        const cplx p(0.0, ti);
        const double K = gauss_curvature(pair, p);
        auto d = geodesic_distance(metric, p, hierarchy, opt);
        detail::log(log, LogLevel::Debug, "t = " + format_double(ti) + ": d = " + format_double(d.value));
        t.add({ti, K, d.value, d.lower, d.upper, ti, std::abs(K) * d.value * d.value});
        rep.check("K(i" + format_double(ti) + ")", std::abs(K + 1.0), "<=", k_tol);
        rep.check("d(i" + format_double(ti) + ")", d.value, ">=", factor * ti);
        increasing = increasing && d.value > previous;
        previous = d.value;
    }
    rep.flag("d_increasing", increasing);
    rep.tables.push_back(std::move(t));
    return rep;
}

inline ScenarioReport scenario_annulus_family(ConfigReader& c, Tolerances& tol, const LogSink& log, int seed) {
    ScenarioReport rep;
    const double R = c.number("R", 2.0);
    const auto G = c.function("g0", std::string("exp(z^2)"));
    const cplx z0 = c.complex("zeta0", cplx(1.0));
    const auto js = c.integers("j", std::vector<int>{2, 4, 6, 8, 10, 12});
    const double h = c.number("mesh_h", 0.02);
    const int nsamples = c.integer("nullity_samples", 10000);
    const auto thresholds = c.numbers("thresholds", std::vector<double>{10.0, 100.0, 1000.0});
    GeodesicOptions opt;
    opt.levels = c.integer("levels", 3);
    opt.stencil = c.integer("stencil", 4);
    const double period_tol = tol("period_abs", 1e-8);
    const double k_tol = tol("curvature_rel", 1e-6);
    const double factor = tol("distance_factor", 0.95);
    const double null_tol = tol("nullity_rel", 1e-10);
    const double final_min = tol("final_product_min", 1000.0);
    if (!(R > 1)) c.invalid("R must exceed 1");
    if (!(std::abs(z0) > 1 / R && std::abs(z0) < R)) c.invalid("zeta0 must lie in the annulus");
    if (!G.has_expression()) c.invalid("g0 must be an expression");

    const Domain domain = Domain::annulus(1 / R, R);
    // evenness and zero-freeness of g0 on samples
    double odd = 0.0, scale = 0.0, low = std::numeric_limits<double>::infinity();
    for (cplx z : interior_samples(domain, 500, 1e-6, seed)) {
        odd = std::max(odd, std::abs(G(z) - G(-z)));
        scale = std::max(scale, std::abs(G(z)));
        low = std::min(low, std::abs(G(z)));
    }
    if (odd > 1e-12 * std::max(1.0, scale)) fail(ErrorCode::SymmetryViolated, "g0 has an odd part of size " + format_double(odd));
    if (!(low > 0)) fail(ErrorCode::InvalidArgument, "g0 vanishes on the annulus");

    const cplx Gz = G(z0), dG = G.derivative()(z0);
    const double A = 16 * std::norm(Gz * dG) / std::pow(1 + std::norm(Gz), 4);
    rep.results["A"] = A;
    rep.notes.push_back("spinor data g = 1/g0, phi3 = z^-j; the outer circle |z| = R is treated as artificial");

    const auto basis = HomologyBasis::standard(domain);
    const Domain ideal = domain.with_artificial(1);
    detail::log(log, LogLevel::Info, "mesh hierarchy at h = " + format_double(h));
    const auto hierarchy = detail::mesh_hierarchy(build_mesh(ideal, h), opt.levels);
    const auto full_hierarchy = detail::mesh_hierarchy(build_mesh(domain, h), opt.levels);

    std::vector<FamilyMember> members;
    std::vector<int> member_j;
    std::map<int, double> period_max, nullity;
    Table prof("profile",
               {{"j", detail::kConfig}, {"status", detail::kComputed}, {"period_max", detail::computed(period_tol)},
                {"nullity", detail::computed(null_tol)}, {"K", detail::computed(k_tol)}, {"K_expected", detail::analytic()},
                {"d", detail::kComputed}, {"d_lower", detail::kComputed}, {"d_upper", detail::kComputed},
                {"d_full_boundary", detail::kComputed}, {"lower_bound", detail::analytic()}, {"product", detail::kComputed},
                {"product_lower", detail::kComputed}, {"product_upper", detail::kComputed}, {"product_oracle", detail::analytic()}},
               true);
    for (int j : js) {
        if (j < 2) c.invalid("j must be at least 2");
        WeierstrassPair pair{HolomorphicFn(Expr::constant(1.0) / G.expression()), HolomorphicFn(pow(zeta(), -j))};
        const auto form = assemble_null_form(pair);
        const auto P = period_map(HolomorphicFn(1.0), form, basis);
        period_max[j] = P.cwiseAbs().maxCoeff();
        const double nan = std::numeric_limits<double>::quiet_NaN();
        if (j % 2) {
            rep.notes.push_back("j = " + std::to_string(j) + " skipped (odd)");
            prof.add({static_cast<long long>(j), std::string("skipped"), period_max[j], nan, nan, nan, nan, nan, nan, nan, nan, nan, nan, nan, nan});
            continue;
        }
        rep.check("exact_j" + std::to_string(j), period_max[j], "<=", period_tol);
        auto nr = validate_null(form, domain, nsamples, null_tol, seed);
        nullity[j] = nr.max_residual;
        rep.check("nullity_j" + std::to_string(j), nr.max_residual, "<=", null_tol, "abs " + format_double(nr.max_abs_residual));
        members.push_back({"j=" + std::to_string(j), pair, form});
        member_j.push_back(j);
    }
    detail::log(log, LogLevel::Info, "Osserman profile for " + std::to_string(members.size()) + " members");
    auto profile = osserman_profile(members, z0, hierarchy, thresholds, opt);
    double previous = -1.0;
    bool increasing = true;
    const double r0 = std::abs(z0);
    for (std::size_t k = 0; k < members.size(); ++k) {
        const int j = member_j[k];
        const auto& r = profile.records[k];
        const double Kexp = A * std::pow(r0, 2 * j);
        const double lb = std::sqrt(2.0) * (std::pow(R, j - 1) - std::pow(r0, 1 - j)) / (j - 1);
        const double oracle = Kexp * lb * lb;
        auto dfull = geodesic_distance(ConformalMetric::from_form(members[k].form), z0, full_hierarchy, opt);
        prof.add({static_cast<long long>(j), std::string("ok"), period_max[j], nullity[j], r.K, -Kexp, r.d, r.d_lower, r.d_upper, dfull.value, lb,
                  r.product, r.product_lower, r.product_upper, oracle});
        const std::string tag = "_j" + std::to_string(j);
        rep.check("K" + tag, std::abs(std::abs(r.K) - Kexp) / Kexp, "<=", k_tol);
        rep.check("d" + tag, r.d, ">=", factor * lb);
        rep.check("product_oracle" + tag, r.product, ">=", factor * factor * oracle);
        increasing = increasing && r.product > previous;
        previous = r.product;
    }
    rep.flag("product_increasing", increasing);
    if (!profile.records.empty()) rep.check("final_product", profile.records.back().product, ">", final_min);
    Table th("thresholds", {{"threshold", detail::kConfig}, {"first_j", detail::kComputed}});
    for (const auto& [t, idx] : profile.first_entry) th.add({t, static_cast<long long>(idx < 0 ? -1 : member_j[static_cast<std::size_t>(idx)])});
    rep.tables.push_back(std::move(prof));
    rep.tables.push_back(std::move(th));
    return rep;
}

inline ScenarioReport scenario_period_solver(ConfigReader& c, Tolerances& tol, const LogSink& log, int seed) {
    ScenarioReport rep;
    const Domain domain = detail::annulus_from(c, 0.5, 2.0);
    const auto pair = detail::pair_from(c, "z", "1/z");
    std::vector<HolomorphicFn> gens;
    const bool explicit_gens = c.has("generators");
    if (explicit_gens) {
        const auto& g = c.raw("generators");
        if (!g.is_array()) c.invalid("'generators' must be an array of expressions");
        for (const auto& e : g) {
            try {
                gens.push_back(e.is_string() ? HolomorphicFn::parse(e.get<std::string>()) : HolomorphicFn(expr_from_json(e)));
            } catch (const Error& err) {
                c.invalid(std::string("generator: ") + err.what());
            }
        }
    }
    std::vector<std::vector<double>> targets;
    if (c.has("targets")) {
        for (const auto& t : c.raw("targets")) {
            if (!t.is_array() || t.size() != 3) c.invalid("each target is a 3-vector");
            std::vector<double> v;
            for (const auto& x : t) {
                if (!x.is_number() || !std::isfinite(x.get<double>())) c.invalid("targets must be finite numbers");
                v.push_back(x.get<double>());
            }
            targets.push_back(v);
        }
    } else {
        targets = {{0.0, 0.0, 2 * kPi + 1}, {1.0, 0.0, 2 * kPi}};
    }
    const int max_it = c.integer("max_iterations", 20);
    const double solve_tol = tol("solve_residual", 1e-10);
    const double flux_tol = tol("flux_abs", 1e-8);
    const double jac_tol = tol("jacobian_rel", 1e-6);
    const double null_tol = tol("nullity_rel", 1e-10);

    const auto form = assemble_null_form(pair);
    const auto basis = HomologyBasis::standard(domain);
    basis.validate(domain);
    detail::log(log, LogLevel::Info, "spray construction");
    const auto spray = explicit_gens ? build_spray(form, basis, gens) : build_spray(form, basis);
    rep.check("spray_rank", spray.rank, "==", spray.required);
    rep.results["spray"] = to_json(spray.spray);
    Table sv("singular_values", {{"index", detail::kComputed}, {"value", detail::kComputed}});
    for (Eigen::Index k = 0; k < spray.singular_values.size(); ++k) sv.add({static_cast<long long>(k + 1), spray.singular_values[k]});
    rep.tables.push_back(std::move(sv));

    // analytic Jacobian against central differences
    double jac_err = 0.0;
    const double step = 1e-5;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(spray.spray.size()); ++i) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(spray.spray.size()));
        e[i] = step;
        auto plus = period_map(spray.spray.with_coefficients(e).as_function(), form, basis, 1e-14);
        auto minus = period_map(spray.spray.with_coefficients(-e).as_function(), form, basis, 1e-14);
        Eigen::VectorXcd fd = detail::flatten(plus - minus) / (2 * step);
        jac_err = std::max(jac_err, (fd - spray.jacobian.col(i)).norm() / std::max(1.0, spray.jacobian.col(i).norm()));
    }
    rep.check("jacobian_vs_differences", jac_err, "<=", jac_tol);

    // identity target
    auto ident = solve_periods(spray.spray, form, basis, period_map(HolomorphicFn(1.0), form, basis), solve_tol, max_it);
    rep.check("identity_iterations", ident.iterations, "==", 0);
    rep.check("identity_zeta", ident.spray.coefficients().norm(), "==", 0.0);

    Table ft("flux", {{"target", detail::kConfig}, {"component", detail::kConfig}, {"requested", detail::kConfig},
                      {"achieved", detail::computed(flux_tol)}, {"abs_error", detail::computed(flux_tol)}, {"iterations", detail::kComputed},
                      {"zeta_norm", detail::kComputed}});
    for (std::size_t k = 0; k < targets.size(); ++k) {
        Eigen::MatrixXd F(3, 1);
        F << targets[k][0], targets[k][1], targets[k][2];
        detail::log(log, LogLevel::Info, "prescribing flux target " + std::to_string(k + 1));
        auto pf = prescribe_flux(form, basis, F, solve_tol, max_it, &spray);
        for (int i = 0; i < 3; ++i)
            ft.add({static_cast<long long>(k + 1), static_cast<long long>(i + 1), F(i, 0), pf.achieved(i, 0), std::abs(pf.achieved(i, 0) - F(i, 0)),
                    static_cast<long long>(pf.solution.iterations), pf.solution.spray.coefficients().norm()});
        const std::string tag = "_target" + std::to_string(k + 1);
        rep.check("iterations" + tag, pf.solution.iterations, "<=", max_it);
        rep.check("flux_error" + tag, pf.flux_error, "<=", flux_tol);
        auto nr = validate_null(pf.form, domain, 2000, null_tol, seed);
        rep.check("nullity" + tag, nr.max_residual, "<=", null_tol);
        Immersion u(pf.form, basis.cycles, 1.0, Eigen::VectorXd::Zero(3), build_mesh(domain, 0.25));
        rep.check("real_periods" + tag, u.period_residuals().front(), "<=", flux_tol);
        Table tr("newton_trace" + tag, {{"iteration", detail::kComputed}, {"residual", detail::computed(solve_tol)},
                                           {"step", detail::kComputed}, {"halvings", detail::kComputed}});
        for (const auto& row : pf.solution.trace)
            tr.add({static_cast<long long>(row.iteration), row.residual, row.step, static_cast<long long>(row.halvings)});
        rep.tables.push_back(std::move(tr));
    }
    rep.tables.push_back(std::move(ft));
    return rep;
}

inline ScenarioReport scenario_divisor(ConfigReader& c, Tolerances& tol, const LogSink& log, int) {
    ScenarioReport rep;
    const double radius = c.number("radius", 1.0);
    const auto ms = c.integers("multiplicities", std::vector<int>{1, 2});
    const auto rhos = c.numbers("rho", std::vector<double>{1e-1, 1e-2, 1e-3});
    const double phase = c.number("phase", 0.3);
    const double slack = tol("bound_slack", 0.0);
    const CompactL L = CompactL::disc(0.0, radius);
    Table t("divisor", {{"m", detail::kConfig}, {"rho", detail::kConfig}, {"deviation", detail::kComputed}, {"bound", detail::analytic()},
                        {"verified", detail::kComputed}, {"winding_checks", detail::kComputed}});
    for (int m : ms) {
        if (m < 1) c.invalid("multiplicities must be positive");
        for (double rho : rhos) {
            detail::log(log, LogLevel::Debug, "m = " + std::to_string(m) + ", rho = " + format_double(rho));
            std::vector<std::pair<cplx, int>> pts;
            for (int k = 0; k < m; ++k) pts.push_back({std::polar(rho, phase + 2 * kPi * k / m), 1});
            auto dm = divisor_multiplier(Divisor({{cplx(0.0), m}}), Divisor(pts), L, {HolomorphicFn::parse("z")});
            const double bound = m * rho + m * rho * rho;
            t.add({static_cast<long long>(m), rho, dm.boundary_deviation, bound, static_cast<long long>(dm.divisor_verified),
                   static_cast<long long>(dm.checks.size())});
            const std::string tag = "_m" + std::to_string(m) + "_rho" + format_double(rho);
            rep.flag("verified" + tag, dm.divisor_verified);
            rep.check("deviation" + tag, dm.boundary_deviation, "<=", bound + slack);
        }
    }
    rep.tables.push_back(std::move(t));
    return rep;
}

inline ScenarioReport scenario_gauge(ConfigReader& c, Tolerances& tol, const LogSink& log, int) {
    ScenarioReport rep;
    auto lc = c.child("L");
    const double in = lc.number("inner", 0.8), out = lc.number("outer", 1.25);
    lc.finish();
    const auto pair = detail::pair_from(c, "z", "1/z");
    const auto factor = c.function("factor", std::string("exp(0.01*z)"));
    GaugeOptions opt;
    opt.proximity_samples = c.integer("proximity_samples", 2000);
    auto c1 = c.child("case1");
    const bool run_case1 = c1.integer("enabled", 1) != 0;
    const double a = c1.number("a", 0.01);
    const double r1 = c1.number("radius", 0.5);
    const double mu = c1.number("mu", 0.01);
    c1.finish();
    const double delta_max = tol("proximity", 0.02);
    const double eps = tol("deviation", 1e-6);
    const double oracle_tol = tol("case1_oracle", 1e-10);

    const CompactL L = CompactL::annulus(0.0, in, out);
    const auto f = assemble_null_form(pair).coefficients();
    FunctionTuple g;
    for (const auto& fk : f) g.push_back(factor * fk);
    detail::log(log, LogLevel::Info, "Case 2 alignment");
    auto ga = gauge_align(f, g, L, eps, opt);
    Table t("gauge", {{"case", detail::kComputed}, {"reference", detail::kComputed}, {"delta", detail::computed(delta_max)},
                      {"deviation", detail::computed(eps)}, {"interior_deviation", detail::kComputed}, {"success", detail::kComputed}});
    t.add({static_cast<long long>(ga.case_id), static_cast<long long>(ga.reference), ga.delta, ga.deviation, ga.interior_deviation,
           static_cast<long long>(ga.success)});
    rep.check("proximity", ga.delta, "<", delta_max);
    rep.check("deviation", std::max(ga.deviation, ga.interior_deviation), "<", eps);
    rep.results["case2"] = to_json(ga);

    if (run_case1) {
        detail::log(log, LogLevel::Info, "Case 1 alignment");
        // f_r = z^2, g_r = (z^2 - a^2) e^{mu z}: phi = (z^2 - a^2)/z^2 * f_r/g_r = e^{-mu z}
        const auto e = HolomorphicFn(exp(Expr::constant(mu) * zeta()));
        FunctionTuple f1{HolomorphicFn::parse("z^2"), HolomorphicFn(0.1), HolomorphicFn(0.1 * zeta())};
        FunctionTuple g1{e * HolomorphicFn(pow(zeta(), 2) - Expr::constant(a * a)), e * HolomorphicFn(0.1), e * HolomorphicFn(0.1 * zeta())};
        const CompactL L1 = CompactL::disc(0.0, r1);
        auto g1a = gauge_align(f1, g1, L1, 2 * a * a, opt);
        double worst = 0.0;
        for (cplx z : L1.samples(400)) worst = std::max(worst, std::abs(g1a.multiplier(z) - std::exp(-mu * z)));
        t.add({static_cast<long long>(g1a.case_id), static_cast<long long>(g1a.reference), g1a.delta, g1a.deviation, g1a.interior_deviation,
               static_cast<long long>(g1a.success)});
        rep.check("case1_path", g1a.case_id, "==", 1);
        rep.check("case1_oracle", worst, "<=", oracle_tol);
        rep.check("case1_deviation", std::abs(g1a.deviation - a * a), "<=", oracle_tol);
        rep.results["case1"] = to_json(g1a);
    }
    rep.tables.push_back(std::move(t));
    return rep;
}

inline ScenarioReport scenario_labyrinth(ConfigReader& c, Tolerances& tol, const LogSink& log, int) {
    ScenarioReport rep;
    std::optional<Labyrinth> lab;
    {
        if (c.has("arcs")) {
            std::vector<LabyrinthArc> arcs;
            const auto& list = c.raw("arcs");
            if (!list.is_array()) c.invalid("'arcs' must be an array");
            for (std::size_t k = 0; k < list.size(); ++k) {
                ConfigReader a(list[k], "arcs[" + std::to_string(k) + "]");
                arcs.push_back({a.number("radius"), a.number("width"), a.number("center", 0.0), a.number("span", 1.5 * kPi)});
                a.finish();
            }
            lab.emplace(std::move(arcs));
        } else {
            auto s = c.child("schedule");
            const int J = s.integer("J", 3);
            const double a = s.number("a", 0.5), q = s.number("q", 0.6), e0 = s.number("e0", 0.05), span = s.number("span", 1.5 * kPi);
            s.finish();
            lab.emplace(Labyrinth::geometric(J, a, q, e0, span));
        }
    }
    auto cand = c.child("candidate");
    HolomorphicFn g;
    if (cand.has("expression")) {
        g = cand.function("expression");
    } else if (cand.has("log_modulus_table")) {
        // radial table of log|g|, linearly interpolated in |z|
        std::vector<std::pair<double, double>> rows;
        for (const auto& r : cand.raw("log_modulus_table")) {
            if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) cand.invalid("table rows are [radius, log|g|]");
            rows.push_back({r[0].get<double>(), r[1].get<double>()});
        }
        if (rows.size() < 2) cand.invalid("table needs at least two rows");
        for (std::size_t k = 1; k < rows.size(); ++k)
            if (!(rows[k].first > rows[k - 1].first)) cand.invalid("table radii must increase");
        g = HolomorphicFn::opaque(
            [rows](cplx z) {
                const double r = std::abs(z);
                if (r <= rows.front().first) return cplx(std::exp(rows.front().second));
                for (std::size_t k = 1; k < rows.size(); ++k)
                    if (r <= rows[k].first) {
                        const double t = (r - rows[k - 1].first) / (rows[k].first - rows[k - 1].first);
                        return cplx(std::exp(rows[k - 1].second + t * (rows[k].second - rows[k - 1].second)));
                    }
                return cplx(std::exp(rows.back().second));
            },
            std::nullopt, "table");
    } else {
        g = HolomorphicFn(1.0);
    }
    cand.finish();
    const double h = c.number("mesh_h", 0.004);
    const std::string expect = c.text("expect_verdict", "");
    (void)tol;

    Table tt("target", {{"radius", detail::kComputed}, {"f", detail::kComputed}});
    {
        std::ostringstream os;
        lab->write_target_table(os);
        std::istringstream is(os.str());
        std::string line;
        std::getline(is, line);
        while (std::getline(is, line)) {
            auto comma = line.find(',');
            tt.add({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
        }
    }
    rep.tables.push_back(std::move(tt));
    Table gt("gaps", {{"band", detail::kComputed}, {"integral", detail::kComputed}, {"required", detail::analytic()}});
    const auto gaps = lab->gap_integrals();
    for (std::size_t k = 0; k < gaps.size(); ++k) {
        gt.add({static_cast<long long>(k + 1), gaps[k].first, gaps[k].second});
        rep.check("gap_integral_" + std::to_string(k + 1), gaps[k].first, ">", gaps[k].second);
    }
    rep.tables.push_back(std::move(gt));
    for (std::size_t j = 1; j <= lab->size(); ++j) {
        const auto& arc = lab->arcs()[j - 1];
        rep.check("f_on_C" + std::to_string(j), lab->target(arc.radius), "==", lab->compact_value(j));
    }

    detail::log(log, LogLevel::Info, "crossing costs on a mesh with h = " + format_double(h));
    const double outer = lab->arcs().back().radius + lab->arcs().back().width;
    const Domain disc = Domain::disc(std::min(1.0, outer + 0.5 * (1 - outer) + 0.01));
    auto report = labyrinth_completeness_check(*lab, g, build_mesh(disc, h));
    Table bt("bands", {{"band", detail::kComputed}, {"radius", detail::kConfig}, {"width", detail::kConfig},
                       {"min_modulus", detail::kComputed}, {"min_weight", detail::kComputed}, {"crossing_cost", detail::kComputed},
                       {"log_threshold", detail::analytic()}, {"log_margin", detail::kComputed}, {"meets", detail::kComputed},
                       {"avoiding_length", detail::kComputed}});
    for (const auto& b : report.bands) {
        const auto& arc = lab->arcs()[static_cast<std::size_t>(b.band - 1)];
        bt.add({static_cast<long long>(b.band), arc.radius, arc.width, b.min_modulus, b.min_weight, b.crossing_cost, 1.0 / arc.width,
                b.log_margin, static_cast<long long>(b.meets), b.avoiding_length});
    }
    rep.tables.push_back(std::move(bt));
    rep.results["verdict"] = report.verdict;
    if (!expect.empty()) rep.flag("verdict", report.verdict == expect, report.verdict);
    return rep;
}

// ---------------------------------------------------------------------------
// Runner

struct RunOutcome {
    bool passed = false;
    std::optional<ErrorCode> error;
    std::string message;
    nlohmann::json summary;
};

inline nlohmann::json summary_json(const ScenarioReport& rep, const nlohmann::json& config) {
    nlohmann::json j;
    j["schema_version"] = kSummarySchemaVersion;
    j["scenario"] = rep.scenario;
    j["passed"] = rep.passed();
    j["config"] = config;
    j["tolerances"] = rep.tolerances;
    auto& checks = j["checks"] = nlohmann::json::array();
    for (const auto& c : rep.checks)
        checks.push_back({{"name", c.name}, {"value", format_double(c.value)}, {"relation", c.relation}, {"limit", format_double(c.limit)},
                          {"passed", c.passed}, {"detail", c.detail}});
    auto& tables = j["tables"] = nlohmann::json::object();
    for (const auto& t : rep.tables) {
        nlohmann::json cols = nlohmann::json::object();
        for (const auto& c : t.columns) {
            const auto& m = t.meta.at(c);
            cols[c] = {{"provenance", m.provenance}, {"tolerance", m.tolerance ? nlohmann::json(*m.tolerance) : nlohmann::json(nullptr)}};
        }
        j["tables"][t.name] = {{"file", t.name + ".csv"}, {"rows", t.rows.size()}, {"columns", cols}};
        if (t.dat) j["tables"][t.name]["dat"] = t.name + ".dat";
    }
    j["results"] = rep.results;
    j["notes"] = rep.notes;
    return j;
}

/// Runs the scenario named in `config`, writes summary.json and the tables
/// into `out`. Module errors are recorded in the summary, not rethrown;
/// ConfigInvalid is rethrown after the summary is written.
inline RunOutcome run_scenario(const nlohmann::json& config, const std::filesystem::path& out, const LogSink& log = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(out);
    RunOutcome outcome;
    const auto start = std::chrono::steady_clock::now();
    ScenarioReport rep;
    std::string name = "unknown";
    try {
        ConfigReader c(config, "config");
        name = c.text("scenario");
        const int seed = c.integer("seed", 0);
        if (seed < 0) c.invalid("seed must be non-negative");
        c.text("description", "");
        Tolerances tol(c.child("tolerances"));
        using Fn = ScenarioReport (*)(ConfigReader&, Tolerances&, const LogSink&, int);
        static const std::map<std::string, Fn> table = {
            {"catenoid", scenario_catenoid},     {"helicoid_wedge", scenario_helicoid_wedge}, {"annulus_family", scenario_annulus_family},
            {"period_solver", scenario_period_solver}, {"divisor", scenario_divisor},     {"gauge", scenario_gauge},
            {"labyrinth", scenario_labyrinth},
        };
        auto it = table.find(name);
        if (it == table.end()) c.invalid("unknown scenario '" + name + "'");
        detail::log(log, LogLevel::Info, "scenario " + name);
        // read everything before the heavy work so config errors surface first
        rep = it->second(c, tol, log, seed);
        tol.finish();
        c.finish();
        rep.scenario = name;
        rep.tolerances = tol.values();
        outcome.passed = rep.passed();
    } catch (const Error& e) {
        outcome.error = e.code();
        outcome.message = e.what();
        rep.scenario = name;
        outcome.passed = false;
        detail::log(log, LogLevel::Error, e.what());
    }
    for (const auto& t : rep.tables) {
        std::ofstream f(out / (t.name + ".csv"));
        t.write_csv(f);
        if (t.dat) {
            std::ofstream d(out / (t.name + ".dat"));
            t.write_dat(d);
        }
    }
    outcome.summary = summary_json(rep, config);
    outcome.summary["passed"] = outcome.passed;
    if (outcome.error) outcome.summary["error"] = {{"code", std::string(to_string(*outcome.error))}, {"message", outcome.message}};
    outcome.summary["elapsed_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream s(out / "summary.json");
    s << outcome.summary.dump(2) << '\n';
    for (const auto& c : rep.checks)
        detail::log(log, c.passed ? LogLevel::Debug : LogLevel::Warn,
                    (c.passed ? "pass " : "FAIL ") + c.name + ": " + format_double(c.value) + " " + c.relation + " " + format_double(c.limit));
    return outcome;
}

} // namespace minsurf
