#include "catch_amalgamated.hpp"

#include <minsurf/scenarios.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace minsurf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / "minsurf_test_scenarios" / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

nlohmann::json load(const std::string& name) {
    std::ifstream in(fs::path(MINSURF_SCENARIO_DIR) / (name + ".json"));
    return nlohmann::json::parse(in);
}

} // namespace

TEST_CASE("doubles format as shortest round-trip text", "[scenarios]") {
    REQUIRE(format_double(0.1) == "0.1");
    REQUIRE(format_double(1e-300) == "1e-300");
    REQUIRE(std::stod(format_double(2.0 / 3.0)) == 2.0 / 3.0);
    REQUIRE(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("tables carry headers and reject ragged rows", "[scenarios]") {
    Table t("t", {{"a", {"computed", std::nullopt}}, {"b", {"analytic", 1e-8}}}, true);
    t.add({1.5, std::string("x")});
    REQUIRE_THROWS_AS(t.add({1.0}), Error);
    std::ostringstream csv, dat;
    t.write_csv(csv);
    t.write_dat(dat);
    REQUIRE(csv.str() == "a,b\n1.5,x\n");
    REQUIRE(dat.str() == "# a b\n1.5 x\n");
}

TEST_CASE("config errors", "[scenarios]") {
    auto code_of = [](const nlohmann::json& cfg) {
        auto out = run_scenario(cfg, scratch("cfg"));
        REQUIRE(out.error.has_value());
        REQUIRE(out.summary.at("error").at("code") == "ConfigInvalid");
        return *out.error;
    };
    REQUIRE(code_of({{"scenario", "catenoid"}, {"g", "z +* 2"}}) == ErrorCode::ConfigInvalid);
    REQUIRE(code_of({{"scenario", "divisor"}, {"colour", "blue"}}) == ErrorCode::ConfigInvalid);
    REQUIRE(code_of({{"scenario", "divisor"}, {"tolerances", {{"bogus", 1.0}}}}) == ErrorCode::ConfigInvalid);
    REQUIRE(code_of({{"scenario", "nope"}}) == ErrorCode::ConfigInvalid);
    REQUIRE(code_of({{"scenario", "divisor"}, {"rho", "small"}}) == ErrorCode::ConfigInvalid);
    REQUIRE(code_of(nlohmann::json::array()) == ErrorCode::ConfigInvalid);
}

TEST_CASE("module errors are recorded in the summary", "[scenarios]") {
    nlohmann::json cfg = {{"scenario", "annulus_family"}, {"g0", "exp(z^3)"}, {"j", {2}}, {"mesh_h", 0.1}};
    auto out = run_scenario(cfg, scratch("odd"));
    REQUIRE(out.error == ErrorCode::SymmetryViolated);
    REQUIRE_FALSE(out.passed);
    cfg = {{"scenario", "labyrinth"}, {"arcs", {{{"radius", 0.8}, {"width", 0.05}}, {{"radius", 0.5}, {"width", 0.01}}}}};
    REQUIRE(run_scenario(cfg, scratch("schedule")).error == ErrorCode::ScheduleInvalid);
}

TEST_CASE("summary schema", "[scenarios]") {
    auto dir = scratch("divisor");
    auto out = run_scenario(load("divisor"), dir);
    REQUIRE(out.passed);
    auto s = nlohmann::json::parse(slurp(dir / "summary.json"));
    REQUIRE(s.at("schema_version") == kSummarySchemaVersion);
    REQUIRE(s.at("scenario") == "divisor");
    REQUIRE(s.at("passed") == true);
    REQUIRE(s.at("checks").size() == 12);
    REQUIRE(s.at("tables").at("divisor").at("columns").at("bound").at("provenance") == "analytic");
    REQUIRE(slurp(dir / "divisor.csv").rfind("m,rho,deviation,bound,verified,winding_checks\n", 0) == 0);
}

TEST_CASE("seed shifts the nullity samples without changing the verdict", "[scenarios]") {
    auto cfg = load("catenoid");
    cfg["curvature_patch"]["h"] = 0.05;
    cfg["seed"] = 17;
    auto out = run_scenario(cfg, scratch("seeded"));
    REQUIRE(out.passed);
    REQUIRE(out.summary.at("config").at("seed") == 17);
}

TEST_CASE("odd members of the family are skipped", "[scenarios]") {
    nlohmann::json cfg = {{"scenario", "annulus_family"}, {"j", {2, 3, 4}}, {"mesh_h", 0.1}, {"levels", 1}, {"tolerances", {{"final_product_min", 1.0}}}};
    auto dir = scratch("family");
    auto out = run_scenario(cfg, dir);
    REQUIRE_FALSE(out.error.has_value());
    REQUIRE(slurp(dir / "profile.csv").find("\n3,skipped,") != std::string::npos);
}
