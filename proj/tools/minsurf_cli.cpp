#include <minsurf/scenarios.hpp>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>

namespace {

spdlog::level::level_enum to_spdlog(minsurf::LogLevel l) {
    switch (l) {
    case minsurf::LogLevel::Debug: return spdlog::level::debug;
    case minsurf::LogLevel::Info: return spdlog::level::info;
    case minsurf::LogLevel::Warn: return spdlog::level::warn;
    case minsurf::LogLevel::Error: return spdlog::level::err;
    }
    return spdlog::level::info;
}

int run(const std::string& config_path, const std::string& out_dir, const std::string& level) {
    auto logger = spdlog::stderr_color_mt("minsurf");
    logger->set_level(spdlog::level::from_str(level));
    logger->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");

    nlohmann::json config;
    {
        std::ifstream in(config_path);
        if (!in) {
            logger->error("cannot open {}", config_path);
            return 2;
        }
        try {
            in >> config;
        } catch (const nlohmann::json::parse_error& e) {
            logger->error("ConfigInvalid: {}: {}", config_path, e.what());
            return 2;
        }
    }
    auto outcome = minsurf::run_scenario(config, out_dir, [&](minsurf::LogLevel l, const std::string& msg) { logger->log(to_spdlog(l), msg); });
    if (outcome.error) return 2;
    logger->info("{}: {}", outcome.summary.value("scenario", std::string("?")), outcome.passed ? "all checks passed" : "checks failed");
    return outcome.passed ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weierstrass data, geodesic estimates and period solving for minimal surfaces"};
    app.require_subcommand(1);
    auto* cmd = app.add_subcommand("run", "run a scenario config and write its outputs");
    std::string config, out, level = "info";
    cmd->add_option("config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out, "output directory")->required();
    cmd->add_option("--log", level, "log level")->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
    CLI11_PARSE(app, argc, argv);
    return run(config, out, level);
}
