#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "conic/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"weighted polynomial approximation on conic domains"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", format = "csv";
    long long seed = -1;
    const char* names[] = {"verify", "convergence", "kernel-profile",
                           "modulus", "kfunc", "approx"};
    for (const char* name : names) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " suite");
        sub->add_option("--config", config_path, "JSON experiment configuration");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--format", format, "table output format")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", seed, "override the config seed");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        conic::ExperimentConfig cfg;
        if (!config_path.empty()) cfg = conic::ExperimentConfig::from_file(config_path);
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        cfg.validate();

        const std::string command = app.get_subcommands().front()->get_name();
        const conic::RunReport report = conic::run_command(command, cfg);
        conic::write_report(report, out_dir, format);

        for (const auto& rec : report.records)
            std::printf("%-28s %s  (%.2fs)\n", rec.name.c_str(),
                        rec.pass ? "PASS" : "FAIL", rec.elapsed_seconds);
        std::printf("%s: %s in %.2fs; report written to %s/report.json\n", command.c_str(),
                    report.pass() ? "PASS" : "FAIL", report.elapsed_seconds, out_dir.c_str());
        return report.pass() ? 0 : 1;
    } catch (const conic::usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const conic::numerical_failure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
