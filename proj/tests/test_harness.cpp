#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "conic/harness.hpp"

using namespace conic;

TEST_CASE("configuration parsing and validation") {
    const ExperimentConfig def = ExperimentConfig::from_json_text("{}");
    CHECK(def.domain == Domain::surface);
    CHECK(def.d == 2);
    CHECK(def.gamma == 0.0);
    CHECK(def.degrees == std::vector<int>{4, 8, 16});
    CHECK(def.functions.size() == 4);
    CHECK(def.seed == 2024);
    CHECK(def.tol("anything", 0.5) == 0.5);

    const ExperimentConfig full = ExperimentConfig::from_json_text(R"({
        "domain": "cone", "d": 2, "gamma": 1.5, "p": 2.0, "r": 2,
        "degrees": [2, 4, 8], "functions": ["smooth", "rough"],
        "cutoff": "raised-cosine", "seed": 7,
        "tolerances": {"reproduction": 1e-6}
    })");
    CHECK(full.domain == Domain::cone);
    CHECK(full.gamma == 1.5);
    CHECK(full.r == 2);
    CHECK(full.cutoff_spec().kind == CutoffKind::raised_cosine);
    CHECK(full.tol("reproduction", 1e-8) == 1e-6);

    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"bogus": 1})"), usage_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"gamma": -1})"), usage_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"degrees": [8, 4]})"), usage_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"degrees": []})"), usage_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"functions": ["nope"]})"),
                    usage_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"cutoff": "nope"})"), usage_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"r": 3})"), usage_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"domain": "torus"})"), usage_error);
    CHECK_THROWS_AS(ExperimentConfig::from_json_text("not json"), usage_error);
    CHECK_THROWS_AS(ExperimentConfig::from_file("/nonexistent/config.json"), usage_error);

    // config echo round-trips through the parser
    const ExperimentConfig echoed = ExperimentConfig::from_json_text(full.to_json_text());
    CHECK(echoed.to_json_text() == full.to_json_text());
}

TEST_CASE("csv writer round trip") {
    Table t;
    t.name = "demo";
    t.header = {"n", "value", "with,comma", "with\"quote"};
    t.rows = {{1.0, 0.12345678901234567, -3.5e-12, 2.0},
              {2.0, 1.0 / 3.0, 7.25, -0.0}};
    const std::string csv = table_to_csv(t);
    CHECK(csv.find("with\"\"quote") != std::string::npos);
    CHECK(csv.back() == '\n');
    CHECK(csv.find('\r') == std::string::npos);

    const Table back = table_from_csv("demo", csv);
    REQUIRE(back.header == t.header);
    REQUIRE(back.rows.size() == t.rows.size());
    for (size_t i = 0; i < t.rows.size(); ++i)
        for (size_t j = 0; j < t.rows[i].size(); ++j)
            CHECK(back.rows[i][j] == t.rows[i][j]);  // 17 digits round-trip exactly
}

TEST_CASE("verify runs green on all domains") {
    for (const char* domain : {"interval", "surface", "cone"}) {
        ExperimentConfig cfg = ExperimentConfig::from_json_text(
            std::string(R"({"domain": ")") + domain + R"(", "degrees": [2, 4]})");
        const RunReport report = run_verify(cfg);
        CHECK(report.pass());
        CHECK(!report.records.empty());
        for (const auto& rec : report.records) {
            CHECK(!rec.name.empty());
            CHECK(!rec.anchor.empty());
            CHECK(rec.pass);
        }
    }
}

TEST_CASE("zero tolerance forces a reported failure") {
    ExperimentConfig cfg;
    cfg.degrees = {2, 4};
    cfg.tolerances["reproduction"] = 0.0;
    const RunReport report = run_verify(cfg);
    CHECK(!report.pass());
    bool found = false;
    for (const auto& rec : report.records)
        if (rec.name == "polynomial-reproduction") {
            found = true;
            CHECK(!rec.pass);
        }
    CHECK(found);
}

TEST_CASE("verify is deterministic modulo timing") {
    ExperimentConfig cfg;
    cfg.degrees = {2, 4};
    const std::string a = run_verify(cfg).to_json(false);
    const std::string b = run_verify(cfg).to_json(false);
    CHECK(a == b);
    CHECK(a.find("elapsed") == std::string::npos);

    cfg.seed = 99;
    const std::string c = run_verify(cfg).to_json(false);
    CHECK(c != a);  // the seed is part of the report
}

TEST_CASE("convergence tables") {
    ExperimentConfig cfg;
    cfg.degrees = {4, 8};
    cfg.functions = {"smooth", "rough"};
    const RunReport report = run_convergence(cfg);
    CHECK(report.pass());
    REQUIRE(report.tables.size() == 2);
    for (const auto& t : report.tables) {
        CHECK(t.header.size() == 7);
        REQUIRE(t.rows.size() == 2);
        for (const auto& row : t.rows) {
            CHECK(row[1] >= 0.0);   // best approximation
            CHECK(row[2] > 0.0);    // omega_1
        }
        // smooth decay: E_8 < E_4 for both suite functions
        CHECK(t.rows[1][1] < t.rows[0][1]);
    }

    ExperimentConfig bad = cfg;
    bad.domain = Domain::interval;
    CHECK_THROWS_AS(run_convergence(bad), usage_error);
}

TEST_CASE("kernel profile") {
    ExperimentConfig cfg;
    cfg.degrees = {8, 16};
    const RunReport report = run_kernel_profile(cfg);
    CHECK(report.pass());
    REQUIRE(report.tables.size() == 1);
    CHECK(report.tables[0].rows.size() == 2 * 48);
    bool saw_kappa = false;
    for (const auto& rec : report.records)
        if (rec.name == "localization-profile") {
            saw_kappa = rec.fitted_constants.count("kappa_n16") > 0;
            CHECK(rec.fitted_constants.at("kappa_n16") >= 3.0);
        }
    CHECK(saw_kappa);
}

TEST_CASE("modulus properties") {
    ExperimentConfig cfg;
    cfg.functions = {"smooth"};
    const RunReport report = run_modulus(cfg);
    CHECK(report.pass());
    REQUIRE(report.tables.size() == 1);
    CHECK(report.tables[0].rows.size() == 5);
    const auto& rec = report.records.front();
    CHECK(rec.fitted_constants.at("scaling_max") <= 1.0 + 1e-9);
    CHECK(rec.fitted_constants.at("marchaud_drift") <= 1.25);
}

TEST_CASE("K-functional equivalence window") {
    ExperimentConfig cfg;
    cfg.degrees = {4, 8};
    cfg.functions = {"smooth"};
    const RunReport report = run_kfunc(cfg);
    CHECK(report.pass());
    const auto& rec = report.records.front();
    CHECK(rec.fitted_constants.at("ratio_min") >= 1.0 / 50.0);
    CHECK(rec.fitted_constants.at("ratio_max") <= 50.0);
}

TEST_CASE("approx tables are monotone") {
    ExperimentConfig cfg;
    cfg.degrees = {2, 4, 8};
    cfg.functions = {"smooth", "apex"};
    const RunReport report = run_approx(cfg);
    CHECK(report.pass());
    for (const auto& t : report.tables)
        for (size_t i = 1; i < t.rows.size(); ++i)
            CHECK(t.rows[i][1] <= t.rows[i - 1][1] * (1.0 + 1e-9));
}

TEST_CASE("command dispatch and report output") {
    ExperimentConfig cfg;
    cfg.degrees = {2, 4};
    cfg.functions = {"smooth"};
    CHECK_THROWS_AS(run_command("nope", cfg), usage_error);

    const RunReport report = run_command("verify", cfg);
    const std::string dir =
        (std::filesystem::temp_directory_path() / "conic_harness_test").string();
    std::filesystem::remove_all(dir);
    write_report(report, dir, "csv");
    CHECK(std::filesystem::exists(dir + "/report.json"));

    const RunReport conv = run_command("convergence", cfg);
    write_report(conv, dir, "csv");
    CHECK(std::filesystem::exists(dir + "/convergence_smooth.csv"));
    std::ifstream in(dir + "/convergence_smooth.csv", std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    const Table back = table_from_csv("convergence_smooth", ss.str());
    CHECK(back.header == conv.tables[0].header);
    CHECK(back.rows.size() == conv.tables[0].rows.size());

    CHECK_THROWS_AS(write_report(report, dir, "xml"), usage_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("suite fields agree across the lift") {
    for (const auto& name : suite_names()) {
        const SurfaceField sf = suite_surface_field(name, 3);
        const ConeField cf = suite_cone_field(name);
        Eigen::Vector2d x(0.21, -0.1);
        const ConePoint p(x, 0.6);
        CHECK(cone_lift_field(cf, 2)(cone_lift(p, +1)) ==
              doctest::Approx(cf(p)).epsilon(1e-13));
        // surface suite at d = 3 evaluates the same formula on the lift
        CHECK(sf(cone_lift(p, +1)) == doctest::Approx(cf(p)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(suite_surface_field("nope", 2), usage_error);
    CHECK_THROWS_AS(suite_cone_field("nope"), usage_error);
}
