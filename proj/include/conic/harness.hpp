#ifndef CONIC_HARNESS_HPP
#define CONIC_HARNESS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "conic/cone.hpp"

namespace conic {

// Invalid configuration or command-line usage; maps to CLI exit code 2.
struct usage_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class Domain { interval, surface, cone };

Domain domain_from_name(const std::string& name);
std::string domain_name(Domain d);

// Flat JSON experiment configuration; keys lower_snake_case, unknown keys
// rejected.
struct ExperimentConfig {
    Domain domain = Domain::surface;
    int d = 2;
    double gamma = 0.0;
    double p = 2.0;
    int r = 1;
    std::vector<int> degrees = {4, 8, 16};
    std::vector<std::string> functions = {"smooth", "apex", "edge", "rough"};
    std::string cutoff = "smooth-exponential-bump";
    std::uint64_t seed = 2024;
    std::map<std::string, double> tolerances;

    double tol(const std::string& key, double fallback) const;
    CutoffSpec cutoff_spec() const;
    void validate() const;

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
    std::string to_json_text() const;
};

struct CheckRecord {
    std::string name;
    std::string anchor = "plumbing";  // check family this record verifies
    std::map<std::string, double> values;
    std::map<std::string, double> fitted_constants;
    bool pass = true;
    double elapsed_seconds = 0.0;  // excluded from determinism comparisons
};

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

struct RunReport {
    std::string command;
    ExperimentConfig config;
    std::vector<CheckRecord> records;
    std::vector<Table> tables;
    double elapsed_seconds = 0.0;

    bool pass() const;
    // include_timing = false strips all elapsed fields (determinism checks)
    std::string to_json(bool include_timing = true) const;
};

// CSV with header row, RFC-4180 quoting, LF line endings, 17 significant
// digits for floats.
std::string table_to_csv(const Table& table);
Table table_from_csv(const std::string& name, const std::string& csv);

// Writes <out_dir>/report.json plus one <out_dir>/<table>.csv per table when
// format == "csv" (tables are embedded in the JSON either way).
void write_report(const RunReport& report, const std::string& out_dir,
                  const std::string& format);

// Named test-function suite (smooth / apex / edge / rough).
const std::vector<std::string>& suite_names();
SurfaceField suite_surface_field(const std::string& name, int d);
ConeField suite_cone_field(const std::string& name);

RunReport run_verify(const ExperimentConfig& config);
RunReport run_convergence(const ExperimentConfig& config);
RunReport run_kernel_profile(const ExperimentConfig& config);
RunReport run_modulus(const ExperimentConfig& config);
RunReport run_kfunc(const ExperimentConfig& config);
RunReport run_approx(const ExperimentConfig& config);

// Dispatch by subcommand name; throws usage_error for unknown commands.
RunReport run_command(const std::string& command, const ExperimentConfig& config);

}  // namespace conic

#endif
