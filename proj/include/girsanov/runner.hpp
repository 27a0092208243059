#pragma once

#include "girsanov/config.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace girsanov {

struct ReportRow {
    std::string check_id;
    double estimate = 0.0;
    double std_error = 0.0; // 0 for exact checks
    double oracle = 0.0;
    bool pass = false;
};

struct FormRow {
    std::string part;
    double value = 0.0;
    double cross_check = 0.0;
    double residual = 0.0;
};

struct SeriesPoint {
    std::string check_id;
    double t = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double oracle = 0.0;
};

struct Report {
    std::vector<ReportRow> rows;
    std::vector<FormRow> forms;
    std::vector<SeriesPoint> series;

    bool all_pass() const;
};

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    unsigned workers = 0;
};

/// Runs every configured check. Throws ConfigError / StructuralError /
/// InvalidModel / InvalidTransform when the configuration cannot be run.
Report run_checks(const ExperimentConfig& config, const RunOverrides& overrides = {});

enum ExitCode : int { kExitPass = 0, kExitCheckFailed = 1, kExitConfigError = 2 };

/// run_checks plus report.csv (and forms.csv when form rows exist) in
/// out_dir. Returns the process exit code; diagnostics go to `err`.
int run(const ExperimentConfig& config, const std::string& out_dir, const RunOverrides& overrides,
        std::ostream& err);

void write_report_csv(std::ostream& out, const Report& report);
void write_forms_csv(std::ostream& out, const Report& report);

/// Long-format series: check_id,t,estimate,stderr,oracle, stably sorted by (check_id, t).
void emit_plot_data(std::ostream& out, const Report& report);

/// RFC-4180 field quoting.
std::string csv_field(const std::string& value);

} // namespace girsanov
