#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "contdyn/config.hpp"

namespace contdyn {

/// Something the run observed that a caller may want to escalate.
struct RunEvent {
    std::string kind;   // singularity | blow_up | unitarity | numeric_error | crossing
    double time = 0.0;
    double value = 0.0; // |det| for singularity, last det for blow_up, defect for unitarity
    std::string detail;
    bool numeric = true; // crossings are informational, not numeric failures
};

struct RunRecord {
    std::uint64_t config_hash = 0;
    double wall_seconds = 0.0;
    std::vector<RunEvent> events;
    std::vector<std::string> outputs;

    [[nodiscard]] bool has_numeric_event() const;
};

struct RunOptions {
    /// Replaces the directory part of output_path when set.
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
    /// Worker threads for sweeps; 0 picks std::thread::hardware_concurrency().
    unsigned threads = 1;
};

/// Column names, in order, of the main CSV written for a scenario.
[[nodiscard]] std::vector<std::string> csv_columns(ScenarioKind kind);

/// Formats a scalar the way every CSV cell is written: %.17g, "nan" for undefined.
[[nodiscard]] std::string format_scalar(double v);

/// Runs one scenario and writes its CSV (plus auxiliary files). Integration
/// events land in the record; only I/O failures throw (IoError).
[[nodiscard]] RunRecord run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Runs the config once per sweep value, each writing
/// <stem>_<parameter>=<value><ext>. Events are ordered by sweep index.
[[nodiscard]] RunRecord run_sweep(const ScenarioConfig& config, const RunOptions& options = {});

/// The file name a sweep point writes to, e.g. out/run_gamma=0.5.csv.
[[nodiscard]] std::string sweep_output_path(const std::string& base, const std::string& parameter,
                                            double value);

[[nodiscard]] nlohmann::json to_json(const RunRecord& record);

} // namespace contdyn
