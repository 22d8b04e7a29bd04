#pragma once

#include "topopt/config.hpp"
#include "topopt/oracle.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace topopt {

enum class ExitStatus : int { converged = 0, error = 1, not_converged = 2 };

/// Mean fictitious field per void component, and whether the field's reading
/// matches the flood fill: sealed voids above `enclosed_min`, open voids below
/// `open_max`.
struct FieldClassification {
    VoidComponents components;
    std::vector<double> mean_p; // per component, volume weighted
    double min_enclosed_mean = 1.0;
    double max_open_mean = 0.0;
    bool appropriate = true;
};

FieldClassification classify_field(const SimplexMesh& mesh, const Vector& chi, const Vector& p,
                                   const std::vector<std::string>& exit_tags, const ValidationSettings& settings);

struct ScenarioOptions {
    std::ostream* log = nullptr; // progress lines; null for silence
    int max_iterations = -1;     // overrides the config when >= 0
    int snapshot_every = -1;     // overrides the config when >= 0
};

struct ScenarioResult {
    ExitStatus status = ExitStatus::error;
    std::filesystem::path output_dir;
    std::string summary_json; // also written to summary.json
    std::string error;        // set when status == error
};

/// Runs the configured scenario and writes its files under
/// config.output_dir:
///   summary.json                          every scenario
///   history.csv, design_*.vtk             optimization scenarios
///   p_field.vtk, verdicts.csv             fictitious-validation
///   voids.vtk                             oracle-check
/// Never throws; failures come back as ExitStatus::error with a message.
ScenarioResult run_scenario(const RunConfig& config, const ScenarioOptions& options = {});

/// One run per value of `param` (a `section.key` name), each in its own
/// subdirectory `<param>=<value>` of the config's output directory, fanned out
/// over at most `threads` workers. A table of all runs goes to sweep.csv.
std::vector<ScenarioResult> run_sweep(const RunConfig& config, const std::string& param,
                                      const std::vector<std::string>& values, int threads,
                                      const ScenarioOptions& options = {});

/// Worst status of a batch: error over not-converged over converged.
ExitStatus combined_status(const std::vector<ScenarioResult>& results);

/// Worker count from TOPOPT_THREADS, else the hardware concurrency; at least 1.
int worker_threads();

} // namespace topopt
