#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "zeronoise/config.hpp"

namespace zn {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
    std::string out_dir;  // empty: use the config's output directory
    int threads = 1;
};

struct SweepRowReport {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string status = "ok";  // error class name on failure
    std::string message;        // error text on failure
    double w1_to_reference = std::numeric_limits<double>::quiet_NaN();
    double l1_to_previous_epsilon = std::numeric_limits<double>::quiet_NaN();
    double chi_plus = std::numeric_limits<double>::quiet_NaN();
    double entropy_rhs = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();
    long long iterations = 0;
    bool monotone_warning = false;
    double wall_seconds = 0.0;
};

struct SweepReport {
    std::vector<SweepRowReport> rows;  // epsilon-major, seeds in config order
    std::string reference_kind;
    std::string reference_error;  // nonempty when the reference failed to build
    bool all_ok = false;
};

// Runs the noise-level sweep described by the config: for each epsilon
// (descending) and seed, builds the transfer operator, solves for the
// stationary measure, and computes the distances and orbit statistics.
// Writes sweep.csv, one measure CSV per successful row, and manifest.json
// into the output directory. A failing row records its error class and the
// sweep continues; all_ok reflects whether every row succeeded.
SweepReport run_zero_noise_sweep(const ExperimentConfig& config,
                                 const RunOptions& options = {});

// Dispatches one of: orbit, ulam, stationary, lyapunov, sweep, domination,
// basin, degenerate-sets. Writes CSV reports plus manifest.json into the
// output directory, logs progress to stderr, and returns the process exit
// code (0 only when every row and stage succeeded). Configuration and
// dispatch problems are thrown as the corresponding error type.
int run_subcommand(const std::string& name, const ExperimentConfig& config,
                   const RunOptions& options);

}  // namespace zn
