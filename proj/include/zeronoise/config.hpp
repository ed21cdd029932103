#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zeronoise/domain.hpp"
#include "zeronoise/noise.hpp"

namespace zn {

// Parsed experiment description. Every field has a usable default except the
// map name; subcommands that need a grid, a noise level, or an epsilon list
// check for them at dispatch time with their own messages.
struct ExperimentConfig {
    // [map]
    std::string map_name;
    std::map<std::string, double> map_params;

    // [kernel]
    std::optional<double> kernel_epsilon;
    KernelShape kernel_shape = KernelShape::Ball;
    std::optional<BoundaryPolicy> kernel_policy;  // unset: derived from the domain
    std::vector<std::uint8_t> kernel_mask;        // empty: all coordinates

    // [grid]
    std::vector<int> grid_cells;

    // [solver]
    double tol = 1e-10;
    long long max_iters = 100000;
    int samples_per_cell = 64;
    long long orbit_steps = 1000;
    long long burn_in = 0;
    long long lyapunov_steps = 1000000;
    long long renorm_period = 5;
    long long domination_samples = 4096;
    long long basin_starts = 500;
    long long basin_iters = 100000;
    double basin_tol = 0.02;
    double degenerate_tol = 1e-3;
    std::optional<std::vector<double>> x0;  // unset: sampled from the seed

    // [sweep]
    std::vector<double> epsilon_list;  // strictly decreasing when present
    std::vector<std::uint64_t> seeds = {1};
    int proxy_refine = 4;

    // [output]
    std::string output_dir = "out";
};

// Parses the INI-style grammar documented in docs/config.md. Throws
// config_error with the line number of the first offending line; unknown
// keys, type mismatches, and a non-decreasing epsilon_list are reported
// with distinct messages. The map name and parameters are validated against
// the catalog.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config_file(const std::string& path);

// Full effective configuration (defaults included) in a fixed key order;
// reparsing it reproduces the same config, and its FNV-1a hash is the
// fingerprint recorded in manifests and CSV headers.
std::string canonical_config(const ExperimentConfig& config);

std::uint64_t config_hash(const ExperimentConfig& config);

// Kernel at a given noise level with the configured shape, mask, and policy
// (policy defaults to Wrap on fully periodic domains, Reject otherwise).
NoiseKernel make_kernel(const ExperimentConfig& config, const DomainDescriptor& domain,
                        double epsilon);

}  // namespace zn
