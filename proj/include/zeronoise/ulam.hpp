#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zeronoise/grid.hpp"
#include "zeronoise/maps.hpp"
#include "zeronoise/noise.hpp"

namespace zn {

// Column-stochastic sparse matrix stored row-wise (CSR) so the
// matrix-vector product parallelizes over rows deterministically.
struct CsrMatrix {
    std::int64_t n = 0;
    std::vector<std::int64_t> row_ptr;  // n + 1
    std::vector<std::int32_t> col_idx;
    std::vector<double> values;

    std::int64_t nnz() const { return static_cast<std::int64_t>(values.size()); }
};

struct UlamOperator {
    Grid grid;
    std::optional<NoiseKernel> kernel;  // empty = noiseless transfer operator
    std::uint64_t seed = 0;
    int samples_per_cell = 0;
    CsrMatrix matrix;
};

// Monte Carlo Ulam discretization: column j is the distribution of image
// cells of f(x) + v over samples x stratified in cell j, v from the kernel.
// On 1D circle grids the kernel average is taken in closed form (the uniform
// interval is smeared over the grid exactly), which removes the dominant
// sampling noise; higher-dimensional grids use literal point deposits with
// one rng stream per column. Deterministic for fixed (map, kernel, grid,
// samples_per_cell, seed) regardless of thread count.
UlamOperator build_ulam(const MapSystem& map, const NoiseKernel& kernel, const Grid& grid,
                        int samples_per_cell, std::uint64_t seed, int threads = 1);

// Transfer operator of the unperturbed map. On 1D circle grids each cell is
// subdivided and image subintervals are smeared exactly (no rng at all); the
// result serves as the fine-grid physical-measure proxy.
UlamOperator build_ulam_noiseless(const MapSystem& map, const Grid& grid,
                                  int samples_per_cell, std::uint64_t seed,
                                  int threads = 1);

// out = P * in. Deterministic for any thread count.
void apply_ulam(const CsrMatrix& m, const std::vector<double>& in,
                std::vector<double>& out, int threads = 1);

std::vector<double> ulam_column_sums(const CsrMatrix& m);

struct StationaryResult {
    GridMeasure measure;
    long long iterations = 0;
    double residual = 0.0;
    bool monotone_warning = false;  // residual grew after iteration 10
    std::vector<double> residual_history;
};

// Power iteration from the uniform vector on active cells until the L1
// residual |Pv - v| drops below tol. Throws convergence_error carrying the
// residual history when max_iters is exhausted.
StationaryResult stationary_measure(const UlamOperator& op, double tol,
                                    long long max_iters, int threads = 1);

void save_ulam(const UlamOperator& op, const std::string& path);
UlamOperator load_ulam(const std::string& path);

// Two sides of the stationarity identity: lhs integrates the observable
// against the measure (exact cell averages); rhs is a Monte Carlo estimate
// of the observable after one random step started from the measure, with
// its standard error.
enum class CirclePhi { Sin, Cos };

struct DualityResult {
    double lhs = 0.0;
    double rhs = 0.0;
    double se = 0.0;
};

DualityResult duality_check(const MapSystem& map, const NoiseKernel& kernel,
                            const GridMeasure& mu, CirclePhi phi, long long n_samples,
                            std::uint64_t seed);

}  // namespace zn
