#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "zeronoise/grid.hpp"
#include "zeronoise/maps.hpp"
#include "zeronoise/noise.hpp"
#include "zeronoise/rng.hpp"

namespace zn {

struct LyapunovEstimate {
    std::vector<double> exponents;        // nats per iterate, descending
    std::vector<double> standard_errors;  // batch-means, aligned with exponents
    double chi_plus = 0.0;                // sum of the positive exponents
    long long n_steps = 0;
    long long renorm_period = 1;
    double log_det_average = 0.0;         // time average of log|det Df| on the orbit
    double sum_identity_se = 0.0;         // batch-means SE of sum(exponents) - log_det_average
};

// QR cocycle estimate along a random orbit: an orthonormal frame seeded from
// the splitting hint (contracting columns first) is pushed by the Jacobians
// and re-orthonormalized every renorm_period steps; exponents are the
// averaged log diagonal R entries. Standard errors use 20 batch means.
LyapunovEstimate lyapunov_spectrum(const MapSystem& map, const NoiseKernel& kernel,
                                   const Vec& x0, long long n, long long renorm_period,
                                   std::uint64_t seed);

// Integral of log|det(Df restricted to the F bundle)| against the measure,
// evaluated at cell centers. The restriction is the projection of the image
// onto the F frame along the complementary frame. Maps without a splitting
// hint need f_dim_fallback: a global F frame is then aligned by pushing a
// random frame along a 1000-step auxiliary orbit.
double entropy_formula_rhs(const MapSystem& map, const GridMeasure& measure,
                           std::optional<int> f_dim_fallback = std::nullopt);

struct DominationReport {
    double lambda0_estimate = 0.0;  // max over samples of |Df|E| * |(Df|F)^-1|
    long long samples = 0;
    std::vector<Vec> violations;    // sampled points with estimate >= 1 (capped)
    long long cone_invariance_failures = 0;
};

using RegionSampler = std::function<Vec(Rng&)>;

// Samples the domain (or a caller-supplied region), evaluates the domination
// product from raw singular values of Df applied to the hint frames, and
// tests invariance of the F cone on 8 boundary vectors per sample. The cone
// test measures E components in the hint's adapted metric (e_metric_weight).
DominationReport domination_check(const MapSystem& map, const RegionSampler& sampler,
                                  long long n_samples, std::uint64_t seed,
                                  int threads = 1);
DominationReport domination_check(const MapSystem& map, long long n_samples,
                                  std::uint64_t seed, int threads = 1);

struct DegenerateSetReport {
    double tolerance = 0.0;
    std::vector<std::int64_t> E1_cells;  // |Df|E| within [1-tol, 1]
    std::vector<std::int64_t> F1_cells;  // |(Df|F)^-1| within [1-tol, 1]
};

// Scans the lower corner of every active cell. Lower corners keep lattice
// points such as the neutral fixed point at 0 on the evaluation set, which
// cell centers always miss.
DegenerateSetReport degenerate_sets(const MapSystem& map, const Grid& grid,
                                    double tolerance, int threads = 1);

struct Observable {
    std::string name;
    std::function<double(const Vec&)> fn;
};

// Fourier modes k = 1, 2 (sine and cosine) in each coordinate, bounded
// coordinates affinely rescaled to [0, 1] first.
std::vector<Observable> default_observables(const DomainDescriptor& domain);

// Fraction of uniformly sampled starts whose Birkhoff averages over n_iter
// steps match the reference integrals within tol for every observable.
double basin_fraction(const MapSystem& map, const NoiseKernel& kernel,
                      const GridMeasure& reference,
                      const std::vector<Observable>& observables, long long n_init,
                      long long n_iter, double tol, std::uint64_t seed,
                      int threads = 1);

// Quadrature of an observable against a grid measure at cell centers.
double measure_integral(const GridMeasure& m, const Observable& obs);

}  // namespace zn
