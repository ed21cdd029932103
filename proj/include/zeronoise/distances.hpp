#pragma once

#include <cstdint>

#include "zeronoise/grid.hpp"
#include "zeronoise/orbit.hpp"

namespace zn {

enum class MeasureMetric { L1, W1Circle, W1Projected };

// L1 is the plain weight-vector distance (twice the total variation).
// W1Circle is the circular 1-Wasserstein distance of two measures on a
// 1D periodic grid, with cell masses treated as atoms at cell centers.
// W1Projected applies W1Circle to the coordinate-0 marginals of measures
// on fibred domains.
double measure_distance(const GridMeasure& a, const GridMeasure& b, MeasureMetric metric);

MeasureMetric parse_metric(const std::string& name);
const char* to_string(MeasureMetric m);

// Normalized histogram of orbit points with the first burn_in points of
// each orbit dropped.
GridMeasure empirical_measure(const std::vector<RandomOrbit>& orbits, const Grid& grid,
                              long long burn_in);

// Single-orbit streaming variant for long runs.
GridMeasure empirical_measure_stream(const MapSystem& map, const NoiseKernel& kernel,
                                     const Vec& x0, long long n, long long burn_in,
                                     const Grid& grid, std::uint64_t seed,
                                     std::uint64_t stream = 0);

}  // namespace zn
