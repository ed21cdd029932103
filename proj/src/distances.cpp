#include "zeronoise/distances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "zeronoise/errors.hpp"
#include "zeronoise/numeric.hpp"

namespace zn {

namespace {

// Circular W1 between atom vectors on a uniform periodic 1D grid:
// minimize over the transport constant c the integral of |(F_a - F_b) - c|,
// where F are the cumulative masses at cell centers. The minimizing c is a
// median of the cumulative differences.
double w1_circle_1d(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    std::vector<double> cum(n);
    KahanSum acc;
    for (std::size_t i = 0; i < n; ++i) {
        acc.add(a[i] - b[i]);
        cum[i] = acc.value();
    }
    std::vector<double> sorted = cum;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n / 2),
                     sorted.end());
    const double med = sorted[n / 2];
    KahanSum total;
    for (double d : cum) total.add(std::fabs(d - med));
    return total.value() / static_cast<double>(n);
}

void require_same_grid(const GridMeasure& a, const GridMeasure& b) {
    if (!(a.grid.domain == b.grid.domain) || a.grid.cells_per_dim != b.grid.cells_per_dim)
        throw construction_error("measure distance: measures live on different grids");
}

}  // namespace

double measure_distance(const GridMeasure& a, const GridMeasure& b, MeasureMetric metric) {
    require_same_grid(a, b);
    switch (metric) {
        case MeasureMetric::L1: {
            KahanSum s;
            for (std::size_t i = 0; i < a.weights.size(); ++i)
                s.add(std::fabs(a.weights[i] - b.weights[i]));
            return s.value();
        }
        case MeasureMetric::W1Circle: {
            if (a.grid.domain.dim != 1 || !a.grid.domain.periodic[0])
                throw construction_error("w1_circle requires a 1D periodic grid");
            return w1_circle_1d(a.weights, b.weights);
        }
        case MeasureMetric::W1Projected: {
            const GridMeasure ma = circle_marginal(a);
            const GridMeasure mb = circle_marginal(b);
            return w1_circle_1d(ma.weights, mb.weights);
        }
    }
    throw construction_error("measure distance: unknown metric");
}

MeasureMetric parse_metric(const std::string& name) {
    if (name == "l1") return MeasureMetric::L1;
    if (name == "w1_circle") return MeasureMetric::W1Circle;
    if (name == "w1_projected") return MeasureMetric::W1Projected;
    throw config_error("unknown measure metric '" + name + "'");
}

const char* to_string(MeasureMetric m) {
    switch (m) {
        case MeasureMetric::L1: return "l1";
        case MeasureMetric::W1Circle: return "w1_circle";
        case MeasureMetric::W1Projected: return "w1_projected";
    }
    return "?";
}

GridMeasure empirical_measure(const std::vector<RandomOrbit>& orbits, const Grid& grid,
                              long long burn_in) {
    std::vector<double> counts(static_cast<std::size_t>(grid.total_cells), 0.0);
    long long retained = 0;
    for (const RandomOrbit& orbit : orbits) {
        for (std::size_t k = static_cast<std::size_t>(burn_in); k < orbit.points.size(); ++k) {
            counts[static_cast<std::size_t>(grid.cell_index(orbit.points[k]))] += 1.0;
            ++retained;
        }
    }
    if (retained == 0)
        throw construction_error("empirical measure: no points retained after burn-in");
    GridMeasure m;
    m.grid = grid;
    m.weights = std::move(counts);
    m.normalize();
    return m;
}

GridMeasure empirical_measure_stream(const MapSystem& map, const NoiseKernel& kernel,
                                     const Vec& x0, long long n, long long burn_in,
                                     const Grid& grid, std::uint64_t seed,
                                     std::uint64_t stream) {
    if (n <= burn_in)
        throw construction_error("empirical measure: no points retained after burn-in");
    std::vector<double> counts(static_cast<std::size_t>(grid.total_cells), 0.0);
    visit_random_orbit(map, kernel, x0, n, seed, stream,
                       [&](long long k, const Vec& x) {
                           if (k > burn_in)
                               counts[static_cast<std::size_t>(grid.cell_index(x))] += 1.0;
                       });
    GridMeasure m;
    m.grid = grid;
    m.weights = std::move(counts);
    m.normalize();
    return m;
}

}  // namespace zn
