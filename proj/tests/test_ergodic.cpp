#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "zeronoise/domain.hpp"
#include "zeronoise/ergodic.hpp"
#include "zeronoise/errors.hpp"
#include "zeronoise/grid.hpp"
#include "zeronoise/maps.hpp"
#include "zeronoise/noise.hpp"
#include "zeronoise/rng.hpp"
#include "zeronoise/ulam.hpp"

using namespace zn;

namespace {

NoiseKernel ball(double eps, BoundaryPolicy policy = BoundaryPolicy::Wrap) {
    NoiseKernel k;
    k.epsilon = eps;
    k.shape = KernelShape::Ball;
    k.boundary_policy = policy;
    return k;
}

const double kLogLu = std::log((3.0 + std::sqrt(5.0)) / 2.0);
const double kLambdaS2 = std::pow(2.0 / (3.0 + std::sqrt(5.0)), 2);

Vec pt(std::initializer_list<double> coords) {
    Vec p(static_cast<Eigen::Index>(coords.size()));
    Eigen::Index i = 0;
    for (double c : coords) p[i++] = c;
    return p;
}

}  // namespace

TEST_CASE("doubling map exponent is exactly log 2") {
    const MapSystem e2 = build_catalog_map("doubling_d", {});
    const LyapunovEstimate est =
        lyapunov_spectrum(e2, ball(1e-6), pt({0.37}), 50000, 5, 3);
    REQUIRE(est.exponents.size() == 1);
    CHECK(est.exponents[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(est.standard_errors[0] < 1e-12);
    CHECK(est.chi_plus == est.exponents[0]);
}

TEST_CASE("cat map exponents are symmetric around zero") {
    const MapSystem cat = build_catalog_map("cat", {});
    const LyapunovEstimate est =
        lyapunov_spectrum(cat, ball(1e-3), pt({0.2, 0.7}), 200000, 5, 11);
    REQUIRE(est.exponents.size() == 2);
    CHECK(std::is_sorted(est.exponents.rbegin(), est.exponents.rend()));

    // constant jacobian, so the only error is the frame-alignment transient
    // of a few renorm windows, which fades like 1/n
    CHECK(std::fabs(est.exponents[0] - kLogLu) < 5e-4);
    CHECK(std::fabs(est.exponents[1] + kLogLu) < 5e-4);
    CHECK(est.chi_plus == est.exponents[0]);

    // det Df = 1, so the exponent sum must vanish against the orbit average
    CHECK(std::fabs(est.exponents[0] + est.exponents[1] - est.log_det_average) <
          5.0 * est.sum_identity_se + 1e-9);
    CHECK(std::fabs(est.log_det_average) < 1e-12);
}

TEST_CASE("renormalization period does not change the estimate") {
    const MapSystem g = build_catalog_map("g_alpha", {{"alpha", 1.5}});
    std::vector<LyapunovEstimate> runs;
    for (long long period : {1LL, 5LL, 20LL})
        runs.push_back(lyapunov_spectrum(g, ball(0.01), pt({0.37}), 100000, period, 7));
    for (std::size_t i = 1; i < runs.size(); ++i) {
        CHECK(runs[i].exponents[0] ==
              doctest::Approx(runs[0].exponents[0]).epsilon(1e-8));
        CHECK(runs[i].renorm_period != runs[0].renorm_period);
    }
}

TEST_CASE("solenoid contraction rates come out exact") {
    const MapSystem sol = build_catalog_map("solenoid_alpha", {{"alpha", 1.5}});
    const LyapunovEstimate est = lyapunov_spectrum(
        sol, ball(0.01, BoundaryPolicy::Reject), pt({0.37, 0.1, -0.2}), 50000, 5, 5);
    REQUIRE(est.exponents.size() == 3);
    // the fibre blocks contribute log(1/10) per step with no fluctuation
    CHECK(est.exponents[1] == doctest::Approx(std::log(0.1)).epsilon(1e-12));
    CHECK(est.exponents[2] == doctest::Approx(std::log(0.1)).epsilon(1e-12));
    CHECK(est.standard_errors[1] < 1e-12);
    CHECK(est.chi_plus == est.exponents[0]);
    CHECK(est.exponents[0] > 0.0);

    // volume identity: triangular cocycle, so it holds to rounding
    CHECK(std::fabs(est.exponents[0] + est.exponents[1] + est.exponents[2] -
                    est.log_det_average) < 1e-10);
}

TEST_CASE("entropy quadrature closed forms") {
    const MapSystem cat = build_catalog_map("cat", {});
    const Grid cgrid = Grid::regular(cat.domain, {64, 64});
    CHECK(entropy_formula_rhs(cat, uniform_measure(cgrid)) ==
          doctest::Approx(kLogLu).epsilon(1e-12));

    const MapSystem e3 = build_catalog_map("doubling_d", {{"d", 3.0}});
    const Grid grid3 = Grid::regular(e3.domain, {128});
    CHECK(entropy_formula_rhs(e3, uniform_measure(grid3)) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("entropy quadrature is linear in the measure") {
    const MapSystem g = build_catalog_map("g_alpha", {{"alpha", 1.5}});
    const Grid grid = Grid::regular(g.domain, {512});

    GridMeasure a = uniform_measure(grid);
    GridMeasure b = uniform_measure(grid);
    Rng rng(31, 0);
    for (double& w : b.weights) w *= rng.uniform(0.25, 4.0);
    b.normalize();

    GridMeasure mix = a;
    for (std::size_t i = 0; i < mix.weights.size(); ++i)
        mix.weights[i] = 0.3 * a.weights[i] + 0.7 * b.weights[i];

    const double lhs = entropy_formula_rhs(g, mix);
    const double rhs = 0.3 * entropy_formula_rhs(g, a) + 0.7 * entropy_formula_rhs(g, b);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("entropy quadrature without a splitting hint uses the aligned frame") {
    MapSystem bare = build_catalog_map("cat", {});
    bare.splitting.reset();
    const Grid grid = Grid::regular(bare.domain, {64, 64});
    CHECK_THROWS_AS(entropy_formula_rhs(bare, uniform_measure(grid)),
                    unsupported_map_error);
    CHECK(entropy_formula_rhs(bare, uniform_measure(grid), 1) ==
          doctest::Approx(kLogLu).epsilon(1e-6));
}

TEST_CASE("domination product stays below one on the catalog") {
    const MapSystem sol = build_catalog_map("solenoid_alpha", {{"alpha", 0.5}});
    const DominationReport rs = domination_check(sol, 20000, 9);
    CHECK(rs.samples == 20000);
    // fibre contraction 0.1 against |Df f| = sqrt(g'^2 + pi^2); the product
    // peaks where g' -> 1, at 0.1/sqrt(1 + pi^2)
    const double peak = 0.1 / std::sqrt(1.0 + std::numbers::pi * std::numbers::pi);
    CHECK(rs.lambda0_estimate <= peak + 1e-12);
    CHECK(rs.lambda0_estimate > 0.99 * peak);
    CHECK(rs.violations.empty());
    CHECK(rs.cone_invariance_failures == 0);

    const MapSystem cat = build_catalog_map("cat", {});
    const DominationReport rc = domination_check(cat, 5000, 9);
    // constant cocycle: the product is lambda_s^2 at every point
    CHECK(rc.lambda0_estimate == doctest::Approx(kLambdaS2).epsilon(1e-12));
    CHECK(rc.violations.empty());
    CHECK(rc.cone_invariance_failures == 0);
}

TEST_CASE("swapping the bundles is detected as a violation") {
    MapSystem wrong = build_catalog_map("cat", {});
    std::swap(wrong.splitting->e_frame, wrong.splitting->f_frame);
    const DominationReport r = domination_check(wrong, 2000, 13);
    CHECK(r.lambda0_estimate > 1.0);
    CHECK_FALSE(r.violations.empty());
    CHECK(r.cone_invariance_failures > 0);
}

TEST_CASE("region sampler overload restricts the scan") {
    const MapSystem cat = build_catalog_map("cat", {});
    const RegionSampler fixed = [](Rng&) {
        Vec p(2);
        p << 0.25, 0.75;
        return p;
    };
    const DominationReport r = domination_check(cat, fixed, 100, 1);
    CHECK(r.samples == 100);
    CHECK(r.lambda0_estimate == doctest::Approx(kLambdaS2).epsilon(1e-12));
}

TEST_CASE("degenerate sets isolate the neutral cell") {
    const MapSystem g = build_catalog_map("g_alpha", {{"alpha", 0.5}});
    const Grid grid = Grid::regular(g.domain, {4096});
    const DegenerateSetReport r = degenerate_sets(g, grid, 1e-6);
    CHECK(r.E1_cells.empty());  // no contracting bundle on the circle
    REQUIRE(r.F1_cells.size() == 1);
    CHECK(r.F1_cells[0] == 0);

    const MapSystem cat = build_catalog_map("cat", {});
    const DegenerateSetReport rc =
        degenerate_sets(cat, Grid::regular(cat.domain, {32, 32}), 1e-3);
    CHECK(rc.E1_cells.empty());
    CHECK(rc.F1_cells.empty());
}

TEST_CASE("degenerate sets on the fibred maps") {
    const MapSystem sol = build_catalog_map("solenoid_alpha", {{"alpha", 0.5}});
    const Grid sgrid = Grid::regular(sol.domain, {64, 8, 8});
    const DegenerateSetReport rs = degenerate_sets(sol, sgrid, 1e-3);
    CHECK(rs.E1_cells.empty());  // fibre contraction 0.1 is nowhere near 1

    std::int64_t base_zero_cells = 0;
    for (std::int64_t c = 0; c < sgrid.total_cells; ++c)
        if (sgrid.cell_active(c) && sgrid.cell_coords(c)[0] == 0) ++base_zero_cells;
    REQUIRE_FALSE(rs.F1_cells.empty());
    CHECK(static_cast<std::int64_t>(rs.F1_cells.size()) == base_zero_cells);
    for (std::int64_t c : rs.F1_cells) CHECK(sgrid.cell_coords(c)[0] == 0);

    const MapSystem skew = build_catalog_map("skew_torus", {});
    const Grid kgrid = Grid::regular(skew.domain, {8, 8, 4, 4});
    const DegenerateSetReport rk = degenerate_sets(skew, kgrid, 1e-3);
    CHECK(rk.E1_cells.empty());
    CHECK(rk.F1_cells.size() == 24);
    for (std::int64_t c : rk.F1_cells) {
        const std::vector<int> coords = kgrid.cell_coords(c);
        // corners with t mapped onto the neutral parameter and x at 0
        CHECK((coords[0] == 0 || coords[0] == 4));
        CHECK(coords[1] == 0);
    }
}

TEST_CASE("basin fraction distinguishes right and wrong references") {
    const MapSystem e2 = build_catalog_map("doubling_d", {});
    const NoiseKernel k = ball(0.05);
    const Grid grid = Grid::regular(e2.domain, {256});
    const UlamOperator op = build_ulam(e2, k, grid, 32, 2);
    const GridMeasure stat = stationary_measure(op, 1e-10, 100000).measure;
    const std::vector<Observable> obs = default_observables(e2.domain);
    CHECK(obs.size() == 4);

    const double good = basin_fraction(e2, k, stat, obs, 200, 20000, 0.02, 5);
    CHECK(good == 1.0);

    GridMeasure wrong = stat;
    std::fill(wrong.weights.begin(), wrong.weights.end(), 0.0);
    wrong.weights[0] = 1.0;
    const double bad = basin_fraction(e2, k, wrong, obs, 200, 20000, 0.02, 5);
    CHECK(bad == 0.0);
}

TEST_CASE("observable integrals") {
    const DomainDescriptor circle = DomainDescriptor::circle();
    const Grid grid = Grid::regular(circle, {512});
    const std::vector<Observable> obs = default_observables(circle);
    REQUIRE(obs.size() == 4);
    const GridMeasure uni = uniform_measure(grid);
    for (const Observable& o : obs)
        CHECK(std::fabs(measure_integral(uni, o)) < 1e-12);

    const DomainDescriptor torus = DomainDescriptor::solid_torus();
    CHECK(default_observables(torus).size() == 12);
}

TEST_CASE("orbit exponent sum matches the entropy quadrature") {
    const MapSystem sol = build_catalog_map("solenoid_alpha", {{"alpha", 0.5}});
    const NoiseKernel k = ball(0.01, BoundaryPolicy::Reject);

    const LyapunovEstimate est =
        lyapunov_spectrum(sol, k, pt({0.37, 0.1, -0.2}), 200000, 5, 21);

    const Grid grid = Grid::regular(sol.domain, {64, 8, 8});
    const UlamOperator op = build_ulam(sol, k, grid, 16, 21);
    const GridMeasure stat = stationary_measure(op, 1e-10, 100000).measure;
    const double rhs = entropy_formula_rhs(sol, stat);

    // two fully independent routes to the same number
    CHECK(est.chi_plus == doctest::Approx(rhs).epsilon(0.02));
    CHECK(rhs > 0.0);
}
