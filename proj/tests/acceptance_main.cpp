// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Tolerances are pinned here and must not be loosened to make a
// failing criterion pass.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "zeronoise/config.hpp"
#include "zeronoise/distances.hpp"
#include "zeronoise/ergodic.hpp"
#include "zeronoise/errors.hpp"
#include "zeronoise/grid.hpp"
#include "zeronoise/maps.hpp"
#include "zeronoise/noise.hpp"
#include "zeronoise/rng.hpp"
#include "zeronoise/runner.hpp"
#include "zeronoise/ulam.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const double kLogLu = std::log((3.0 + std::sqrt(5.0)) / 2.0);

struct Outcome {
    bool ok = false;
    std::string detail;
};

// Uniformity of the stationary measure of the perturbed doubling map, the
// stationarity identity for two observables, and the single-thread runtime.
Outcome criterion1() {
    auto t0 = Clock::now();
    auto map = zn::build_catalog_map("doubling_d", {{"d", 2.0}});
    zn::NoiseKernel kernel{0.05, zn::KernelShape::Ball, {}, zn::BoundaryPolicy::Wrap};
    auto grid = zn::Grid::regular(map.domain, {4096});
    auto op = zn::build_ulam(map, kernel, grid, 64, 1, 1);
    auto st = zn::stationary_measure(op, 1e-10, 100000, 1);
    double l1 = zn::measure_distance(st.measure, zn::uniform_measure(grid),
                                     zn::MeasureMetric::L1);
    auto sin_check = zn::duality_check(map, kernel, st.measure, zn::CirclePhi::Sin,
                                       1000000, 2);
    auto cos_check = zn::duality_check(map, kernel, st.measure, zn::CirclePhi::Cos,
                                       1000000, 3);
    double wall = seconds_since(t0);
    double sin_gap = std::abs(sin_check.lhs - sin_check.rhs);
    double cos_gap = std::abs(cos_check.lhs - cos_check.rhs);
    bool ok = l1 <= 5e-3 && sin_gap <= 3.0 * sin_check.se &&
              cos_gap <= 3.0 * cos_check.se && wall < 30.0;
    return {ok, "doubling eps=0.05: L1(uniform)=" + fmt(l1) +
                    ", duality gaps " + fmt(sin_gap) + "/" + fmt(sin_check.se * 3) +
                    " and " + fmt(cos_gap) + "/" + fmt(cos_check.se * 3) +
                    ", wall " + fmt(wall) + "s"};
}

// Lyapunov exponents of the weakly perturbed cat map against the closed-form
// values, plus the exponent-sum / volume-growth identity.
Outcome criterion2() {
    auto map = zn::build_catalog_map("cat", {});
    zn::NoiseKernel kernel{1e-3, zn::KernelShape::Ball, {}, zn::BoundaryPolicy::Wrap};
    zn::Vec x0(2);
    x0 << 0.2, 0.7;
    auto est = zn::lyapunov_spectrum(map, kernel, x0, 1000000, 5, 1);
    double gap_top = std::abs(est.exponents[0] - kLogLu);
    double gap_bot = std::abs(est.exponents[1] + kLogLu);
    double sum_gap = std::abs(est.exponents[0] + est.exponents[1] - est.log_det_average);
    double sum_tol = 5.0 * est.sum_identity_se + 1e-9;
    bool ok = gap_top <= 1e-3 && gap_bot <= 1e-3 && sum_gap <= sum_tol;
    return {ok, "cat eps=1e-3: exponents " + fmt(est.exponents[0]) + "/" +
                    fmt(est.exponents[1]) + " (gaps " + fmt(gap_top) + ", " +
                    fmt(gap_bot) + "), sum identity " + fmt(sum_gap) + " vs " +
                    fmt(sum_tol)};
}

// Entropy formula right-hand side for the cat map with the uniform measure,
// and linearity of the quadrature in the measure argument.
Outcome criterion3() {
    auto map = zn::build_catalog_map("cat", {});
    auto grid = zn::Grid::regular(map.domain, {64, 64});
    auto mu = zn::uniform_measure(grid);
    double rhs_mu = zn::entropy_formula_rhs(map, mu);

    zn::GridMeasure nu{grid, std::vector<double>(static_cast<std::size_t>(grid.total_cells))};
    zn::Rng rng(99, 0);
    for (auto& w : nu.weights) w = 0.1 + rng.uniform01();
    nu.normalize();
    double rhs_nu = zn::entropy_formula_rhs(map, nu);

    zn::GridMeasure mix{grid, std::vector<double>(nu.weights.size())};
    for (std::size_t i = 0; i < mix.weights.size(); ++i)
        mix.weights[i] = 0.3 * mu.weights[i] + 0.7 * nu.weights[i];
    double rhs_mix = zn::entropy_formula_rhs(map, mix);

    double gap_value = std::abs(rhs_mu - kLogLu);
    double gap_linear = std::abs(rhs_mix - (0.3 * rhs_mu + 0.7 * rhs_nu));
    bool ok = gap_value <= 1e-6 && gap_linear <= 1e-12;
    return {ok, "cat entropy rhs=" + fmt(rhs_mu) + " (gap " + fmt(gap_value) +
                    "), linearity gap " + fmt(gap_linear)};
}

// Domination product bounds: the solenoid stays below its contraction rate
// with a clean cone test, and the cat map reproduces its closed-form value.
Outcome criterion4() {
    auto sol = zn::build_catalog_map("solenoid_alpha", {{"alpha", 0.5}});
    auto sol_rep = zn::domination_check(sol, 100000, 1, 1);
    bool sol_ok = sol_rep.lambda0_estimate <= 0.1 + 1e-6 &&
                  sol_rep.cone_invariance_failures == 0 && sol_rep.violations.empty();

    auto cat = zn::build_catalog_map("cat", {});
    auto cat_rep = zn::domination_check(cat, 8192, 1, 1);
    const double cat_expected = 0.14589803375031546;
    bool cat_ok = std::abs(cat_rep.lambda0_estimate - cat_expected) <= 1e-6 &&
                  std::llround(cat_rep.lambda0_estimate * 1e4) == 1459;

    return {sol_ok && cat_ok,
            "solenoid lambda0=" + fmt(sol_rep.lambda0_estimate) + " (<=0.1), cone failures " +
                std::to_string(sol_rep.cone_invariance_failures) + "; cat lambda0=" +
                fmt(cat_rep.lambda0_estimate) + " (rounds to 0.1459)"};
}

// Degenerate expansion/contraction cells: the intermittent map isolates the
// neutral cell at the origin and the solenoid has no near-neutral stable cell.
Outcome criterion5() {
    auto g = zn::build_catalog_map("g_alpha", {{"alpha", 0.5}});
    auto g_grid = zn::Grid::regular(g.domain, {4096});
    auto g_rep = zn::degenerate_sets(g, g_grid, 1e-6, 1);
    bool g_ok = g_rep.F1_cells.size() == 1 && g_rep.F1_cells[0] == 0 &&
                g_rep.E1_cells.empty();

    auto sol = zn::build_catalog_map("solenoid_alpha", {{"alpha", 0.5}});
    auto sol_grid = zn::Grid::regular(sol.domain, {64, 8, 8});
    auto sol_rep = zn::degenerate_sets(sol, sol_grid, 1e-6, 1);
    bool sol_ok = sol_rep.E1_cells.empty();

    return {g_ok && sol_ok,
            "g_alpha neutral cells F1={" +
                (g_rep.F1_cells.empty() ? std::string("}") :
                 std::to_string(g_rep.F1_cells[0]) + "} (" +
                     std::to_string(g_rep.F1_cells.size()) + " cell)") +
                ", E1 " + std::to_string(g_rep.E1_cells.size()) +
                "; solenoid E1 " + std::to_string(sol_rep.E1_cells.size())};
}

zn::ExperimentConfig sweep_config(const std::string& map_lines, const std::string& grid_cells,
                                  const std::string& solver_extra, const std::string& out_dir) {
    std::string text;
    text += "[map]\n" + map_lines;
    text += "[grid]\ncells = [" + grid_cells + "]\n";
    text += "[solver]\nsamples_per_cell = 64\n" + solver_extra;
    text += "[sweep]\nepsilon_list = [0.1, 0.03, 0.01, 0.003, 0.001]\nseeds = [1]\n";
    text += "[output]\ndir = " + out_dir + "\n";
    return zn::parse_config(text);
}

// Noise sweep for the strongly expanding intermittent map: distances to the
// point-mass reference shrink along the sweep and the run fits the time box.
Outcome criterion6() {
    auto t0 = Clock::now();
    auto config = sweep_config("name = g_alpha\nalpha = 1.5\n", "8192",
                               "tol = 1e-10\n", "acc_c6");
    auto report = zn::run_zero_noise_sweep(config, {"acc_c6", 8});
    double wall = seconds_since(t0);

    bool rows_ok = report.all_ok && report.rows.size() == 5;
    bool monotone = true;
    for (std::size_t i = 0; rows_ok && i + 1 < report.rows.size(); ++i)
        if (!(report.rows[i + 1].w1_to_reference <= 1.10 * report.rows[i].w1_to_reference))
            monotone = false;
    double first = rows_ok ? report.rows.front().w1_to_reference : 0.0;
    double last = rows_ok ? report.rows.back().w1_to_reference : 1.0;
    bool halved = rows_ok && last <= 0.5 * first;
    bool ok = rows_ok && monotone && halved && wall < 600.0;
    return {ok, "g_alpha alpha=1.5 sweep: W1 " + fmt(first) + " -> " + fmt(last) +
                    (monotone ? ", monotone within 10%" : ", NOT monotone") +
                    ", wall " + fmt(wall) + "s"};
}

// Noise sweep for the neutral-fixed-point regime: consecutive stationary
// measures form a Cauchy sequence in L1 and the distance to the fine
// noiseless proxy drops by at least half across the sweep.
Outcome criterion7() {
    auto config = sweep_config("name = g_alpha\nalpha = 0.5\n", "8192",
                               "tol = 1e-10\n", "acc_c7");
    auto report = zn::run_zero_noise_sweep(config, {"acc_c7", 8});

    bool rows_ok = report.all_ok && report.rows.size() == 5 && report.reference_error.empty();
    bool cauchy = true;
    for (std::size_t i = 2; rows_ok && i < report.rows.size(); ++i)
        if (!(report.rows[i].l1_to_previous_epsilon <
              report.rows[i - 1].l1_to_previous_epsilon))
            cauchy = false;
    double first = rows_ok ? report.rows.front().w1_to_reference : 0.0;
    double last = rows_ok ? report.rows.back().w1_to_reference : 1.0;
    double factor = last > 0.0 ? first / last : 0.0;
    bool ok = rows_ok && cauchy && factor >= 2.0;
    return {ok, "g_alpha alpha=0.5 sweep: L1 steps " +
                    (rows_ok ? fmt(report.rows[1].l1_to_previous_epsilon) + " -> " +
                                   fmt(report.rows[4].l1_to_previous_epsilon)
                             : std::string("n/a")) +
                    (cauchy ? " strictly decreasing" : " NOT decreasing") +
                    ", proxy W1 factor " + fmt(factor)};
}

// Noise sweep for the expanding solenoid: the entropy formula right-hand
// side stays strictly positive at every noise level, giving a uniform lower
// bound for the entropy along the sweep.
Outcome criterion8() {
    auto config = sweep_config("name = solenoid_alpha\nalpha = 1.5\n", "128, 16, 16",
                               "tol = 1e-6\n", "acc_c8");
    auto report = zn::run_zero_noise_sweep(config, {"acc_c8", 8});

    bool rows_ok = report.all_ok && report.rows.size() == 5;
    double bound = rows_ok ? report.rows.front().entropy_rhs : 0.0;
    bool positive = rows_ok;
    for (const auto& row : report.rows) {
        if (!(row.entropy_rhs > 0.0)) positive = false;
        bound = std::min(bound, row.entropy_rhs);
    }
    bool ok = rows_ok && positive;
    return {ok, "solenoid alpha=1.5 sweep: entropy rhs lower bound " + fmt(bound) +
                    (positive ? " > 0 at every epsilon" : ", NOT positive everywhere")};
}

// Basin coverage: almost every start reproduces the stationary integrals of
// the perturbed solenoid within tolerance. The reference grid must resolve
// the attractor in the fibre coordinates: the stationary mass sits on a tube
// of width comparable to the noise level, so coarse fibre cells shift the
// cell-center quadrature of the Fourier observables by more than the basin
// tolerance.
Outcome criterion9() {
    auto map = zn::build_catalog_map("solenoid_alpha", {{"alpha", 0.5}});
    zn::NoiseKernel kernel{1e-2, zn::KernelShape::Ball, {}, zn::BoundaryPolicy::Reject};
    auto grid = zn::Grid::regular(map.domain, {128, 64, 64});
    auto op = zn::build_ulam(map, kernel, grid, 256, 1, 1);
    auto st = zn::stationary_measure(op, 1e-8, 100000, 1);
    auto observables = zn::default_observables(map.domain);
    double fraction = zn::basin_fraction(map, kernel, st.measure, observables, 500,
                                         100000, 0.02, 7, 8);
    bool ok = observables.size() == 12 && fraction >= 0.95;
    return {ok, "solenoid alpha=0.5 eps=1e-2: basin fraction " + fmt(fraction) +
                    " over " + std::to_string(observables.size()) + " observables"};
}

// Reruns of one sweep config, at different thread counts, write
// byte-identical CSV reports. The run directories are overridden per run so
// both reruns share the exact same config (and hence the same hash header).
Outcome criterion10() {
    auto config = sweep_config("name = g_alpha\nalpha = 1.5\n", "512",
                               "tol = 1e-10\nlyapunov_steps = 20000\n", "acc_c10");
    std::filesystem::remove_all("acc_c10_a");
    std::filesystem::remove_all("acc_c10_b");
    auto report_a = zn::run_zero_noise_sweep(config, {"acc_c10_a", 2});
    auto report_b = zn::run_zero_noise_sweep(config, {"acc_c10_b", 4});
    if (!report_a.all_ok || !report_b.all_ok)
        return {false, "sweep rows failed, cannot compare outputs"};

    std::vector<std::string> names = {"sweep.csv"};
    for (const char* tag : {"0.1", "0.03", "0.01", "0.003", "0.001"})
        names.push_back(std::string("measure_eps_") + tag + ".csv");
    int compared = 0;
    for (const auto& name : names) {
        std::string a = slurp("acc_c10_a/" + name);
        std::string b = slurp("acc_c10_b/" + name);
        if (a.empty() || a != b)
            return {false, name + " differs between reruns"};
        ++compared;
    }
    return {true, std::to_string(compared) + " CSV files byte-identical across reruns"};
}

}  // namespace

int main() {
    struct Entry {
        int number;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> entries = {
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
        {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8},
        {9, criterion9}, {10, criterion10},
    };

    int failures = 0;
    for (const auto& entry : entries) {
        Outcome outcome;
        try {
            outcome = entry.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        if (!outcome.ok) ++failures;
        std::printf("%s criterion %d: %s\n", outcome.ok ? "PASS" : "FAIL",
                    entry.number, outcome.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n",
                static_cast<int>(entries.size()) - failures, entries.size());
    return failures;
}
