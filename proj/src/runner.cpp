#include "zeronoise/runner.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "zeronoise/distances.hpp"
#include "zeronoise/ergodic.hpp"
#include "zeronoise/errors.hpp"
#include "zeronoise/grid.hpp"
#include "zeronoise/maps.hpp"
#include "zeronoise/noise.hpp"
#include "zeronoise/numeric.hpp"
#include "zeronoise/orbit.hpp"
#include "zeronoise/parallel.hpp"
#include "zeronoise/ulam.hpp"

namespace zn {

namespace {

using nlohmann::json;

constexpr std::uint64_t kX0Stream = 0x78307374;  // start-point draws

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string error_class(const std::exception& e) {
    if (dynamic_cast<const config_error*>(&e)) return "config_error";
    if (dynamic_cast<const construction_error*>(&e)) return "construction_error";
    if (dynamic_cast<const discretization_error*>(&e)) return "discretization_error";
    if (dynamic_cast<const kernel_error*>(&e)) return "kernel_error";
    if (dynamic_cast<const unsupported_map_error*>(&e)) return "unsupported_map_error";
    if (dynamic_cast<const convergence_error*>(&e)) return "convergence_error";
    if (dynamic_cast<const numerical_error*>(&e)) return "numerical_error";
    if (dynamic_cast<const domain_error*>(&e)) return "domain_error";
    if (dynamic_cast<const zn::error*>(&e)) return "error";
    return "exception";
}

struct Ctx {
    const ExperimentConfig& config;
    std::filesystem::path out;
    int threads = 1;
    MapSystem map;
    std::string hash_hex;
    std::string hash_line;
    json manifest;
};

void log_line(const std::string& msg) { std::fprintf(stderr, "%s\n", msg.c_str()); }

FILE* open_csv(const Ctx& ctx, const std::string& filename, const std::string& header) {
    const std::string path = (ctx.out / filename).string();
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw zn::error("cannot open '" + path + "' for writing");
    std::fputs("schema=1\n", f);
    std::fprintf(f, "%s\n", ctx.hash_line.c_str());
    std::fprintf(f, "%s\n", header.c_str());
    return f;
}

void write_manifest(Ctx& ctx) {
    const std::string path = (ctx.out / "manifest.json").string();
    std::ofstream out(path);
    if (!out) throw zn::error("cannot open '" + path + "' for writing");
    out << ctx.manifest.dump(2) << "\n";
}

double require_epsilon(const ExperimentConfig& config) {
    if (!config.kernel_epsilon) {
        throw config_error("this subcommand needs [kernel] epsilon");
    }
    return *config.kernel_epsilon;
}

Grid require_grid(const Ctx& ctx) {
    if (ctx.config.grid_cells.empty()) {
        throw config_error("this subcommand needs [grid] cells");
    }
    if (static_cast<int>(ctx.config.grid_cells.size()) != ctx.map.domain.dim) {
        std::ostringstream os;
        os << "[grid] cells has " << ctx.config.grid_cells.size()
           << " entries but the map domain has dimension " << ctx.map.domain.dim;
        throw config_error(os.str());
    }
    return Grid::regular(ctx.map.domain, ctx.config.grid_cells);
}

Vec start_point(const Ctx& ctx, std::uint64_t seed) {
    if (ctx.config.x0) {
        if (static_cast<int>(ctx.config.x0->size()) != ctx.map.domain.dim) {
            throw config_error("x0 dimension does not match the map domain");
        }
        Vec v(ctx.map.domain.dim);
        for (int d = 0; d < ctx.map.domain.dim; ++d) v[d] = (*ctx.config.x0)[static_cast<std::size_t>(d)];
        return v;
    }
    Rng rng(seed, kX0Stream);
    return ctx.map.domain.sample_uniform(rng);
}

// Mass-1 cell measure holding the declared zero-noise limit point.
GridMeasure point_mass_measure(const Grid& grid, const Vec& point) {
    GridMeasure m{grid, std::vector<double>(static_cast<std::size_t>(grid.total_cells), 0.0)};
    m.weights[static_cast<std::size_t>(grid.cell_index(point))] = 1.0;
    return m;
}

MeasureMetric reference_metric(const DomainDescriptor& domain) {
    return domain.dim == 1 ? MeasureMetric::W1Circle : MeasureMetric::W1Projected;
}

std::string epsilon_tag(double eps) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", eps);
    return std::string(buf);
}

// --- subcommands -------------------------------------------------------------

int cmd_orbit(Ctx& ctx) {
    const double eps = require_epsilon(ctx.config);
    const NoiseKernel kernel = make_kernel(ctx.config, ctx.map.domain, eps);
    const std::uint64_t seed = ctx.config.seeds.front();
    const Vec x0 = start_point(ctx, seed);
    const double t0 = now_seconds();
    const RandomOrbit orbit =
        random_orbit(ctx.map, kernel, x0, ctx.config.orbit_steps, seed);
    const double dt = now_seconds() - t0;

    std::string header = "step";
    for (int d = 0; d < ctx.map.domain.dim; ++d) header += ",x_" + std::to_string(d);
    FILE* f = open_csv(ctx, "orbit.csv", header);
    for (std::size_t k = 0; k < orbit.points.size(); ++k) {
        std::fprintf(f, "%lld", static_cast<long long>(k));
        for (int d = 0; d < ctx.map.domain.dim; ++d) {
            std::fprintf(f, ",%s", format_double(orbit.points[k][d]).c_str());
        }
        std::fputc('\n', f);
    }
    std::fclose(f);

    ctx.manifest["results"] = {{"steps", ctx.config.orbit_steps},
                               {"rejected_draws", orbit.rejected_count}};
    ctx.manifest["timings"] = {{"total_seconds", dt}};
    log_line("orbit: " + std::to_string(ctx.config.orbit_steps) + " steps written");
    return 0;
}

int cmd_ulam(Ctx& ctx) {
    const double eps = require_epsilon(ctx.config);
    const NoiseKernel kernel = make_kernel(ctx.config, ctx.map.domain, eps);
    const Grid grid = require_grid(ctx);
    const std::uint64_t seed = ctx.config.seeds.front();
    const double t0 = now_seconds();
    const UlamOperator op = build_ulam(ctx.map, kernel, grid, ctx.config.samples_per_cell,
                                       seed, ctx.threads);
    const double dt = now_seconds() - t0;
    save_ulam(op, (ctx.out / "ulam_operator.bin").string());

    const auto sums = ulam_column_sums(op.matrix);
    double max_dev = 0.0;
    for (double s : sums) max_dev = std::max(max_dev, std::fabs(s - 1.0));

    ctx.manifest["results"] = {{"cells", op.grid.total_cells},
                               {"nnz", op.matrix.nnz()},
                               {"max_column_sum_deviation", max_dev},
                               {"operator_file", "ulam_operator.bin"}};
    ctx.manifest["timings"] = {{"total_seconds", dt}};
    log_line("ulam: " + std::to_string(op.matrix.nnz()) + " entries over " +
             std::to_string(op.grid.total_cells) + " cells");
    return 0;
}

int cmd_stationary(Ctx& ctx) {
    const double eps = require_epsilon(ctx.config);
    const NoiseKernel kernel = make_kernel(ctx.config, ctx.map.domain, eps);
    const Grid grid = require_grid(ctx);
    const std::uint64_t seed = ctx.config.seeds.front();
    const double t0 = now_seconds();
    const UlamOperator op = build_ulam(ctx.map, kernel, grid, ctx.config.samples_per_cell,
                                       seed, ctx.threads);
    const StationaryResult st =
        stationary_measure(op, ctx.config.tol, ctx.config.max_iters, ctx.threads);
    const double dt = now_seconds() - t0;
    write_measure_csv(st.measure, (ctx.out / "measure.csv").string(), {ctx.hash_line});

    ctx.manifest["results"] = {{"iterations", st.iterations},
                               {"residual", st.residual},
                               {"monotone_warning", st.monotone_warning}};
    ctx.manifest["timings"] = {{"total_seconds", dt}};
    if (st.monotone_warning) {
        log_line("stationary: warning, residual was not monotone after iteration 10");
    }
    log_line("stationary: converged in " + std::to_string(st.iterations) +
             " iterations, residual " + format_double(st.residual));
    return 0;
}

int cmd_lyapunov(Ctx& ctx) {
    const double eps = require_epsilon(ctx.config);
    const NoiseKernel kernel = make_kernel(ctx.config, ctx.map.domain, eps);
    const std::uint64_t seed = ctx.config.seeds.front();
    const Vec x0 = start_point(ctx, seed);
    const double t0 = now_seconds();
    const LyapunovEstimate est =
        lyapunov_spectrum(ctx.map, kernel, x0, ctx.config.lyapunov_steps,
                          ctx.config.renorm_period, seed);
    const double dt = now_seconds() - t0;

    FILE* f = open_csv(ctx, "lyapunov.csv", "index,exponent,standard_error");
    for (std::size_t i = 0; i < est.exponents.size(); ++i) {
        std::fprintf(f, "%lld,%s,%s\n", static_cast<long long>(i),
                     format_double(est.exponents[i]).c_str(),
                     format_double(est.standard_errors[i]).c_str());
    }
    std::fclose(f);

    ctx.manifest["results"] = {{"chi_plus", est.chi_plus},
                               {"log_det_average", est.log_det_average},
                               {"sum_identity_se", est.sum_identity_se},
                               {"n_steps", est.n_steps},
                               {"renorm_period", est.renorm_period}};
    ctx.manifest["timings"] = {{"total_seconds", dt}};
    log_line("lyapunov: chi_plus " + format_double(est.chi_plus));
    return 0;
}

int cmd_domination(Ctx& ctx) {
    const std::uint64_t seed = ctx.config.seeds.front();
    const double t0 = now_seconds();
    const DominationReport report =
        domination_check(ctx.map, ctx.config.domination_samples, seed, ctx.threads);
    const double dt = now_seconds() - t0;

    FILE* f = open_csv(ctx, "domination.csv",
                       "lambda0,samples,violations,cone_invariance_failures");
    std::fprintf(f, "%s,%lld,%lld,%lld\n", format_double(report.lambda0_estimate).c_str(),
                 report.samples, static_cast<long long>(report.violations.size()),
                 report.cone_invariance_failures);
    std::fclose(f);

    ctx.manifest["results"] = {
        {"lambda0_estimate", report.lambda0_estimate},
        {"samples", report.samples},
        {"violations", report.violations.size()},
        {"cone_invariance_failures", report.cone_invariance_failures}};
    ctx.manifest["timings"] = {{"total_seconds", dt}};
    log_line("domination: lambda0 " + format_double(report.lambda0_estimate));
    return 0;
}

int cmd_basin(Ctx& ctx) {
    const double eps = require_epsilon(ctx.config);
    const NoiseKernel kernel = make_kernel(ctx.config, ctx.map.domain, eps);
    const Grid grid = require_grid(ctx);
    const std::uint64_t seed = ctx.config.seeds.front();
    const double t0 = now_seconds();
    const UlamOperator op = build_ulam(ctx.map, kernel, grid, ctx.config.samples_per_cell,
                                       seed, ctx.threads);
    const StationaryResult st =
        stationary_measure(op, ctx.config.tol, ctx.config.max_iters, ctx.threads);
    const auto observables = default_observables(ctx.map.domain);
    const double fraction = basin_fraction(
        ctx.map, kernel, st.measure, observables, ctx.config.basin_starts,
        ctx.config.basin_iters, ctx.config.basin_tol, seed, ctx.threads);
    const double dt = now_seconds() - t0;

    FILE* f = open_csv(ctx, "basin.csv", "fraction,n_init,n_iter,tol");
    std::fprintf(f, "%s,%lld,%lld,%s\n", format_double(fraction).c_str(),
                 ctx.config.basin_starts, ctx.config.basin_iters,
                 format_double(ctx.config.basin_tol).c_str());
    std::fclose(f);

    json targets = json::object();
    for (const auto& obs : observables) {
        targets[obs.name] = measure_integral(st.measure, obs);
    }
    ctx.manifest["results"] = {{"fraction", fraction},
                               {"targets", targets},
                               {"stationary_iterations", st.iterations}};
    ctx.manifest["timings"] = {{"total_seconds", dt}};
    log_line("basin: fraction " + format_double(fraction));
    return 0;
}

int cmd_degenerate_sets(Ctx& ctx) {
    const Grid grid = require_grid(ctx);
    const double t0 = now_seconds();
    const DegenerateSetReport report =
        degenerate_sets(ctx.map, grid, ctx.config.degenerate_tol, ctx.threads);
    const double dt = now_seconds() - t0;

    std::string header = "set,cell_index";
    for (int d = 0; d < ctx.map.domain.dim; ++d) header += ",corner_" + std::to_string(d);
    FILE* f = open_csv(ctx, "degenerate_sets.csv", header);
    const auto dump = [&](const char* tag, const std::vector<std::int64_t>& cells) {
        for (std::int64_t c : cells) {
            const Vec corner = grid.cell_lower(c);
            std::fprintf(f, "%s,%lld", tag, static_cast<long long>(c));
            for (int d = 0; d < ctx.map.domain.dim; ++d) {
                std::fprintf(f, ",%s", format_double(corner[d]).c_str());
            }
            std::fputc('\n', f);
        }
    };
    dump("E1", report.E1_cells);
    dump("F1", report.F1_cells);
    std::fclose(f);

    ctx.manifest["results"] = {{"tolerance", report.tolerance},
                               {"E1_cells", report.E1_cells.size()},
                               {"F1_cells", report.F1_cells.size()}};
    ctx.manifest["timings"] = {{"total_seconds", dt}};
    log_line("degenerate-sets: " + std::to_string(report.E1_cells.size()) + " E1, " +
             std::to_string(report.F1_cells.size()) + " F1 cells");
    return 0;
}

// --- sweep -------------------------------------------------------------------

struct SweepRow {
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string status = "ok";
    std::string message;
    double w1_to_reference = std::numeric_limits<double>::quiet_NaN();
    double l1_to_previous = std::numeric_limits<double>::quiet_NaN();
    double chi_plus = std::numeric_limits<double>::quiet_NaN();
    double entropy_rhs = std::numeric_limits<double>::quiet_NaN();
    double residual = std::numeric_limits<double>::quiet_NaN();
    long long iterations = 0;
    bool monotone_warning = false;
    double seconds = 0.0;
    GridMeasure measure;
};

SweepReport cmd_sweep(Ctx& ctx) {
    const ExperimentConfig& config = ctx.config;
    if (config.epsilon_list.empty()) {
        throw config_error("sweep needs a nonempty [sweep] epsilon_list");
    }
    const Grid grid = require_grid(ctx);
    const double t_start = now_seconds();

    // Zero-noise reference declared by the catalog entry.
    std::optional<GridMeasure> reference;
    std::string reference_kind = "none";
    std::string reference_note;
    if (ctx.map.reference_kind == MapSystem::ReferenceKind::PointMass) {
        reference = point_mass_measure(grid, ctx.map.reference_point);
        reference_kind = "point_mass";
    } else if (ctx.map.reference_kind == MapSystem::ReferenceKind::NoiselessUlamProxy) {
        reference_kind = "noiseless_ulam_proxy";
        try {
            std::vector<int> fine_cells = config.grid_cells;
            for (int& c : fine_cells) c *= config.proxy_refine;
            const Grid fine = Grid::regular(ctx.map.domain, fine_cells);
            log_line("sweep: building noiseless reference on the refined grid");
            const UlamOperator proxy = build_ulam_noiseless(
                ctx.map, fine, config.samples_per_cell, config.seeds.front(),
                ctx.threads);
            const StationaryResult st =
                stationary_measure(proxy, config.tol, config.max_iters, ctx.threads);
            reference = coarsen(st.measure, grid);
        } catch (const std::exception& e) {
            reference_note = std::string(error_class(e)) + ": " + e.what();
            log_line("sweep: reference construction failed (" + reference_note +
                     "); w1_to_reference will be nan");
        }
    }

    const std::size_t n_seeds = config.seeds.size();
    std::vector<SweepRow> rows(config.epsilon_list.size() * n_seeds);
    for (std::size_t e = 0; e < config.epsilon_list.size(); ++e) {
        for (std::size_t s = 0; s < n_seeds; ++s) {
            rows[e * n_seeds + s].epsilon = config.epsilon_list[e];
            rows[e * n_seeds + s].seed = config.seeds[s];
        }
    }

    // One worker per row when several rows run concurrently; a single row
    // gets the full thread budget inside its own solves.
    const int inner_threads = rows.size() > 1 ? 1 : ctx.threads;
    const unsigned pool = static_cast<unsigned>(
        std::min<std::size_t>(static_cast<std::size_t>(std::max(1, ctx.threads)),
                              rows.size()));
    parallel_for(rows.size(), pool, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t r = lo; r < hi; ++r) {
            SweepRow& row = rows[r];
            const double t0 = now_seconds();
            try {
                const NoiseKernel kernel =
                    make_kernel(config, ctx.map.domain, row.epsilon);
                const UlamOperator op =
                    build_ulam(ctx.map, kernel, grid, config.samples_per_cell, row.seed,
                               inner_threads);
                const StationaryResult st = stationary_measure(
                    op, config.tol, config.max_iters, inner_threads);
                row.measure = st.measure;
                row.residual = st.residual;
                row.iterations = st.iterations;
                row.monotone_warning = st.monotone_warning;
                const Vec x0 = start_point(ctx, row.seed);
                const LyapunovEstimate lyap =
                    lyapunov_spectrum(ctx.map, kernel, x0, config.lyapunov_steps,
                                      config.renorm_period, row.seed);
                row.chi_plus = lyap.chi_plus;
                row.entropy_rhs = entropy_formula_rhs(ctx.map, st.measure);
                if (reference) {
                    row.w1_to_reference = measure_distance(
                        st.measure, *reference, reference_metric(ctx.map.domain));
                }
                row.ok = true;
            } catch (const std::exception& e) {
                row.status = error_class(e);
                row.message = e.what();
            }
            row.seconds = now_seconds() - t0;
            std::ostringstream os;
            os << "sweep: eps " << format_double(row.epsilon) << " seed " << row.seed
               << " -> " << row.status;
            if (row.ok) os << " (" << row.iterations << " iterations)";
            log_line(os.str());
        }
    });

    // Distance to the previous (larger) noise level, same seed.
    for (std::size_t e = 1; e < config.epsilon_list.size(); ++e) {
        for (std::size_t s = 0; s < n_seeds; ++s) {
            SweepRow& row = rows[e * n_seeds + s];
            const SweepRow& prev = rows[(e - 1) * n_seeds + s];
            if (row.ok && prev.ok) {
                row.l1_to_previous =
                    measure_distance(row.measure, prev.measure, MeasureMetric::L1);
            }
        }
    }

    FILE* f = open_csv(ctx, "sweep.csv",
                       "epsilon,seed,w1_to_reference,l1_to_previous_epsilon,chi_plus,"
                       "entropy_rhs,residual,status");
    for (const SweepRow& row : rows) {
        std::fprintf(f, "%s,%llu,%s,%s,%s,%s,%s,%s\n",
                     format_double(row.epsilon).c_str(),
                     static_cast<unsigned long long>(row.seed),
                     format_double(row.w1_to_reference).c_str(),
                     format_double(row.l1_to_previous).c_str(),
                     format_double(row.chi_plus).c_str(),
                     format_double(row.entropy_rhs).c_str(),
                     format_double(row.residual).c_str(), row.status.c_str());
    }
    std::fclose(f);

    for (const SweepRow& row : rows) {
        if (!row.ok) continue;
        std::string name = "measure_eps_" + epsilon_tag(row.epsilon);
        if (n_seeds > 1) name += "_seed_" + std::to_string(row.seed);
        name += ".csv";
        write_measure_csv(row.measure, (ctx.out / name).string(), {ctx.hash_line});
    }

    json row_meta = json::array();
    json row_seconds = json::array();
    SweepReport report;
    report.reference_kind = reference_kind;
    report.reference_error = reference_note;
    report.all_ok = true;
    for (const SweepRow& row : rows) {
        report.all_ok = report.all_ok && row.ok;
        json r = {{"epsilon", row.epsilon},
                  {"seed", row.seed},
                  {"status", row.status},
                  {"iterations", row.iterations},
                  {"monotone_warning", row.monotone_warning}};
        if (!row.message.empty()) r["message"] = row.message;
        row_meta.push_back(std::move(r));
        row_seconds.push_back(row.seconds);

        SweepRowReport out;
        out.epsilon = row.epsilon;
        out.seed = row.seed;
        out.ok = row.ok;
        out.status = row.status;
        out.message = row.message;
        out.w1_to_reference = row.w1_to_reference;
        out.l1_to_previous_epsilon = row.l1_to_previous;
        out.chi_plus = row.chi_plus;
        out.entropy_rhs = row.entropy_rhs;
        out.residual = row.residual;
        out.iterations = row.iterations;
        out.monotone_warning = row.monotone_warning;
        out.wall_seconds = row.seconds;
        report.rows.push_back(std::move(out));
    }
    ctx.manifest["results"] = {{"reference", reference_kind},
                               {"rows", std::move(row_meta)},
                               {"rows_failed",
                                std::count_if(rows.begin(), rows.end(),
                                              [](const SweepRow& r) { return !r.ok; })}};
    if (!reference_note.empty()) ctx.manifest["results"]["reference_error"] = reference_note;
    ctx.manifest["timings"] = {{"total_seconds", now_seconds() - t_start},
                               {"row_seconds", std::move(row_seconds)}};
    return report;
}

Ctx make_ctx(const std::string& name, const ExperimentConfig& config,
             const RunOptions& options) {
    Ctx ctx{config,
            std::filesystem::path(options.out_dir.empty() ? config.output_dir
                                                          : options.out_dir),
            std::max(1, options.threads),
            build_catalog_map(config.map_name, config.map_params),
            {},
            {},
            json::object()};
    ctx.hash_hex = hex64(config_hash(config));
    ctx.hash_line = "config_hash=" + ctx.hash_hex;
    std::filesystem::create_directories(ctx.out);

    ctx.manifest["command"] = name;
    ctx.manifest["map"] = parameter_record(ctx.map);
    ctx.manifest["config_hash"] = ctx.hash_hex;
    ctx.manifest["config_canonical"] = canonical_config(config);
    ctx.manifest["seeds"] = config.seeds;
    ctx.manifest["versions"] = {
        {"zeronoise", kVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"csv_schema", 1}};
    return ctx;
}

}  // namespace

SweepReport run_zero_noise_sweep(const ExperimentConfig& config,
                                 const RunOptions& options) {
    Ctx ctx = make_ctx("sweep", config, options);
    const SweepReport report = cmd_sweep(ctx);
    ctx.manifest["exit_code"] = report.all_ok ? 0 : 1;
    write_manifest(ctx);
    return report;
}

int run_subcommand(const std::string& name, const ExperimentConfig& config,
                   const RunOptions& options) {
    Ctx ctx = make_ctx(name, config, options);

    int code = 0;
    if (name == "orbit") {
        code = cmd_orbit(ctx);
    } else if (name == "ulam") {
        code = cmd_ulam(ctx);
    } else if (name == "stationary") {
        code = cmd_stationary(ctx);
    } else if (name == "lyapunov") {
        code = cmd_lyapunov(ctx);
    } else if (name == "sweep") {
        code = cmd_sweep(ctx).all_ok ? 0 : 1;
    } else if (name == "domination") {
        code = cmd_domination(ctx);
    } else if (name == "basin") {
        code = cmd_basin(ctx);
    } else if (name == "degenerate-sets") {
        code = cmd_degenerate_sets(ctx);
    } else {
        throw config_error("unknown subcommand '" + name +
                           "'; valid: orbit, ulam, stationary, lyapunov, sweep, "
                           "domination, basin, degenerate-sets");
    }
    ctx.manifest["exit_code"] = code;
    write_manifest(ctx);
    return code;
}

}  // namespace zn
