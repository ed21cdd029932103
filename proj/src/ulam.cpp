#include "zeronoise/ulam.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include "zeronoise/errors.hpp"
#include "zeronoise/numeric.hpp"
#include "zeronoise/parallel.hpp"
#include "zeronoise/rng.hpp"

namespace zn {

namespace {

constexpr std::uint64_t kJitterStream = 0x6a697474;   // shared 1D sample offsets
constexpr std::uint64_t kDualityStream = 0x6475616c;  // duality_check rhs samples
constexpr int kMaxNoiseTries = 1000;
constexpr int kMaxCellTries = 10000;

using Entry = std::pair<std::int32_t, double>;
using ColumnFn = std::function<void(std::int64_t, std::vector<Entry>&)>;
using ColumnFactory = std::function<ColumnFn()>;

void normalize_entries(std::int64_t column, std::vector<Entry>& entries) {
    KahanSum total;
    for (const auto& e : entries) total.add(e.second);
    const double sum = total.value();
    if (!(sum > 0.0)) {
        std::ostringstream os;
        os << "ulam column " << column << " collected no mass";
        throw discretization_error(os.str());
    }
    for (auto& e : entries) e.second /= sum;
}

// --- 1D circle columns -----------------------------------------------------
//
// Cells are [i/n, (i+1)/n). Work in grid coordinates (position times n): a
// uniform unit of mass on the wrapped interval [fa, fb] splits into exact
// partial masses on the two endpoint cells and a constant density on the
// interior cells, recorded in a difference array so each deposit costs O(1).

struct SmearScratch {
    std::int64_t n = 0;
    std::vector<double> dense;  // direct endpoint deposits
    std::vector<double> diff;   // interior-range density increments

    explicit SmearScratch(std::int64_t cells)
        : n(cells),
          dense(static_cast<std::size_t>(cells), 0.0),
          diff(static_cast<std::size_t>(cells) + 1, 0.0) {}

    std::int64_t wrap(std::int64_t i) const {
        i %= n;
        return i < 0 ? i + n : i;
    }

    void deposit(double fa, double fb, double q) {
        const auto i0 = static_cast<std::int64_t>(std::floor(fa));
        const auto i1 = static_cast<std::int64_t>(std::floor(fb));
        if (i0 == i1 || !(fb > fa)) {
            dense[static_cast<std::size_t>(wrap(i0))] += q;
            return;
        }
        const double density = q / (fb - fa);
        dense[static_cast<std::size_t>(wrap(i0))] +=
            density * (static_cast<double>(i0 + 1) - fa);
        dense[static_cast<std::size_t>(wrap(i1))] +=
            density * (fb - static_cast<double>(i1));
        if (i1 - i0 < 2) return;
        const std::int64_t lo = wrap(i0 + 1);
        const std::int64_t hi = wrap(i1 - 1);
        if (lo <= hi) {
            diff[static_cast<std::size_t>(lo)] += density;
            diff[static_cast<std::size_t>(hi) + 1] -= density;
        } else {  // interior range crosses the wrap point
            diff[static_cast<std::size_t>(lo)] += density;
            diff[0] += density;
            diff[static_cast<std::size_t>(hi) + 1] -= density;
        }
    }

    // Collect nonzero cells, reset the scratch, and renormalize the column.
    void collect(std::int64_t column, std::vector<Entry>& out) {
        double run = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            run += diff[static_cast<std::size_t>(i)];
            const double w = dense[static_cast<std::size_t>(i)] + run;
            if (w > 0.0) out.emplace_back(static_cast<std::int32_t>(i), w);
            dense[static_cast<std::size_t>(i)] = 0.0;
            diff[static_cast<std::size_t>(i)] = 0.0;
        }
        diff[static_cast<std::size_t>(n)] = 0.0;
        normalize_entries(column, out);
    }
};

// Shared in-cell offsets: using the same stratified jitter for every column
// keeps the row sums of a measure-preserving column pattern exact (the
// identity map plus noise yields a doubly stochastic matrix bit-for-bit).
std::vector<double> shared_offsets(int samples_per_cell, std::uint64_t seed) {
    Rng rng(seed, kJitterStream);
    std::vector<double> offsets(static_cast<std::size_t>(samples_per_cell));
    for (int s = 0; s < samples_per_cell; ++s) {
        offsets[static_cast<std::size_t>(s)] =
            (static_cast<double>(s) + rng.uniform01()) / samples_per_cell;
    }
    return offsets;
}

ColumnFactory circle_noise_columns(const MapSystem& map, const NoiseKernel& kernel,
                                   const Grid& grid, int samples_per_cell,
                                   std::uint64_t seed) {
    const std::int64_t n = grid.total_cells;
    const double cw = grid.cell_width(0);
    const double eps = kernel.epsilon;
    auto offsets = shared_offsets(samples_per_cell, seed);
    const double q = 1.0 / samples_per_cell;
    return [&map, n, cw, eps, offsets = std::move(offsets), q]() -> ColumnFn {
        auto scratch = std::make_shared<SmearScratch>(n);
        return [&map, n, cw, eps, offsets, q, scratch](std::int64_t j,
                                                       std::vector<Entry>& out) {
            Vec p(1);
            for (double u : offsets) {
                p[0] = (static_cast<double>(j) + u) * cw;
                const double y = map.eval(p)[0];
                const double fa = (y - eps) * static_cast<double>(n);
                const double fb = (y + eps) * static_cast<double>(n);
                scratch->deposit(fa, fb, q);
            }
            scratch->collect(j, out);
        };
    };
}

ColumnFactory circle_exact_columns(const MapSystem& map, const Grid& grid,
                                   int subdivisions) {
    const std::int64_t n = grid.total_cells;
    const double cw = grid.cell_width(0);
    const double q = 1.0 / subdivisions;
    return [&map, n, cw, q, subdivisions]() -> ColumnFn {
        auto scratch = std::make_shared<SmearScratch>(n);
        return [&map, n, cw, q, subdivisions, scratch](std::int64_t j,
                                                       std::vector<Entry>& out) {
            Vec p(1);
            for (int s = 0; s < subdivisions; ++s) {
                const double u0 =
                    (static_cast<double>(j) + static_cast<double>(s) / subdivisions) * cw;
                const double u1 =
                    (static_cast<double>(j) + static_cast<double>(s + 1) / subdivisions) *
                    cw;
                p[0] = wrap01(u0);
                const double y0 = map.eval(p)[0];
                p[0] = wrap01(u1);
                const double y1 = map.eval(p)[0];
                // Catalog circle maps lift to increasing functions, so the
                // image of the subinterval is the arc of length (y1 - y0)
                // mod 1 starting at y0 (shorter than one full turn because
                // the subinterval is much smaller than 1/max|g'|).
                double len = y1 - y0;
                len -= std::floor(len);
                const double fa = y0 * static_cast<double>(n);
                scratch->deposit(fa, fa + len * static_cast<double>(n), q);
            }
            scratch->collect(j, out);
        };
    };
}

// --- product-grid columns ---------------------------------------------------

enum class CellClass { Inside, Straddle, Outside };

CellClass classify_cell(const Grid& grid, std::int64_t index) {
    if (grid.domain.disc_pairs.empty()) return CellClass::Inside;
    const Vec lower = grid.cell_lower(index);
    CellClass result = CellClass::Inside;
    for (const auto& [a, b] : grid.domain.disc_pairs) {
        double dmin2 = 0.0;
        double dmax2 = 0.0;
        for (int d : {a, b}) {
            const double lo = lower[d];
            const double hi = lo + grid.cell_width(d);
            const double near = std::max({lo, -hi, 0.0});
            dmin2 += near * near;
            dmax2 += std::max(lo * lo, hi * hi);
        }
        if (dmin2 > 1.0) return CellClass::Outside;
        if (dmax2 > 1.0) result = CellClass::Straddle;
    }
    return result;
}

ColumnFactory product_mc_columns(const MapSystem& map, const NoiseKernel* kernel,
                                 const Grid& grid, int samples_per_cell,
                                 std::uint64_t seed) {
    return [&map, kernel, &grid, samples_per_cell, seed]() -> ColumnFn {
        return [&map, kernel, &grid, samples_per_cell, seed](std::int64_t j,
                                                             std::vector<Entry>& out) {
            const CellClass cls = classify_cell(grid, j);
            if (cls == CellClass::Outside) {
                // Unreachable overhang of the bounding box: keep the column
                // stochastic with a self loop; no mass is ever sent here.
                out.emplace_back(static_cast<std::int32_t>(j), 1.0);
                return;
            }
            const int dim = grid.domain.dim;
            const Vec lower = grid.cell_lower(j);
            Rng rng(seed, static_cast<std::uint64_t>(j));
            std::vector<std::int64_t> hits;
            hits.reserve(static_cast<std::size_t>(samples_per_cell));
            Vec x(dim);
            for (int s = 0; s < samples_per_cell; ++s) {
                int tries = 0;
                for (;;) {
                    x[0] = lower[0] +
                           (static_cast<double>(s) + rng.uniform01()) /
                               samples_per_cell * grid.cell_width(0);
                    for (int d = 1; d < dim; ++d) {
                        x[d] = lower[d] + rng.uniform01() * grid.cell_width(d);
                    }
                    if (cls == CellClass::Inside || grid.domain.contains(x)) break;
                    if (++tries >= kMaxCellTries) {
                        std::ostringstream os;
                        os << "ulam column " << j << ": no sample of cell " << j
                           << " landed inside the domain after " << kMaxCellTries
                           << " tries";
                        throw discretization_error(os.str());
                    }
                }
                const Vec y = map.eval(x);
                Vec z;
                if (kernel != nullptr) {
                    int vtries = 0;
                    for (;;) {
                        const Vec v = sample_noise(*kernel, dim, rng);
                        z = grid.domain.reduce(y + v);
                        if (grid.domain.contains(z)) break;
                        if (++vtries >= kMaxNoiseTries) {
                            std::ostringstream os;
                            os << "ulam column " << j << ": noise resampling exceeded "
                               << kMaxNoiseTries << " tries";
                            throw discretization_error(os.str());
                        }
                    }
                } else {
                    z = grid.domain.reduce(y);
                }
                hits.push_back(grid.cell_index(z));
            }
            std::sort(hits.begin(), hits.end());
            for (std::size_t k = 0; k < hits.size();) {
                std::size_t r = k;
                while (r < hits.size() && hits[r] == hits[k]) ++r;
                out.emplace_back(static_cast<std::int32_t>(hits[k]),
                                 static_cast<double>(r - k) / samples_per_cell);
                k = r;
            }
            normalize_entries(j, out);
        };
    };
}

// --- assembly ----------------------------------------------------------------

// Two passes over the columns (count, then fill); both replay identical rng
// streams, so the result is independent of the thread count. The transient
// column-major arrays are converted to row-major with a counting sort, which
// leaves column indices ascending within each row.
CsrMatrix assemble_columns(std::int64_t n, int threads, const ColumnFactory& make_column) {
    std::vector<std::int64_t> col_ptr(static_cast<std::size_t>(n) + 1, 0);
    parallel_for(static_cast<std::size_t>(n), static_cast<unsigned>(threads),
                 [&](std::size_t lo, std::size_t hi) {
                     ColumnFn column = make_column();
                     std::vector<Entry> buf;
                     for (std::size_t j = lo; j < hi; ++j) {
                         buf.clear();
                         column(static_cast<std::int64_t>(j), buf);
                         col_ptr[j + 1] = static_cast<std::int64_t>(buf.size());
                     }
                 });
    for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
        col_ptr[j + 1] += col_ptr[j];
    }
    const std::int64_t nnz = col_ptr[static_cast<std::size_t>(n)];
    std::vector<std::int32_t> row_idx(static_cast<std::size_t>(nnz));
    std::vector<double> col_val(static_cast<std::size_t>(nnz));
    parallel_for(static_cast<std::size_t>(n), static_cast<unsigned>(threads),
                 [&](std::size_t lo, std::size_t hi) {
                     ColumnFn column = make_column();
                     std::vector<Entry> buf;
                     for (std::size_t j = lo; j < hi; ++j) {
                         buf.clear();
                         column(static_cast<std::int64_t>(j), buf);
                         auto pos = static_cast<std::size_t>(col_ptr[j]);
                         for (const auto& [row, w] : buf) {
                             row_idx[pos] = row;
                             col_val[pos] = w;
                             ++pos;
                         }
                     }
                 });

    CsrMatrix m;
    m.n = n;
    m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    for (std::int64_t k = 0; k < nnz; ++k) {
        ++m.row_ptr[static_cast<std::size_t>(row_idx[static_cast<std::size_t>(k)]) + 1];
    }
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
        m.row_ptr[i + 1] += m.row_ptr[i];
    }
    m.col_idx.resize(static_cast<std::size_t>(nnz));
    m.values.resize(static_cast<std::size_t>(nnz));
    std::vector<std::int64_t> cursor(m.row_ptr.begin(), m.row_ptr.end() - 1);
    for (std::int64_t j = 0; j < n; ++j) {
        for (std::int64_t k = col_ptr[static_cast<std::size_t>(j)];
             k < col_ptr[static_cast<std::size_t>(j) + 1]; ++k) {
            const auto i = static_cast<std::size_t>(row_idx[static_cast<std::size_t>(k)]);
            const auto pos = static_cast<std::size_t>(cursor[i]++);
            m.col_idx[pos] = static_cast<std::int32_t>(j);
            m.values[pos] = col_val[static_cast<std::size_t>(k)];
        }
    }
    return m;
}

void check_build_inputs(const MapSystem& map, const Grid& grid, int samples_per_cell) {
    if (!(grid.domain == map.domain)) {
        throw domain_error("ulam grid domain does not match the map domain");
    }
    if (samples_per_cell < 1) {
        throw discretization_error("samples_per_cell must be at least 1");
    }
    if (grid.total_cells > std::numeric_limits<std::int32_t>::max()) {
        throw discretization_error("grid exceeds the 2^31 cell limit of the sparse format");
    }
}

void check_noise_level(const MapSystem& map, const NoiseKernel& kernel) {
    kernel.validate(map.domain);
    if (kernel.epsilon > map.invariance_margin) {
        std::ostringstream os;
        os << map.name << ": noise level " << format_double(kernel.epsilon)
           << " exceeds the invariance margin " << format_double(map.invariance_margin);
        throw construction_error(os.str());
    }
}

double circle_average(CirclePhi phi, double a, double w) {
    constexpr double tau = 2.0 * std::numbers::pi;
    const double b = a + w;
    if (phi == CirclePhi::Sin) return (std::cos(tau * a) - std::cos(tau * b)) / (tau * w);
    return (std::sin(tau * b) - std::sin(tau * a)) / (tau * w);
}

double circle_point(CirclePhi phi, double x) {
    constexpr double tau = 2.0 * std::numbers::pi;
    return phi == CirclePhi::Sin ? std::sin(tau * x) : std::cos(tau * x);
}

// --- binary io ---------------------------------------------------------------

static_assert(std::endian::native == std::endian::little,
              "operator files are little-endian");

constexpr std::uint32_t kUlamMagic = 0x4c554e5a;  // "ZNUL"
constexpr std::uint32_t kUlamVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void write_array(std::ofstream& out, const std::vector<T>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw config_error("truncated operator file");
    return v;
}

template <typename T>
void read_array(std::ifstream& in, std::vector<T>& v, std::size_t count) {
    v.resize(count);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(count * sizeof(T)));
    if (!in) throw config_error("truncated operator file");
}

DomainDescriptor domain_from_kind(std::uint32_t kind) {
    switch (static_cast<DomainKind>(kind)) {
        case DomainKind::Circle: return DomainDescriptor::circle();
        case DomainKind::Torus2: return DomainDescriptor::torus2();
        case DomainKind::SolidTorus: return DomainDescriptor::solid_torus();
        case DomainKind::SkewSolidTorus: return DomainDescriptor::skew_solid_torus();
        default: break;
    }
    throw config_error("operator file names an unknown domain kind");
}

}  // namespace

UlamOperator build_ulam(const MapSystem& map, const NoiseKernel& kernel, const Grid& grid,
                        int samples_per_cell, std::uint64_t seed, int threads) {
    check_build_inputs(map, grid, samples_per_cell);
    check_noise_level(map, kernel);
    UlamOperator op;
    op.grid = grid;
    op.kernel = kernel;
    op.seed = seed;
    op.samples_per_cell = samples_per_cell;
    if (grid.domain.dim == 1) {
        if (kernel.epsilon >= 0.5) {
            throw kernel_error(
                "noise level must stay below 0.5 on the circle (support would "
                "overlap itself)");
        }
        op.matrix = assemble_columns(
            grid.total_cells, threads,
            circle_noise_columns(map, kernel, grid, samples_per_cell, seed));
    } else {
        op.matrix = assemble_columns(
            grid.total_cells, threads,
            product_mc_columns(map, &kernel, grid, samples_per_cell, seed));
    }
    return op;
}

UlamOperator build_ulam_noiseless(const MapSystem& map, const Grid& grid,
                                  int samples_per_cell, std::uint64_t seed, int threads) {
    check_build_inputs(map, grid, samples_per_cell);
    UlamOperator op;
    op.grid = grid;
    op.seed = seed;
    op.samples_per_cell = samples_per_cell;
    if (grid.domain.dim == 1) {
        op.matrix = assemble_columns(grid.total_cells, threads,
                                     circle_exact_columns(map, grid, samples_per_cell));
    } else {
        op.matrix = assemble_columns(
            grid.total_cells, threads,
            product_mc_columns(map, nullptr, grid, samples_per_cell, seed));
    }
    return op;
}

void apply_ulam(const CsrMatrix& m, const std::vector<double>& in,
                std::vector<double>& out, int threads) {
    if (static_cast<std::int64_t>(in.size()) != m.n) {
        throw domain_error("vector length does not match the operator size");
    }
    out.resize(in.size());
    parallel_for(static_cast<std::size_t>(m.n), static_cast<unsigned>(threads),
                 [&](std::size_t lo, std::size_t hi) {
                     for (std::size_t i = lo; i < hi; ++i) {
                         double acc = 0.0;
                         const auto kend = static_cast<std::size_t>(m.row_ptr[i + 1]);
                         for (auto k = static_cast<std::size_t>(m.row_ptr[i]); k < kend;
                              ++k) {
                             acc += m.values[k] *
                                    in[static_cast<std::size_t>(m.col_idx[k])];
                         }
                         out[i] = acc;
                     }
                 });
}

std::vector<double> ulam_column_sums(const CsrMatrix& m) {
    std::vector<double> sums(static_cast<std::size_t>(m.n), 0.0);
    for (std::size_t k = 0; k < m.values.size(); ++k) {
        sums[static_cast<std::size_t>(m.col_idx[k])] += m.values[k];
    }
    return sums;
}

StationaryResult stationary_measure(const UlamOperator& op, double tol,
                                    long long max_iters, int threads) {
    if (!(tol > 0.0)) throw config_error("stationary tolerance must be positive");
    if (max_iters < 1) throw config_error("max_iters must be at least 1");
    GridMeasure start = uniform_measure(op.grid);
    std::vector<double> v = std::move(start.weights);
    std::vector<double> pv(v.size(), 0.0);

    StationaryResult result;
    result.residual_history.reserve(256);
    for (long long iter = 1; iter <= max_iters; ++iter) {
        apply_ulam(op.matrix, v, pv, threads);
        const double total = kahan_total(pv);
        if (!(total > 0.0) || !std::isfinite(total)) {
            throw numerical_error("power iteration lost all mass");
        }
        for (double& w : pv) w /= total;
        KahanSum diff;
        for (std::size_t i = 0; i < v.size(); ++i) diff.add(std::fabs(pv[i] - v[i]));
        const double residual = diff.value();
        if (iter > 10 && !result.residual_history.empty() &&
            residual > result.residual_history.back() * (1.0 + 1e-12)) {
            result.monotone_warning = true;
        }
        result.residual_history.push_back(residual);
        v.swap(pv);
        if (residual < tol) {
            result.iterations = iter;
            result.residual = residual;
            result.measure = GridMeasure{op.grid, std::move(v)};
            result.measure.normalize();
            return result;
        }
    }
    std::ostringstream os;
    os << "power iteration did not reach " << format_double(tol) << " within "
       << max_iters << " iterations (last residual "
       << format_double(result.residual_history.back()) << ")";
    throw convergence_error(os.str(), std::move(result.residual_history));
}

void save_ulam(const UlamOperator& op, const std::string& path) {
    if (op.grid.domain.kind == DomainKind::Box) {
        throw config_error("box domains have no serialization tag");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open " + path + " for writing");
    write_pod(out, kUlamMagic);
    write_pod(out, kUlamVersion);
    write_pod(out, static_cast<std::uint32_t>(op.grid.domain.kind));
    write_pod(out, static_cast<std::uint32_t>(op.grid.domain.dim));
    for (int c : op.grid.cells_per_dim) write_pod(out, static_cast<std::uint32_t>(c));
    write_pod(out, static_cast<std::uint8_t>(op.kernel.has_value() ? 1 : 0));
    if (op.kernel.has_value()) {
        const NoiseKernel& k = *op.kernel;
        write_pod(out, k.epsilon);
        write_pod(out, static_cast<std::uint32_t>(k.shape));
        write_pod(out, static_cast<std::uint32_t>(k.boundary_policy));
        write_pod(out, static_cast<std::uint32_t>(k.coordinate_mask.size()));
        write_array(out, k.coordinate_mask);
    }
    write_pod(out, op.seed);
    write_pod(out, static_cast<std::uint32_t>(op.samples_per_cell));
    write_pod(out, static_cast<std::uint64_t>(op.matrix.n));
    write_pod(out, static_cast<std::uint64_t>(op.matrix.nnz()));
    write_array(out, op.matrix.row_ptr);
    write_array(out, op.matrix.col_idx);
    write_array(out, op.matrix.values);
    if (!out) throw config_error("failed to write " + path);
}

UlamOperator load_ulam(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open " + path);
    if (read_pod<std::uint32_t>(in) != kUlamMagic) {
        throw config_error(path + " is not an ulam operator file");
    }
    if (read_pod<std::uint32_t>(in) != kUlamVersion) {
        throw config_error(path + " uses an unsupported operator format version");
    }
    const auto kind = read_pod<std::uint32_t>(in);
    const auto dim = read_pod<std::uint32_t>(in);
    DomainDescriptor domain = domain_from_kind(kind);
    if (static_cast<int>(dim) != domain.dim) {
        throw config_error(path + " carries a dimension its domain does not have");
    }
    std::vector<int> cells(dim);
    for (auto& c : cells) c = static_cast<int>(read_pod<std::uint32_t>(in));

    UlamOperator op;
    op.grid = Grid::regular(domain, cells);
    if (read_pod<std::uint8_t>(in) != 0) {
        NoiseKernel k;
        k.epsilon = read_pod<double>(in);
        k.shape = static_cast<KernelShape>(read_pod<std::uint32_t>(in));
        k.boundary_policy = static_cast<BoundaryPolicy>(read_pod<std::uint32_t>(in));
        const auto mask_len = read_pod<std::uint32_t>(in);
        read_array(in, k.coordinate_mask, mask_len);
        k.validate(domain);
        op.kernel = std::move(k);
    }
    op.seed = read_pod<std::uint64_t>(in);
    op.samples_per_cell = static_cast<int>(read_pod<std::uint32_t>(in));
    const auto n = read_pod<std::uint64_t>(in);
    const auto nnz = read_pod<std::uint64_t>(in);
    if (static_cast<std::int64_t>(n) != op.grid.total_cells) {
        throw config_error(path + " matrix size disagrees with its grid");
    }
    op.matrix.n = static_cast<std::int64_t>(n);
    read_array(in, op.matrix.row_ptr, static_cast<std::size_t>(n) + 1);
    read_array(in, op.matrix.col_idx, static_cast<std::size_t>(nnz));
    read_array(in, op.matrix.values, static_cast<std::size_t>(nnz));
    if (op.matrix.row_ptr.front() != 0 ||
        op.matrix.row_ptr.back() != static_cast<std::int64_t>(nnz)) {
        throw config_error(path + " has a corrupt row index");
    }
    const auto sums = ulam_column_sums(op.matrix);
    for (std::size_t j = 0; j < sums.size(); ++j) {
        if (std::fabs(sums[j] - 1.0) > 1e-10) {
            std::ostringstream os;
            os << path << ": column " << j << " sums to " << format_double(sums[j]);
            throw config_error(os.str());
        }
    }
    return op;
}

DualityResult duality_check(const MapSystem& map, const NoiseKernel& kernel,
                            const GridMeasure& mu, CirclePhi phi, long long n_samples,
                            std::uint64_t seed) {
    if (map.domain.dim != 1 || !map.domain.periodic[0]) {
        throw domain_error("duality_check is defined for circle maps");
    }
    if (!(mu.grid.domain == map.domain)) {
        throw domain_error("measure domain does not match the map domain");
    }
    if (n_samples < 2) throw config_error("duality_check needs at least 2 samples");
    check_noise_level(map, kernel);
    mu.validate();

    const double cw = mu.grid.cell_width(0);
    KahanSum lhs;
    std::vector<double> cdf(mu.weights.size());
    KahanSum running;
    for (std::size_t i = 0; i < mu.weights.size(); ++i) {
        lhs.add(mu.weights[i] * circle_average(phi, static_cast<double>(i) * cw, cw));
        running.add(mu.weights[i]);
        cdf[i] = running.value();
    }
    const double total = cdf.back();

    Rng rng(seed, kDualityStream);
    double mean = 0.0;
    double m2 = 0.0;
    Vec p(1);
    for (long long s = 1; s <= n_samples; ++s) {
        const double target = rng.uniform01() * total;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        const auto cell = static_cast<std::size_t>(
            std::min<std::ptrdiff_t>(std::distance(cdf.begin(), it),
                                     static_cast<std::ptrdiff_t>(cdf.size()) - 1));
        p[0] = (static_cast<double>(cell) + rng.uniform01()) * cw;
        const double y = map.eval(p)[0];
        const double v = sample_noise(kernel, 1, rng)[0];
        const double value = circle_point(phi, wrap01(y + v));
        const double delta = value - mean;
        mean += delta / static_cast<double>(s);
        m2 += delta * (value - mean);
    }
    DualityResult result;
    result.lhs = lhs.value();
    result.rhs = mean;
    result.se = std::sqrt(m2 / (static_cast<double>(n_samples - 1) *
                                static_cast<double>(n_samples)));
    return result;
}

}  // namespace zn
