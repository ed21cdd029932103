#include "zeronoise/grid.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <mutex>
#include <string>

#include "zeronoise/errors.hpp"
#include "zeronoise/numeric.hpp"

namespace zn {

Grid Grid::regular(const DomainDescriptor& domain, std::vector<int> cells_per_dim) {
    if (static_cast<int>(cells_per_dim.size()) != domain.dim)
        throw construction_error("grid: cells_per_dim length does not match domain dimension");
    Grid g;
    g.domain = domain;
    g.cells_per_dim = std::move(cells_per_dim);
    g.total_cells = 1;
    for (int n : g.cells_per_dim) {
        if (n < 1) throw construction_error("grid: cells_per_dim entries must be >= 1");
        if (g.total_cells > (1LL << 40) / n)
            throw construction_error("grid: total cell count too large");
        g.total_cells *= n;
    }
    return g;
}

double Grid::cell_width(int d) const {
    const auto& b = domain.bounds[static_cast<std::size_t>(d)];
    return (b.second - b.first) / cells_per_dim[static_cast<std::size_t>(d)];
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (int d = 0; d < domain.dim; ++d) v *= cell_width(d);
    return v;
}

std::int64_t Grid::cell_index(const Vec& x) const {
    std::int64_t idx = 0;
    for (int d = 0; d < domain.dim; ++d) {
        const auto& b = domain.bounds[static_cast<std::size_t>(d)];
        const int n = cells_per_dim[static_cast<std::size_t>(d)];
        double t = (x[d] - b.first) / (b.second - b.first) * n;
        auto i = static_cast<std::int64_t>(std::floor(t));
        if (i < 0) i = 0;
        if (i >= n) i = n - 1;
        idx = idx * n + i;
    }
    return idx;
}

std::vector<int> Grid::cell_coords(std::int64_t index) const {
    std::vector<int> c(static_cast<std::size_t>(domain.dim));
    for (int d = domain.dim - 1; d >= 0; --d) {
        const int n = cells_per_dim[static_cast<std::size_t>(d)];
        c[static_cast<std::size_t>(d)] = static_cast<int>(index % n);
        index /= n;
    }
    return c;
}

Vec Grid::cell_center(std::int64_t index) const {
    const std::vector<int> c = cell_coords(index);
    Vec x(domain.dim);
    for (int d = 0; d < domain.dim; ++d) {
        const auto& b = domain.bounds[static_cast<std::size_t>(d)];
        x[d] = b.first + (c[static_cast<std::size_t>(d)] + 0.5) * cell_width(d);
    }
    return x;
}

Vec Grid::cell_lower(std::int64_t index) const {
    const std::vector<int> c = cell_coords(index);
    Vec x(domain.dim);
    for (int d = 0; d < domain.dim; ++d) {
        const auto& b = domain.bounds[static_cast<std::size_t>(d)];
        x[d] = b.first + c[static_cast<std::size_t>(d)] * cell_width(d);
    }
    return x;
}

bool Grid::cell_active(std::int64_t index) const {
    if (domain.disc_pairs.empty()) return true;
    return domain.contains(cell_center(index));
}

namespace {

struct MaskCacheEntry {
    std::vector<int> cells;
    DomainKind kind = DomainKind::Circle;
    std::vector<std::uint8_t> mask;
    std::int64_t count = 0;
};

// Active masks are deterministic functions of (domain kind, cells_per_dim);
// a tiny memo avoids recomputing the 3D mask for every Grid copy.
const MaskCacheEntry& mask_for(const Grid& g) {
    static std::vector<std::unique_ptr<MaskCacheEntry>> memo;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    for (const auto& e : memo)
        if (e->kind == g.domain.kind && e->cells == g.cells_per_dim) return *e;
    auto e = std::make_unique<MaskCacheEntry>();
    e->kind = g.domain.kind;
    e->cells = g.cells_per_dim;
    e->mask.resize(static_cast<std::size_t>(g.total_cells), 1);
    e->count = g.total_cells;
    if (!g.domain.disc_pairs.empty()) {
        e->count = 0;
        for (std::int64_t i = 0; i < g.total_cells; ++i) {
            const bool a = g.domain.contains(g.cell_center(i));
            e->mask[static_cast<std::size_t>(i)] = a ? 1 : 0;
            if (a) ++e->count;
        }
    }
    memo.push_back(std::move(e));
    return *memo.back();
}

}  // namespace

const std::vector<std::uint8_t>& Grid::active_mask() const { return mask_for(*this).mask; }

std::int64_t Grid::active_count() const { return mask_for(*this).count; }

void GridMeasure::validate() const {
    if (static_cast<std::int64_t>(weights.size()) != grid.total_cells)
        throw construction_error("measure: weight count does not match grid");
    KahanSum s;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw construction_error("measure: weights must be finite and nonnegative");
        s.add(w);
    }
    if (std::fabs(s.value() - 1.0) > 1e-12)
        throw construction_error("measure: weights must sum to 1 within 1e-12");
}

void GridMeasure::normalize() {
    const double total = kahan_total(weights);
    if (!(total > 0.0))
        throw construction_error("measure: cannot normalize zero or negative mass");
    for (double& w : weights) w /= total;
}

GridMeasure uniform_measure(const Grid& grid) {
    GridMeasure m;
    m.grid = grid;
    m.weights.assign(static_cast<std::size_t>(grid.total_cells), 0.0);
    const auto& mask = grid.active_mask();
    const double w = 1.0 / static_cast<double>(grid.active_count());
    for (std::int64_t i = 0; i < grid.total_cells; ++i)
        if (mask[static_cast<std::size_t>(i)]) m.weights[static_cast<std::size_t>(i)] = w;
    return m;
}

GridMeasure coarsen(const GridMeasure& fine, const Grid& coarse) {
    if (!(fine.grid.domain == coarse.domain))
        throw construction_error("coarsen: domains differ");
    const int dim = coarse.domain.dim;
    std::vector<int> factor(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) {
        const int nf = fine.grid.cells_per_dim[static_cast<std::size_t>(d)];
        const int nc = coarse.cells_per_dim[static_cast<std::size_t>(d)];
        if (nc < 1 || nf % nc != 0)
            throw construction_error("coarsen: fine grid is not a refinement of the coarse grid");
        factor[static_cast<std::size_t>(d)] = nf / nc;
    }
    GridMeasure out;
    out.grid = coarse;
    out.weights.assign(static_cast<std::size_t>(coarse.total_cells), 0.0);
    for (std::int64_t i = 0; i < fine.grid.total_cells; ++i) {
        const std::vector<int> cf = fine.grid.cell_coords(i);
        std::int64_t idx = 0;
        for (int d = 0; d < dim; ++d) {
            idx = idx * coarse.cells_per_dim[static_cast<std::size_t>(d)] +
                  cf[static_cast<std::size_t>(d)] / factor[static_cast<std::size_t>(d)];
        }
        out.weights[static_cast<std::size_t>(idx)] += fine.weights[static_cast<std::size_t>(i)];
    }
    return out;
}

GridMeasure circle_marginal(const GridMeasure& m) {
    if (!m.grid.domain.periodic[0])
        throw construction_error("marginal: coordinate 0 is not a circle coordinate");
    const int n0 = m.grid.cells_per_dim[0];
    if (m.grid.domain.dim == 1) return m;
    GridMeasure out;
    out.grid = Grid::regular(DomainDescriptor::circle(), {n0});
    out.weights.assign(static_cast<std::size_t>(n0), 0.0);
    const std::int64_t stride = m.grid.total_cells / n0;
    for (int i0 = 0; i0 < n0; ++i0) {
        KahanSum s;
        const std::int64_t base = static_cast<std::int64_t>(i0) * stride;
        for (std::int64_t k = 0; k < stride; ++k)
            s.add(m.weights[static_cast<std::size_t>(base + k)]);
        out.weights[static_cast<std::size_t>(i0)] = s.value();
    }
    return out;
}

void write_measure_csv(const GridMeasure& m, const std::string& path,
                       const std::vector<std::string>& extra_header) {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw zn::error("cannot open '" + path + "' for writing");
    std::fputs("schema=1\n", f);
    for (const auto& line : extra_header) std::fprintf(f, "%s\n", line.c_str());
    std::fputs("cell_index", f);
    for (int d = 0; d < m.grid.domain.dim; ++d) std::fprintf(f, ",center_%d", d);
    std::fputs(",weight\n", f);
    for (std::int64_t i = 0; i < m.grid.total_cells; ++i) {
        const Vec c = m.grid.cell_center(i);
        std::fprintf(f, "%lld", static_cast<long long>(i));
        for (int d = 0; d < m.grid.domain.dim; ++d)
            std::fprintf(f, ",%s", format_double(c[d]).c_str());
        std::fprintf(f, ",%s\n", format_double(m.weights[static_cast<std::size_t>(i)]).c_str());
    }
    std::fclose(f);
}

}  // namespace zn
