#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zeronoise/domain.hpp"

namespace zn {

// Uniform product grid over the domain's bounding box. Cells are indexed
// row-major with coordinate 0 most significant. For domains with disc
// constraints the box grid overhangs the domain; cells whose centers fall
// outside are flagged inactive and excluded from uniform reference vectors.
struct Grid {
    DomainDescriptor domain;
    std::vector<int> cells_per_dim;
    std::int64_t total_cells = 0;

    static Grid regular(const DomainDescriptor& domain, std::vector<int> cells_per_dim);

    double cell_width(int d) const;
    double cell_volume() const;

    std::int64_t cell_index(const Vec& x) const;  // x must lie in the box
    std::vector<int> cell_coords(std::int64_t index) const;
    Vec cell_center(std::int64_t index) const;
    Vec cell_lower(std::int64_t index) const;

    bool cell_active(std::int64_t index) const;  // center inside the domain
    const std::vector<std::uint8_t>& active_mask() const;
    std::int64_t active_count() const;
};

struct GridMeasure {
    Grid grid;
    std::vector<double> weights;  // one per cell, sums to 1 within 1e-12

    void validate() const;  // throws construction_error on bad weights
    void normalize();       // rescales to unit total mass
};

// Uniform probability on the active cells.
GridMeasure uniform_measure(const Grid& grid);

// Sums weights of fine cells into the coarse grid; every cells_per_dim of
// the fine grid must be an integer multiple of the coarse one.
GridMeasure coarsen(const GridMeasure& fine, const Grid& coarse);

// Marginal onto coordinate 0 (the circle coordinate of the fibred domains).
GridMeasure circle_marginal(const GridMeasure& m);

// CSV rows: cell_index, cell center coordinates, weight. Lines in
// extra_header (if any) are emitted verbatim between the schema line and the
// column header; the CLI uses this for its manifest reference.
void write_measure_csv(const GridMeasure& m, const std::string& path,
                       const std::vector<std::string>& extra_header = {});

}  // namespace zn
