#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "zeronoise/rng.hpp"

namespace zn {

// All phase spaces in the catalog have dimension <= 4; fixed-capacity Eigen
// types keep orbit loops allocation-free.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 4, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4>;

enum class DomainKind {
    Circle,          // R mod 1
    Torus2,          // (R mod 1)^2
    SolidTorus,      // S^1 x closed unit disc, stored (x, u, v)
    SkewSolidTorus,  // T^2 x closed unit disc, stored (t, x, u, v)
    Box,             // product of bounded intervals
};

// Geometry of a phase space: which coordinates are periodic, bounds for the
// bounded ones, and which coordinate pairs are jointly constrained to the
// closed unit disc.
struct DomainDescriptor {
    DomainKind kind = DomainKind::Circle;
    int dim = 1;
    std::vector<bool> periodic;                      // per coordinate
    std::vector<std::pair<double, double>> bounds;   // used when !periodic[i]
    std::vector<std::pair<int, int>> disc_pairs;     // (i,j) with x_i^2+x_j^2 <= 1

    static DomainDescriptor circle();
    static DomainDescriptor torus2();
    static DomainDescriptor solid_torus();
    static DomainDescriptor skew_solid_torus();

    bool contains(const Vec& x) const;

    // Reduce periodic coordinates mod 1 (bounded coordinates untouched).
    Vec reduce(const Vec& x) const;

    // Distance from x to the boundary of the bounded part of the domain;
    // +inf when every coordinate is periodic.
    double boundary_distance(const Vec& x) const;

    // Uniform sample (rejection for disc-constrained pairs).
    Vec sample_uniform(Rng& rng) const;

    bool operator==(const DomainDescriptor&) const = default;
};

std::string to_string(DomainKind kind);

}  // namespace zn
