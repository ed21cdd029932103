#pragma once

#include <cstdint>
#include <vector>

#include "zeronoise/domain.hpp"
#include "zeronoise/maps.hpp"
#include "zeronoise/rng.hpp"

namespace zn {

enum class KernelShape { Ball, Cube };
enum class BoundaryPolicy { Wrap, Reject };

// Additive isometric noise law: a uniform density on a ball or cube of
// radius epsilon, optionally restricted to a subset of coordinates.
// boundary_policy documents how out-of-domain results are handled: Wrap for
// fully periodic domains, Reject (resample) when bounded coordinates are
// perturbed. Offsets are added after the deterministic step.
struct NoiseKernel {
    double epsilon = 0.0;
    KernelShape shape = KernelShape::Ball;
    // Empty means every coordinate is perturbed; otherwise one flag per
    // coordinate, nonzero = perturbed.
    std::vector<std::uint8_t> coordinate_mask;
    BoundaryPolicy boundary_policy = BoundaryPolicy::Wrap;

    bool coordinate_enabled(int i) const {
        if (coordinate_mask.empty()) return true;
        return coordinate_mask[static_cast<std::size_t>(i)] != 0;
    }
    int active_dim(int dim) const;

    // Throws kernel_error on a non-positive level, a mask of the wrong
    // length, an all-masked kernel, or a policy inconsistent with the domain.
    void validate(const DomainDescriptor& domain) const;
};

// One offset draw. Coordinates are consumed from the rng in ascending
// order; masked coordinates stay zero and consume nothing.
Vec sample_noise(const NoiseKernel& kernel, int dim, Rng& rng);

struct Nd1Report {
    double delta1 = 0.0;
    bool violation = false;
};

// Largest ball radius certainly contained in the support of the noise
// around the deterministic image, minimized over sampled starting points.
// Additive full-dimensional noise gives epsilon away from the boundary; a
// masked coordinate collapses the support and yields zero.
Nd1Report check_nd1(const MapSystem& map, const NoiseKernel& kernel,
                    long long sample_points);

const char* to_string(KernelShape s);
const char* to_string(BoundaryPolicy p);

}  // namespace zn
