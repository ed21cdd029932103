#include "zeronoise/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zeronoise/errors.hpp"

namespace zn {

int NoiseKernel::active_dim(int dim) const {
    int n = 0;
    for (int i = 0; i < dim; ++i)
        if (coordinate_enabled(i)) ++n;
    return n;
}

void NoiseKernel::validate(const DomainDescriptor& domain) const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw kernel_error("noise level must be positive and finite");
    if (!coordinate_mask.empty() &&
        coordinate_mask.size() != static_cast<std::size_t>(domain.dim))
        throw kernel_error("coordinate mask length does not match domain dimension");
    if (active_dim(domain.dim) == 0)
        throw kernel_error("coordinate mask disables every coordinate");

    bool perturbs_bounded = false;
    for (int i = 0; i < domain.dim; ++i)
        if (coordinate_enabled(i) && !domain.periodic[static_cast<std::size_t>(i)])
            perturbs_bounded = true;
    if (perturbs_bounded && boundary_policy != BoundaryPolicy::Reject)
        throw kernel_error("bounded coordinates are perturbed; boundary policy must be reject");
    if (!perturbs_bounded && boundary_policy != BoundaryPolicy::Wrap)
        throw kernel_error("all perturbed coordinates are periodic; boundary policy must be wrap");
}

Vec sample_noise(const NoiseKernel& kernel, int dim, Rng& rng) {
    Vec v = Vec::Zero(dim);
    const double eps = kernel.epsilon;
    if (kernel.shape == KernelShape::Cube) {
        for (int i = 0; i < dim; ++i)
            if (kernel.coordinate_enabled(i)) v[i] = rng.uniform(-eps, eps);
        return v;
    }
    // Ball: rejection from the enclosing cube on the enabled coordinates.
    const double eps2 = eps * eps;
    for (;;) {
        double norm2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            if (!kernel.coordinate_enabled(i)) continue;
            v[i] = rng.uniform(-eps, eps);
            norm2 += v[i] * v[i];
        }
        if (norm2 <= eps2) return v;
    }
}

Nd1Report check_nd1(const MapSystem& map, const NoiseKernel& kernel,
                    long long sample_points) {
    kernel.validate(map.domain);
    const int dim = map.domain.dim;
    for (int i = 0; i < dim; ++i) {
        if (!kernel.coordinate_enabled(i)) return {0.0, true};
    }

    bool has_bounded = false;
    for (int i = 0; i < dim; ++i)
        if (!map.domain.periodic[static_cast<std::size_t>(i)]) has_bounded = true;

    double delta1 = kernel.epsilon;
    if (has_bounded) {
        Rng rng(0x6e643173616d70ull, 0);
        for (long long k = 0; k < sample_points; ++k) {
            const Vec x = map.domain.sample_uniform(rng);
            const Vec y = map.eval(x);
            delta1 = std::min(delta1, map.domain.boundary_distance(y));
        }
    }
    return {delta1, !(delta1 > 0.0)};
}

const char* to_string(KernelShape s) {
    return s == KernelShape::Ball ? "ball" : "cube";
}

const char* to_string(BoundaryPolicy p) {
    return p == BoundaryPolicy::Wrap ? "wrap" : "reject";
}

}  // namespace zn
