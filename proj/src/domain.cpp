#include "zeronoise/domain.hpp"

#include <cmath>
#include <limits>

#include "zeronoise/errors.hpp"
#include "zeronoise/numeric.hpp"

namespace zn {

DomainDescriptor DomainDescriptor::circle() {
    DomainDescriptor d;
    d.kind = DomainKind::Circle;
    d.dim = 1;
    d.periodic = {true};
    d.bounds = {{0.0, 1.0}};
    return d;
}

DomainDescriptor DomainDescriptor::torus2() {
    DomainDescriptor d;
    d.kind = DomainKind::Torus2;
    d.dim = 2;
    d.periodic = {true, true};
    d.bounds = {{0.0, 1.0}, {0.0, 1.0}};
    return d;
}

DomainDescriptor DomainDescriptor::solid_torus() {
    DomainDescriptor d;
    d.kind = DomainKind::SolidTorus;
    d.dim = 3;
    d.periodic = {true, false, false};
    d.bounds = {{0.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
    d.disc_pairs = {{1, 2}};
    return d;
}

DomainDescriptor DomainDescriptor::skew_solid_torus() {
    DomainDescriptor d;
    d.kind = DomainKind::SkewSolidTorus;
    d.dim = 4;
    d.periodic = {true, true, false, false};
    d.bounds = {{0.0, 1.0}, {0.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
    d.disc_pairs = {{2, 3}};
    return d;
}

bool DomainDescriptor::contains(const Vec& x) const {
    if (x.size() != dim) return false;
    for (int i = 0; i < dim; ++i) {
        if (!std::isfinite(x[i])) return false;
        if (!periodic[static_cast<std::size_t>(i)]) {
            const auto& [lo, hi] = bounds[static_cast<std::size_t>(i)];
            if (x[i] < lo || x[i] > hi) return false;
        }
    }
    for (const auto& [i, j] : disc_pairs) {
        if (x[i] * x[i] + x[j] * x[j] > 1.0) return false;
    }
    return true;
}

Vec DomainDescriptor::reduce(const Vec& x) const {
    Vec y = x;
    for (int i = 0; i < dim; ++i) {
        if (periodic[static_cast<std::size_t>(i)]) y[i] = wrap01(y[i]);
    }
    return y;
}

double DomainDescriptor::boundary_distance(const Vec& x) const {
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dim; ++i) {
        if (periodic[static_cast<std::size_t>(i)]) continue;
        const auto& [lo, hi] = bounds[static_cast<std::size_t>(i)];
        d = std::min(d, std::min(x[i] - lo, hi - x[i]));
    }
    for (const auto& [i, j] : disc_pairs) {
        const double rho = std::sqrt(x[i] * x[i] + x[j] * x[j]);
        d = std::min(d, 1.0 - rho);
    }
    return d;
}

Vec DomainDescriptor::sample_uniform(Rng& rng) const {
    Vec x(dim);
    for (int i = 0; i < dim; ++i) {
        const auto& [lo, hi] = bounds[static_cast<std::size_t>(i)];
        x[i] = rng.uniform(lo, hi);
    }
    for (const auto& [i, j] : disc_pairs) {
        int tries = 0;
        while (x[i] * x[i] + x[j] * x[j] > 1.0) {
            if (++tries > 1000)
                throw discretization_error("disc rejection sampling exceeded 1000 tries");
            x[i] = rng.uniform(-1.0, 1.0);
            x[j] = rng.uniform(-1.0, 1.0);
        }
    }
    return x;
}

std::string to_string(DomainKind kind) {
    switch (kind) {
        case DomainKind::Circle: return "circle";
        case DomainKind::Torus2: return "torus2";
        case DomainKind::SolidTorus: return "solid_torus";
        case DomainKind::SkewSolidTorus: return "skew_solid_torus";
        case DomainKind::Box: return "box";
    }
    return "unknown";
}

}  // namespace zn
