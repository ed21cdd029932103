#include "zeronoise/orbit.hpp"

#include <sstream>

#include "zeronoise/errors.hpp"
#include "zeronoise/numeric.hpp"

namespace zn {

namespace {

constexpr int kMaxRejectTries = 1000;

void check_level(const MapSystem& map, const NoiseKernel& kernel) {
    kernel.validate(map.domain);
    if (kernel.epsilon > map.invariance_margin) {
        std::ostringstream os;
        os << map.name << ": noise level " << format_double(kernel.epsilon)
           << " exceeds the invariance margin " << format_double(map.invariance_margin);
        throw construction_error(os.str());
    }
}

struct StepResult {
    Vec point;
    Vec draw;
    long long rejected = 0;
};

StepResult noisy_step(const MapSystem& map, const NoiseKernel& kernel, const Vec& x,
                      Rng& rng) {
    const Vec y = map.eval(x);
    StepResult out;
    for (int tries = 0; tries < kMaxRejectTries; ++tries) {
        const Vec v = sample_noise(kernel, map.domain.dim, rng);
        const Vec z = map.domain.reduce(y + v);
        if (map.domain.contains(z)) {
            out.point = z;
            out.draw = v;
            return out;
        }
        ++out.rejected;
    }
    throw kernel_error(map.name + ": rejection sampling exhausted " +
                       std::to_string(kMaxRejectTries) +
                       " tries per step; the noise level is mis-sized for the domain");
}

}  // namespace

Vec noisy_orbit_step(const MapSystem& map, const NoiseKernel& kernel, const Vec& x,
                     Rng& rng, long long& rejected) {
    StepResult step = noisy_step(map, kernel, x, rng);
    rejected += step.rejected;
    return step.point;
}

namespace {

Vec reduced_start(const MapSystem& map, const Vec& x0) {
    if (x0.size() != map.domain.dim)
        throw domain_error(map.name + ": start point dimension mismatch");
    const Vec x = map.domain.reduce(x0);
    if (!map.domain.contains(x))
        throw domain_error(map.name + ": start point outside domain");
    return x;
}

}  // namespace

RandomOrbit random_orbit(const MapSystem& map, const NoiseKernel& kernel, const Vec& x0,
                         long long n, std::uint64_t seed, std::uint64_t stream) {
    return resume_random_orbit(map, kernel, x0, n, seed, stream, RngCursor{});
}

RandomOrbit resume_random_orbit(const MapSystem& map, const NoiseKernel& kernel,
                                const Vec& x0, long long n, std::uint64_t seed,
                                std::uint64_t stream, const RngCursor& cursor) {
    check_level(map, kernel);
    RandomOrbit orbit;
    orbit.seed = seed;
    orbit.points.reserve(static_cast<std::size_t>(n) + 1);
    orbit.noise_draws.reserve(static_cast<std::size_t>(n));

    Vec x = reduced_start(map, x0);
    orbit.points.push_back(x);
    Rng rng(seed, stream, cursor);
    for (long long k = 0; k < n; ++k) {
        StepResult step = noisy_step(map, kernel, x, rng);
        orbit.rejected_count += step.rejected;
        orbit.points.push_back(step.point);
        orbit.noise_draws.push_back(step.draw);
        x = step.point;
    }
    orbit.end_cursor = rng.cursor();
    return orbit;
}

OrbitSummary visit_random_orbit(const MapSystem& map, const NoiseKernel& kernel,
                                const Vec& x0, long long n, std::uint64_t seed,
                                std::uint64_t stream,
                                const std::function<void(long long, const Vec&)>& visit) {
    check_level(map, kernel);
    OrbitSummary out;
    Vec x = reduced_start(map, x0);
    Rng rng(seed, stream);
    for (long long k = 1; k <= n; ++k) {
        StepResult step = noisy_step(map, kernel, x, rng);
        out.rejected_count += step.rejected;
        x = step.point;
        visit(k, x);
    }
    out.end_point = x;
    out.end_cursor = rng.cursor();
    return out;
}

}  // namespace zn
