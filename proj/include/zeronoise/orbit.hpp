#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "zeronoise/maps.hpp"
#include "zeronoise/noise.hpp"
#include "zeronoise/rng.hpp"

namespace zn {

struct RandomOrbit {
    std::uint64_t seed = 0;
    std::vector<Vec> points;       // n + 1 entries, starting at the reduced x0
    std::vector<Vec> noise_draws;  // n accepted offsets
    long long rejected_count = 0;
    RngCursor end_cursor;          // resumes the noise stream bit-exactly
};

// Markov chain x_{k+1} = reduce(f(x_k) + v_k), v_k i.i.d. from the kernel.
// Offsets that push a bounded coordinate out of the domain are rejected and
// resampled, at most 1000 tries per step. The orbit is a pure function of
// (map, kernel, x0, n, seed, stream).
RandomOrbit random_orbit(const MapSystem& map, const NoiseKernel& kernel, const Vec& x0,
                         long long n, std::uint64_t seed, std::uint64_t stream = 0);

// Continues the noise stream from a saved cursor; concatenating a run of n
// steps with a resumed run of m steps reproduces a single n + m step run.
RandomOrbit resume_random_orbit(const MapSystem& map, const NoiseKernel& kernel,
                                const Vec& x0, long long n, std::uint64_t seed,
                                std::uint64_t stream, const RngCursor& cursor);

struct OrbitSummary {
    Vec end_point;
    long long rejected_count = 0;
    RngCursor end_cursor;
};

// One transition x -> reduce(f(x) + v). rejected is incremented once per
// discarded offset. Throws kernel_error after 1000 rejected tries.
Vec noisy_orbit_step(const MapSystem& map, const NoiseKernel& kernel, const Vec& x,
                     Rng& rng, long long& rejected);

// Streaming variant for long runs: visit(k, x_k) is called for k = 1..n and
// nothing is stored.
OrbitSummary visit_random_orbit(const MapSystem& map, const NoiseKernel& kernel,
                                const Vec& x0, long long n, std::uint64_t seed,
                                std::uint64_t stream,
                                const std::function<void(long long, const Vec&)>& visit);

}  // namespace zn
