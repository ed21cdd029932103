#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace zn {

// Compensated (Kahan) accumulator. Measure integrals sum over up to ~2e6
// cells; plain accumulation would eat several digits of the 1e-12 linearity
// contracts.
class KahanSum {
  public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double kahan_total(const std::vector<double>& xs) {
    KahanSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

// Reduce a real number modulo 1 into [0, 1).
inline double wrap01(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;  // guards against floor rounding for tiny negatives
    return r;
}

// Distance on the unit circle (R mod 1).
inline double circle_dist(double a, double b) {
    const double d = std::fabs(wrap01(a) - wrap01(b));
    return std::min(d, 1.0 - d);
}

// Shortest-precision-loss float formatting used by every CSV writer:
// 17 significant digits round-trip doubles exactly and are locale-independent.
inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

// FNV-1a 64-bit; used as the configuration fingerprint in manifests.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

}  // namespace zn
