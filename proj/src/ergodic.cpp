#include "zeronoise/ergodic.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "zeronoise/errors.hpp"
#include "zeronoise/numeric.hpp"
#include "zeronoise/orbit.hpp"
#include "zeronoise/parallel.hpp"

namespace zn {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kBatches = 20;

// Modified Gram-Schmidt in place; returns the diagonal R entries.
// Throws when a column degenerates (rank loss along the orbit).
Vec mgs(Mat& frame, long long step_hint) {
    const int d = static_cast<int>(frame.cols());
    Vec diag(d);
    for (int j = 0; j < d; ++j) {
        const double r = frame.col(j).norm();
        if (!(r > 0.0) || !std::isfinite(r)) {
            std::ostringstream os;
            os << "cocycle frame became singular near step " << step_hint;
            throw numerical_error(os.str());
        }
        frame.col(j) /= r;
        for (int k = j + 1; k < d; ++k)
            frame.col(k) -= frame.col(j).dot(frame.col(k)) * frame.col(j);
        diag[j] = r;
    }
    return diag;
}

Mat initial_frame(const MapSystem& map) {
    const int d = map.domain.dim;
    Mat frame = Mat::Identity(d, d);
    if (map.splitting) {
        const Vec origin = Vec::Zero(d);
        const Mat e = map.splitting->e_frame(origin);
        const Mat f = map.splitting->f_frame(origin);
        frame.leftCols(e.cols()) = e;
        frame.rightCols(f.cols()) = f;
        mgs(frame, 0);
    }
    return frame;
}

double batch_se(const std::vector<double>& sums, const std::vector<double>& steps) {
    // sums/steps are per-batch totals; the estimate is a ratio of totals.
    double total_sum = 0.0, total_steps = 0.0;
    long long used = 0;
    for (std::size_t i = 0; i < sums.size(); ++i) {
        if (steps[i] <= 0.0) continue;
        total_sum += sums[i];
        total_steps += steps[i];
        ++used;
    }
    if (used < 2) return 0.0;
    const double mean = total_sum / total_steps;
    double var = 0.0;
    for (std::size_t i = 0; i < sums.size(); ++i) {
        if (steps[i] <= 0.0) continue;
        const double m = sums[i] / steps[i];
        var += (m - mean) * (m - mean);
    }
    var /= static_cast<double>(used - 1);
    return std::sqrt(var / static_cast<double>(used));
}

struct FramePair {
    Mat e, f;  // orthonormal complementary columns
};

FramePair frames_at(const MapSystem& map, const Vec& x) {
    const SplittingHint& h = *map.splitting;
    return {h.e_frame(x), h.f_frame(x)};
}

// Restriction of A to the F frame as a quotient along E: the image is
// projected back onto the frame columns. Frames are orthonormal and mutually
// orthogonal for every catalog map, so the projection is the plain inner
// product with the frame.
Mat projected_block(const Mat& a, const Mat& frame) {
    return frame.transpose() * (a * frame);
}

double spectral_norm(const Mat& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()[0];
}

double min_singular(const Mat& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    return sv[sv.size() - 1];
}

Vec random_unit(int dim, Rng& rng) {
    Vec v(dim);
    for (;;) {
        double norm2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            v[i] = rng.uniform(-1.0, 1.0);
            norm2 += v[i] * v[i];
        }
        if (norm2 > 1e-8 && norm2 <= 1.0) return v / std::sqrt(norm2);
    }
}

}  // namespace

LyapunovEstimate lyapunov_spectrum(const MapSystem& map, const NoiseKernel& kernel,
                                   const Vec& x0, long long n, long long renorm_period,
                                   std::uint64_t seed) {
    if (n < 10000) throw construction_error("lyapunov: n must be at least 10^4");
    if (renorm_period < 1) throw construction_error("lyapunov: renorm_period must be >= 1");
    kernel.validate(map.domain);

    const int d = map.domain.dim;
    Mat frame = initial_frame(map);

    Vec x = map.domain.reduce(x0);
    if (!map.domain.contains(x))
        throw domain_error(map.name + ": start point outside domain");

    Rng rng(seed, 0);
    long long rejected = 0;

    // Per-batch accumulators over renorm windows.
    std::vector<std::vector<double>> col_sums(
        static_cast<std::size_t>(d), std::vector<double>(kBatches, 0.0));
    std::vector<double> diff_sums(kBatches, 0.0);
    std::vector<double> batch_steps(kBatches, 0.0);
    std::vector<KahanSum> col_totals(static_cast<std::size_t>(d));
    KahanSum det_total;

    long long done = 0;
    while (done < n) {
        const long long window = std::min(renorm_period, n - done);
        KahanSum window_det;
        for (long long s = 0; s < window; ++s) {
            const Mat j = map.jacobian(x);
            frame = j * frame;
            const double det = j.determinant();
            if (!(std::fabs(det) > 0.0) || !std::isfinite(det)) {
                std::ostringstream os;
                os << map.name << ": singular jacobian at step " << (done + s);
                throw numerical_error(os.str());
            }
            window_det.add(std::log(std::fabs(det)));
            x = noisy_orbit_step(map, kernel, x, rng, rejected);
        }
        const Vec diag = mgs(frame, done);
        const int batch = static_cast<int>((done * kBatches) / n);
        double window_logs = 0.0;
        for (int c = 0; c < d; ++c) {
            const double lg = std::log(diag[c]);
            col_sums[static_cast<std::size_t>(c)][static_cast<std::size_t>(batch)] += lg;
            col_totals[static_cast<std::size_t>(c)].add(lg);
            window_logs += lg;
        }
        diff_sums[static_cast<std::size_t>(batch)] += window_logs - window_det.value();
        batch_steps[static_cast<std::size_t>(batch)] += static_cast<double>(window);
        det_total.add(window_det.value());
        done += window;
    }

    LyapunovEstimate out;
    out.n_steps = n;
    out.renorm_period = renorm_period;
    out.log_det_average = det_total.value() / static_cast<double>(n);

    std::vector<std::pair<double, double>> pairs;  // exponent, se
    for (int c = 0; c < d; ++c) {
        const double lambda = col_totals[static_cast<std::size_t>(c)].value() /
                              static_cast<double>(n);
        const double se = batch_se(col_sums[static_cast<std::size_t>(c)], batch_steps);
        pairs.emplace_back(lambda, se);
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    KahanSum chi;
    for (const auto& [lambda, se] : pairs) {
        out.exponents.push_back(lambda);
        out.standard_errors.push_back(se);
        if (lambda > 0.0) chi.add(lambda);
    }
    out.chi_plus = chi.value();
    out.sum_identity_se = batch_se(diff_sums, batch_steps);
    return out;
}

namespace {

// Global F frame fallback: push a pseudo-random frame along a noiseless
// auxiliary orbit so it aligns with the dominant directions.
FramePair fallback_frames(const MapSystem& map, int f_dim) {
    const int d = map.domain.dim;
    if (f_dim < 1 || f_dim > d)
        throw construction_error("entropy rhs: fallback F dimension out of range");
    Rng rng(0x66616c6c6261636bull, 0);
    Vec x = map.domain.sample_uniform(rng);
    Mat f(d, f_dim);
    for (int c = 0; c < f_dim; ++c) f.col(c) = random_unit(d, rng);
    for (int k = 0; k < 1000; ++k) {
        f = map.jacobian(x) * f;
        mgs(f, k);
        x = map.eval(x);
    }
    // Complete to an orthonormal basis; leading columns span E.
    Mat basis(d, d);
    basis.leftCols(f_dim) = f;
    for (int c = f_dim; c < d; ++c) basis.col(c) = random_unit(d, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
    Eigen::MatrixXd q = qr.householderQ();
    FramePair out;
    out.f = q.leftCols(f_dim);
    out.e = q.rightCols(d - f_dim);
    return out;
}

}  // namespace

double entropy_formula_rhs(const MapSystem& map, const GridMeasure& measure,
                           std::optional<int> f_dim_fallback) {
    if (!(measure.grid.domain == map.domain))
        throw construction_error("entropy rhs: measure grid does not match the map domain");

    const bool has_hint = map.splitting.has_value();
    if (!has_hint && !f_dim_fallback)
        throw unsupported_map_error(map.name +
                                    ": no splitting data for the F bundle restriction");
    FramePair global;
    if (!has_hint) global = fallback_frames(map, *f_dim_fallback);

    KahanSum acc;
    for (std::int64_t i = 0; i < measure.grid.total_cells; ++i) {
        const double w = measure.weights[static_cast<std::size_t>(i)];
        if (w == 0.0) continue;
        const Vec c = measure.grid.cell_center(i);
        const Mat a = map.jacobian(c);
        const Mat f = has_hint ? map.splitting->f_frame(c) : global.f;
        if (f.cols() == 0) continue;  // empty F bundle contributes log 1
        const double det = projected_block(a, f).determinant();
        if (!(std::fabs(det) > 0.0) || !std::isfinite(det)) {
            std::ostringstream os;
            os << map.name << ": degenerate F restriction at cell " << i;
            throw numerical_error(os.str());
        }
        acc.add(w * std::log(std::fabs(det)));
    }
    return acc.value();
}

DominationReport domination_check(const MapSystem& map, const RegionSampler& sampler,
                                  long long n_samples, std::uint64_t seed, int threads) {
    if (!map.splitting)
        throw unsupported_map_error(map.name + ": no splitting hint for domination check");
    const SplittingHint& hint = *map.splitting;
    const int d = map.domain.dim;
    const int de = hint.dim_e;
    const int df = hint.dim_f;

    std::vector<double> products(static_cast<std::size_t>(n_samples), 0.0);
    std::vector<std::uint8_t> failures(static_cast<std::size_t>(n_samples), 0);
    std::vector<double> points(static_cast<std::size_t>(n_samples) * static_cast<std::size_t>(d));

    parallel_for(n_samples, threads, [&](long long lo, long long hi) {
        for (long long i = lo; i < hi; ++i) {
            Rng rng(seed, static_cast<std::uint64_t>(i));
            const Vec x = sampler(rng);
            for (int k = 0; k < d; ++k)
                points[static_cast<std::size_t>(i) * static_cast<std::size_t>(d) +
                       static_cast<std::size_t>(k)] = x[k];
            const Mat a = map.jacobian(x);
            const FramePair fr = frames_at(map, x);

            double product = 0.0;
            if (de > 0 && df > 0) {
                const double e_norm = spectral_norm(a * fr.e);
                const double f_co = min_singular(a * fr.f);
                product = f_co > 0.0 ? e_norm / f_co
                                     : std::numeric_limits<double>::infinity();
            }
            products[static_cast<std::size_t>(i)] = product;

            if (de > 0 && df > 0) {
                const Vec y = map.eval(x);
                const FramePair fri = frames_at(map, y);
                const double b = hint.cone_width_b;
                const double weight = hint.e_metric_weight;
                std::uint8_t bad = 0;
                for (int k = 0; k < 8; ++k) {
                    const Vec eh = random_unit(de, rng);
                    const Vec fh = random_unit(df, rng);
                    const Vec v = fr.e * (b * weight * eh) + fr.f * fh;
                    const Vec w = a * v;
                    const double we = (fri.e.transpose() * w).norm() / weight;
                    const double wf = (fri.f.transpose() * w).norm();
                    if (we > b * wf * (1.0 + 1e-9)) bad = 1;
                }
                failures[static_cast<std::size_t>(i)] = bad;
            }
        }
    });

    DominationReport out;
    out.samples = n_samples;
    for (long long i = 0; i < n_samples; ++i) {
        const double p = products[static_cast<std::size_t>(i)];
        out.lambda0_estimate = std::max(out.lambda0_estimate, p);
        if (p >= 1.0 && out.violations.size() < 1000) {
            Vec x(d);
            for (int k = 0; k < d; ++k)
                x[k] = points[static_cast<std::size_t>(i) * static_cast<std::size_t>(d) +
                              static_cast<std::size_t>(k)];
            out.violations.push_back(x);
        }
        out.cone_invariance_failures += failures[static_cast<std::size_t>(i)];
    }
    return out;
}

DominationReport domination_check(const MapSystem& map, long long n_samples,
                                  std::uint64_t seed, int threads) {
    const DomainDescriptor domain = map.domain;
    return domination_check(
        map, [domain](Rng& rng) { return domain.sample_uniform(rng); }, n_samples, seed,
        threads);
}

DegenerateSetReport degenerate_sets(const MapSystem& map, const Grid& grid,
                                    double tolerance, int threads) {
    if (!map.splitting)
        throw unsupported_map_error(map.name + ": no splitting hint for degenerate sets");
    if (!(grid.domain == map.domain))
        throw construction_error("degenerate sets: grid domain does not match the map");
    const SplittingHint& hint = *map.splitting;

    const std::int64_t n = grid.total_cells;
    std::vector<std::uint8_t> e1(static_cast<std::size_t>(n), 0);
    std::vector<std::uint8_t> f1(static_cast<std::size_t>(n), 0);
    const auto& mask = grid.active_mask();
    const double lo = 1.0 - tolerance;

    parallel_for(n, threads, [&](long long a, long long b) {
        for (long long i = a; i < b; ++i) {
            if (!mask[static_cast<std::size_t>(i)]) continue;
            const Vec x = grid.cell_lower(i);
            const Mat jac = map.jacobian(x);
            if (hint.dim_e > 0) {
                const double norm = spectral_norm(projected_block(jac, hint.e_frame(x)));
                if (norm >= lo && norm <= 1.0) e1[static_cast<std::size_t>(i)] = 1;
            }
            if (hint.dim_f > 0) {
                const double smin = min_singular(projected_block(jac, hint.f_frame(x)));
                const double conorm = smin > 0.0 ? 1.0 / smin
                                                 : std::numeric_limits<double>::infinity();
                if (conorm >= lo && conorm <= 1.0) f1[static_cast<std::size_t>(i)] = 1;
            }
        }
    });

    DegenerateSetReport out;
    out.tolerance = tolerance;
    for (std::int64_t i = 0; i < n; ++i) {
        if (e1[static_cast<std::size_t>(i)]) out.E1_cells.push_back(i);
        if (f1[static_cast<std::size_t>(i)]) out.F1_cells.push_back(i);
    }
    return out;
}

std::vector<Observable> default_observables(const DomainDescriptor& domain) {
    std::vector<Observable> obs;
    for (int d = 0; d < domain.dim; ++d) {
        const auto& b = domain.bounds[static_cast<std::size_t>(d)];
        const double lo = b.first;
        const double span = b.second - b.first;
        for (int k = 1; k <= 2; ++k) {
            obs.push_back({"sin" + std::to_string(k) + "_x" + std::to_string(d),
                           [d, k, lo, span](const Vec& x) {
                               return std::sin(2.0 * kPi * k * (x[d] - lo) / span);
                           }});
            obs.push_back({"cos" + std::to_string(k) + "_x" + std::to_string(d),
                           [d, k, lo, span](const Vec& x) {
                               return std::cos(2.0 * kPi * k * (x[d] - lo) / span);
                           }});
        }
    }
    return obs;
}

double measure_integral(const GridMeasure& m, const Observable& obs) {
    KahanSum acc;
    for (std::int64_t i = 0; i < m.grid.total_cells; ++i) {
        const double w = m.weights[static_cast<std::size_t>(i)];
        if (w == 0.0) continue;
        acc.add(w * obs.fn(m.grid.cell_center(i)));
    }
    return acc.value();
}

double basin_fraction(const MapSystem& map, const NoiseKernel& kernel,
                      const GridMeasure& reference,
                      const std::vector<Observable>& observables, long long n_init,
                      long long n_iter, double tol, std::uint64_t seed, int threads) {
    if (!(reference.grid.domain == map.domain))
        throw construction_error("basin: reference measure domain does not match the map");
    if (observables.empty())
        throw construction_error("basin: at least one observable is required");
    kernel.validate(map.domain);

    std::vector<double> targets;
    targets.reserve(observables.size());
    for (const Observable& obs : observables)
        targets.push_back(measure_integral(reference, obs));

    std::vector<std::uint8_t> pass(static_cast<std::size_t>(n_init), 0);
    parallel_for(n_init, threads, [&](long long lo, long long hi) {
        const std::size_t m = observables.size();
        std::vector<KahanSum> sums(m);
        for (long long i = lo; i < hi; ++i) {
            Rng rng(seed, static_cast<std::uint64_t>(i));
            Vec x = map.domain.sample_uniform(rng);
            for (KahanSum& s : sums) s = KahanSum();
            long long rejected = 0;
            for (long long k = 0; k < n_iter; ++k) {
                x = noisy_orbit_step(map, kernel, x, rng, rejected);
                for (std::size_t j = 0; j < m; ++j) sums[j].add(observables[j].fn(x));
            }
            std::uint8_t ok = 1;
            for (std::size_t j = 0; j < m; ++j) {
                const double avg = sums[j].value() / static_cast<double>(n_iter);
                if (std::fabs(avg - targets[j]) > tol) ok = 0;
            }
            pass[static_cast<std::size_t>(i)] = ok;
        }
    });

    long long passed = 0;
    for (std::uint8_t p : pass) passed += p;
    return static_cast<double>(passed) / static_cast<double>(n_init);
}

}  // namespace zn
