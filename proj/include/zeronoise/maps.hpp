#pragma once

#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zeronoise/domain.hpp"

namespace zn {

// Hint for a dominated splitting E (contracting-ish) + F (expanding-ish):
// orthonormal frame columns at a point, cone widths, and the fibre metric
// weight used by the cone-invariance test (E components are measured as
// ||u||/e_metric_weight; fibred maps need the adapted metric for their
// natural cone family to be invariant).
struct SplittingHint {
    int dim_e = 0;
    int dim_f = 0;
    double cone_width_a = 0.5;  // stable cones,   ||v|| <= a ||u||
    double cone_width_b = 0.5;  // unstable cones, ||u|| <= b ||v||
    double e_metric_weight = 1.0;
    std::function<Mat(const Vec&)> e_frame;  // dim x dim_e, orthonormal columns
    std::function<Mat(const Vec&)> f_frame;  // dim x dim_f, orthonormal columns
};

// Flags attached to a Jacobian evaluation near formula seams.
struct JacobianStatus {
    bool boundary_ambiguous = false;  // within tau_branch of a branch boundary
    bool one_sided = false;           // one-sided derivative convention applied
};

// Half-width of the branch-boundary ambiguity band.
inline constexpr double kTauBranch = 1e-12;

// A self-describing dynamical system: evaluation, analytic Jacobian, domain,
// parameter record, and optional analytic structure. Instances are immutable
// after construction; eval/jacobian are pure, so one instance may be shared
// across threads.
struct MapSystem {
    std::string name;
    DomainDescriptor domain;
    std::map<std::string, double> params;  // ordered => deterministic record

    std::function<Vec(const Vec&)> eval;
    std::function<Mat(const Vec&)> jacobian;
    std::function<JacobianStatus(const Vec&)> jacobian_status;

    std::optional<SplittingHint> splitting;

    // Largest noise amplitude for which images provably stay inside the
    // domain (+inf for boundaryless domains).
    double invariance_margin = std::numeric_limits<double>::infinity();

    // Declared zero-noise reference measure, used by the sweep driver.
    enum class ReferenceKind { None, PointMass, NoiselessUlamProxy };
    ReferenceKind reference_kind = ReferenceKind::None;
    Vec reference_point;  // for PointMass
};

// Evaluate with domain validation: periodic coordinates are reduced mod 1,
// bounded coordinates must lie inside the domain.
Vec eval_map(const MapSystem& map, const Vec& x);

// Catalog names: g_alpha, solenoid_alpha, doubling_d, cat, skew_torus,
// cantor_circle, da_torus. Throws construction_error / unsupported_map_error.
MapSystem build_catalog_map(const std::string& name,
                            const std::map<std::string, double>& params);

// Deterministic one-line parameter record (used by tests and manifests).
std::string parameter_record(const MapSystem& map);

}  // namespace zn
