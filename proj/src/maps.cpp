#include "zeronoise/maps.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "zeronoise/errors.hpp"
#include "zeronoise/numeric.hpp"

namespace zn {

namespace {

constexpr double kPi = std::numbers::pi;

double get_param(const std::map<std::string, double>& params, const std::string& key,
                 double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void reject_unknown_params(const std::string& name,
                           const std::map<std::string, double>& params,
                           std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : params) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
                return key == a;
            }) == allowed.end()) {
            throw construction_error(name + ": unknown parameter '" + key + "'");
        }
    }
}

// ---------------------------------------------------------------------------
// Intermittent circle covering: two increasing branches on [0,1/2) and
// [1/2,1), a neutral fixed point at 0 (derivative exactly 1), degree 2.
// Branch selection is half-open: x = 1/2 uses the second branch.

double intermittent_eval(double x, double alpha) {
    const double c = std::pow(2.0, alpha);
    double y;
    if (x < 0.5) {
        y = x + c * std::pow(x, 1.0 + alpha);
    } else {
        y = x - c * std::pow(1.0 - x, 1.0 + alpha);
    }
    return wrap01(y);
}

double intermittent_deriv(double x, double alpha) {
    const double c = std::pow(2.0, alpha) * (1.0 + alpha);
    if (x < 0.5) return 1.0 + c * std::pow(x, alpha);
    return 1.0 + c * std::pow(1.0 - x, alpha);
}

JacobianStatus circle_branch_status(double x) {
    JacobianStatus st;
    const double d_half = std::fabs(x - 0.5);
    const double d_zero = std::min(x, 1.0 - x);
    if (d_half <= kTauBranch || d_zero <= kTauBranch) {
        st.boundary_ambiguous = true;
        st.one_sided = true;
    }
    return st;
}

SplittingHint expanding_1d_hint() {
    SplittingHint h;
    h.dim_e = 0;
    h.dim_f = 1;
    h.e_frame = [](const Vec&) { return Mat(1, 0); };
    h.f_frame = [](const Vec&) {
        Mat f(1, 1);
        f(0, 0) = 1.0;
        return f;
    };
    return h;
}

MapSystem make_g_alpha(const std::map<std::string, double>& params) {
    reject_unknown_params("g_alpha", params, {"alpha"});
    const double alpha = get_param(params, "alpha", 0.5);
    if (!(alpha > 0.0) || alpha > 4.0)
        throw construction_error("g_alpha: alpha must lie in (0, 4]");

    MapSystem m;
    m.name = "g_alpha";
    m.domain = DomainDescriptor::circle();
    m.params = {{"alpha", alpha}};
    m.eval = [alpha](const Vec& x) {
        Vec y(1);
        y[0] = intermittent_eval(x[0], alpha);
        return y;
    };
    m.jacobian = [alpha](const Vec& x) {
        Mat j(1, 1);
        j(0, 0) = intermittent_deriv(x[0], alpha);
        return j;
    };
    m.jacobian_status = [](const Vec& x) { return circle_branch_status(x[0]); };
    m.splitting = expanding_1d_hint();
    if (alpha >= 1.0) {
        m.reference_kind = MapSystem::ReferenceKind::PointMass;
        m.reference_point = Vec::Zero(1);
    } else {
        m.reference_kind = MapSystem::ReferenceKind::NoiselessUlamProxy;
    }
    return m;
}

MapSystem make_doubling(const std::map<std::string, double>& params) {
    reject_unknown_params("doubling_d", params, {"d"});
    const double d_raw = get_param(params, "d", 2.0);
    const int d = static_cast<int>(std::llround(d_raw));
    if (std::fabs(d_raw - d) > 1e-9 || d < 2 || d > 64)
        throw construction_error("doubling_d: d must be an integer in [2, 64]");

    MapSystem m;
    m.name = "doubling_d";
    m.domain = DomainDescriptor::circle();
    m.params = {{"d", static_cast<double>(d)}};
    m.eval = [d](const Vec& x) {
        Vec y(1);
        y[0] = wrap01(d * x[0]);
        return y;
    };
    m.jacobian = [d](const Vec&) {
        Mat j(1, 1);
        j(0, 0) = static_cast<double>(d);
        return j;
    };
    m.jacobian_status = [](const Vec&) { return JacobianStatus{}; };
    m.splitting = expanding_1d_hint();
    m.reference_kind = MapSystem::ReferenceKind::NoiselessUlamProxy;
    return m;
}

// ---------------------------------------------------------------------------
// Hyperbolic torus automorphism [[2,1],[1,1]] and its derived-from-Anosov
// deformation. The matrix is symmetric, so its eigenframe is orthonormal.

struct CatFrames {
    double lambda_u, lambda_s;
    Eigen::Vector2d vu, vs;
};

CatFrames cat_frames() {
    CatFrames f;
    const double root5 = std::sqrt(5.0);
    f.lambda_u = (3.0 + root5) / 2.0;
    f.lambda_s = (3.0 - root5) / 2.0;
    Eigen::Vector2d vu(1.0, f.lambda_u - 2.0);
    Eigen::Vector2d vs(1.0, f.lambda_s - 2.0);
    f.vu = vu.normalized();
    f.vs = vs.normalized();
    return f;
}

SplittingHint cat_hint() {
    const CatFrames fr = cat_frames();
    SplittingHint h;
    h.dim_e = 1;
    h.dim_f = 1;
    h.e_frame = [fr](const Vec&) {
        Mat e(2, 1);
        e(0, 0) = fr.vs[0];
        e(1, 0) = fr.vs[1];
        return e;
    };
    h.f_frame = [fr](const Vec&) {
        Mat f(2, 1);
        f(0, 0) = fr.vu[0];
        f(1, 0) = fr.vu[1];
        return f;
    };
    return h;
}

MapSystem make_cat(const std::map<std::string, double>& params) {
    reject_unknown_params("cat", params, {});
    MapSystem m;
    m.name = "cat";
    m.domain = DomainDescriptor::torus2();
    m.eval = [](const Vec& x) {
        Vec y(2);
        y[0] = wrap01(2.0 * x[0] + x[1]);
        y[1] = wrap01(x[0] + x[1]);
        return y;
    };
    m.jacobian = [](const Vec&) {
        Mat j(2, 2);
        j << 2.0, 1.0, 1.0, 1.0;
        return j;
    };
    m.jacobian_status = [](const Vec&) { return JacobianStatus{}; };
    m.splitting = cat_hint();
    m.reference_kind = MapSystem::ReferenceKind::NoiselessUlamProxy;
    return m;
}

// C^2 bump: rho(0)=1, rho(1)=0 with two flat derivatives at s=1.
double da_bump(double s) {
    const double t = 1.0 - s * s;
    return t * t * t;
}
double da_bump_deriv(double s) {
    const double t = 1.0 - s * s;
    return -6.0 * s * t * t;
}

// Signed wrap of a torus displacement into [-1/2, 1/2).
double signed_wrap(double c) {
    const double r = wrap01(c);
    return r >= 0.5 ? r - 1.0 : r;
}

MapSystem make_da_torus(const std::map<std::string, double>& params) {
    reject_unknown_params("da_torus", params, {"r0", "delta"});
    const CatFrames fr = cat_frames();
    const double delta_default = 1.0 - 1.0 / fr.lambda_u;
    const double r0 = get_param(params, "r0", 0.2);
    const double delta = get_param(params, "delta", delta_default);
    if (!(r0 > 0.0) || r0 > 0.49)
        throw construction_error("da_torus: r0 must lie in (0, 0.49]");
    // sup_s (rho + s|rho'|) = 32/25 for this bump; the deformation block of
    // Dphi has norm <= delta * that sup, which must stay below 1.
    const double bump_sup = 32.0 / 25.0;
    if (!(delta > 0.0) || delta * bump_sup >= 1.0)
        throw construction_error(
            "da_torus: delta * sup(rho + s|rho'|) must be < 1 (delta < 25/32)");

    MapSystem m;
    m.name = "da_torus";
    m.domain = DomainDescriptor::torus2();
    m.params = {{"delta", delta}, {"r0", r0}};
    const Eigen::Vector2d vu = fr.vu;

    auto deform = [r0, delta, vu](const Vec& x) -> Eigen::Vector2d {
        Eigen::Vector2d w(signed_wrap(x[0]), signed_wrap(x[1]));
        const double r = w.norm();
        Eigen::Vector2d z(x[0], x[1]);
        if (r >= r0) return z;
        const double eta = w.dot(vu);
        return z - delta * da_bump(r / r0) * eta * vu;
    };

    m.eval = [deform](const Vec& x) {
        const Eigen::Vector2d z = deform(x);
        Vec y(2);
        y[0] = wrap01(2.0 * z[0] + z[1]);
        y[1] = wrap01(z[0] + z[1]);
        return y;
    };
    m.jacobian = [r0, delta, vu](const Vec& x) {
        Eigen::Vector2d w(signed_wrap(x[0]), signed_wrap(x[1]));
        const double r = w.norm();
        Eigen::Matrix2d a;
        a << 2.0, 1.0, 1.0, 1.0;
        Eigen::Matrix2d dphi = Eigen::Matrix2d::Identity();
        if (r < r0) {
            const double s = r / r0;
            if (r == 0.0) {
                dphi -= delta * (vu * vu.transpose());
            } else {
                const double eta = w.dot(vu);
                Eigen::Vector2d grad =
                    da_bump(s) * vu + (eta * da_bump_deriv(s) / (r * r0)) * w;
                dphi -= delta * (vu * grad.transpose());
            }
        }
        const Eigen::Matrix2d j2 = a * dphi;
        Mat j(2, 2);
        j << j2(0, 0), j2(0, 1), j2(1, 0), j2(1, 1);
        return j;
    };
    m.jacobian_status = [](const Vec&) { return JacobianStatus{}; };
    m.splitting = cat_hint();
    m.reference_kind = MapSystem::ReferenceKind::None;
    return m;
}

// ---------------------------------------------------------------------------
// Solid-torus attractor over the intermittent covering: base g_alpha, disc
// fibre contracted by 1/10 and recentred at e^{2*pi*i*x}/2. The fibre bundle
// (u,v) is exactly invariant; images satisfy |z'| in [0.4, 0.6], giving a
// strict invariance margin of 0.4.

SplittingHint solenoid_hint() {
    SplittingHint h;
    h.dim_e = 2;
    h.dim_f = 1;
    h.e_metric_weight = 4.0 * kPi;
    h.e_frame = [](const Vec&) {
        Mat e = Mat::Zero(3, 2);
        e(1, 0) = 1.0;
        e(2, 1) = 1.0;
        return e;
    };
    h.f_frame = [](const Vec&) {
        Mat f = Mat::Zero(3, 1);
        f(0, 0) = 1.0;
        return f;
    };
    return h;
}

MapSystem make_solenoid(const std::map<std::string, double>& params) {
    reject_unknown_params("solenoid_alpha", params, {"alpha"});
    const double alpha = get_param(params, "alpha", 0.5);
    if (!(alpha > 0.0) || alpha > 4.0)
        throw construction_error("solenoid_alpha: alpha must lie in (0, 4]");

    MapSystem m;
    m.name = "solenoid_alpha";
    m.domain = DomainDescriptor::solid_torus();
    m.params = {{"alpha", alpha}};
    m.eval = [alpha](const Vec& x) {
        Vec y(3);
        y[0] = intermittent_eval(x[0], alpha);
        y[1] = x[1] / 10.0 + 0.5 * std::cos(2.0 * kPi * x[0]);
        y[2] = x[2] / 10.0 + 0.5 * std::sin(2.0 * kPi * x[0]);
        return y;
    };
    m.jacobian = [alpha](const Vec& x) {
        Mat j = Mat::Zero(3, 3);
        j(0, 0) = intermittent_deriv(x[0], alpha);
        j(1, 0) = -kPi * std::sin(2.0 * kPi * x[0]);
        j(2, 0) = kPi * std::cos(2.0 * kPi * x[0]);
        j(1, 1) = 0.1;
        j(2, 2) = 0.1;
        return j;
    };
    m.jacobian_status = [](const Vec& x) { return circle_branch_status(x[0]); };
    m.splitting = solenoid_hint();
    m.invariance_margin = 0.4;
    if (alpha >= 1.0) {
        m.reference_kind = MapSystem::ReferenceKind::PointMass;
        Vec p(3);
        p << 0.0, 5.0 / 9.0, 0.0;
        m.reference_point = p;
    } else {
        m.reference_kind = MapSystem::ReferenceKind::NoiselessUlamProxy;
    }
    return m;
}

// ---------------------------------------------------------------------------
// Skew product on T^2 x disc: expanding t-circle drives a t-dependent
// intermittent map in x, which drives the same disc contraction as the
// solenoid. Stored as (t, x, u, v).

struct SkewBase {
    double value, dx, dS;  // x-image, d/dx, d/d(sin^2 pi t')
};

SkewBase skew_base(double s2, double x, double alpha) {
    const double c = std::pow(2.0, alpha);
    const double a1 = 1.0 + 0.1 * s2;
    const double a2 = c * (1.0 - 0.1 * s2);
    SkewBase out;
    if (x < 0.5) {
        const double xa = std::pow(x, alpha);
        out.value = wrap01(a1 * x + a2 * x * xa);
        out.dx = a1 + a2 * (1.0 + alpha) * xa;
        out.dS = 0.1 * (x - c * x * xa);
    } else {
        const double h = 1.0 - x;
        const double ha = std::pow(h, alpha);
        out.value = wrap01(1.0 - a1 * h - a2 * h * ha);
        out.dx = a1 + a2 * (1.0 + alpha) * ha;
        out.dS = -0.1 * (h - c * h * ha);
    }
    return out;
}

SplittingHint skew_hint() {
    SplittingHint h;
    h.dim_e = 2;
    h.dim_f = 2;
    h.e_metric_weight = 32.0;
    h.e_frame = [](const Vec&) {
        Mat e = Mat::Zero(4, 2);
        e(2, 0) = 1.0;
        e(3, 1) = 1.0;
        return e;
    };
    h.f_frame = [](const Vec&) {
        Mat f = Mat::Zero(4, 2);
        f(0, 0) = 1.0;
        f(1, 1) = 1.0;
        return f;
    };
    return h;
}

MapSystem make_skew_torus(const std::map<std::string, double>& params) {
    reject_unknown_params("skew_torus", params, {"alpha", "d"});
    const double alpha = get_param(params, "alpha", 0.5);
    const double d_raw = get_param(params, "d", 2.0);
    const int d = static_cast<int>(std::llround(d_raw));
    if (!(alpha > 0.0) || alpha > 4.0)
        throw construction_error("skew_torus: alpha must lie in (0, 4]");
    if (std::fabs(d_raw - d) > 1e-9 || d < 2 || d > 64)
        throw construction_error("skew_torus: d must be an integer in [2, 64]");

    MapSystem m;
    m.name = "skew_torus";
    m.domain = DomainDescriptor::skew_solid_torus();
    m.params = {{"alpha", alpha}, {"d", static_cast<double>(d)}};
    m.eval = [alpha, d](const Vec& x) {
        const double t1 = wrap01(d * x[0]);
        const double s2 = std::sin(kPi * t1) * std::sin(kPi * t1);
        const SkewBase b = skew_base(s2, x[1], alpha);
        Vec y(4);
        y[0] = t1;
        y[1] = b.value;
        y[2] = x[2] / 10.0 + 0.5 * std::cos(2.0 * kPi * b.value);
        y[3] = x[3] / 10.0 + 0.5 * std::sin(2.0 * kPi * b.value);
        return y;
    };
    m.jacobian = [alpha, d](const Vec& x) {
        const double t1 = wrap01(d * x[0]);
        const double s2 = std::sin(kPi * t1) * std::sin(kPi * t1);
        const SkewBase b = skew_base(s2, x[1], alpha);
        const double ds2_dt = kPi * std::sin(2.0 * kPi * t1) * d;
        const double dxp_dt = b.dS * ds2_dt;
        const double sinx = std::sin(2.0 * kPi * b.value);
        const double cosx = std::cos(2.0 * kPi * b.value);
        Mat j = Mat::Zero(4, 4);
        j(0, 0) = static_cast<double>(d);
        j(1, 0) = dxp_dt;
        j(1, 1) = b.dx;
        j(2, 0) = -kPi * sinx * dxp_dt;
        j(2, 1) = -kPi * sinx * b.dx;
        j(2, 2) = 0.1;
        j(3, 0) = kPi * cosx * dxp_dt;
        j(3, 1) = kPi * cosx * b.dx;
        j(3, 3) = 0.1;
        return j;
    };
    m.jacobian_status = [](const Vec& x) { return circle_branch_status(x[1]); };
    m.splitting = skew_hint();
    m.invariance_margin = 0.4;
    if (alpha >= 1.0) {
        m.reference_kind = MapSystem::ReferenceKind::PointMass;
        Vec p(4);
        p << 0.0, 0.0, 5.0 / 9.0, 0.0;
        m.reference_point = p;
    } else {
        m.reference_kind = MapSystem::ReferenceKind::NoiselessUlamProxy;
    }
    return m;
}

// ---------------------------------------------------------------------------
// Circle map with derivative 1 exactly on (the generation-N cover of) the
// middle-thirds Cantor set: g0(x) = x + int_0^x beta / int_0^1 beta, where
// beta is the tent function on each removed gap and 0 on the Cantor set.

struct CantorTable {
    std::vector<double> gap_lo, gap_hi;   // sorted gaps
    std::vector<double> prefix;           // integral of beta over gaps before i
    double total = 0.0;                   // int_0^1 beta
};

void collect_gaps(double lo, double hi, int gen, int max_gen, CantorTable& t) {
    if (gen > max_gen) return;
    const double third = (hi - lo) / 3.0;
    const double a = lo + third;
    const double b = hi - third;
    collect_gaps(lo, a, gen + 1, max_gen, t);
    t.gap_lo.push_back(a);
    t.gap_hi.push_back(b);
    collect_gaps(b, hi, gen + 1, max_gen, t);
}

std::shared_ptr<const CantorTable> build_cantor_table(int generation) {
    auto t = std::make_shared<CantorTable>();
    collect_gaps(0.0, 1.0, 1, generation, *t);
    t->prefix.resize(t->gap_lo.size() + 1, 0.0);
    KahanSum acc;
    for (std::size_t i = 0; i < t->gap_lo.size(); ++i) {
        t->prefix[i] = acc.value();
        const double len = t->gap_hi[i] - t->gap_lo[i];
        acc.add(len * len / 4.0);  // tent integral over one gap
    }
    t->prefix[t->gap_lo.size()] = acc.value();
    t->total = acc.value();
    return t;
}

double cantor_beta(const CantorTable& t, double x) {
    auto it = std::upper_bound(t.gap_lo.begin(), t.gap_lo.end(), x);
    if (it == t.gap_lo.begin()) return 0.0;
    const std::size_t i = static_cast<std::size_t>(it - t.gap_lo.begin()) - 1;
    if (x >= t.gap_hi[i]) return 0.0;
    const double mid = 0.5 * (t.gap_lo[i] + t.gap_hi[i]);
    return x < mid ? x - t.gap_lo[i] : t.gap_hi[i] - x;
}

double cantor_beta_integral(const CantorTable& t, double x) {
    auto it = std::upper_bound(t.gap_lo.begin(), t.gap_lo.end(), x);
    if (it == t.gap_lo.begin()) return 0.0;
    const std::size_t i = static_cast<std::size_t>(it - t.gap_lo.begin()) - 1;
    double base = t.prefix[i];
    const double lo = t.gap_lo[i];
    const double hi = t.gap_hi[i];
    if (x >= hi) return t.prefix[i + 1];
    const double mid = 0.5 * (lo + hi);
    if (x < mid) {
        const double u = x - lo;
        return base + 0.5 * u * u;
    }
    const double half = (hi - lo) * 0.5;
    const double w = hi - x;
    return base + 0.5 * half * half + 0.5 * (half * half - w * w);
}

MapSystem make_cantor_circle(const std::map<std::string, double>& params) {
    reject_unknown_params("cantor_circle", params, {"generation"});
    const double gen_raw = get_param(params, "generation", 12.0);
    const int gen = static_cast<int>(std::llround(gen_raw));
    if (std::fabs(gen_raw - gen) > 1e-9 || gen < 1 || gen > 20)
        throw construction_error("cantor_circle: generation must be an integer in [1, 20]");
    auto table = build_cantor_table(gen);

    MapSystem m;
    m.name = "cantor_circle";
    m.domain = DomainDescriptor::circle();
    m.params = {{"generation", static_cast<double>(gen)}};
    m.eval = [table](const Vec& x) {
        Vec y(1);
        y[0] = wrap01(x[0] + cantor_beta_integral(*table, x[0]) / table->total);
        return y;
    };
    m.jacobian = [table](const Vec& x) {
        Mat j(1, 1);
        j(0, 0) = 1.0 + cantor_beta(*table, x[0]) / table->total;
        return j;
    };
    m.jacobian_status = [table](const Vec& x) {
        JacobianStatus st;
        // beta has kinks at gap endpoints and midpoints; the first derivative
        // of the map is continuous there but one-sided beyond that.
        auto it = std::upper_bound(table->gap_lo.begin(), table->gap_lo.end(),
                                   x[0] + kTauBranch);
        if (it != table->gap_lo.begin()) {
            const std::size_t i = static_cast<std::size_t>(it - table->gap_lo.begin()) - 1;
            const double lo = table->gap_lo[i];
            const double hi = table->gap_hi[i];
            const double mid = 0.5 * (lo + hi);
            if (std::fabs(x[0] - lo) <= kTauBranch || std::fabs(x[0] - hi) <= kTauBranch ||
                std::fabs(x[0] - mid) <= kTauBranch) {
                st.one_sided = true;
            }
        }
        return st;
    };
    m.splitting = expanding_1d_hint();
    m.reference_kind = MapSystem::ReferenceKind::None;
    return m;
}

}  // namespace

Vec eval_map(const MapSystem& map, const Vec& x) {
    if (x.size() != map.domain.dim)
        throw domain_error(map.name + ": point dimension mismatch");
    const Vec xr = map.domain.reduce(x);
    if (!map.domain.contains(xr))
        throw domain_error(map.name + ": point outside domain bounds");
    return map.eval(xr);
}

MapSystem build_catalog_map(const std::string& name,
                            const std::map<std::string, double>& params) {
    if (name == "g_alpha") return make_g_alpha(params);
    if (name == "doubling_d") return make_doubling(params);
    if (name == "cat") return make_cat(params);
    if (name == "solenoid_alpha") return make_solenoid(params);
    if (name == "skew_torus") return make_skew_torus(params);
    if (name == "cantor_circle") return make_cantor_circle(params);
    if (name == "da_torus") return make_da_torus(params);
    throw unsupported_map_error("unknown catalog map '" + name +
                                "'; valid names: g_alpha, doubling_d, cat, "
                                "da_torus, solenoid_alpha, skew_torus, "
                                "cantor_circle");
}

std::string parameter_record(const MapSystem& map) {
    std::ostringstream os;
    os << map.name;
    for (const auto& [key, value] : map.params)
        os << " " << key << "=" << format_double(value);
    return os.str();
}

}  // namespace zn
