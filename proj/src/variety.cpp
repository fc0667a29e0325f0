#include "germlab/variety.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "germlab/kdtree.hpp"
#include "germlab/linalg.hpp"
#include "germlab/parallel.hpp"
#include "germlab/rng.hpp"

namespace germlab {

// ---------------------------------------------------------------------------
// VarietySpec
// ---------------------------------------------------------------------------

void VarietySpec::validate() const {
    require(!variables.empty(), ErrorCode::InputError, "VarietySpec: no variables");
    require(!equations.empty(), ErrorCode::InputError, "VarietySpec: no equations");
    for (const auto& e : equations) {
        require(e.nvars() == nvars(), ErrorCode::InputError,
                "VarietySpec: equation variable count mismatch");
    }
    if (weights) {
        require(weights->valid(), ErrorCode::InputError, "VarietySpec: invalid weights");
        require(static_cast<int>(weights->w.size()) == nvars(), ErrorCode::InputError,
                "VarietySpec: weight count mismatch");
    }
    if (field == Field::Real) {
        for (const auto& e : equations)
            require(e.has_real_coefficients(1e-14), ErrorCode::InputError,
                    "VarietySpec: real variety needs real coefficients");
    }
}

bool VarietySpec::is_weighted_homogeneous() const {
    if (!weights) return false;
    for (const auto& e : equations)
        if (e.weighted_degree(weights->w) < 0) return false;
    return true;
}

void VarietySpec::complex_point(std::span<const double> p, std::vector<Cplx>& z) const {
    z.resize(nvars());
    if (field == Field::Complex) {
        for (int v = 0; v < nvars(); ++v) z[v] = Cplx(p[2 * v], p[2 * v + 1]);
    } else {
        for (int v = 0; v < nvars(); ++v) z[v] = Cplx(p[v], 0.0);
    }
}

std::vector<Cplx> VarietySpec::eval(std::span<const double> p) const {
    require(static_cast<int>(p.size()) == ambient_real_dim(), ErrorCode::InputError,
            "VarietySpec::eval: wrong ambient dimension");
    std::vector<Cplx> z;
    complex_point(p, z);
    std::vector<Cplx> out(equations.size());
    for (size_t j = 0; j < equations.size(); ++j) out[j] = equations[j].eval(z);
    return out;
}

double VarietySpec::scaled_residual(std::span<const double> p) const {
    const double r = norm(p);
    std::vector<Cplx> z;
    complex_point(p, z);
    double worst = 0.0;
    for (const auto& e : equations) {
        const double scale = std::max(e.magnitude_at_radius(r), 1e-300);
        worst = std::max(worst, std::abs(e.eval(z)) / scale);
    }
    return worst;
}

void VarietySpec::finalize() {
    validate();
    jac_.assign(equations.size(), {});
    for (size_t j = 0; j < equations.size(); ++j) {
        jac_[j].reserve(nvars());
        for (int v = 0; v < nvars(); ++v) jac_[j].push_back(equations[j].derivative(v));
    }
}

void VarietySpec::real_jacobian(std::span<const double> p, std::vector<double>& rows,
                                int& m) const {
    require(!jac_.empty(), ErrorCode::InputError, "VarietySpec: finalize() not called");
    const int dim = ambient_real_dim();
    std::vector<Cplx> z;
    complex_point(p, z);
    const int rows_per_eq = field == Field::Complex ? 2 : 1;
    m = rows_per_eq * static_cast<int>(equations.size());
    rows.assign(static_cast<size_t>(m) * dim, 0.0);
    for (size_t j = 0; j < equations.size(); ++j) {
        for (int v = 0; v < nvars(); ++v) {
            const Cplx g = jac_[j][v].eval(z);
            if (field == Field::Complex) {
                // d(Re f)/d(re,im) = (Re g, -Im g); d(Im f)/d(re,im) = (Im g, Re g)
                double* re_row = rows.data() + (2 * j) * dim;
                double* im_row = rows.data() + (2 * j + 1) * dim;
                re_row[2 * v] = g.real();
                re_row[2 * v + 1] = -g.imag();
                im_row[2 * v] = g.imag();
                im_row[2 * v + 1] = g.real();
            } else {
                rows[j * dim + v] = g.real();
            }
        }
    }
}

SampleCloud SampleCloud::subset(std::span<const int> indices) const {
    SampleCloud s;
    s.dim = dim;
    s.r_min = r_min;
    s.r_max = r_max;
    s.seed = seed;
    s.law = law;
    s.spec = spec;
    s.coords.reserve(indices.size() * dim);
    s.radius.reserve(indices.size());
    s.residual.reserve(indices.size());
    for (int i : indices) {
        const auto p = point(i);
        s.coords.insert(s.coords.end(), p.begin(), p.end());
        s.radius.push_back(radius[i]);
        s.residual.push_back(residual[i]);
    }
    return s;
}

// ---------------------------------------------------------------------------
// Gauss-Newton projection
// ---------------------------------------------------------------------------

namespace {

struct ResidualSystem {
    const VarietySpec& spec;
    const ProjectionOptions& opts;
    int dim;
    std::vector<int> free_cols;  // ambient coordinates allowed to move

    ResidualSystem(const VarietySpec& s, const ProjectionOptions& o)
        : spec(s), opts(o), dim(s.ambient_real_dim()) {
        std::vector<bool> pinned(dim, false);
        for (int v : o.zero_vars) {
            require(v >= 0 && v < s.nvars(), ErrorCode::InputError, "bad pinned variable");
            if (s.field == Field::Complex) {
                pinned[2 * v] = pinned[2 * v + 1] = true;
            } else {
                pinned[v] = true;
            }
        }
        for (int c = 0; c < dim; ++c)
            if (!pinned[c]) free_cols.push_back(c);
    }

    void pin(std::span<double> p) const {
        for (int v : opts.zero_vars) {
            if (spec.field == Field::Complex) {
                p[2 * v] = p[2 * v + 1] = 0.0;
            } else {
                p[v] = 0.0;
            }
        }
    }

    // Scaled residual vector and its Jacobian over the free columns.
    // Returns the max |component| of F.
    double assemble(std::span<const double> p, std::vector<double>& f,
                    std::vector<double>& jrows, int& m) const {
        const double r = norm(p);
        std::vector<Cplx> z;
        spec.complex_point(p, z);
        const int rows_per_eq = spec.field == Field::Complex ? 2 : 1;
        const int eqs = static_cast<int>(spec.equations.size());
        const bool sphere = opts.target_radius > 0.0;
        m = rows_per_eq * eqs + (sphere ? 1 : 0);
        const int nc = static_cast<int>(free_cols.size());

        std::vector<double> full_rows;
        int full_m = 0;
        spec.real_jacobian(p, full_rows, full_m);

        f.assign(m, 0.0);
        jrows.assign(static_cast<size_t>(m) * nc, 0.0);
        double worst = 0.0;
        for (int j = 0; j < eqs; ++j) {
            const Cplx val = spec.equations[j].eval(z);
            const double scale =
                std::max(spec.equations[j].magnitude_at_radius(std::max(r, 1e-12)), 1e-300);
            const double inv = 1.0 / scale;
            if (spec.field == Field::Complex) {
                f[2 * j] = val.real() * inv;
                f[2 * j + 1] = val.imag() * inv;
            } else {
                f[j] = val.real() * inv;
            }
            for (int rr = 0; rr < rows_per_eq; ++rr) {
                const int row = rows_per_eq * j + rr;
                for (int c = 0; c < nc; ++c)
                    jrows[static_cast<size_t>(row) * nc + c] =
                        full_rows[static_cast<size_t>(row) * dim + free_cols[c]] * inv;
            }
        }
        for (int j = 0; j < rows_per_eq * eqs; ++j) worst = std::max(worst, std::fabs(f[j]));
        if (sphere) {
            const double rt = opts.target_radius;
            const int row = m - 1;
            f[row] = (r * r - rt * rt) / (2.0 * rt * rt);
            for (int c = 0; c < nc; ++c)
                jrows[static_cast<size_t>(row) * nc + c] = p[free_cols[c]] / (rt * rt);
            worst = std::max(worst, std::fabs(f[row]));
        }
        return worst;
    }
};

}  // namespace

GermPoint project_to_variety(const VarietySpec& spec, std::span<const double> p0,
                             const ProjectionOptions& opts, double* step_sum) {
    require(static_cast<int>(p0.size()) == spec.ambient_real_dim(), ErrorCode::InputError,
            "project_to_variety: wrong ambient dimension");
    require(opts.tol > 0.0, ErrorCode::InputError, "project_to_variety: tol must be > 0");

    const ResidualSystem sys(spec, opts);
    const int nc = static_cast<int>(sys.free_cols.size());
    // working scale: the sphere radius when constrained, else the unit
    // ball the germ is studied in
    const double scale0 =
        opts.target_radius > 0.0 ? opts.target_radius : std::max(norm(p0), 1.0);

    std::vector<double> p(p0.begin(), p0.end());
    sys.pin(p);
    require(norm(p) > opts.origin_guard * scale0, ErrorCode::NearSingularPoint,
            "project_to_variety: start point too close to the singular origin");

    std::vector<double> f, jrows, fn;
    std::vector<double> trial(p.size());
    double steps = 0.0;
    double lambda = 1e-12;
    int m = 0;

    double res = sys.assemble(p, f, jrows, m);
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        if (res <= opts.tol) {
            if (step_sum) *step_sum = steps;
            GermPoint g;
            g.coords = p;
            g.radius = norm(p);
            g.residual = spec.scaled_residual(p);
            return g;
        }
        // normal equations on J J^T
        std::vector<double> jjt(static_cast<size_t>(m) * m, 0.0);
        for (int a = 0; a < m; ++a)
            for (int b = a; b < m; ++b) {
                double s = 0.0;
                for (int c = 0; c < nc; ++c)
                    s += jrows[static_cast<size_t>(a) * nc + c] *
                         jrows[static_cast<size_t>(b) * nc + c];
                jjt[a * m + b] = jjt[b * m + a] = s;
            }
        double trace = 0.0;
        for (int a = 0; a < m; ++a) trace += jjt[a * m + a];
        const double floor = std::max(trace / m, 1e-30);

        bool accepted = false;
        for (int attempt = 0; attempt < 10 && !accepted; ++attempt) {
            std::vector<double> damped = jjt;
            for (int a = 0; a < m; ++a) damped[a * m + a] += lambda * floor;
            std::vector<double> y(m, 0.0), negf(m);
            for (int a = 0; a < m; ++a) negf[a] = -f[a];
            if (!cholesky_solve(damped, m, negf, y)) {
                lambda = std::max(lambda * 100.0, 1e-8);
                continue;
            }
            std::copy(p.begin(), p.end(), trial.begin());
            double step_norm2 = 0.0;
            for (int c = 0; c < nc; ++c) {
                double d = 0.0;
                for (int a = 0; a < m; ++a) d += jrows[static_cast<size_t>(a) * nc + c] * y[a];
                trial[sys.free_cols[c]] += d;
                step_norm2 += d * d;
            }
            if (norm(trial) < opts.origin_guard * scale0)
                fail(ErrorCode::NearSingularPoint,
                     "project_to_variety: iterate collapsed into the singular origin");
            int mn = 0;
            const double res_new = sys.assemble(trial, fn, jrows, mn);
            if (std::isfinite(res_new) && res_new < res) {
                p.swap(trial);
                f.swap(fn);
                res = res_new;
                steps += std::sqrt(step_norm2);
                lambda = std::max(lambda * 0.25, 1e-14);
                accepted = true;
            } else {
                lambda = std::max(lambda * 10.0, 1e-10);
            }
        }
        if (!accepted) break;  // stagnated
    }
    if (res <= opts.tol) {
        if (step_sum) *step_sum = steps;
        GermPoint g;
        g.coords = p;
        g.radius = norm(p);
        g.residual = spec.scaled_residual(p);
        return g;
    }
    fail(ErrorCode::NoConvergence, "project_to_variety: no convergence (residual " +
                                       std::to_string(res) + ")");
}

GermPoint project_to_variety(const VarietySpec& spec, std::span<const double> p0, double tol,
                             int max_iter) {
    ProjectionOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    return project_to_variety(spec, p0, opts);
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

namespace {

// One projected link point from a seeded substream, or empty.
bool try_sample_slice_point(const VarietySpec& spec, double r, Rng& rng,
                            const ProjectionOptions& opts, std::vector<double>& out) {
    const int dim = spec.ambient_real_dim();
    std::vector<double> dir(dim);
    rng.unit_vector(dir);
    for (int v : opts.zero_vars) {
        if (spec.field == Field::Complex) {
            dir[2 * v] = dir[2 * v + 1] = 0.0;
        } else {
            dir[v] = 0.0;
        }
    }
    const double dn = norm(dir);
    if (dn < 1e-12) return false;
    for (auto& x : dir) x *= r / dn;
    try {
        GermPoint g = project_to_variety(spec, dir, opts);
        out = std::move(g.coords);
        return true;
    } catch (const Error&) {
        return false;
    }
}

constexpr int kTriesPerSlot = 200;

}  // namespace

SampleCloud sample_sphere_slice(const std::shared_ptr<const VarietySpec>& spec, double r, int n,
                                uint64_t seed, double tol) {
    require(spec != nullptr, ErrorCode::InputError, "sample_sphere_slice: null spec");
    require(r > 0.0, ErrorCode::InputError, "sample_sphere_slice: radius must be > 0");
    require(n >= 1, ErrorCode::InputError, "sample_sphere_slice: n must be >= 1");

    const int dim = spec->ambient_real_dim();
    ProjectionOptions opts;
    opts.tol = tol;
    opts.target_radius = r;

    std::vector<std::vector<double>> slot(n);
    parallel_for(n, [&](int i) {
        Rng rng(substream_seed(seed, static_cast<uint64_t>(i)));
        std::vector<double> pt;
        for (int t = 0; t < kTriesPerSlot; ++t) {
            if (try_sample_slice_point(*spec, r, rng, opts, pt)) {
                slot[i] = std::move(pt);
                return;
            }
        }
    });

    SampleCloud cloud;
    cloud.dim = dim;
    cloud.r_min = cloud.r_max = r;
    cloud.seed = seed;
    cloud.law = SamplingLaw::SphereSlice;
    cloud.spec = spec;
    int ok = 0;
    for (auto& s : slot)
        if (!s.empty()) ++ok;
    if (ok == 0) fail(ErrorCode::EmptySlice, "sample_sphere_slice: no point converged at r=" +
                                                 std::to_string(r));
    if (ok < n)
        fail(ErrorCode::NoConvergence,
             "sample_sphere_slice: only " + std::to_string(ok) + "/" + std::to_string(n) +
                 " slots converged");
    for (auto& s : slot) cloud.push(s, spec->scaled_residual(s));
    return cloud;
}

SampleCloud sample_ball(const std::shared_ptr<const VarietySpec>& spec, double r_min,
                        double r_max, int n, uint64_t seed, double tol, RadialLaw law) {
    require(spec != nullptr, ErrorCode::InputError, "sample_ball: null spec");
    require(0.0 <= r_min && r_min < r_max, ErrorCode::InputError, "sample_ball: bad radius band");
    require(law == RadialLaw::ConeUniform || r_min > 0.0, ErrorCode::InputError,
            "sample_ball: log-uniform law needs r_min > 0");
    require(n >= 1, ErrorCode::InputError, "sample_ball: n must be >= 1");

    const int k = std::max(spec->germ_real_dim(), 1);
    const int dim = spec->ambient_real_dim();
    const double lo_frac = std::pow(std::max(r_min, 1e-300) / r_max, k);
    const double log_lo = std::log(std::max(r_min, 1e-300)), log_hi = std::log(r_max);

    std::vector<std::vector<double>> slot(n);
    parallel_for(n, [&](int i) {
        Rng rng(substream_seed(seed ^ 0x5ba11ull, static_cast<uint64_t>(i)));
        std::vector<double> pt;
        for (int t = 0; t < kTriesPerSlot; ++t) {
            double r;
            if (law == RadialLaw::ConeUniform) {
                const double u = lo_frac + (1.0 - lo_frac) * rng.uniform01();
                r = r_max * std::pow(u, 1.0 / k);
            } else {
                r = std::exp(rng.uniform(log_lo, log_hi));
            }
            ProjectionOptions opts;
            opts.tol = tol;
            opts.target_radius = r;
            if (try_sample_slice_point(*spec, r, rng, opts, pt)) {
                slot[i] = std::move(pt);
                return;
            }
        }
    });

    SampleCloud cloud;
    cloud.dim = dim;
    cloud.r_min = r_min;
    cloud.r_max = r_max;
    cloud.seed = seed;
    cloud.law = SamplingLaw::BallUniform;
    cloud.spec = spec;
    int ok = 0;
    for (auto& s : slot)
        if (!s.empty()) ++ok;
    if (ok == 0) fail(ErrorCode::EmptySlice, "sample_ball: no point converged");
    if (ok < n)
        fail(ErrorCode::NoConvergence, "sample_ball: only " + std::to_string(ok) + "/" +
                                           std::to_string(n) + " slots converged");
    for (auto& s : slot) cloud.push(s, spec->scaled_residual(s));
    return cloud;
}

SampleCloud sample_region(const std::shared_ptr<const VarietySpec>& spec, double r, int n,
                          uint64_t seed, const std::function<bool(std::span<const double>)>& keep,
                          double tol) {
    require(spec != nullptr, ErrorCode::InputError, "sample_region: null spec");
    require(r > 0.0 && n >= 1, ErrorCode::InputError, "sample_region: bad arguments");

    const int dim = spec->ambient_real_dim();
    ProjectionOptions opts;
    opts.tol = tol;
    opts.target_radius = r;

    std::vector<std::vector<double>> slot(n);
    parallel_for(n, [&](int i) {
        Rng rng(substream_seed(seed ^ 0x7e910ull, static_cast<uint64_t>(i)));
        std::vector<double> pt;
        for (int t = 0; t < kTriesPerSlot; ++t) {
            if (try_sample_slice_point(*spec, r, rng, opts, pt) && keep(pt)) {
                slot[i] = std::move(pt);
                return;
            }
        }
    });

    SampleCloud cloud;
    cloud.dim = dim;
    cloud.r_min = cloud.r_max = r;
    cloud.seed = seed;
    cloud.law = SamplingLaw::RegionRestricted;
    cloud.spec = spec;
    int ok = 0;
    for (auto& s : slot)
        if (!s.empty()) ++ok;
    if (ok < n)
        fail(ErrorCode::EmptySlice, "sample_region: acceptance collapsed (" + std::to_string(ok) +
                                        "/" + std::to_string(n) + ")");
    for (auto& s : slot) cloud.push(s, spec->scaled_residual(s));
    return cloud;
}

// ---------------------------------------------------------------------------
// Scaling action
// ---------------------------------------------------------------------------

void weighted_scale(std::span<const double> p, const WeightVector& w, double t,
                    std::span<double> out) {
    require(t > 0.0, ErrorCode::InputError, "weighted_scale: t must be > 0");
    require(w.valid(), ErrorCode::InputError, "weighted_scale: invalid weights");
    const int nv = static_cast<int>(w.w.size());
    const double w_last = static_cast<double>(w.w.back());
    if (static_cast<int>(p.size()) == 2 * nv) {
        for (int v = 0; v < nv; ++v) {
            const double s = std::pow(t, w.w[v] / w_last);
            out[2 * v] = s * p[2 * v];
            out[2 * v + 1] = s * p[2 * v + 1];
        }
    } else if (static_cast<int>(p.size()) == nv) {
        for (int v = 0; v < nv; ++v) out[v] = std::pow(t, w.w[v] / w_last) * p[v];
    } else {
        fail(ErrorCode::InputError, "weighted_scale: point/weight dimension mismatch");
    }
}

std::vector<double> weighted_scale(std::span<const double> p, const WeightVector& w, double t) {
    std::vector<double> out(p.size());
    weighted_scale(p, w, t, out);
    return out;
}

void s1_action(std::span<const double> p, const WeightVector& w, double theta,
               std::span<double> out) {
    const int nv = static_cast<int>(w.w.size());
    require(static_cast<int>(p.size()) == 2 * nv, ErrorCode::InputError,
            "s1_action: complex point expected");
    for (int v = 0; v < nv; ++v) {
        const double c = std::cos(w.w[v] * theta), s = std::sin(w.w[v] * theta);
        const double re = p[2 * v], im = p[2 * v + 1];
        out[2 * v] = c * re - s * im;
        out[2 * v + 1] = s * re + c * im;
    }
}

double radial_tangency_weight(const VarietySpec& spec, std::span<const double> p, double cap) {
    const int dim = spec.ambient_real_dim();
    const double r = norm(p);
    require(r > 0.0, ErrorCode::InputError, "radial_tangency_weight: zero point");
    std::vector<double> rows;
    int m = 0;
    spec.real_jacobian(p, rows, m);
    const int rank = orthonormalize_rows(rows, m, dim, 1e-10 * r);
    // tangential component of the unit radial direction
    double normal2 = 0.0;
    for (int j = 0; j < rank; ++j) {
        double dot = 0.0;
        for (int c = 0; c < dim; ++c) dot += rows[static_cast<size_t>(j) * dim + c] * p[c];
        dot /= r;
        normal2 += dot * dot;
    }
    const double tang2 = std::max(1.0 - normal2, 0.0);
    const double w = tang2 > 0.0 ? 1.0 / std::sqrt(tang2) : cap;
    return std::clamp(w, 1.0, cap);
}

double orbit_param_for_radius(std::span<const double> p, const WeightVector& w, double s) {
    require(s > 0.0, ErrorCode::InputError, "orbit_param_for_radius: s must be > 0");
    const double pn = norm(p);
    require(pn > 0.0, ErrorCode::InputError, "orbit_param_for_radius: zero point");

    const int nv = static_cast<int>(w.w.size());
    const double w_last = static_cast<double>(w.w.back());
    const bool cplx = static_cast<int>(p.size()) == 2 * nv;
    std::vector<double> block2(nv, 0.0), expo(nv, 0.0);
    for (int v = 0; v < nv; ++v) {
        block2[v] = cplx ? p[2 * v] * p[2 * v] + p[2 * v + 1] * p[2 * v + 1] : p[v] * p[v];
        expo[v] = 2.0 * w.w[v] / w_last;
    }
    auto radius2 = [&](double t) {
        double r2 = 0.0;
        for (int v = 0; v < nv; ++v)
            if (block2[v] > 0.0) r2 += std::pow(t, expo[v]) * block2[v];
        return r2;
    };

    // bracket then bisect on the strictly increasing radius(t)
    double lo = s / pn, hi = s / pn;
    for (int it = 0; it < 200 && radius2(lo) > s * s; ++it) lo *= 0.5;
    for (int it = 0; it < 200 && radius2(hi) < s * s; ++it) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (radius2(mid) < s * s)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-15 * hi) break;
    }
    return std::sqrt(lo * hi);
}

// ---------------------------------------------------------------------------
// Branch components
// ---------------------------------------------------------------------------

GapClusters cluster_by_gap(const PointsView& pts, double ratio_cut, double ambiguous_lo,
                           int knn) {
    const int n = pts.n;
    require(n >= 2, ErrorCode::InputError, "cluster_by_gap: need >= 2 points");
    KdTree tree(pts.data, n, pts.dim);

    struct Edge {
        double d;
        int a, b;
        bool operator<(const Edge& o) const {
            return d < o.d || (d == o.d && (a < o.a || (a == o.a && b < o.b)));
        }
    };
    const int k = std::min(knn, n - 1);
    std::vector<Edge> edges;
    edges.reserve(static_cast<size_t>(n) * k);
    {
        std::vector<std::vector<KdTree::Hit>> hits(n);
        parallel_for(n, [&](int i) { tree.knn(pts.point(i), k, hits[i], i); });
        for (int i = 0; i < n; ++i)
            for (const auto& h : hits[i])
                if (h.idx > i)
                    edges.push_back({std::sqrt(h.d2), i, h.idx});
                else
                    edges.push_back({std::sqrt(h.d2), h.idx, i});
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const Edge& x, const Edge& y) {
                                return x.a == y.a && x.b == y.b;
                            }),
                edges.end());

    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };

    double max_merge = 0.0;
    for (const auto& e : edges) {
        const int ra = find(e.a), rb = find(e.b);
        if (ra != rb) {
            parent[std::max(ra, rb)] = std::min(ra, rb);
            max_merge = std::max(max_merge, e.d);
        }
    }

    // components of the kNN graph
    std::vector<int> comp(n, -1);
    std::vector<int> roots;
    for (int i = 0; i < n; ++i) {
        const int r = find(i);
        if (comp[r] < 0) {
            comp[r] = static_cast<int>(roots.size());
            roots.push_back(r);
        }
        comp[i] = comp[r];
    }
    const int nc = static_cast<int>(roots.size());
    GapClusters out;
    out.max_intra_gap = max_merge;
    if (nc == 1) {
        out.labels = comp;
        out.count = 1;
        out.min_inter_gap = std::numeric_limits<double>::infinity();
        return out;
    }
    require(nc <= 64, ErrorCode::AmbiguousClustering,
            "cluster_by_gap: sample shattered into too many pieces");

    // pairwise separations between kNN-graph components
    std::vector<std::vector<int>> members(nc);
    for (int i = 0; i < n; ++i) members[comp[i]].push_back(i);
    std::vector<std::vector<double>> flat(nc);
    std::vector<KdTree> ctree(nc);
    for (int c = 0; c < nc; ++c) {
        flat[c].reserve(members[c].size() * pts.dim);
        for (int i : members[c]) {
            const auto p = pts.point(i);
            flat[c].insert(flat[c].end(), p.begin(), p.end());
        }
        ctree[c].build(flat[c].data(), static_cast<int>(members[c].size()), pts.dim);
    }
    const double scale = std::max(max_merge, 1e-300);
    std::vector<double> pair_d(static_cast<size_t>(nc) * nc, 0.0);
    for (int a = 0; a < nc; ++a) {
        for (int b = a + 1; b < nc; ++b) {
            const auto& small = members[a].size() <= members[b].size() ? members[a] : members[b];
            const auto& big_tree = members[a].size() <= members[b].size() ? ctree[b] : ctree[a];
            double d = std::numeric_limits<double>::infinity();
            for (int i : small) d = std::min(d, std::sqrt(big_tree.nearest(pts.point(i)).d2));
            pair_d[a * nc + b] = pair_d[b * nc + a] = d;
        }
    }

    // phase 1: close pairs are the same cluster
    std::vector<int> cparent(nc);
    std::iota(cparent.begin(), cparent.end(), 0);
    std::function<int(int)> cfind = [&](int x) {
        while (cparent[x] != x) {
            cparent[x] = cparent[cparent[x]];
            x = cparent[x];
        }
        return x;
    };
    for (int a = 0; a < nc; ++a)
        for (int b = a + 1; b < nc; ++b)
            if (pair_d[a * nc + b] < ambiguous_lo * scale) {
                const int ra = cfind(a), rb = cfind(b);
                if (ra != rb) {
                    cparent[std::max(ra, rb)] = std::min(ra, rb);
                    out.max_intra_gap = std::max(out.max_intra_gap, pair_d[a * nc + b]);
                }
            }

    // phase 2: remaining separations must clear the ratio cut
    double min_inter = std::numeric_limits<double>::infinity();
    bool ambiguous = false;
    for (int a = 0; a < nc; ++a)
        for (int b = a + 1; b < nc; ++b)
            if (cfind(a) != cfind(b)) {
                const double d = pair_d[a * nc + b];
                min_inter = std::min(min_inter, d);
                if (d < ratio_cut * scale) ambiguous = true;
            }
    if (ambiguous)
        fail(ErrorCode::AmbiguousClustering,
             "cluster_by_gap: separation/gap ratio in the ambiguous band");

    std::vector<int> clabel(nc, -1);
    int k2 = 0;
    for (int c = 0; c < nc; ++c) {
        const int r = cfind(c);
        if (clabel[r] < 0) clabel[r] = k2++;
        clabel[c] = clabel[r];
    }
    out.labels.resize(n);
    for (int i = 0; i < n; ++i) out.labels[i] = clabel[comp[i]];
    out.count = k2;
    out.min_inter_gap = min_inter;
    return out;
}

namespace {

Polynomial drop_variable(const Polynomial& p, int var) {
    Polynomial out(p.nvars() - 1);
    for (const Term& t : p.terms()) {
        require(t.exps[var] == 0, ErrorCode::InputError, "drop_variable: variable still present");
        std::vector<int> exps;
        exps.reserve(t.exps.size() - 1);
        for (size_t v = 0; v < t.exps.size(); ++v)
            if (static_cast<int>(v) != var) exps.push_back(t.exps[v]);
        out.add_term(t.coeff, std::move(exps));
    }
    return out;
}

std::vector<std::vector<int>> group_labels(const std::vector<int>& labels) {
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    std::vector<std::vector<int>> groups(k);
    for (size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(static_cast<int>(i));
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a.front() < b.front();
    });
    return groups;
}

}  // namespace

BranchComponents branch_components(const std::shared_ptr<const VarietySpec>& spec, int slice_var,
                                   double r, int n, uint64_t seed, double gap_factor) {
    require(spec != nullptr, ErrorCode::InputError, "branch_components: null spec");
    require(slice_var >= 0 && slice_var < spec->nvars(), ErrorCode::InputError,
            "branch_components: bad slice variable");
    require(r > 0.0 && n >= 8, ErrorCode::InputError, "branch_components: bad r or n");

    // Reduce the system to the hyperplane {slice_var = 0}.
    auto sub = std::make_shared<VarietySpec>();
    sub->name = spec->name + "-slice";
    sub->field = spec->field;
    for (int v = 0; v < spec->nvars(); ++v)
        if (v != slice_var) sub->variables.push_back(spec->variables[v]);

    BranchComponents out;
    bool any_eq = false;
    for (const auto& e : spec->equations) {
        Polynomial reduced = e.substitute_zero(slice_var);
        if (reduced.empty()) continue;
        if (reduced.total_degree() == 0)
            fail(ErrorCode::EmptySlice, "branch_components: slice variety is empty");
        sub->equations.push_back(drop_variable(reduced, slice_var));
        any_eq = true;
    }

    SampleCloud sub_cloud;
    if (!any_eq) {
        // The hyperplane lies inside X: the slice is the whole subspace.
        out.slice_is_full_subspace = true;
        const int sub_dim = sub->field == Field::Complex ? 2 * static_cast<int>(sub->variables.size())
                                                         : static_cast<int>(sub->variables.size());
        sub_cloud.dim = sub_dim;
        sub_cloud.r_min = sub_cloud.r_max = r;
        sub_cloud.seed = seed;
        sub_cloud.law = SamplingLaw::SphereSlice;
        std::vector<double> dir(sub_dim);
        for (int i = 0; i < n; ++i) {
            Rng rng(substream_seed(seed, static_cast<uint64_t>(i)));
            rng.unit_vector(dir);
            for (auto& x : dir) x *= r;
            sub_cloud.push(dir, 0.0);
        }
    } else {
        sub->finalize();
        sub_cloud = sample_sphere_slice(std::shared_ptr<const VarietySpec>(sub), r, n, seed);
    }

    // Embed back into the full ambient space.
    const int dim = spec->ambient_real_dim();
    SampleCloud full;
    full.dim = dim;
    full.r_min = full.r_max = r;
    full.seed = seed;
    full.law = SamplingLaw::SphereSlice;
    full.spec = spec;
    const bool cplx = spec->field == Field::Complex;
    const int lo = cplx ? 2 * slice_var : slice_var;
    const int width = cplx ? 2 : 1;
    std::vector<double> p(dim, 0.0);
    for (int i = 0; i < sub_cloud.n(); ++i) {
        const auto q = sub_cloud.point(i);
        int src = 0;
        for (int c = 0; c < dim; ++c) {
            if (c >= lo && c < lo + width)
                p[c] = 0.0;
            else
                p[c] = q[src++];
        }
        full.push(p, spec->scaled_residual(p));
    }

    // Slice links are curves; densify along the S^1 orbits when available
    // so the gap statistics sharpen, then count by the gap-ratio rule.
    const bool augment = spec->field == Field::Complex && spec->weights &&
                         spec->is_weighted_homogeneous();
    const int m_rot = augment ? 16 : 1;
    const int n_pts = full.n();

    auto build_augmented = [&](int stride) {
        std::vector<double> aug;
        std::vector<int> base_of;
        std::vector<double> q(dim);
        for (int i = 0; i < n_pts; i += stride) {
            const auto pt = full.point(i);
            for (int j = 0; j < m_rot; ++j) {
                if (augment) {
                    s1_action(pt, *spec->weights, 2.0 * M_PI * j / m_rot, q);
                    aug.insert(aug.end(), q.begin(), q.end());
                } else {
                    aug.insert(aug.end(), pt.begin(), pt.end());
                }
                base_of.push_back(i);
            }
        }
        return std::pair(std::move(aug), std::move(base_of));
    };

    auto [aug, base_of] = build_augmented(1);
    const PointsView aug_view{aug.data(), static_cast<int>(base_of.size()), dim};
    const GapClusters gc = cluster_by_gap(aug_view, gap_factor * 0.8, gap_factor * 0.5);

    // stability: the even-index half must give the same count
    auto [aug_half, base_half] = build_augmented(2);
    const PointsView half_view{aug_half.data(), static_cast<int>(base_half.size()), dim};
    const GapClusters gc_half = cluster_by_gap(half_view, gap_factor * 0.8, gap_factor * 0.5);
    if (gc.count != gc_half.count)
        fail(ErrorCode::AmbiguousClustering,
             "branch_components: cluster count unstable (" + std::to_string(gc.count) + " vs " +
                 std::to_string(gc_half.count) + " on half sample)");

    std::vector<int> base_labels(n_pts);
    for (size_t a = 0; a < base_of.size(); a += m_rot) base_labels[base_of[a]] = gc.labels[a];
    out.slice_cloud = std::move(full);
    out.clusters = group_labels(base_labels);
    out.gap_threshold = gc.max_intra_gap;
    return out;
}

// ---------------------------------------------------------------------------
// Config + catalog
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    size_t b = s.find_last_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

Cplx parse_scalar(const std::string& text) {
    // constant expression: reuse the polynomial parser with a dummy variable
    Polynomial p = parse_polynomial(text, {"__dummy"});
    require(p.total_degree() == 0, ErrorCode::ParseError, "expected a scalar: " + text);
    const Cplx z0(0.0, 0.0);
    return p.eval(std::span<const Cplx>(&z0, 1));
}

long long lcm3(long long a, long long b, long long c) {
    const auto l2 = std::lcm(a, b);
    return std::lcm(l2, c);
}

}  // namespace

VarietySpec parse_variety_config(const std::string& text) {
    VarietySpec spec;
    std::vector<std::string> equation_texts;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        require(eq != std::string::npos, ErrorCode::ParseError,
                "variety config: expected key = value in '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "name") {
            spec.name = value;
        } else if (key == "field") {
            if (value == "complex")
                spec.field = Field::Complex;
            else if (value == "real")
                spec.field = Field::Real;
            else
                fail(ErrorCode::ParseError, "variety config: field must be complex|real");
        } else if (key == "variables") {
            spec.variables = split_ws(value);
        } else if (key == "equation") {
            equation_texts.push_back(value);
        } else if (key == "weights") {
            WeightVector w;
            for (const auto& tok : split_ws(value)) w.w.push_back(std::stoi(tok));
            spec.weights = w;
        } else if (key.rfind("param.", 0) == 0) {
            spec.family_params[key.substr(6)] = parse_scalar(value);
        } else {
            fail(ErrorCode::ParseError, "variety config: unknown key '" + key + "'");
        }
    }
    require(!spec.variables.empty(), ErrorCode::ParseError, "variety config: missing variables");
    require(!equation_texts.empty(), ErrorCode::ParseError, "variety config: missing equation");
    for (const auto& t : equation_texts)
        spec.equations.push_back(parse_polynomial(t, spec.variables, spec.family_params));
    spec.finalize();
    return spec;
}

VarietySpec make_brieskorn(int p, int q, int r) {
    require(p >= 1 && q >= 1 && r >= 1, ErrorCode::InputError, "make_brieskorn: bad exponents");
    VarietySpec spec;
    spec.name = "brieskorn-" + std::to_string(p) + "," + std::to_string(q) + "," +
                std::to_string(r);
    spec.field = Field::Complex;
    spec.variables = {"x", "y", "z"};
    spec.equations.push_back(parse_polynomial(
        "x^" + std::to_string(p) + "+y^" + std::to_string(q) + "+z^" + std::to_string(r),
        spec.variables));
    const long long L = lcm3(p, q, r);
    spec.weights = WeightVector{{static_cast<int>(L / p), static_cast<int>(L / q),
                                 static_cast<int>(L / r)}};
    spec.finalize();
    return spec;
}

VarietySpec make_ak(int k) {
    require(k >= 1, ErrorCode::InputError, "make_ak: k must be >= 1");
    VarietySpec spec = make_brieskorn(2, 2, k + 1);
    spec.name = "a" + std::to_string(k);
    return spec;
}

VarietySpec make_briancon_speder(double t) {
    VarietySpec spec;
    std::ostringstream nm;
    nm << "bs-t" << t;
    spec.name = nm.str();
    spec.field = Field::Complex;
    spec.variables = {"x", "y", "z"};
    spec.family_params["t"] = Cplx(t, 0.0);
    spec.equations.push_back(
        parse_polynomial("x^5+z^15+y^7z+txy^6", spec.variables, spec.family_params));
    spec.weights = WeightVector{{3, 2, 1}};
    spec.finalize();
    return spec;
}

VarietySpec make_brieskorn_nd(std::vector<int> exponents) {
    require(exponents.size() >= 2 && exponents.size() <= 4, ErrorCode::InputError,
            "make_brieskorn_nd: need 2..4 exponents");
    VarietySpec spec;
    spec.field = Field::Complex;
    std::string eq;
    std::string nm = "brieskorn-nd";
    long long L = 1;
    for (size_t i = 0; i < exponents.size(); ++i) {
        require(exponents[i] >= 1, ErrorCode::InputError, "make_brieskorn_nd: bad exponent");
        spec.variables.push_back("z" + std::to_string(i + 1));
        if (i) eq += "+";
        eq += spec.variables.back() + "^" + std::to_string(exponents[i]);
        nm += (i ? "," : ":") + std::to_string(exponents[i]);
        L = std::lcm(L, static_cast<long long>(exponents[i]));
    }
    spec.name = nm;
    spec.equations.push_back(parse_polynomial(eq, spec.variables));
    WeightVector w;
    for (int e : exponents) w.w.push_back(static_cast<int>(L / e));
    spec.weights = w;
    spec.finalize();
    return spec;
}

VarietySpec make_real_plane2_in_r4() {
    VarietySpec spec;
    spec.name = "plane2-r4";
    spec.field = Field::Real;
    spec.variables = {"x", "y", "z", "w"};
    spec.equations.push_back(parse_polynomial("z", spec.variables));
    spec.equations.push_back(parse_polynomial("w", spec.variables));
    spec.finalize();
    return spec;
}

VarietySpec make_real_transverse_planes_r4() {
    VarietySpec spec;
    spec.name = "planes2x2-r4";
    spec.field = Field::Real;
    spec.variables = {"x", "y", "z", "w"};
    for (const char* eq : {"xz", "xw", "yz", "yw"})
        spec.equations.push_back(parse_polynomial(eq, spec.variables));
    spec.dim_hint = 2;
    spec.finalize();
    return spec;
}

}  // namespace germlab
