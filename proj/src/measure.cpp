#include "germlab/measure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "germlab/kdtree.hpp"
#include "germlab/linalg.hpp"
#include "germlab/parallel.hpp"
#include "germlab/rng.hpp"

namespace germlab {

double unit_ball_volume(int k) {
    require(k >= 0, ErrorCode::InputError, "unit_ball_volume: k must be >= 0");
    return std::pow(M_PI, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

const char* to_string(DensityClass c) {
    switch (c) {
        case DensityClass::Zero: return "Zero";
        case DensityClass::Positive: return "Positive";
        case DensityClass::Inconclusive: return "Inconclusive";
    }
    return "?";
}

std::vector<double> geometric_grid(double hi, double lo, int points) {
    require(hi > lo && lo > 0.0 && points >= 2, ErrorCode::InputError,
            "geometric_grid: need hi > lo > 0 and points >= 2");
    std::vector<double> g(points);
    const double step = std::pow(lo / hi, 1.0 / (points - 1));
    double v = hi;
    for (int i = 0; i < points; ++i, v *= step) g[i] = v;
    g.back() = lo;
    return g;
}

// ---------------------------------------------------------------------------
// Half-space geometry tables for the boundary correction
// ---------------------------------------------------------------------------

namespace {

struct BoundaryTable {
    // index t = u * kRes over u in [0,1]
    static constexpr int kRes = 256;
    std::array<double, kRes + 1> vol_frac;   // |B ∩ {x >= -u}| / |B|
    std::array<double, kRes + 1> mean_disp;  // E[x] of uniform on that set / R
};

BoundaryTable build_table(int k) {
    BoundaryTable t;
    const double eta_k = unit_ball_volume(k);
    const double eta_km1 = unit_ball_volume(k - 1);
    auto cap_integrand = [&](double x) { return std::pow(std::max(1.0 - x * x, 0.0), 0.5 * (k - 1)); };
    // cap(u) = eta_{k-1}/eta_k * int_u^1 (1-x^2)^{(k-1)/2} dx, Simpson per cell
    std::array<double, BoundaryTable::kRes + 1> cap{};
    cap[BoundaryTable::kRes] = 0.0;
    for (int i = BoundaryTable::kRes - 1; i >= 0; --i) {
        const double a = static_cast<double>(i) / BoundaryTable::kRes;
        const double b = static_cast<double>(i + 1) / BoundaryTable::kRes;
        const double mid = 0.5 * (a + b);
        const double cell = (b - a) / 6.0 *
                            (cap_integrand(a) + 4.0 * cap_integrand(mid) + cap_integrand(b));
        cap[i] = cap[i + 1] + cell * eta_km1 / eta_k;
    }
    for (int i = 0; i <= BoundaryTable::kRes; ++i) {
        const double u = static_cast<double>(i) / BoundaryTable::kRes;
        t.vol_frac[i] = 1.0 - cap[i];
        t.mean_disp[i] = eta_km1 * std::pow(std::max(1.0 - u * u, 0.0), 0.5 * (k + 1)) /
                         ((k + 1) * eta_k * std::max(t.vol_frac[i], 1e-12));
    }
    return t;
}

const BoundaryTable& boundary_table(int k) {
    static const std::array<BoundaryTable, 7> tables = [] {
        std::array<BoundaryTable, 7> t{};
        for (int k = 1; k <= 6; ++k) t[k] = build_table(k);
        return t;
    }();
    require(k >= 1 && k <= 6, ErrorCode::InputError, "boundary_table: k out of range");
    return tables[k];
}

// solve mean_disp(u) = target (mean_disp decreases in u); returns u in [0,1]
double solve_offset(const BoundaryTable& t, double target) {
    if (target >= t.mean_disp[0]) return 0.0;
    if (target <= t.mean_disp[BoundaryTable::kRes]) return 1.0;
    int lo = 0, hi = BoundaryTable::kRes;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (t.mean_disp[mid] > target)
            lo = mid;
        else
            hi = mid;
    }
    const double f = (t.mean_disp[lo] - target) /
                     std::max(t.mean_disp[lo] - t.mean_disp[hi], 1e-300);
    return (lo + f) / BoundaryTable::kRes;
}

double interp_vol(const BoundaryTable& t, double u) {
    u = std::clamp(u, 0.0, 1.0);
    const double x = u * BoundaryTable::kRes;
    const int i = std::min(static_cast<int>(x), BoundaryTable::kRes - 1);
    const double f = x - i;
    return t.vol_frac[i] * (1.0 - f) + t.vol_frac[i + 1] * f;
}

// ---------------------------------------------------------------------------
// kNN measure core
// ---------------------------------------------------------------------------

double measure_once(const PointsView& pts, int k, const MeasureOptions& opts,
                    std::span<const int> subset) {
    const int n = static_cast<int>(subset.size());
    if (n < opts.knn_j + 2) return std::numeric_limits<double>::quiet_NaN();

    std::vector<double> flat(static_cast<size_t>(n) * pts.dim);
    for (int i = 0; i < n; ++i) {
        const auto p = pts.point(subset[i]);
        std::copy(p.begin(), p.end(), flat.begin() + static_cast<size_t>(i) * pts.dim);
    }
    KdTree tree(flat.data(), n, pts.dim);
    const PointsView local{flat.data(), n, pts.dim};

    const double eta = unit_ball_volume(k);
    const int j = opts.knn_j;
    const int jb = std::min(n - 1, std::max(20, 2 * j));
    const BoundaryTable& table = boundary_table(k);
    // interior asymmetry noise floor
    const double deadband = 2.5 * std::sqrt(static_cast<double>(k) / ((k + 2.0) * jb));

    std::vector<double> contrib(n, 0.0);
    parallel_for(n, [&](int i) {
        std::vector<KdTree::Hit> hits;
        tree.knn(local.point(i), jb, hits, i);
        if (static_cast<int>(hits.size()) < j) return;
        const double rj = std::sqrt(hits[j - 1].d2);
        double c = std::pow(rj, k);
        if (opts.boundary_correct && opts.boundary_radius > 0.0) {
            // the cut sphere is known: use the exact distance to it
            const double d_edge = opts.boundary_radius - norm(local.point(i));
            c *= interp_vol(table, std::max(d_edge, 0.0) / std::max(rj, 1e-300));
        } else if (opts.boundary_correct && k >= 1) {
            const double rjb = std::sqrt(hits.back().d2);
            // mean displacement of the jb neighbours
            std::vector<double> mean(pts.dim, 0.0);
            const auto pi = local.point(i);
            for (const auto& h : hits) {
                const auto q = local.point(h.idx);
                for (int d = 0; d < pts.dim; ++d) mean[d] += q[d] - pi[d];
            }
            double a2 = 0.0;
            for (double m : mean) a2 += m * m;
            const double a = std::sqrt(a2) / (hits.size() * std::max(rjb, 1e-300));
            if (a > deadband) {
                const double u_b = solve_offset(table, a);   // offset in R_jb units
                const double d_hat = u_b * rjb;              // distance to the edge
                c *= interp_vol(table, d_hat / std::max(rj, 1e-300));
            }
        }
        const double w = opts.weights.empty() ? 1.0 : opts.weights[subset[i]];
        contrib[i] = w * c;
    });
    double sum = 0.0;
    for (double c : contrib) sum += c;
    return eta / j * sum;
}

}  // namespace

std::vector<int> local_pca_ranks(const PointsView& pts, int n_neighbors) {
    const int n = pts.n, dim = pts.dim;
    KdTree tree(pts.data, n, dim);
    std::vector<int> ranks(n, 0);
    const int jb = std::min(n - 1, n_neighbors);
    parallel_for(n, [&](int i) {
        std::vector<KdTree::Hit> hits;
        tree.knn(pts.point(i), jb, hits, i);
        if (hits.empty()) return;
        const auto pi = pts.point(i);
        std::vector<double> cov(static_cast<size_t>(dim) * dim, 0.0);
        for (const auto& h : hits) {
            const auto q = pts.point(h.idx);
            for (int a = 0; a < dim; ++a)
                for (int b = a; b < dim; ++b) {
                    const double va = q[a] - pi[a], vb = q[b] - pi[b];
                    cov[a * dim + b] += va * vb;
                }
        }
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < a; ++b) cov[a * dim + b] = cov[b * dim + a];
        auto e = eigen_sym(cov, dim);
        double total = 0.0;
        for (double v : e.values) total += std::max(v, 0.0);
        if (total <= 0.0) return;
        double acc = 0.0;
        int r = 0;
        for (int d = 0; d < dim; ++d) {
            acc += std::max(e.values[d], 0.0);
            ++r;
            if (acc >= 0.95 * total) break;
        }
        ranks[i] = r;
    });
    return ranks;
}

MeasureEstimate measure_knn(const PointsView& pts, int k, const MeasureOptions& opts) {
    require(k >= 1 && k <= 6, ErrorCode::InputError, "measure_knn: k must be in [1,6]");
    require(pts.n >= opts.knn_j + 2, ErrorCode::InputError, "measure_knn: too few points");
    if (!opts.weights.empty())
        require(static_cast<int>(opts.weights.size()) == pts.n, ErrorCode::InputError,
                "measure_knn: weight count mismatch");

    if (opts.rank_check) {
        const auto ranks = local_pca_ranks(pts, std::max(12, 2 * k + 4));
        int bad = 0;
        for (int r : ranks)
            if (r != k) ++bad;
        if (bad > opts.rank_mismatch_frac * pts.n)
            fail(ErrorCode::DimensionMismatch,
                 "measure_knn: local PCA rank disagrees with k on " + std::to_string(bad) + "/" +
                     std::to_string(pts.n) + " points");
    }

    std::vector<int> all(pts.n);
    std::iota(all.begin(), all.end(), 0);
    MeasureEstimate est;
    est.k = k;
    est.method = MeasureMethod::JacobianMC;
    est.value = measure_once(pts, k, opts, all);

    // quarter-split replicas for the standard error
    std::array<std::vector<int>, 4> quarters;
    for (int i = 0; i < pts.n; ++i) quarters[i % 4].push_back(i);
    std::array<double, 4> q{};
    int nq = 0;
    for (int b = 0; b < 4; ++b) {
        q[b] = measure_once(pts, k, opts, quarters[b]);
        if (std::isfinite(q[b])) ++nq;
    }
    if (nq == 4) {
        const double mean = (q[0] + q[1] + q[2] + q[3]) / 4.0;
        double var = 0.0;
        for (double v : q) var += (v - mean) * (v - mean);
        var /= 3.0;
        est.std_error = std::sqrt(var) / 2.0;
    } else {
        est.std_error = std::fabs(est.value);
    }
    return est;
}

MeasureEstimate hausdorff_measure(const SampleCloud& cloud, int k, const MeasureOptions& opts) {
    require(cloud.n() > 0, ErrorCode::InputError, "hausdorff_measure: empty cloud");
    MeasureOptions o = opts;
    // ball-law clouds are cut by a known sphere
    if (o.boundary_correct && o.boundary_radius == 0.0 && cloud.law == SamplingLaw::BallUniform)
        o.boundary_radius = cloud.r_max;
    return measure_knn(cloud.view(), k, o);
}

// ---------------------------------------------------------------------------
// Density profiles
// ---------------------------------------------------------------------------

SliceProfileIntegral integrate_slice_measures(std::span<const double> nodes_ascending,
                                              std::span<const double> g,
                                              std::span<const double> g_stderr, int k) {
    const int L = static_cast<int>(nodes_ascending.size());
    require(L >= 2 && g.size() == nodes_ascending.size() &&
                g_stderr.size() == nodes_ascending.size(),
            ErrorCode::InputError, "integrate_slice_measures: size mismatch");
    SliceProfileIntegral out;
    out.integral.assign(L, 0.0);

    // local power near the origin from the lowest nodes
    double m_tail = k - 1.0;
    {
        std::vector<double> lx, ly;
        for (int l = 0; l < std::min(L, 4); ++l) {
            if (g[l] > 0.0) {
                lx.push_back(std::log(nodes_ascending[l]));
                ly.push_back(std::log(g[l]));
            }
        }
        if (lx.size() >= 2) {
            const double m = fit_line(lx, ly).slope;
            if (std::isfinite(m)) m_tail = std::clamp(m, 0.1, 3.0 * k + 4.0);
        }
    }
    out.integral[0] = g[0] * nodes_ascending[0] / (m_tail + 1.0);
    for (int l = 1; l < L; ++l) {
        const double s1 = nodes_ascending[l - 1], s2 = nodes_ascending[l];
        const double g1 = g[l - 1], g2 = g[l];
        double piece;
        if (g1 > 0.0 && g2 > 0.0) {
            const double m = std::log(g2 / g1) / std::log(s2 / s1);
            if (std::isfinite(m) && std::fabs(m + 1.0) > 1e-9)
                piece = (g2 * s2 - g1 * s1) / (m + 1.0);
            else
                piece = g1 * s1 * std::log(s2 / s1);
        } else {
            piece = 0.5 * (g1 + g2) * (s2 - s1);
        }
        out.integral[l] = out.integral[l - 1] + std::max(piece, 0.0);
    }

    std::vector<double> var_acc(L, 0.0);
    for (int l = 0; l < L; ++l) {
        const double lo = l > 0 ? nodes_ascending[l - 1] : 0.0;
        const double hi = l + 1 < L ? nodes_ascending[l + 1] : nodes_ascending[l];
        const double w = 0.5 * (hi - lo) + (l == 0 ? 0.5 * nodes_ascending[0] : 0.0);
        const double v = w * g_stderr[l];
        var_acc[l] = (l ? var_acc[l - 1] : 0.0) + v * v;
    }
    out.integral_stderr.resize(L);
    for (int l = 0; l < L; ++l) out.integral_stderr[l] = std::sqrt(var_acc[l]);
    return out;
}

namespace {

struct NodeEstimate {
    double s = 0.0;
    double g = 0.0;
    double g_stderr = 0.0;
};

void finish_estimate(DensityEstimate& est, const DensityOptions& opts) {
    const int L = static_cast<int>(est.eps_grid.size());
    // power fit of ratio vs eps in log space
    std::vector<double> lx, ly;
    for (int i = 0; i < L; ++i) {
        if (est.ratios[i] > 0.0 && std::isfinite(est.ratios[i])) {
            lx.push_back(std::log(est.eps_grid[i]));
            ly.push_back(std::log(est.ratios[i]));
        }
    }
    const bool fit_ok = lx.size() >= 3;
    if (fit_ok) {
        const auto f = fit_line(lx, ly);
        est.beta = f.slope;
        est.beta_r2 = f.r2;
        est.fit_rms = f.rms_resid;
    } else {
        est.fit_rms = std::numeric_limits<double>::infinity();
    }

    // tail estimates from the smallest radii (grid is stored decreasing)
    const int tail = std::min(3, L);
    double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = 0.0, se = 0.0;
    for (int i = L - tail; i < L; ++i) {
        sum += est.ratios[i];
        lo = std::min(lo, est.ratios[i]);
        hi = std::max(hi, est.ratios[i]);
        se += est.ratio_stderr[i];
    }
    est.theta = sum / tail;
    se /= tail;
    est.theta_lower = lo - se;
    est.theta_upper = hi + se;

    est.classification = classify_density(est, opts.beta_threshold, opts.theta_threshold,
                                          opts.r2_threshold, opts.resid_threshold);
}

}  // namespace

DensityClass classify_density(const DensityEstimate& est, double beta_threshold,
                              double theta_threshold, double r2_threshold,
                              double resid_threshold) {
    for (double r : est.ratios)
        if (!std::isfinite(r) || r < 0.0) return DensityClass::Inconclusive;
    // a tail pinned at zero is a vanishing density even when no power law
    // can be fitted (dimension drops and starved wedges sit on the
    // resolution floor)
    if (est.theta_upper < theta_threshold) return DensityClass::Zero;
    if (est.fit_rms > resid_threshold) return DensityClass::Inconclusive;
    if (est.beta > beta_threshold && est.beta_r2 > r2_threshold) return DensityClass::Zero;
    if (est.theta_lower > theta_threshold) return DensityClass::Positive;
    return DensityClass::Inconclusive;
}

DensityEstimate density_profile_slices(const SliceSampler& sampler, int k,
                                       std::vector<double> eps_grid,
                                       const DensityOptions& opts) {
    require(k >= 2 && k <= 6, ErrorCode::InputError,
            "density_profile_slices: k must be in [2,6]");
    require(eps_grid.size() >= 2, ErrorCode::InputError, "density_profile_slices: short grid");
    for (size_t i = 1; i < eps_grid.size(); ++i)
        require(eps_grid[i] < eps_grid[i - 1], ErrorCode::InputError,
                "density_profile_slices: eps grid must decrease");

    // ascending radius nodes: the grid plus a few nodes below it
    std::vector<double> nodes_r(eps_grid.rbegin(), eps_grid.rend());
    const double step = nodes_r.size() >= 2 ? nodes_r[1] / nodes_r[0] : 2.0;
    std::vector<double> low;
    double v = nodes_r.front();
    for (int i = 0; i < opts.extra_low_nodes; ++i) {
        v /= std::max(step, 1.3);
        low.push_back(v);
    }
    std::reverse(low.begin(), low.end());
    nodes_r.insert(nodes_r.begin(), low.begin(), low.end());

    const int L = static_cast<int>(nodes_r.size());
    std::vector<NodeEstimate> nodes(L);
    for (int l = 0; l < L; ++l) {
        const SliceSample slice =
            sampler(nodes_r[l], opts.n_per_eps, substream_seed(opts.seed, 1000 + l));
        NodeEstimate ne;
        ne.s = nodes_r[l];
        if (slice.n() >= opts.knn_j + 4) {
            MeasureOptions mo;
            mo.knn_j = opts.knn_j;
            mo.boundary_correct = true;
            mo.rank_check = false;
            mo.weights = slice.weight;
            const auto m = measure_knn(slice.view(), k - 1, mo);
            ne.g = m.value;
            ne.g_stderr = m.std_error;
        } else {
            ne.g = 0.0;
            ne.g_stderr = 0.0;
        }
        nodes[l] = ne;
    }

    std::vector<double> gs(L), ges(L);
    for (int l = 0; l < L; ++l) {
        gs[l] = nodes[l].g;
        ges[l] = nodes[l].g_stderr;
    }
    const auto prof = integrate_slice_measures(nodes_r, gs, ges, k);

    DensityEstimate est;
    est.k = k;
    est.eps_grid = eps_grid;  // decreasing
    const double eta = unit_ball_volume(k);
    for (double eps : eps_grid) {
        int idx = -1;
        for (int l = 0; l < L; ++l)
            if (std::fabs(nodes_r[l] - eps) <= 1e-12 * eps) idx = l;
        require(idx >= 0, ErrorCode::InputError, "density_profile_slices: node lookup failed");
        const double denom = eta * std::pow(eps, k);
        est.ratios.push_back(prof.integral[idx] / denom);
        est.ratio_stderr.push_back(prof.integral_stderr[idx] / denom);
    }
    finish_estimate(est, opts);
    return est;
}

DensityEstimate density_profile(const std::shared_ptr<const VarietySpec>& spec, int k,
                                std::vector<double> eps_grid, int n_per_eps, uint64_t seed,
                                const DensityOptions& opts_in) {
    require(spec != nullptr, ErrorCode::InputError, "density_profile: null spec");
    require(!eps_grid.empty() &&
                eps_grid.front() / eps_grid.back() >= std::pow(10.0, 1.5) * 0.999,
            ErrorCode::InputError, "density_profile: eps grid must span >= 1.5 decades");
    require(n_per_eps >= 1000, ErrorCode::InputError,
            "density_profile: n_per_eps must be >= 1000");
    DensityOptions opts = opts_in;
    opts.n_per_eps = n_per_eps;
    opts.seed = seed;
    SliceSampler sampler = [spec](double s, int n, uint64_t sd) {
        SampleCloud cloud = sample_sphere_slice(spec, s, n, sd);
        SliceSample slice;
        slice.s = s;
        slice.dim = cloud.dim;
        slice.pts = std::move(cloud.coords);
        slice.weight.assign(n, 1.0);
        const PointsView pv{slice.pts.data(), n, slice.dim};
        std::vector<double>& w = slice.weight;
        parallel_for(n, [&](int i) { w[i] = radial_tangency_weight(*spec, pv.point(i)); });
        return slice;
    };
    return density_profile_slices(sampler, k, std::move(eps_grid), opts);
}

DensityEstimate density_profile_ball_cloud(const PointsView& pts, int k,
                                           std::vector<double> eps_grid,
                                           const DensityOptions& opts) {
    require(k >= 1 && k <= 6, ErrorCode::InputError, "density_profile_ball_cloud: bad k");
    std::vector<double> norms(pts.n);
    for (int i = 0; i < pts.n; ++i) norms[i] = norm(pts.point(i));

    DensityEstimate est;
    est.k = k;
    est.eps_grid = eps_grid;
    const double eta = unit_ball_volume(k);
    for (double eps : eps_grid) {
        MeasureOptions mo;
        mo.knn_j = opts.knn_j;
        mo.boundary_correct = true;
        mo.boundary_radius = eps;  // the cut sphere is exactly known
        mo.rank_check = false;
        std::vector<int> subset;
        for (int i = 0; i < pts.n; ++i)
            if (norms[i] <= eps) subset.push_back(i);
        const double denom = eta * std::pow(eps, k);
        if (static_cast<int>(subset.size()) < opts.knn_j + 6) {
            est.ratios.push_back(std::numeric_limits<double>::quiet_NaN());
            est.ratio_stderr.push_back(0.0);
            continue;
        }
        std::vector<double> flat(subset.size() * pts.dim);
        for (size_t i = 0; i < subset.size(); ++i) {
            const auto p = pts.point(subset[i]);
            std::copy(p.begin(), p.end(), flat.begin() + i * pts.dim);
        }
        const PointsView sub{flat.data(), static_cast<int>(subset.size()), pts.dim};
        const auto m = measure_knn(sub, k, mo);
        est.ratios.push_back(m.value / denom);
        est.ratio_stderr.push_back(m.std_error / denom);
    }
    // drop leading/trailing NaN entries (grid truncation at small eps)
    while (!est.ratios.empty() && !std::isfinite(est.ratios.back())) {
        est.ratios.pop_back();
        est.ratio_stderr.pop_back();
        est.eps_grid.pop_back();
    }
    require(est.ratios.size() >= 3, ErrorCode::InputError,
            "density_profile_ball_cloud: too few usable radii");
    finish_estimate(est, opts);
    return est;
}

}  // namespace germlab
