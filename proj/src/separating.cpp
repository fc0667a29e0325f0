#include "germlab/separating.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "germlab/kdtree.hpp"
#include "germlab/linalg.hpp"
#include "germlab/parallel.hpp"
#include "germlab/rng.hpp"

namespace germlab {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::SeparatingSetFound: return "SeparatingSetFound";
        case Verdict::NotFoundByThisConstruction: return "NotFoundByThisConstruction";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

// distance from each cloud point to a seed set
std::vector<double> seed_distances(const PointsView& pts, const PointsView& seeds) {
    KdTree tree(seeds.data, seeds.n, seeds.dim);
    std::vector<double> d(pts.n);
    parallel_for(pts.n, [&](int i) { d[i] = std::sqrt(tree.nearest(pts.point(i)).d2); });
    return d;
}

double slice_set_distance(std::span<const double> p, int slice_var, bool complex_coords) {
    if (complex_coords) {
        const double re = p[2 * slice_var], im = p[2 * slice_var + 1];
        return std::sqrt(re * re + im * im);
    }
    return std::fabs(p[slice_var]);
}

}  // namespace

ConflictSet conflict_set(const SampleCloud& link, const PointsView& a_seed,
                         const PointsView& b_seed, double band, int slice_var) {
    require(link.n() >= 16, ErrorCode::InputError, "conflict_set: link too small");
    require(a_seed.n >= 1 && b_seed.n >= 1, ErrorCode::InputError, "conflict_set: empty seeds");
    require(a_seed.dim == link.dim && b_seed.dim == link.dim, ErrorCode::InputError,
            "conflict_set: seed dimension mismatch");

    if (band <= 0.0) band = 2.0 * median_nn_distance(link.coords.data(), link.n(), link.dim);

    // seeds must be disjoint at the working band scale
    {
        KdTree tb(b_seed.data, b_seed.n, b_seed.dim);
        double cross = std::numeric_limits<double>::infinity();
        for (int i = 0; i < a_seed.n; ++i)
            cross = std::min(cross, std::sqrt(tb.nearest(a_seed.point(i)).d2));
        require(cross > 2.0 * band, ErrorCode::SeedOverlap,
                "conflict_set: seed sets closer than twice the band");
    }

    const auto d_a = seed_distances(link.view(), a_seed);
    const auto d_b = seed_distances(link.view(), b_seed);

    const bool cplx = link.spec && link.spec->field == Field::Complex;
    auto collect = [&](double b) {
        std::vector<int> idx;
        for (int i = 0; i < link.n(); ++i)
            if (std::fabs(d_a[i] - d_b[i]) <= b) idx.push_back(i);
        return idx;
    };
    double used_band = band;
    std::vector<int> idx = collect(used_band);
    if (idx.size() < 8) {
        // widen once: to the scale that captures the nearest few samples of
        // the bisector, bounded away from the link diameter
        std::vector<double> gaps(link.n());
        for (int i = 0; i < link.n(); ++i) gaps[i] = std::fabs(d_a[i] - d_b[i]);
        std::nth_element(gaps.begin(), gaps.begin() + 7, gaps.end());
        const double widened = std::max(2.0 * band, gaps[7] * 1.05);
        if (widened > 0.08 * 2.0 * link.r_max)
            fail(ErrorCode::EmptyConflict, "conflict_set: conflict band is empty");
        used_band = widened;
        idx = collect(used_band);
        if (idx.size() < 8)
            fail(ErrorCode::EmptyConflict, "conflict_set: conflict band is empty");
    }

    ConflictSet cs;
    cs.band = used_band;
    cs.link_points = link.subset(idx);
    for (int i : idx) {
        cs.d_a.push_back(d_a[i]);
        cs.d_b.push_back(d_b[i]);
    }
    double delta = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cs.link_points.n(); ++i) {
        const auto p = cs.link_points.point(i);
        const double d = slice_var >= 0 ? slice_set_distance(p, slice_var, cplx)
                                        : std::min(cs.d_a[i], cs.d_b[i]);
        delta = std::min(delta, d);
    }
    cs.delta = delta;
    cs.cone_cloud.dim = link.dim;
    cs.cone_cloud.law = SamplingLaw::Constructed;
    cs.cone_cloud.spec = link.spec;
    return cs;
}

void cone_down(ConflictSet& cs, const WeightVector& w, std::span<const double> t_grid) {
    require(w.valid(), ErrorCode::InputError, "cone_down: invalid weights");
    for (double t : t_grid)
        require(t > 0.0 && t <= 1.0, ErrorCode::InputError, "cone_down: t must be in (0,1]");

    const auto& spec = cs.link_points.spec;
    std::vector<double> q(cs.link_points.dim);
    for (double t : t_grid) {
        for (int i = 0; i < cs.link_points.n(); ++i) {
            weighted_scale(cs.link_points.point(i), w, t, q);
            double res = 0.0;
            if (spec) {
                res = spec->scaled_residual(q);
                require(res <= 1e-6, ErrorCode::InputError,
                        "cone_down: scaled point left the variety (wrong weights?)");
            }
            cs.cone_cloud.push(q, res);
            cs.cone_t.push_back(t);
        }
    }
    cs.cone_cloud.r_min = cs.cone_cloud.radius.empty()
                              ? 0.0
                              : *std::min_element(cs.cone_cloud.radius.begin(),
                                                  cs.cone_cloud.radius.end());
    cs.cone_cloud.r_max = cs.cone_cloud.radius.empty()
                              ? 0.0
                              : *std::max_element(cs.cone_cloud.radius.begin(),
                                                  cs.cone_cloud.radius.end());
}

std::vector<double> cone_axis_angles(const ConflictSet& cs, int axis_var,
                                     std::span<const double> t_grid) {
    require(cs.cone_cloud.n() > 0, ErrorCode::InputError, "cone_axis_angles: empty cone");
    // spec-less (constructed) clouds carry plain real coordinates
    const bool cplx = cs.cone_cloud.spec && cs.cone_cloud.spec->field == Field::Complex;
    require(axis_var >= 0 &&
                (cplx ? 2 * axis_var + 1 < cs.cone_cloud.dim : axis_var < cs.cone_cloud.dim),
            ErrorCode::InputError, "cone_axis_angles: bad axis variable");
    std::vector<double> means;
    for (double t : t_grid) {
        double sum = 0.0;
        int count = 0;
        for (int i = 0; i < cs.cone_cloud.n(); ++i) {
            if (std::fabs(cs.cone_t[i] - t) > 1e-12 * t) continue;
            const auto p = cs.cone_cloud.point(i);
            const double r = norm(p);
            if (r <= 0.0) continue;
            // distance of the direction from the axis_var coordinate plane
            double off2 = 0.0;
            if (cplx) {
                for (int v = 0; v * 2 < static_cast<int>(p.size()); ++v) {
                    if (v == axis_var) continue;
                    off2 += p[2 * v] * p[2 * v] + p[2 * v + 1] * p[2 * v + 1];
                }
            } else {
                for (size_t c = 0; c < p.size(); ++c)
                    if (static_cast<int>(c) != axis_var) off2 += p[c] * p[c];
            }
            sum += std::asin(std::clamp(std::sqrt(off2) / r, 0.0, 1.0));
            ++count;
        }
        require(count > 0, ErrorCode::InputError, "cone_axis_angles: no points at grid t");
        means.push_back(sum / count);
    }
    return means;
}

// ---------------------------------------------------------------------------
// Labeled-slice samplers for the pipeline profiles
// ---------------------------------------------------------------------------

namespace {

struct PushBase {
    std::vector<double> pts;  // flat, base points on the link
    int dim = 0;
    int n() const { return dim ? static_cast<int>(pts.size()) / dim : 0; }
};

enum class WeightMode { ConeRadial, PcaOrbit };

std::vector<int> pick_subset(int total, int want, uint64_t seed) {
    std::vector<int> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    if (want >= total) return idx;
    Rng rng(seed);
    for (int i = 0; i < want; ++i) {
        const int j = i + static_cast<int>(rng.below(total - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(want);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// direction of the scaling orbit through T(p, t)
void orbit_direction(std::span<const double> p, const WeightVector& w, double t,
                     std::span<double> out) {
    const int nv = static_cast<int>(w.w.size());
    const double wm = static_cast<double>(w.w.back());
    const bool cplx = static_cast<int>(p.size()) == 2 * nv;
    for (int v = 0; v < nv; ++v) {
        const double e = w.w[v] / wm;
        const double fac = e * std::pow(t, e - 1.0);
        if (cplx) {
            out[2 * v] = fac * p[2 * v];
            out[2 * v + 1] = fac * p[2 * v + 1];
        } else {
            out[v] = fac * p[v];
        }
    }
}

SliceSampler make_pushforward_sampler(PushBase base, const WeightVector& w,
                                      std::shared_ptr<const VarietySpec> spec, WeightMode mode,
                                      int slice_dim) {
    return [base = std::move(base), w, spec = std::move(spec), mode,
            slice_dim](double s, int n, uint64_t seed) {
        SliceSample slice;
        slice.s = s;
        slice.dim = base.dim;
        const auto idx = pick_subset(base.n(), n, seed);
        const int m = static_cast<int>(idx.size());
        slice.pts.resize(static_cast<size_t>(m) * base.dim);
        slice.weight.assign(m, 1.0);
        std::vector<double> t_used(m, 0.0);

        const PointsView bview{base.pts.data(), base.n(), base.dim};
        parallel_for(m, [&](int i) {
            const auto p = bview.point(idx[i]);
            const double t = orbit_param_for_radius(p, w, s);
            t_used[i] = t;
            weighted_scale(p, w, t,
                           {slice.pts.data() + static_cast<size_t>(i) * base.dim,
                            static_cast<size_t>(base.dim)});
        });

        const PointsView pushed{slice.pts.data(), m, base.dim};
        if (mode == WeightMode::PcaOrbit) {
            // tangent of the slice from local PCA plus the exact orbit line
            KdTree tree(slice.pts.data(), m, base.dim);
            const int kp = std::min(m - 1, 12);
            parallel_for(m, [&](int i) {
                std::vector<KdTree::Hit> hits;
                tree.knn(pushed.point(i), kp, hits, i);
                const auto q = pushed.point(i);
                const int d = base.dim;
                std::vector<double> cov(static_cast<size_t>(d) * d, 0.0);
                for (const auto& h : hits) {
                    const auto x = pushed.point(h.idx);
                    for (int a = 0; a < d; ++a)
                        for (int b = a; b < d; ++b)
                            cov[a * d + b] += (x[a] - q[a]) * (x[b] - q[b]);
                }
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < a; ++b) cov[a * d + b] = cov[b * d + a];
                const auto eig = eigen_sym(cov, d);
                std::vector<double> rows(static_cast<size_t>(slice_dim + 1) * d, 0.0);
                for (int r = 0; r < slice_dim; ++r)
                    for (int c = 0; c < d; ++c) rows[r * d + c] = eig.vectors[r * d + c];
                orbit_direction(bview.point(idx[i]), w, t_used[i],
                                {rows.data() + static_cast<size_t>(slice_dim) * d,
                                 static_cast<size_t>(d)});
                const int rank = orthonormalize_rows(rows, slice_dim + 1, d);
                double tang2 = 0.0;
                const double qr = norm(q);
                for (int r = 0; r < rank; ++r) {
                    double dot = 0.0;
                    for (int c = 0; c < d; ++c) dot += rows[r * d + c] * q[c] / qr;
                    tang2 += dot * dot;
                }
                slice.weight[i] = std::clamp(tang2 > 0 ? 1.0 / std::sqrt(tang2) : 100.0,
                                             1.0, 100.0);
            });
        }
        return slice;
    };
}

struct PieceLabels {
    std::vector<int> conflict_idx;
    std::vector<int> a_idx;
    std::vector<int> b_idx;
    int components_found = 0;
    double a_frac = 0.0, b_frac = 0.0;
    double clearance = 0.0;
    std::string note;
};

// Delete the band from the link graph and label the surviving components
// of the INDUCED subgraph. Rebuilding a graph on the remainder would let
// kNN edges re-bridge the hole; and the deleted slab must be thicker than
// the longest retained edge, or edges jump across it.
PieceLabels split_link(const SampleCloud& link, const std::vector<double>& d_a,
                       const std::vector<double>& d_b, double band) {
    PieceLabels out;
    const auto g = build_graph(link.view());
    const double clearance = std::max(band, 1.05 * g.max_edge_len);
    out.clearance = clearance;

    const int n = link.n();
    std::vector<char> removed(n, 0);
    std::vector<int> keep;
    for (int i = 0; i < n; ++i) {
        if (std::fabs(d_a[i] - d_b[i]) <= clearance) {
            removed[i] = 1;
            out.conflict_idx.push_back(i);
        } else {
            keep.push_back(i);
        }
    }
    require(keep.size() >= 32, ErrorCode::EmptyConflict,
            "split_link: the band swallowed the link");
    const int n_keep = static_cast<int>(keep.size());

    // components of the induced subgraph
    std::vector<int> comp(n, -1);
    int n_comp = 0;
    std::vector<int> stack;
    for (int s : keep) {
        if (comp[s] >= 0) continue;
        const int label = n_comp++;
        comp[s] = label;
        stack.push_back(s);
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
                const int v = g.nbrs[e];
                if (!removed[v] && comp[v] < 0) {
                    comp[v] = label;
                    stack.push_back(v);
                }
            }
        }
    }

    std::vector<int> comp_size(n_comp, 0);
    std::vector<double> comp_bias(n_comp, 0.0);  // negative = the A side
    for (int i : keep) {
        ++comp_size[comp[i]];
        comp_bias[comp[i]] += d_a[i] - d_b[i] < 0 ? -1.0 : 1.0;
    }

    std::vector<int> big;
    for (int c = 0; c < n_comp; ++c)
        if (comp_size[c] >= std::max(16, n_keep / 20)) big.push_back(c);
    out.components_found = static_cast<int>(big.size());
    std::sort(big.begin(), big.end(), [&](int x, int y) { return comp_size[x] > comp_size[y]; });

    int comp_a = -1, comp_b = -1;
    for (int c : big) {
        if (comp_bias[c] < 0 && comp_a < 0) comp_a = c;
        if (comp_bias[c] >= 0 && comp_b < 0) comp_b = c;
    }
    if (comp_a < 0 || comp_b < 0) {
        if (big.size() >= 2) {
            comp_a = big[0];
            comp_b = big[1];
            out.note = "piece orientation ambiguous; used the two largest components";
        } else {
            out.note = "link minus band is connected";
            comp_a = big.empty() ? -1 : big[0];
        }
    }
    for (int i : keep) {
        if (comp[i] == comp_a) out.a_idx.push_back(i);
        else if (comp_b >= 0 && comp[i] == comp_b) out.b_idx.push_back(i);
    }
    out.a_frac = static_cast<double>(out.a_idx.size()) / n_keep;
    out.b_frac = static_cast<double>(out.b_idx.size()) / n_keep;
    return out;
}

PushBase base_from(const SampleCloud& link, std::span<const int> idx) {
    PushBase b;
    b.dim = link.dim;
    b.pts.reserve(idx.size() * link.dim);
    for (int i : idx) {
        const auto p = link.point(i);
        b.pts.insert(b.pts.end(), p.begin(), p.end());
    }
    return b;
}

// Fresh Newton samples of X ∩ S(s), kept when the unit-link representative
// of their scaling orbit carries the wanted piece label. Pushing the link
// forward instead would starve the slice of resolution: non-equal weights
// concentrate pushed samples near the low-weight axis.
SliceSampler make_fresh_labeled_sampler(std::shared_ptr<const VarietySpec> spec,
                                        WeightVector w,
                                        std::shared_ptr<const SampleCloud> link,
                                        std::shared_ptr<const std::vector<int>> labels,
                                        int want_label) {
    auto tree = std::make_shared<KdTree>(link->coords.data(), link->n(), link->dim);
    const double link_r = link->r_max;
    return [spec, w, link, labels, tree, link_r, want_label](double s, int n, uint64_t seed) {
        SliceSample slice;
        slice.s = s;
        slice.dim = spec->ambient_real_dim();
        SampleCloud fresh = sample_sphere_slice(spec, s, n, seed);
        const int m = fresh.n();
        std::vector<int> keep(m, 0);
        std::vector<double> wgt(m, 1.0);
        std::vector<double> p(slice.dim);
        for (int i = 0; i < m; ++i) {
            const auto q = fresh.point(i);
            const double u = orbit_param_for_radius(q, w, link_r);
            weighted_scale(q, w, u, p);
            const int node = tree->nearest(p).idx;
            if ((*labels)[node] == want_label) {
                keep[i] = 1;
                wgt[i] = radial_tangency_weight(*spec, q);
            }
        }
        for (int i = 0; i < m; ++i) {
            if (!keep[i]) continue;
            const auto q = fresh.point(i);
            slice.pts.insert(slice.pts.end(), q.begin(), q.end());
            slice.weight.push_back(wgt[i]);
        }
        return slice;
    };
}

std::vector<double> default_eps() { return geometric_grid(1e-1, 1e-3, 9); }

}  // namespace

SeparationReport separation_verdict(const std::shared_ptr<const VarietySpec>& spec,
                                    int slice_var, const SeparationParams& params) {
    require(spec != nullptr, ErrorCode::InputError, "separation_verdict: null spec");
    require(spec->weights.has_value(), ErrorCode::InputError, "separation_verdict: weights required");

    SeparationReport rep;
    std::ostringstream notes;
    const int k = spec->germ_real_dim();
    require(k >= 3, ErrorCode::InputError, "separation_verdict: germ dimension too small");

    rep.hypothesis_ok = spec->is_weighted_homogeneous() && spec->weights->surface_hypothesis();
    if (!rep.hypothesis_ok)
        notes << "weight hypothesis w1 >= w2 > w3 fails; this construction cannot certify "
                 "a separating set. ";

    const auto eps = params.eps_grid.empty() ? default_eps() : params.eps_grid;
    DensityOptions dopt = params.density;
    dopt.n_per_eps = params.slice_n;
    dopt.seed = substream_seed(params.seed, 7);

    // stage 1: branches of the slice
    BranchComponents bc;
    try {
        bc = branch_components(spec, slice_var, params.link_radius, params.branch_n,
                               substream_seed(params.seed, 1));
    } catch (const Error& e) {
        rep.verdict = Verdict::Inconclusive;
        notes << "branch stage failed: " << e.what();
        rep.notes = notes.str();
        return rep;
    }
    rep.branch_count = static_cast<int>(bc.clusters.size());
    if (rep.branch_count < 2) {
        rep.verdict = Verdict::NotFoundByThisConstruction;
        notes << "slice has a single branch; the conflict construction does not apply.";
        rep.notes = notes.str();
        return rep;
    }

    // stage 2: conflict set between the first branch and the rest
    SampleCloud a_seed = bc.slice_cloud.subset(bc.clusters[0]);
    std::vector<int> rest_idx;
    for (size_t c = 1; c < bc.clusters.size(); ++c)
        rest_idx.insert(rest_idx.end(), bc.clusters[c].begin(), bc.clusters[c].end());
    SampleCloud b_seed = bc.slice_cloud.subset(rest_idx);

    SampleCloud link = sample_sphere_slice(spec, params.link_radius, params.link_n,
                                           substream_seed(params.seed, 2));
    ConflictSet cs = conflict_set(link, a_seed.view(), b_seed.view(), params.band, slice_var);
    rep.band = cs.band;
    rep.delta = cs.delta;

    // stage 3: the link minus the band
    const auto d_a = seed_distances(link.view(), a_seed.view());
    const auto d_b = seed_distances(link.view(), b_seed.view());
    PieceLabels pieces = split_link(link, d_a, d_b, cs.band);
    rep.components_found = pieces.components_found;
    if (!pieces.note.empty()) notes << pieces.note << ". ";

    // stage 4: density classifications of the coned pieces. The conflict
    // cone is the orbit image of its band (an exact description), while
    // the fat pieces are resampled fresh at every radius.
    const WeightVector& w = *spec->weights;
    rep.thin = density_profile_slices(
        make_pushforward_sampler(base_from(cs.link_points,
                                           [&] {
                                               std::vector<int> all(cs.link_points.n());
                                               std::iota(all.begin(), all.end(), 0);
                                               return all;
                                           }()),
                                 w, spec, WeightMode::PcaOrbit, k - 2),
        k - 1, eps, dopt);
    auto link_ptr = std::make_shared<const SampleCloud>(std::move(link));
    auto labels = std::make_shared<std::vector<int>>(link_ptr->n(), 2);
    for (int i : pieces.a_idx) (*labels)[i] = 0;
    for (int i : pieces.b_idx) (*labels)[i] = 1;
    if (!pieces.a_idx.empty())
        rep.fat_a = density_profile_slices(
            make_fresh_labeled_sampler(spec, w, link_ptr, labels, 0), k, eps, dopt);
    if (!pieces.b_idx.empty())
        rep.fat_b = density_profile_slices(
            make_fresh_labeled_sampler(spec, w, link_ptr, labels, 1), k, eps, dopt);

    rep.xi = std::min(rep.fat_a.theta_lower, rep.fat_b.theta_lower);

    const bool thin_zero = rep.thin.classification == DensityClass::Zero;
    const bool fats_pos = rep.fat_a.classification == DensityClass::Positive &&
                          rep.fat_b.classification == DensityClass::Positive;
    const bool split_ok = rep.components_found >= 2 && pieces.a_frac >= 0.10 &&
                          pieces.b_frac >= 0.10;

    if (!rep.hypothesis_ok) {
        rep.verdict = Verdict::NotFoundByThisConstruction;
    } else if (!split_ok) {
        rep.verdict = Verdict::NotFoundByThisConstruction;
        notes << "band removal does not split the link into two bulk pieces. ";
    } else if (rep.thin.classification == DensityClass::Inconclusive ||
               rep.fat_a.classification == DensityClass::Inconclusive ||
               rep.fat_b.classification == DensityClass::Inconclusive) {
        rep.verdict = Verdict::Inconclusive;
        notes << "a density classification is inconclusive. ";
    } else if (thin_zero && fats_pos) {
        rep.verdict = Verdict::SeparatingSetFound;
    } else {
        rep.verdict = Verdict::NotFoundByThisConstruction;
        if (!thin_zero) notes << "conflict cone is not thin. ";
        if (!fats_pos) notes << "a remainder piece is not fat. ";
    }
    rep.notes = notes.str();
    return rep;
}

SeparationReport straight_cone_control(const SampleCloud& link_manifold_sample,
                                       const PointsView& a_seed, const PointsView& b_seed,
                                       int germ_dim, const SeparationParams& params) {
    const SampleCloud& link = link_manifold_sample;
    require(link.n() >= 64, ErrorCode::InputError, "straight_cone_control: link too small");
    const int k = germ_dim;
    require(k >= 2, ErrorCode::InputError, "straight_cone_control: germ_dim >= 2");

    SeparationReport rep;
    std::ostringstream notes;
    // radial scaling is the equal-weight action: the ordering hypothesis
    // w1 >= w2 > w3 always fails on a straight cone
    rep.hypothesis_ok = false;
    rep.branch_count = 2;
    notes << "straight-cone control (radial scaling; ordering hypothesis not applicable). ";

    const auto eps = params.eps_grid.empty() ? default_eps() : params.eps_grid;
    DensityOptions dopt = params.density;
    dopt.n_per_eps = params.slice_n;
    dopt.seed = substream_seed(params.seed, 7);

    ConflictSet cs = conflict_set(link, a_seed, b_seed, params.band, -1);
    rep.band = cs.band;
    rep.delta = cs.delta;
    const auto d_a = seed_distances(link.view(), a_seed);
    const auto d_b = seed_distances(link.view(), b_seed);
    PieceLabels pieces = split_link(link, d_a, d_b, cs.band);
    rep.components_found = pieces.components_found;
    if (!pieces.note.empty()) notes << pieces.note << ". ";

    const WeightVector radial{std::vector<int>(
        link.spec ? link.spec->nvars() : link.dim, 1)};
    auto all_conflict = [&] {
        std::vector<int> all(cs.link_points.n());
        std::iota(all.begin(), all.end(), 0);
        return all;
    }();
    if (k - 1 >= 2) {
        rep.thin = density_profile_slices(
            make_pushforward_sampler(base_from(cs.link_points, all_conflict), radial, link.spec,
                                     WeightMode::ConeRadial, k - 2),
            k - 1, eps, dopt);
    } else {
        // 1-dimensional thin sets cannot be sphere-sliced; measure balls of
        // a radially continuous cone cloud instead
        double hi = eps.front(), lo = eps.back();
        Rng rng(substream_seed(params.seed, 9));
        std::vector<double> cone;
        const int copies = std::max(1, 20000 / std::max(cs.link_points.n(), 1));
        for (int i = 0; i < cs.link_points.n(); ++i) {
            const auto p = cs.link_points.point(i);
            const double pn = norm(p);
            for (int c = 0; c < copies; ++c) {
                const double r = std::exp(rng.uniform(std::log(lo / 3.0), std::log(hi * 1.2)));
                for (double x : p) cone.push_back(x * (r / pn));
            }
        }
        const int nc = static_cast<int>(cone.size()) / link.dim;
        rep.thin = density_profile_ball_cloud({cone.data(), nc, link.dim}, k - 1, eps, dopt);
    }
    if (!pieces.a_idx.empty())
        rep.fat_a = density_profile_slices(
            make_pushforward_sampler(base_from(link, pieces.a_idx), radial, link.spec,
                                     WeightMode::ConeRadial, k - 1),
            k, eps, dopt);
    if (!pieces.b_idx.empty())
        rep.fat_b = density_profile_slices(
            make_pushforward_sampler(base_from(link, pieces.b_idx), radial, link.spec,
                                     WeightMode::ConeRadial, k - 1),
            k, eps, dopt);
    rep.xi = std::min(rep.fat_a.theta_lower, rep.fat_b.theta_lower);

    // never SeparatingSetFound here: the construction's hypothesis is off
    rep.verdict = Verdict::NotFoundByThisConstruction;
    if (rep.thin.classification == DensityClass::Zero)
        notes << "unexpected: conflict cone of a straight cone classified thin. ";
    rep.notes = notes.str();
    return rep;
}

LinkPieces link_pieces(const SampleCloud& link, const PointsView& a_seed,
                       const PointsView& b_seed, double band) {
    if (band <= 0.0) band = 2.0 * median_nn_distance(link.coords.data(), link.n(), link.dim);
    const auto d_a = seed_distances(link.view(), a_seed);
    const auto d_b = seed_distances(link.view(), b_seed);
    const PieceLabels pl = split_link(link, d_a, d_b, band);
    LinkPieces out;
    out.conflict_idx = pl.conflict_idx;
    out.a_idx = pl.a_idx;
    out.b_idx = pl.b_idx;
    out.components_found = pl.components_found;
    out.a_frac = pl.a_frac;
    out.b_frac = pl.b_frac;
    out.band = band;
    out.clearance = pl.clearance;
    return out;
}

SampleCloud map_cloud(const SampleCloud& cloud, const std::vector<double>& matrix,
                      int out_dim) {
    require(static_cast<int>(matrix.size()) == out_dim * cloud.dim, ErrorCode::InputError,
            "map_cloud: matrix shape mismatch");
    SampleCloud out;
    out.dim = out_dim;
    out.seed = cloud.seed;
    out.law = SamplingLaw::Constructed;
    std::vector<double> q(out_dim);
    for (int i = 0; i < cloud.n(); ++i) {
        const auto p = cloud.point(i);
        for (int r = 0; r < out_dim; ++r) {
            double s = 0.0;
            for (int c = 0; c < cloud.dim; ++c) s += matrix[r * cloud.dim + c] * p[c];
            q[r] = s;
        }
        out.push(q, 0.0);
    }
    out.r_min = out.n() ? *std::min_element(out.radius.begin(), out.radius.end()) : 0.0;
    out.r_max = out.n() ? *std::max_element(out.radius.begin(), out.radius.end()) : 0.0;
    return out;
}

}  // namespace germlab
