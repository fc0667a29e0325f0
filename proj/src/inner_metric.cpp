#include "germlab/inner_metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "germlab/kdtree.hpp"
#include "germlab/linalg.hpp"
#include "germlab/parallel.hpp"
#include "germlab/rng.hpp"

namespace germlab {

NeighborhoodGraph build_graph(const PointsView& pts, const GraphOptions& opts) {
    require(pts.n >= 2, ErrorCode::InputError, "build_graph: need >= 2 points");
    require(opts.radius_multiplier >= 2.0, ErrorCode::InputError,
            "build_graph: radius_multiplier must be >= 2");

    NeighborhoodGraph g;
    g.n = pts.n;
    g.median_nn = median_nn_distance(pts.data, pts.n, pts.dim);
    g.connectivity_radius = opts.radius_multiplier * g.median_nn;

    KdTree tree(pts.data, pts.n, pts.dim);
    const double r2 = g.connectivity_radius * g.connectivity_radius;
    const int k_auto = opts.knn > 0 ? opts.knn
                                    : std::max(12, static_cast<int>(2.0 * std::log(pts.n)) + 1);
    const int k = std::min(k_auto, pts.n - 1);
    // half-edges (i -> larger neighbour set); symmetrized below
    std::vector<std::vector<KdTree::Hit>> found(pts.n);
    parallel_for(pts.n, [&](int i) {
        std::vector<int> hits;
        tree.radius(pts.point(i), r2, hits);
        std::vector<KdTree::Hit> near;
        tree.knn(pts.point(i), k, near, i);
        auto& out = found[i];
        for (int j : hits) {
            if (j == i) continue;
            out.push_back({std::sqrt(dist2(pts.point(i), pts.point(j))), j});
        }
        for (const auto& h : near) out.push_back({std::sqrt(h.d2), h.idx});
        std::sort(out.begin(), out.end(),
                  [](const KdTree::Hit& a, const KdTree::Hit& b) { return a.idx < b.idx; });
        out.erase(std::unique(out.begin(), out.end(),
                              [](const KdTree::Hit& a, const KdTree::Hit& b) {
                                  return a.idx == b.idx;
                              }),
                  out.end());
    });
    // symmetrize: kNN edges are not mutual by default
    for (int i = 0; i < pts.n; ++i)
        for (const auto& h : found[i])
            if (h.idx > i) {
                auto& other = found[h.idx];
                const auto it = std::lower_bound(
                    other.begin(), other.end(), KdTree::Hit{0.0, i},
                    [](const KdTree::Hit& a, const KdTree::Hit& b) { return a.idx < b.idx; });
                if (it == other.end() || it->idx != i) other.insert(it, {h.d2, i});
            }

    g.offsets.assign(pts.n + 1, 0);
    for (int i = 0; i < pts.n; ++i) g.offsets[i + 1] = g.offsets[i] + static_cast<int>(found[i].size());
    g.nbrs.resize(g.offsets.back());
    g.lens.resize(g.offsets.back());
    for (int i = 0; i < pts.n; ++i) {
        int at = g.offsets[i];
        for (const auto& h : found[i]) {
            g.nbrs[at] = h.idx;
            g.lens[at] = h.d2;  // plain length
            g.max_edge_len = std::max(g.max_edge_len, h.d2);
            ++at;
        }
    }

    // components by BFS in index order
    g.component.assign(pts.n, -1);
    g.component_count = 0;
    std::vector<int> stack;
    for (int s = 0; s < pts.n; ++s) {
        if (g.component[s] >= 0) continue;
        const int label = g.component_count++;
        stack.push_back(s);
        g.component[s] = label;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
                const int v = g.nbrs[e];
                if (g.component[v] < 0) {
                    g.component[v] = label;
                    stack.push_back(v);
                }
            }
        }
    }
    if (opts.expect_connected && g.component_count > 1)
        fail(ErrorCode::UndersampledGraph,
             "build_graph: expected a connected graph, found " +
                 std::to_string(g.component_count) + " components");
    return g;
}

std::vector<double> graph_distances(const NeighborhoodGraph& g, const PointsView&,
                                    std::span<const int> sources,
                                    std::span<const double> init_dist) {
    require(init_dist.empty() || init_dist.size() == sources.size(), ErrorCode::InputError,
            "graph_distances: init_dist size mismatch");
    std::vector<double> dist(g.n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (size_t si = 0; si < sources.size(); ++si) {
        const int s = sources[si];
        require(s >= 0 && s < g.n, ErrorCode::InputError, "graph_distances: bad source");
        const double d0 = init_dist.empty() ? 0.0 : init_dist[si];
        if (d0 < dist[s]) {
            dist[s] = d0;
            heap.push({d0, s});
        }
    }
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        for (int e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
            const int v = g.nbrs[e];
            const double nd = d + g.lens[e];
            if (nd < dist[v]) {
                dist[v] = nd;
                heap.push({nd, v});
            }
        }
    }
    return dist;
}

double inner_distance(const NeighborhoodGraph& g, const PointsView& pts, int a, int b) {
    require(a >= 0 && a < g.n && b >= 0 && b < g.n, ErrorCode::InputError,
            "inner_distance: bad node");
    if (g.component[a] != g.component[b])
        fail(ErrorCode::Unreachable, "inner_distance: nodes in different components");
    const int src[1] = {a};
    const auto dist = graph_distances(g, pts, std::span<const int>(src, 1));
    if (!std::isfinite(dist[b])) fail(ErrorCode::Unreachable, "inner_distance: unreachable");
    return dist[b];
}

EmbeddingReport normal_embedding_ratio(const PointsView& pts, const NeighborhoodGraph& g,
                                       int n_pairs, uint64_t seed,
                                       double min_separation_medians) {
    require(n_pairs >= 1, ErrorCode::InputError, "normal_embedding_ratio: n_pairs >= 1");
    const double min_sep = min_separation_medians * g.median_nn;

    // batch pairs by source so one Dijkstra serves several pairs
    const int n_src = std::min(n_pairs, 48);
    const int per_src = (n_pairs + n_src - 1) / n_src;
    Rng rng(substream_seed(seed, 0xe3b7));

    EmbeddingReport rep;
    double sum = 0.0;
    for (int s = 0; s < n_src; ++s) {
        const int src = static_cast<int>(rng.below(g.n));
        const int source_arr[1] = {src};
        const auto dist = graph_distances(g, pts, std::span<const int>(source_arr, 1));
        for (int t = 0; t < per_src && rep.pair_count + rep.unreachable_pairs < n_pairs;) {
            const int tgt = static_cast<int>(rng.below(g.n));
            const double de = std::sqrt(dist2(pts.point(src), pts.point(tgt)));
            if (tgt == src || de < min_sep) {
                ++t;
                continue;
            }
            ++t;
            if (!std::isfinite(dist[tgt])) {
                ++rep.unreachable_pairs;
                continue;
            }
            const double ratio = dist[tgt] / de;
            rep.max_ratio = std::max(rep.max_ratio, ratio);
            sum += ratio;
            ++rep.pair_count;
        }
    }
    rep.mean_ratio = rep.pair_count ? sum / rep.pair_count : 0.0;
    return rep;
}

SandwichResult inner_density_sandwich_cloud(const PointsView& pts, std::span<const double> x0,
                                            int k, std::vector<double> eps_grid,
                                            const DensityOptions& opts,
                                            const GraphOptions& gopts) {
    require(static_cast<int>(x0.size()) == pts.dim, ErrorCode::InputError,
            "inner_density_sandwich_cloud: x0 dimension mismatch");

    SandwichResult out;
    out.outer = [&] {
        // outer profile about x0: translate so x0 is the origin
        std::vector<double> shifted(pts.data, pts.data + static_cast<size_t>(pts.n) * pts.dim);
        for (int i = 0; i < pts.n; ++i)
            for (int d = 0; d < pts.dim; ++d) shifted[static_cast<size_t>(i) * pts.dim + d] -= x0[d];
        return density_profile_ball_cloud({shifted.data(), pts.n, pts.dim}, k, eps_grid, opts);
    }();

    const NeighborhoodGraph g = build_graph(pts, gopts);
    // the inner rim seeds the graph distance, each node starting at its
    // own offset from x0; a single source would make every path pay that
    // one node's discretization toll
    std::vector<double> offs(pts.n);
    for (int i = 0; i < pts.n; ++i) offs[i] = std::sqrt(dist2(pts.point(i), x0));
    double rim = *std::min_element(offs.begin(), offs.end());
    std::vector<int> sources;
    std::vector<double> init;
    for (int i = 0; i < pts.n; ++i) {
        if (offs[i] <= 2.5 * rim + 3.0 * g.median_nn) {
            sources.push_back(i);
            init.push_back(offs[i]);
        }
    }
    auto d_in = graph_distances(g, pts, sources, init);

    // inner profile: measure of {d_inner <= eps}, same estimator
    DensityEstimate inner;
    inner.k = k;
    const double eta = unit_ball_volume(k);
    MeasureOptions mo;
    mo.knn_j = opts.knn_j;
    mo.boundary_correct = true;
    mo.rank_check = false;
    for (double eps : eps_grid) {
        std::vector<double> flat;
        int count = 0;
        for (int i = 0; i < pts.n; ++i) {
            if (d_in[i] <= eps) {
                const auto p = pts.point(i);
                flat.insert(flat.end(), p.begin(), p.end());
                ++count;
            }
        }
        if (count < opts.knn_j + 6) {
            out.truncated = true;
            continue;
        }
        inner.eps_grid.push_back(eps);
        const auto m = measure_knn({flat.data(), count, pts.dim}, k, mo);
        inner.ratios.push_back(m.value / (eta * std::pow(eps, k)));
        inner.ratio_stderr.push_back(m.std_error / (eta * std::pow(eps, k)));
    }
    require(inner.ratios.size() >= 3, ErrorCode::InputError,
            "inner_density_sandwich_cloud: inner profile too short");
    {
        DensityOptions o2 = opts;
        // finish via the public classifier on a copy of the grid
        DensityEstimate tmp = inner;
        std::vector<double> lx, ly;
        for (size_t i = 0; i < tmp.ratios.size(); ++i)
            if (tmp.ratios[i] > 0.0) {
                lx.push_back(std::log(tmp.eps_grid[i]));
                ly.push_back(std::log(tmp.ratios[i]));
            }
        if (lx.size() >= 3) {
            const auto f = fit_line(lx, ly);
            tmp.beta = f.slope;
            tmp.beta_r2 = f.r2;
            tmp.fit_rms = f.rms_resid;
        }
        const int tail = std::min<size_t>(3, tmp.ratios.size());
        double sum = 0, lo = std::numeric_limits<double>::infinity(), hi = 0, se = 0;
        for (size_t i = tmp.ratios.size() - tail; i < tmp.ratios.size(); ++i) {
            sum += tmp.ratios[i];
            lo = std::min(lo, tmp.ratios[i]);
            hi = std::max(hi, tmp.ratios[i]);
            se += tmp.ratio_stderr[i];
        }
        tmp.theta = sum / tail;
        se /= tail;
        tmp.theta_lower = lo - se;
        tmp.theta_upper = hi + se;
        tmp.classification = classify_density(tmp, o2.beta_threshold, o2.theta_threshold,
                                              o2.r2_threshold, o2.resid_threshold);
        inner = tmp;
    }
    out.inner = inner;

    // kappa band from the shared part of the grids
    double klo = std::numeric_limits<double>::infinity(), khi = 0.0;
    for (size_t i = 0; i < out.inner.eps_grid.size(); ++i) {
        for (size_t j = 0; j < out.outer.eps_grid.size(); ++j) {
            if (std::fabs(out.inner.eps_grid[i] - out.outer.eps_grid[j]) <=
                1e-12 * out.inner.eps_grid[i]) {
                if (out.inner.ratios[i] > 0.0) {
                    const double kappa = out.outer.ratios[j] / out.inner.ratios[i];
                    klo = std::min(klo, kappa);
                    khi = std::max(khi, kappa);
                }
            }
        }
    }
    out.kappa_lower = klo;
    out.kappa_upper = khi;
    return out;
}

SandwichResult inner_density_sandwich(const std::shared_ptr<const VarietySpec>& spec, int k,
                                      std::vector<double> eps_grid, int n, uint64_t seed,
                                      const DensityOptions& opts) {
    require(!eps_grid.empty(), ErrorCode::InputError, "inner_density_sandwich: empty grid");
    double hi = eps_grid.front(), lo = eps_grid.front();
    for (double e : eps_grid) {
        hi = std::max(hi, e);
        lo = std::min(lo, e);
    }
    auto cloud = sample_ball(spec, lo * 0.05, hi * 1.3, n, seed, 1e-10, RadialLaw::LogUniform);
    std::vector<double> origin(spec->ambient_real_dim(), 0.0);
    return inner_density_sandwich_cloud(cloud.view(), origin, k, std::move(eps_grid), opts);
}

}  // namespace germlab
