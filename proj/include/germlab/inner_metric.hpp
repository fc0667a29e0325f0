#pragma once

// Inner (arc-length) metric approximation by geodesic graphs on samples,
// the inner/outer embedding ratio, and the inner-vs-outer density sandwich.

#include <cstdint>
#include <vector>

#include "germlab/common.hpp"
#include "germlab/measure.hpp"
#include "germlab/variety.hpp"

namespace germlab {

struct NeighborhoodGraph {
    int n = 0;
    std::vector<int> offsets;  // CSR, size n+1
    std::vector<int> nbrs;
    std::vector<double> lens;
    double connectivity_radius = 0.0;
    double median_nn = 0.0;
    double max_edge_len = 0.0;  // shortcut audit datum
    int component_count = 0;
    std::vector<int> component;  // label per node, by discovery order

    int degree(int i) const { return offsets[i + 1] - offsets[i]; }
};

// Edges are the union of a radius graph (radius_multiplier x median NN)
// and a symmetrized kNN graph. The radius part gives dense local
// connectivity at the dominant scale; the kNN part adapts to local
// density, which multi-radius clouds and 1-dimensional links need (their
// extreme/median spacing ratio is unbounded, so no fixed radius works).
struct GraphOptions {
    double radius_multiplier = 3.0;
    int knn = 0;                     // 0 = auto: max(12, 2 ln n); random geometric
                                     // graphs need k ~ ln n to bridge the largest gaps
    bool expect_connected = false;   // throw UndersampledGraph when violated
};

NeighborhoodGraph build_graph(const PointsView& pts, const GraphOptions& opts = {});

inline NeighborhoodGraph build_graph(const SampleCloud& cloud, const GraphOptions& opts = {}) {
    return build_graph(cloud.view(), opts);
}

// Dijkstra distances from one or many sources (infinity when unreachable).
// init_dist, when given, holds one starting distance per source.
std::vector<double> graph_distances(const NeighborhoodGraph& g, const PointsView& pts,
                                    std::span<const int> sources,
                                    std::span<const double> init_dist = {});

// Shortest-path length between two nodes; throws Unreachable.
double inner_distance(const NeighborhoodGraph& g, const PointsView& pts, int a, int b);

struct EmbeddingReport {
    double max_ratio = 0.0;   // sup of d_inner / d_outer over sampled pairs
    double mean_ratio = 0.0;
    int pair_count = 0;
    int unreachable_pairs = 0;
    double kappa_lower = 0.0;  // filled by the density sandwich
    double kappa_upper = 0.0;
};

// Ratio distribution over random pairs with separation at least
// min_separation_medians x median spacing (short pairs only measure the
// graph discretization, not the metric).
EmbeddingReport normal_embedding_ratio(const PointsView& pts, const NeighborhoodGraph& g,
                                       int n_pairs, uint64_t seed,
                                       double min_separation_medians = 60.0);

struct SandwichResult {
    DensityEstimate outer;
    DensityEstimate inner;
    double kappa_lower = 0.0;  // min over the grid of ratio_outer / ratio_inner
    double kappa_upper = 0.0;  // max
    bool truncated = false;    // small-eps entries dropped for lack of points
};

// Inner vs outer density profile of the set carried by a multi-radius
// cloud, at a base point x0. Inner balls use graph distance from the node
// nearest to x0 (plus that node's offset to x0).
SandwichResult inner_density_sandwich_cloud(const PointsView& pts, std::span<const double> x0,
                                            int k, std::vector<double> eps_grid,
                                            const DensityOptions& opts = {},
                                            const GraphOptions& gopts = {});

// Convenience wrapper: samples a ball cloud of the germ at the origin.
SandwichResult inner_density_sandwich(const std::shared_ptr<const VarietySpec>& spec, int k,
                                      std::vector<double> eps_grid, int n, uint64_t seed,
                                      const DensityOptions& opts = {});

}  // namespace germlab
