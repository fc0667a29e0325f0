#pragma once

// Tangent cones by rescaled slices: Hausdorff convergence rate f(r) ~ a r^alpha,
// decomposition of limit clouds into central planes, horn neighbourhoods,
// and the transfer of separating subcones of the tangent cone back to
// separating sets of the germ.

#include <cstdint>
#include <vector>

#include "germlab/common.hpp"
#include "germlab/measure.hpp"
#include "germlab/separating.hpp"
#include "germlab/variety.hpp"

namespace germlab {

class KdTree;

struct TangentConeSample {
    std::vector<double> t_grid;                // decreasing
    std::vector<SampleCloud> rescaled_clouds;  // link at t, divided by t
    SampleCloud limit_cloud;                   // the smallest-t rescaled cloud
    // deviation of X from the candidate cone at radius t: mean one-sided
    // distance to the cone over the limit cloud, with the sampling floor
    // removed in quadrature, times t
    std::vector<double> f_values;
    std::vector<double> f_sup;        // tail (q99) variant, used for the horn constant
    double noise_floor = 0.0;         // self-distance of the limit resample
    double alpha = 0.0;               // fitted exponent of f
    double alpha_prefactor = 0.0;     // a in f ~ a r^alpha
    bool alpha_degenerate = false;    // deviations never clear the floor (a cone)
    int fit_points = 0;
    int cluster_count = 0;            // central planes in the limit cloud
};

struct TangentConeOptions {
    int n_per_t = 4000;
    int plane_intrinsic_dim = 0;  // 0: use the germ dimension
    uint64_t seed = 1;
};

TangentConeSample tangent_cone_sample(const std::shared_ptr<const VarietySpec>& spec,
                                      std::vector<double> t_grid,
                                      const TangentConeOptions& opts = {});

// Greedy decomposition of a (near-)conical cloud into central planes:
// repeatedly take the flattest unassigned point's PCA plane through the
// origin and claim everything within tube_mult x median spacing of it.
struct PlaneDecomposition {
    int count = 0;                     // planes holding >= 10% of the points
    std::vector<int> labels;           // plane id, -1 for junction/unassigned
    std::vector<std::vector<double>> planes;  // row-major orthonormal bases
    std::vector<int> junction;         // indices near two or more planes
};

PlaneDecomposition plane_decomposition(const PointsView& pts, int intrinsic_dim,
                                       double tube_mult = 4.0);

// --- horn neighbourhoods -----------------------------------------------------

struct HornNeighborhood {
    enum class BaseKind { PointSet, CentralCone };
    BaseKind kind = BaseKind::PointSet;
    SampleCloud base;      // sampled W; for CentralCone a unit-sphere base
    double c = 0.0;        // must be > 0
    double alpha = 0.0;    // must be > 1
    double spacing = 0.0;  // sampling correction (0: computed from base)

    // builds the lookup structure; called lazily by horn_distance, but not
    // thread-safe, so call it once up front before parallel queries
    void prepare() const;

private:
    friend double horn_distance(std::span<const double>, const HornNeighborhood&);
    mutable std::shared_ptr<const KdTree> tree_;
    mutable double spacing_cached_ = 0.0;
};

// Euclidean distance from p to the sampled W, spacing-corrected.
double horn_distance(std::span<const double> p, const HornNeighborhood& horn);

// d_e(p, W) < c * |p|^alpha
bool horn_membership(std::span<const double> p, const HornNeighborhood& horn);

// c fitted as 2 max f(t)/t^alpha over resolved nodes.
double fit_horn_constant(const TangentConeSample& tc);

// --- separating subcones ------------------------------------------------------

struct SubconeSeparation {
    int components = 0;
    std::vector<int> labels;      // per cone-cloud point: component id, -1 = tube
    double tube_radius = 0.0;
    int cone_link_rank = 0;       // PCA rank of the cone link
    int subcone_link_rank = 0;
    bool codim_ok = false;        // dim(Y) <= dim(cone) - 2
};

// Deletes a tube around Y from the cone link graph and counts components.
SubconeSeparation subcone_separation(const SampleCloud& cone_cloud,
                                     const SampleCloud& y_subcone);

struct SubconeTransferParams {
    std::vector<double> t_grid;    // default geometric 0.3 .. 3e-3, 7 points
    int n_per_t = 4000;
    int slice_n = 1200;
    std::vector<double> eps_grid;  // default geometric 1e-1 .. 1e-3, 9
    uint64_t seed = 1;
    DensityOptions density;
    bool perturb_c = true;         // re-run at 0.9c and 1.1c, flag disagreement
};

// The full transfer: estimate the tangent cone and alpha, split its link
// along Y, build horns over the two sides, cut X into Y' = X ∩ Z and the
// horn-classified remainders, and classify their densities.
SeparationReport separating_subcone_to_separating_set(
    const std::shared_ptr<const VarietySpec>& spec, const SampleCloud& y_subcone,
    const SubconeTransferParams& params);

// --- metric tangent cone distortion -------------------------------------------

// Max discrepancy of graph inner distances between two rescaled clouds
// under nearest-neighbour matching. Throws MatchFailed when the matching
// cost exceeds 4 x the median spacing.
double metric_cone_distortion(const SampleCloud& rescaled_a, const SampleCloud& rescaled_b,
                              int n_pairs, uint64_t seed);

}  // namespace germlab
