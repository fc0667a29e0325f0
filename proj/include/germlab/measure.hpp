#pragma once

// Hausdorff measure and density estimation from point samples.
//
// The workhorse is a k-nearest-neighbour distance estimator: for points
// drawn from any positive density on a k-rectifiable set, eta_k/j times
// the sum of j-th neighbour distances to the k-th power is a consistent
// estimate of the k-measure, independent of the sampling law. Densities
// at the origin are computed by slicing the germ with spheres, estimating
// the (k-1)-measure of each slice with a coarea weight, and integrating
// the slice profile in the radius.

#include <cstdint>
#include <functional>
#include <vector>

#include "germlab/common.hpp"
#include "germlab/variety.hpp"

namespace germlab {

// Volume of the k-dimensional unit ball, pi^{k/2} / Gamma(k/2 + 1).
double unit_ball_volume(int k);

enum class MeasureMethod { JacobianMC, CoveringCount };

struct MeasureEstimate {
    int k = 0;
    double value = 0.0;
    double std_error = 0.0;
    MeasureMethod method = MeasureMethod::JacobianMC;
};

struct MeasureOptions {
    int knn_j = 12;               // neighbour index for the distance estimator
    bool boundary_correct = true; // asymmetry-based first-order edge correction
    double boundary_radius = 0.0; // >0: the set is cut by the sphere |p| = R,
                                  // use the exact distance to it instead of
                                  // the asymmetry estimate
    bool rank_check = true;       // PCA dimension audit
    double rank_mismatch_frac = 0.10;
    std::vector<double> weights;  // optional per-point multipliers (coarea)
};

// k-measure of the set carried by the cloud. Throws DimensionMismatch when
// the local PCA rank disagrees with k on more than rank_mismatch_frac of
// the points.
MeasureEstimate measure_knn(const PointsView& pts, int k, const MeasureOptions& opts = {});

MeasureEstimate hausdorff_measure(const SampleCloud& cloud, int k,
                                  const MeasureOptions& opts = {});

// --- density profiles -------------------------------------------------------

enum class DensityClass { Zero, Positive, Inconclusive };

const char* to_string(DensityClass c);

struct DensityEstimate {
    int k = 0;
    std::vector<double> eps_grid;      // decreasing
    std::vector<double> ratios;        // H^k(X ∩ eps B)/(eta eps^k)
    std::vector<double> ratio_stderr;
    double theta = 0.0;                // tail point estimate of the density
    double theta_lower = 0.0;
    double theta_upper = 0.0;
    double beta = 0.0;                 // fitted excess exponent of the ratio
    double beta_r2 = 0.0;
    double fit_rms = 0.0;              // log-space residual of the power fit
    DensityClass classification = DensityClass::Inconclusive;
};

struct DensityOptions {
    int knn_j = 12;
    int n_per_eps = 1500;
    uint64_t seed = 1;
    double beta_threshold = 0.2;
    double theta_threshold = 0.05;
    double r2_threshold = 0.9;
    double resid_threshold = 0.35;  // log-space rms above this -> Inconclusive
    int extra_low_nodes = 2;        // radius nodes below the smallest eps
};

// A sphere slice of the measured set: points on S(s) with their coarea
// weights 1/|P_T r̂| (tangent spaces of the k-dimensional set).
struct SliceSample {
    double s = 0.0;
    int dim = 0;
    std::vector<double> pts;      // flat n x dim
    std::vector<double> weight;   // per point, >= 1
    int n() const { return dim ? static_cast<int>(pts.size()) / dim : 0; }
    PointsView view() const { return {pts.data(), n(), dim}; }
};

using SliceSampler = std::function<SliceSample(double s, int n, uint64_t seed)>;

// Generic profile: slice measures g(s) integrated over the radius with
// piecewise power-law quadrature, ratios against eta_k eps^k, a log-log
// power fit for beta, and the tail estimate for theta.
DensityEstimate density_profile_slices(const SliceSampler& sampler, int k,
                                       std::vector<double> eps_grid,
                                       const DensityOptions& opts);

// Profile of a variety germ at the origin; slices are sampled by Newton
// projection and weighted by the exact tangent spaces.
DensityEstimate density_profile(const std::shared_ptr<const VarietySpec>& spec, int k,
                                std::vector<double> eps_grid, int n_per_eps, uint64_t seed,
                                const DensityOptions& opts = {});

// Profile computed from a fixed multi-radius cloud: the measure of
// {|p| <= eps} by the boundary-corrected estimator. Used as the
// independent cross-check route and after bi-Lipschitz maps of clouds.
DensityEstimate density_profile_ball_cloud(const PointsView& pts, int k,
                                           std::vector<double> eps_grid,
                                           const DensityOptions& opts = {});

// Re-classify a fitted estimate against explicit thresholds.
DensityClass classify_density(const DensityEstimate& est, double beta_threshold,
                              double theta_threshold, double r2_threshold = 0.9,
                              double resid_threshold = 0.35);

// Geometric grid from hi down to lo (inclusive), points >= 2.
std::vector<double> geometric_grid(double hi, double lo, int points);

// Cumulative integral of slice measures g over the radius, using piecewise
// power-law interpolation (exact for cones) and a power-extrapolated tail
// below the first node; k sets the default tail exponent k-1.
struct SliceProfileIntegral {
    std::vector<double> integral;         // one per node, from 0 to that node
    std::vector<double> integral_stderr;
};
SliceProfileIntegral integrate_slice_measures(std::span<const double> nodes_ascending,
                                              std::span<const double> g,
                                              std::span<const double> g_stderr, int k);

// Local PCA rank of the neighbourhood of each point (shared helper).
std::vector<int> local_pca_ranks(const PointsView& pts, int n_neighbors);

}  // namespace germlab
