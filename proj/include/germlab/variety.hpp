#pragma once

// Algebraic germs (X, 0) given by polynomial equations, and point sampling
// on them at prescribed radii. Complex varieties are handled as real sets
// in R^{2n} with complex coordinates stored as interleaved (re, im) pairs;
// all downstream geometry is real.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "germlab/common.hpp"
#include "germlab/polynomial.hpp"

namespace germlab {

enum class Field { Complex, Real };

struct WeightVector {
    std::vector<int> w;  // one per (complex) coordinate, all >= 1

    bool valid() const {
        if (w.empty()) return false;
        for (int x : w)
            if (x < 1) return false;
        return true;
    }

    // Hypothesis of the weighted-homogeneous surface theorem: w1 >= w2 > w3.
    bool surface_hypothesis() const {
        return w.size() == 3 && w[0] >= w[1] && w[1] > w[2];
    }
};

struct VarietySpec {
    std::string name;
    Field field = Field::Complex;
    std::vector<std::string> variables;
    std::vector<Polynomial> equations;
    std::optional<WeightVector> weights;
    std::map<std::string, Cplx> family_params;
    std::optional<int> dim_hint;  // set when not a complete intersection

    int nvars() const { return static_cast<int>(variables.size()); }
    int ambient_real_dim() const { return field == Field::Complex ? 2 * nvars() : nvars(); }

    // Real dimension of the germ: the complete-intersection count unless
    // a hint overrides it.
    int germ_real_dim() const {
        if (dim_hint) return *dim_hint;
        const int codim_per_eq = field == Field::Complex ? 2 : 1;
        return ambient_real_dim() - codim_per_eq * static_cast<int>(equations.size());
    }

    void validate() const;

    // True when every equation is weighted homogeneous for `weights`
    // (checked symbolically on the exponents).
    bool is_weighted_homogeneous() const;

    // Pack/unpack between real coordinates and complex variable values.
    void complex_point(std::span<const double> p, std::vector<Cplx>& z) const;

    // Equation values at a real-coordinate point.
    std::vector<Cplx> eval(std::span<const double> p) const;

    // max_j |f_j(p)| / scale_j(|p|), with scale_j = sum of |coeff| r^deg.
    double scaled_residual(std::span<const double> p) const;

    // Rows of the real Jacobian of the residual system at p
    // (2 rows per equation over C, 1 over R). rows is m x dim row-major.
    void real_jacobian(std::span<const double> p, std::vector<double>& rows, int& m) const;

    // Precomputed once; call after filling `equations`.
    void finalize();

private:
    std::vector<std::vector<Polynomial>> jac_;  // [eq][var]
};

struct GermPoint {
    std::vector<double> coords;
    double radius = 0.0;    // Euclidean norm, cached
    double residual = 0.0;  // scaled residual at the point
};

enum class SamplingLaw { SphereSlice, BallUniform, RegionRestricted, Constructed };

struct SampleCloud {
    int dim = 0;
    std::vector<double> coords;    // n * dim, row-major
    std::vector<double> radius;    // n
    std::vector<double> residual;  // n
    double r_min = 0.0, r_max = 0.0;
    uint64_t seed = 0;
    SamplingLaw law = SamplingLaw::Constructed;
    std::shared_ptr<const VarietySpec> spec;  // null for constructed clouds

    int n() const { return static_cast<int>(radius.size()); }

    std::span<const double> point(int i) const {
        return {coords.data() + static_cast<size_t>(i) * dim, static_cast<size_t>(dim)};
    }

    PointsView view() const { return {coords.data(), n(), dim}; }

    void push(std::span<const double> p, double res) {
        coords.insert(coords.end(), p.begin(), p.end());
        radius.push_back(norm(p));
        residual.push_back(res);
    }

    SampleCloud subset(std::span<const int> indices) const;
};

// --- projection and sampling --------------------------------------------

struct ProjectionOptions {
    double tol = 1e-10;    // scaled residual target
    int max_iter = 80;
    double target_radius = -1.0;          // >0: constrain |p| = target_radius
    std::vector<int> zero_vars;           // variable indices pinned to 0
    double origin_guard = 1e-6;           // reject iterates with |p| below this * scale
};

// Gauss-Newton projection of p0 onto the zero set (optionally intersected
// with a sphere and coordinate hyperplanes). Throws NoConvergence or
// NearSingularPoint.
GermPoint project_to_variety(const VarietySpec& spec, std::span<const double> p0,
                             const ProjectionOptions& opts, double* step_sum = nullptr);

GermPoint project_to_variety(const VarietySpec& spec, std::span<const double> p0, double tol,
                             int max_iter);

// n points on the link X ∩ S(r). Deterministic in (spec, r, n, seed).
SampleCloud sample_sphere_slice(const std::shared_ptr<const VarietySpec>& spec, double r, int n,
                                uint64_t seed, double tol = 1e-10);

// Radial law for ball clouds. ConeUniform (r = r_max u^{1/k}) matches the
// natural measure of a k-dimensional cone; LogUniform populates every
// radius decade equally, which profile estimators over wide eps ranges
// need. Estimators downstream are sampling-law independent.
enum class RadialLaw { ConeUniform, LogUniform };

// n points with radii in [r_min, r_max]; used for ball-shaped clouds and
// geodesic graphs.
SampleCloud sample_ball(const std::shared_ptr<const VarietySpec>& spec, double r_min,
                        double r_max, int n, uint64_t seed, double tol = 1e-10,
                        RadialLaw law = RadialLaw::ConeUniform);

// Rejection-sample the link slice at radius r, keeping points that satisfy
// `keep`. Throws EmptySlice if the acceptance rate collapses.
SampleCloud sample_region(const std::shared_ptr<const VarietySpec>& spec, double r, int n,
                          uint64_t seed, const std::function<bool(std::span<const double>)>& keep,
                          double tol = 1e-10);

// --- the weighted scaling action ------------------------------------------

// T(p, t): complex coordinate v is multiplied by t^{w_v / w_last}, so the
// last coordinate scales linearly. Requires t > 0.
void weighted_scale(std::span<const double> p, const WeightVector& w, double t,
                    std::span<double> out);

std::vector<double> weighted_scale(std::span<const double> p, const WeightVector& w, double t);

// The unitary circle action: coordinate v multiplied by exp(i w_v theta).
void s1_action(std::span<const double> p, const WeightVector& w, double theta,
               std::span<double> out);

// t > 0 with |T(p, t)| = s (unique; the orbit radius is strictly increasing).
double orbit_param_for_radius(std::span<const double> p, const WeightVector& w, double s);

// 1 / |P_T(p/|p|)|: the coarea correction for slicing X by spheres, with
// the tangent space taken exactly from the equations' Jacobian. Clamped
// to [1, cap]; cap absorbs points where the sphere is nearly tangent.
double radial_tangency_weight(const VarietySpec& spec, std::span<const double> p,
                              double cap = 100.0);

// --- branch components -----------------------------------------------------

struct BranchComponents {
    SampleCloud slice_cloud;                   // points of (X \ 0) ∩ {var=0} ∩ S(r)
    std::vector<std::vector<int>> clusters;    // index groups, largest first
    double gap_threshold = 0.0;
    bool slice_is_full_subspace = false;       // the hyperplane section lies in X
};

// Samples the hyperplane slice of the link and counts its connected
// components by single-linkage clustering with a gap threshold of
// gap_factor x median nearest-neighbour distance; a second pass at twice
// the factor must agree or AmbiguousClustering is thrown.
BranchComponents branch_components(const std::shared_ptr<const VarietySpec>& spec, int slice_var,
                                   double r, int n, uint64_t seed, double gap_factor = 5.0);

// Cluster a point sample by the natural gap of its minimum spanning
// structure: single-linkage over a kNN graph, then component pairs are
// kept apart only when their separation exceeds ratio_cut times the
// largest within-component merge distance. Random samples of curves have
// unbounded gap/median ratios, so a fixed multiple of the median spacing
// cannot work there; the ratio rule adapts to the observed gaps instead.
struct GapClusters {
    std::vector<int> labels;
    int count = 0;
    double max_intra_gap = 0.0;  // largest merge distance inside a cluster
    double min_inter_gap = 0.0;  // smallest separation between clusters (inf if one)
};

GapClusters cluster_by_gap(const PointsView& pts, double ratio_cut = 4.0,
                           double ambiguous_lo = 2.5, int knn = 12);

// --- config + catalog ------------------------------------------------------

VarietySpec parse_variety_config(const std::string& text);

// Built-in example germs.
VarietySpec make_brieskorn(int p, int q, int r);            // x^p + y^q + z^r
VarietySpec make_ak(int k);                                 // x^2 + y^2 + z^{k+1}
VarietySpec make_briancon_speder(double t);                 // x^5 + z^15 + y^7 z + t x y^6
VarietySpec make_brieskorn_nd(std::vector<int> exponents);  // z1^a1 + ... + zn^an
VarietySpec make_real_plane2_in_r4();                       // {z=0, w=0} in R^4
VarietySpec make_real_transverse_planes_r4();               // union of two 2-planes in R^4

}  // namespace germlab
