#pragma once

// Conflict sets between link subsets, their coned-down germs, and the
// three-part separating-set verdict: a candidate separator must be thin
// (vanishing (k-1)-density), and removing it must leave at least two fat
// pieces (positive k-density).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "germlab/common.hpp"
#include "germlab/inner_metric.hpp"
#include "germlab/measure.hpp"
#include "germlab/variety.hpp"

namespace germlab {

struct ConflictSet {
    SampleCloud link_points;   // the equidistant band on the link
    std::vector<double> d_a;   // seed distances per conflict point
    std::vector<double> d_b;
    double band = 0.0;
    double delta = 0.0;        // min distance of conflict points to the slice set
    SampleCloud cone_cloud;    // scaled copies (filled by cone_down)
    std::vector<double> cone_t;
};

// Link points equidistant (within band) to the two seed sets. band <= 0
// selects 2 x the median nearest-neighbour spacing of the link. slice_var
// names the coordinate whose zero set carries the seeds (for the delta
// statistic); pass -1 to measure delta against the seeds themselves.
ConflictSet conflict_set(const SampleCloud& link, const PointsView& a_seed,
                         const PointsView& b_seed, double band = 0.0, int slice_var = -1);

// Scale every conflict point by T(., t) for each t; the results are
// appended to cs.cone_cloud with matching cs.cone_t. Points must stay on
// the variety when the link cloud carries a spec.
void cone_down(ConflictSet& cs, const WeightVector& w, std::span<const double> t_grid);

// Mean angular distance (radians) from the coordinate plane of `axis_var`
// for each value in t_grid; the tangent-cone collapse diagnostic.
std::vector<double> cone_axis_angles(const ConflictSet& cs, int axis_var,
                                     std::span<const double> t_grid);

enum class Verdict { SeparatingSetFound, NotFoundByThisConstruction, Inconclusive };

const char* to_string(Verdict v);

struct SeparationReport {
    DensityEstimate thin;    // the conflict cone at dimension k-1
    DensityEstimate fat_a;   // the two remainder pieces at dimension k
    DensityEstimate fat_b;
    int components_found = 0;
    int branch_count = 0;
    bool hypothesis_ok = true;  // weight ordering + >= 2 branches
    double band = 0.0;
    double delta = 0.0;
    double xi = 0.0;  // min inferior density of the fat pieces
    Verdict verdict = Verdict::Inconclusive;
    std::string notes;
};

struct SeparationParams {
    double link_radius = 1.0;
    int link_n = 20000;
    int branch_n = 900;
    int slice_n = 1500;
    std::vector<double> eps_grid;  // default: geometric 1e-1 .. 1e-3, 9 points
    double band = 0.0;             // 0 = auto
    uint64_t seed = 1;
    DensityOptions density;
};

// The full pipeline on a weighted homogeneous germ: branch components of
// the slice, conflict set of the two seed groups, graph components after
// deleting the band, and thin/fat density classifications of the coned
// pieces.
SeparationReport separation_verdict(const std::shared_ptr<const VarietySpec>& spec,
                                    int slice_var, const SeparationParams& params);

// The same pipeline on an explicit straight-cone link sample with radial
// scaling. Negative control: the conflict cone of a straight cone is fat.
SeparationReport straight_cone_control(const SampleCloud& link_manifold_sample,
                                       const PointsView& a_seed, const PointsView& b_seed,
                                       int germ_dim, const SeparationParams& params);

// Apply a global linear map to a cloud (the bi-Lipschitz invariance probe).
SampleCloud map_cloud(const SampleCloud& cloud, const std::vector<double>& matrix,
                      int out_dim);

// The band/piece decomposition of a link relative to two seed sets: the
// conflict band indices and the two bulk components of the link minus the
// band. Exposed for cloud-level experiments on the pipeline's pieces.
struct LinkPieces {
    std::vector<int> conflict_idx;
    std::vector<int> a_idx;
    std::vector<int> b_idx;
    int components_found = 0;
    double a_frac = 0.0, b_frac = 0.0;
    double band = 0.0;
    double clearance = 0.0;
};

LinkPieces link_pieces(const SampleCloud& link, const PointsView& a_seed,
                       const PointsView& b_seed, double band = 0.0);

}  // namespace germlab
