#pragma once

// Scenario runner: reproduces each example family end to end with seeded
// determinism, including the Briancon-Speder special checks.

#include <optional>
#include <string>
#include <vector>

#include "germlab/io.hpp"
#include "germlab/separating.hpp"
#include "germlab/tangent_cone.hpp"
#include "germlab/variety.hpp"

namespace germlab {

enum class Pipeline {
    SeparationVerdict,
    TangentCone,
    SubconeTransfer,
    StraightConeControl,
    BSConical,
};

const char* to_string(Pipeline p);

struct ScenarioBudget {
    int link_n = 20000;
    int branch_n = 900;
    int slice_n = 1500;
    int eps_points = 9;
    double eps_hi = 1e-1;
    double eps_lo = 1e-3;
    int t_points = 10;
    double t_hi = 0.5;
    double t_lo = 4e-3;
    int n_per_t = 5000;
    int region_n = 4000;  // BS region sampling
};

struct Scenario {
    std::string name;
    Pipeline pipeline = Pipeline::SeparationVerdict;
    std::optional<VarietySpec> spec;  // controls build their own clouds
    ScenarioBudget budget;
    uint64_t seed = 1;
    std::optional<Verdict> expected;
    double bs_epsilon = 0.3;  // the X^eps band parameter for BS checks
};

// Flat key = value config; keys: name, pipeline, seed, expected,
// bs_epsilon, spec.* (variety config keys), budget.*.
Scenario parse_scenario_config(const std::string& text);

// Built-in scenarios: a1, a2, a3, brieskorn:p,q,r, bs:t, cone-control,
// tangent:<name>, subcone:<name> where <name> is a catalog germ.
std::vector<std::string> catalog_names();
Scenario catalog_scenario(const std::string& name);

struct RunResult {
    Json report;
    int exit_code = 0;  // 0 match, 1 mismatch, 2 inconclusive, 3 error
};

struct RunOptions {
    std::string csv_dir;  // when set, clouds of interest are dumped there
};

RunResult run_scenario(const Scenario& s, const RunOptions& opts = {});

// --- Briancon-Speder specifics ----------------------------------------------

struct BSConicalReport {
    double epsilon = 0.0;
    int region_count = 0;
    double max_dx_dy = 0.0;
    double max_dx_dz = 0.0;
    double lambda_fit = 0.0;
    double bound_dx_dy = 0.0;  // closed form from lambda and epsilon
    double bound_dx_dz = 0.0;
    double margin_dx_dy = 0.0;  // 1 - max/bound
    double margin_dx_dz = 0.0;
    int cover_degree = 0;       // monodromy sheet count of the projection
    bool closed_after_first_loop = false;
};

// Samples X_0 over the double-wedge region C^eps within the disk of radius
// eps/2, evaluates the implicit derivatives against their closed-form
// bounds, and lifts the test loop until it closes.
BSConicalReport bs_conical_check(double epsilon, double r, int n, uint64_t seed);

struct NepsVolumeReport {
    std::vector<double> eps_grid;
    std::vector<double> r_grid;
    std::vector<double> volumes;  // row-major [eps][r]
    double exponent_eps = 0.0;
    double exponent_r = 0.0;
    double k_constant = 0.0;      // fitted K in H4 ~ K eps^a r^b
    bool inconclusive = false;
};

// H^4(X_0 ∩ N^eps ∩ B(0,r)) over a grid, with the joint power fit.
NepsVolumeReport n_eps_volume_check(std::vector<double> eps_grid, std::vector<double> r_grid,
                                    int n, uint64_t seed);

}  // namespace germlab
