#include "germlab/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace germlab {

namespace {

Json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

Json vector_json(const std::vector<double>& v) {
    Json arr = Json::array();
    for (double x : v) arr.push_back(finite_or_null(x));
    return arr;
}

}  // namespace

Json to_json(const MeasureEstimate& est) {
    Json j;
    j["k"] = est.k;
    j["value"] = finite_or_null(est.value);
    j["std_error"] = finite_or_null(est.std_error);
    j["method"] = est.method == MeasureMethod::JacobianMC ? "JacobianMC" : "CoveringCount";
    return j;
}

Json to_json(const DensityEstimate& est) {
    Json j;
    j["k"] = est.k;
    j["eps_grid"] = vector_json(est.eps_grid);
    j["ratios"] = vector_json(est.ratios);
    j["ratio_stderr"] = vector_json(est.ratio_stderr);
    j["theta"] = finite_or_null(est.theta);
    j["theta_lower"] = finite_or_null(est.theta_lower);
    j["theta_upper"] = finite_or_null(est.theta_upper);
    j["beta"] = finite_or_null(est.beta);
    j["beta_r2"] = finite_or_null(est.beta_r2);
    j["fit_rms"] = finite_or_null(est.fit_rms);
    j["classification"] = to_string(est.classification);
    return j;
}

Json to_json(const EmbeddingReport& rep) {
    Json j;
    j["max_ratio"] = finite_or_null(rep.max_ratio);
    j["mean_ratio"] = finite_or_null(rep.mean_ratio);
    j["pair_count"] = rep.pair_count;
    j["unreachable_pairs"] = rep.unreachable_pairs;
    j["kappa_lower"] = finite_or_null(rep.kappa_lower);
    j["kappa_upper"] = finite_or_null(rep.kappa_upper);
    return j;
}

Json to_json(const SeparationReport& rep) {
    Json j;
    j["verdict"] = to_string(rep.verdict);
    j["branch_count"] = rep.branch_count;
    j["components_found"] = rep.components_found;
    j["hypothesis_ok"] = rep.hypothesis_ok;
    j["band"] = finite_or_null(rep.band);
    j["delta"] = finite_or_null(rep.delta);
    j["xi"] = finite_or_null(rep.xi);
    j["thin"] = to_json(rep.thin);
    j["fat_a"] = to_json(rep.fat_a);
    j["fat_b"] = to_json(rep.fat_b);
    j["notes"] = rep.notes;
    return j;
}

Json to_json(const TangentConeSample& tc) {
    Json j;
    j["t_grid"] = vector_json(tc.t_grid);
    j["f_values"] = vector_json(tc.f_values);
    j["f_sup"] = vector_json(tc.f_sup);
    j["noise_floor"] = finite_or_null(tc.noise_floor);
    j["alpha"] = finite_or_null(tc.alpha);
    j["alpha_prefactor"] = finite_or_null(tc.alpha_prefactor);
    j["alpha_degenerate"] = tc.alpha_degenerate;
    j["fit_points"] = tc.fit_points;
    j["cluster_count"] = tc.cluster_count;
    return j;
}

// ---------------------------------------------------------------------------
// cloud and graph files
// ---------------------------------------------------------------------------

namespace {
constexpr char kMagic[8] = {'G', 'L', 'C', 'L', '0', '0', '0', '1'};

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}
}  // namespace

void save_cloud_binary(const SampleCloud& cloud, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), ErrorCode::IoError, "save_cloud_binary: cannot open " + path);
    os.write(kMagic, sizeof(kMagic));
    const int32_t dim = cloud.dim;
    const int64_t n = cloud.n();
    write_pod(os, dim);
    write_pod(os, n);
    write_pod(os, cloud.r_min);
    write_pod(os, cloud.r_max);
    const uint64_t seed = cloud.seed;
    write_pod(os, seed);
    const int32_t law = static_cast<int32_t>(cloud.law);
    write_pod(os, law);
    // columns
    std::vector<double> col(n);
    for (int d = 0; d < dim; ++d) {
        for (int64_t i = 0; i < n; ++i) col[i] = cloud.coords[i * dim + d];
        os.write(reinterpret_cast<const char*>(col.data()), n * sizeof(double));
    }
    os.write(reinterpret_cast<const char*>(cloud.radius.data()), n * sizeof(double));
    os.write(reinterpret_cast<const char*>(cloud.residual.data()), n * sizeof(double));
    require(os.good(), ErrorCode::IoError, "save_cloud_binary: write failed for " + path);
}

SampleCloud load_cloud_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), ErrorCode::IoError, "load_cloud_binary: cannot open " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    require(std::memcmp(magic, kMagic, sizeof(kMagic)) == 0, ErrorCode::IoError,
            "load_cloud_binary: bad magic in " + path);
    int32_t dim = 0;
    int64_t n = 0;
    read_pod(is, dim);
    read_pod(is, n);
    require(dim >= 1 && dim <= 8 && n >= 0, ErrorCode::IoError,
            "load_cloud_binary: corrupt header");
    SampleCloud cloud;
    cloud.dim = dim;
    read_pod(is, cloud.r_min);
    read_pod(is, cloud.r_max);
    uint64_t seed = 0;
    read_pod(is, seed);
    cloud.seed = seed;
    int32_t law = 0;
    read_pod(is, law);
    cloud.law = static_cast<SamplingLaw>(law);
    cloud.coords.resize(static_cast<size_t>(n) * dim);
    std::vector<double> col(n);
    for (int d = 0; d < dim; ++d) {
        is.read(reinterpret_cast<char*>(col.data()), n * sizeof(double));
        for (int64_t i = 0; i < n; ++i) cloud.coords[i * dim + d] = col[i];
    }
    cloud.radius.resize(n);
    cloud.residual.resize(n);
    is.read(reinterpret_cast<char*>(cloud.radius.data()), n * sizeof(double));
    is.read(reinterpret_cast<char*>(cloud.residual.data()), n * sizeof(double));
    require(is.good(), ErrorCode::IoError, "load_cloud_binary: truncated file " + path);
    return cloud;
}

void save_cloud_csv(const SampleCloud& cloud, const std::string& path) {
    std::ofstream os(path);
    require(os.good(), ErrorCode::IoError, "save_cloud_csv: cannot open " + path);
    os.precision(17);
    for (int d = 0; d < cloud.dim; ++d) os << "c" << d << ",";
    os << "radius,residual\n";
    for (int i = 0; i < cloud.n(); ++i) {
        const auto p = cloud.point(i);
        for (double x : p) os << x << ",";
        os << cloud.radius[i] << "," << cloud.residual[i] << "\n";
    }
}

void save_graph_csv(const NeighborhoodGraph& g, const std::string& path) {
    std::ofstream os(path);
    require(os.good(), ErrorCode::IoError, "save_graph_csv: cannot open " + path);
    os.precision(17);
    os << "a,b,length\n";
    for (int i = 0; i < g.n; ++i)
        for (int e = g.offsets[i]; e < g.offsets[i + 1]; ++e)
            if (g.nbrs[e] > i) os << i << "," << g.nbrs[e] << "," << g.lens[e] << "\n";
}

}  // namespace germlab
