#pragma once

// Serialization: reports to JSON (insertion-ordered keys so identical runs
// produce identical bytes), clouds to a columnar binary format and CSV,
// graphs to edge-list CSV.

#include <string>

#include <json.hpp>

#include "germlab/inner_metric.hpp"
#include "germlab/measure.hpp"
#include "germlab/separating.hpp"
#include "germlab/tangent_cone.hpp"
#include "germlab/variety.hpp"

namespace germlab {

using Json = nlohmann::ordered_json;

Json to_json(const MeasureEstimate& est);
Json to_json(const DensityEstimate& est);
Json to_json(const EmbeddingReport& rep);
Json to_json(const SeparationReport& rep);
Json to_json(const TangentConeSample& tc);

// columnar binary: magic, dim, n, then one contiguous column per coordinate
// followed by radius and residual columns
void save_cloud_binary(const SampleCloud& cloud, const std::string& path);
SampleCloud load_cloud_binary(const std::string& path);

// one row per point: coordinates, radius, residual
void save_cloud_csv(const SampleCloud& cloud, const std::string& path);

// edge list: a,b,length (each undirected edge once)
void save_graph_csv(const NeighborhoodGraph& g, const std::string& path);

}  // namespace germlab
