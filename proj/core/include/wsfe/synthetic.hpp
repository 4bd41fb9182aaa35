#pragma once

#include <cstdint>

#include "wsfe/backbone.hpp"
#include "wsfe/graph.hpp"

namespace wsfe::synthetic {

/// Users and items are split round-robin into `clusters` groups. Each user
/// interacts with each item of its own group with probability p_in and with
/// other items with probability p_out; every user gets at least one edge.
struct PlantedClusters {
  graph::Index users = 60;
  graph::Index items = 40;
  graph::Index clusters = 3;
  double p_in = 0.5;
  double p_out = 0.1;
};

graph::InteractionGraph planted_clusters(const PlantedClusters& spec, std::uint64_t seed);

/// Cluster id of a user or item under the round-robin split.
inline graph::Index cluster_of(graph::Index index, graph::Index clusters) { return index % clusters; }

/// i.i.d. N(0, scale^2) features.
backbone::LayerFeatureSet gaussian_features(std::size_t entities, std::size_t layers,
                                            std::size_t dim, std::uint64_t seed,
                                            double scale = 1.0);

}  // namespace wsfe::synthetic
