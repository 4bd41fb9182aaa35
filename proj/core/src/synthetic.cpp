#include "wsfe/synthetic.hpp"

#include <random>

#include "wsfe/error.hpp"

namespace wsfe::synthetic {

graph::InteractionGraph planted_clusters(const PlantedClusters& spec, std::uint64_t seed) {
  if (spec.clusters == 0 || spec.items == 0) throw Error("planted graph needs clusters and items");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<std::pair<graph::Index, graph::Index>> edges;
  for (graph::Index u = 0; u < spec.users; ++u) {
    const auto cu = cluster_of(u, spec.clusters);
    bool any = false;
    for (graph::Index i = 0; i < spec.items; ++i) {
      const double p = cluster_of(i, spec.clusters) == cu ? spec.p_in : spec.p_out;
      if (coin(rng) < p) {
        edges.emplace_back(u, i);
        any = true;
      }
    }
    if (!any) {
      // Fall back to one in-cluster item (or any item if the cluster has none).
      graph::Index i = cu < spec.items ? cu : 0;
      edges.emplace_back(u, i);
    }
  }
  return graph::InteractionGraph(spec.users, spec.items, std::move(edges));
}

backbone::LayerFeatureSet gaussian_features(std::size_t entities, std::size_t layers,
                                            std::size_t dim, std::uint64_t seed, double scale) {
  backbone::LayerFeatureSet f(entities, layers, dim);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  for (auto& x : f.data()) x = normal(rng);
  return f;
}

}  // namespace wsfe::synthetic
