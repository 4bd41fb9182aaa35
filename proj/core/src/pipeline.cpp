#include "wsfe/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

#include "wsfe/error.hpp"
#include "wsfe/synthetic.hpp"

namespace wsfe::pipeline {

TrainedFeatures train_layer_features(const graph::InteractionGraph& graph,
                                     const PipelineConfig& config) {
  auto trained = backbone::train_bpr(graph, config.train_options());
  const auto adj = backbone::normalized_adjacency(graph);
  auto all = backbone::propagate(trained.embeddings, adj, config.depth, config.threads);
  TrainedFeatures out;
  out.features = config.include_items ? std::move(all) : all.slice(0, graph.num_users());
  out.loss_trace = std::move(trained.loss_trace);
  return out;
}

Encoded encode_features(const backbone::LayerFeatureSet& features, const PipelineConfig& config) {
  const double scale = config.reference_scale.value_or(encoder::feature_std(features));
  Encoded out;
  out.projections = encoder::sample_projections(config.slices, features.dim(), config.projection_seed);
  out.reference = encoder::make_reference(features.depth(), features.dim(), config.reference_seed, scale);
  out.encodings = encoder::encode_all(features, out.reference, out.projections, config.layout,
                                      config.normalization, config.threads);
  return out;
}

Metadata encoding_metadata(const Encoded& encoded, const backbone::LayerFeatureSet& features,
                           const PipelineConfig& config) {
  Metadata m;
  m.set("artifact", "encodings");
  m.set("rows", std::uint64_t{encoded.encodings.rows()});
  m.set("dim", std::uint64_t{encoded.encodings.dim()});
  m.set("S", std::uint64_t{encoded.projections.count()});
  m.set("L", std::uint64_t{features.depth()});
  m.set("d", std::uint64_t{features.dim()});
  m.set("layout", std::string(encoder::to_string(encoded.encodings.layout)));
  m.set("normalization", std::string(encoder::to_string(config.normalization)));
  m.set_real("coordinate_scale", encoded.encodings.scale);
  m.set("projection_seed", encoded.projections.seed);
  m.set("reference_seed", encoded.reference.seed);
  m.set_real("reference_scale", encoded.reference.scale);
  m.merge(config.to_metadata(), "config.");
  return m;
}

eval::EvalReport run_segmentation(const graph::InteractionGraph& graph, const PipelineConfig& config) {
  PipelineConfig c = config;
  c.include_items = false;
  const auto trained = train_layer_features(graph, c);
  const auto encoded = encode_features(trained.features, c);
  const auto baseline = backbone::mean_layer(trained.features);
  return eval::evaluate(encoded.encodings.values, graph, c.eval_options(), &baseline);
}

BenchRow time_encode_all(std::size_t entities, std::size_t slices, std::size_t dim,
                         std::size_t depth, std::size_t reps, std::uint64_t seed, unsigned threads) {
  const auto features = synthetic::gaussian_features(entities, depth + 1, dim, seed);
  const auto proj = encoder::sample_projections(slices, dim, seed + 1);
  const auto ref = encoder::make_reference(depth, dim, seed + 2, 1.0);
  BenchRow row{entities, slices, dim, depth, std::numeric_limits<double>::infinity()};
  for (std::size_t r = 0; r < std::max<std::size_t>(reps, 1); ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto enc = encoder::encode_all(features, ref, proj, encoder::Layout::concat,
                                         encoder::Scaling::isometric, threads);
    const auto t1 = std::chrono::steady_clock::now();
    if (enc.rows() != entities) throw Error("encode_all returned a short matrix");
    row.seconds = std::min(row.seconds, std::chrono::duration<double>(t1 - t0).count());
  }
  return row;
}

}  // namespace wsfe::pipeline
