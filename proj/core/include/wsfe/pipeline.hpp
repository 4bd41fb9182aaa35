#pragma once

#include <cstdint>
#include <vector>

#include "wsfe/backbone.hpp"
#include "wsfe/config.hpp"
#include "wsfe/encoder.hpp"
#include "wsfe/eval.hpp"

namespace wsfe::pipeline {

struct TrainedFeatures {
  /// Users first, then items when config.include_items is set.
  backbone::LayerFeatureSet features;
  std::vector<double> loss_trace;
};

/// train_bpr followed by propagation with the trained ego embeddings.
TrainedFeatures train_layer_features(const graph::InteractionGraph& graph,
                                     const PipelineConfig& config);

struct Encoded {
  encoder::EncodingMatrix encodings;
  ProjectionSet projections;
  ReferenceSet reference;
};

/// Samples projections and reference from the config seeds and encodes
/// every entity. An unset reference scale resolves to feature_std(features).
Encoded encode_features(const backbone::LayerFeatureSet& features, const PipelineConfig& config);

/// Encoder-side sidecar entries (S, L, d, seeds, scale, layout, ...).
Metadata encoding_metadata(const Encoded& encoded, const backbone::LayerFeatureSet& features,
                           const PipelineConfig& config);

/// Full synthetic-scale pipeline: train, propagate, encode users, and
/// evaluate against the mean-layer embedding baseline.
eval::EvalReport run_segmentation(const graph::InteractionGraph& graph, const PipelineConfig& config);

struct BenchRow {
  std::size_t entities = 0;
  std::size_t slices = 0;
  std::size_t dim = 0;
  std::size_t depth = 0;
  double seconds = 0.0;
};

/// Best-of-`reps` wall time of encode_all on Gaussian features.
BenchRow time_encode_all(std::size_t entities, std::size_t slices, std::size_t dim,
                         std::size_t depth, std::size_t reps, std::uint64_t seed,
                         unsigned threads = 1);

}  // namespace wsfe::pipeline
