#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wsfe/backbone.hpp"
#include "wsfe/encoder.hpp"
#include "wsfe/eval.hpp"
#include "wsfe/graph.hpp"
#include "wsfe/metadata.hpp"

namespace wsfe {

/// Every knob of the ingest -> train -> encode -> eval pipeline. All seeds
/// have fixed defaults; nothing is drawn from the environment.
struct PipelineConfig {
  // paths
  std::string data_path;
  std::string graph_path;
  std::string features_path;
  std::string encodings_path;
  std::string report_path;

  // ingestion
  graph::InputFormat format = graph::InputFormat::tsv_pairs;
  graph::IdMode id_mode = graph::IdMode::dense;

  // backbone
  std::size_t dim = 64;
  std::size_t depth = 3;
  std::size_t epochs = 100;
  double lr = 0.01;
  double reg = 1e-4;
  std::size_t batch_size = 2048;
  std::uint64_t train_seed = 0;
  bool include_items = false;

  // encoder
  std::size_t slices = 64;
  encoder::Layout layout = encoder::Layout::concat;
  encoder::Scaling normalization = encoder::Scaling::isometric;
  std::uint64_t projection_seed = 1;
  std::uint64_t reference_seed = 2;
  /// Unset means: match the empirical std of the input features.
  std::optional<double> reference_scale;

  // evaluation
  std::vector<std::size_t> k_list{5, 20, 50, 100};
  std::size_t num_queries = 1000;
  std::uint64_t eval_seed = 3;

  unsigned threads = 1;

  Metadata to_metadata() const;
  /// Keys absent from `m` keep their defaults; unknown keys are rejected.
  static PipelineConfig from_metadata(const Metadata& m);

  void save(const std::filesystem::path& path) const;
  static PipelineConfig load(const std::filesystem::path& path);

  backbone::TrainOptions train_options() const;
  eval::EvalOptions eval_options() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

std::string to_string(graph::InputFormat f);
std::string to_string(graph::IdMode m);
graph::InputFormat parse_input_format(std::string_view s);
graph::IdMode parse_id_mode(std::string_view s);
std::vector<std::size_t> parse_k_list(std::string_view s);
std::string format_k_list(const std::vector<std::size_t>& ks);

}  // namespace wsfe
