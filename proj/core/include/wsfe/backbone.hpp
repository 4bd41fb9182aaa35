#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "wsfe/graph.hpp"
#include "wsfe/matrix.hpp"

namespace wsfe::backbone {

using graph::Index;

/// Ego embeddings for the joint node space: rows [0, num_users) are users,
/// rows [num_users, num_users + num_items) are items.
struct EmbeddingTable {
  Index num_users = 0;
  Index num_items = 0;
  Matrix vectors;

  std::size_t dim() const { return vectors.cols(); }
  std::size_t num_nodes() const { return vectors.rows(); }

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;
};

/// Per entity, L+1 vectors of dimension d stored contiguously
/// (entity, layer, dim). Layer 0 is the ego embedding.
class LayerFeatureSet {
 public:
  LayerFeatureSet() = default;
  LayerFeatureSet(std::size_t entities, std::size_t layers, std::size_t dim);

  std::size_t entities() const { return entities_; }
  /// L+1.
  std::size_t layers() const { return layers_; }
  /// Propagation depth L.
  std::size_t depth() const { return layers_ - 1; }
  std::size_t dim() const { return dim_; }

  std::span<double> entity(std::size_t m) {
    return {data_.data() + m * layers_ * dim_, layers_ * dim_};
  }
  std::span<const double> entity(std::size_t m) const {
    return {data_.data() + m * layers_ * dim_, layers_ * dim_};
  }
  std::span<double> layer(std::size_t m, std::size_t l) {
    return {data_.data() + (m * layers_ + l) * dim_, dim_};
  }
  std::span<const double> layer(std::size_t m, std::size_t l) const {
    return {data_.data() + (m * layers_ + l) * dim_, dim_};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Copy of entities [begin, begin + count).
  LayerFeatureSet slice(std::size_t begin, std::size_t count) const;

  friend bool operator==(const LayerFeatureSet&, const LayerFeatureSet&) = default;

 private:
  std::size_t entities_ = 0;
  std::size_t layers_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Symmetric degree-normalized bipartite adjacency over the joint node
/// space, in CSR form. Entry (u, i) = 1/sqrt(deg(u) deg(i)).
class NormalizedAdjacency {
 public:
  std::size_t num_nodes() const { return offsets_.size() - 1; }
  std::size_t nnz() const { return cols_.size(); }

  /// Value at (row, col), 0 when absent.
  double at(std::size_t row, std::size_t col) const;

  /// out = A * in. Rows are independent, so any thread count gives the
  /// same result bit for bit.
  void multiply(const Matrix& in, Matrix& out, unsigned threads = 1) const;

  std::span<const std::size_t> offsets() const { return offsets_; }
  std::span<const std::size_t> columns() const { return cols_; }
  std::span<const double> values() const { return vals_; }

 private:
  friend NormalizedAdjacency normalized_adjacency(const graph::InteractionGraph& graph);
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> vals_;
};

NormalizedAdjacency normalized_adjacency(const graph::InteractionGraph& graph);

/// Layer l = A * layer l-1 for l = 1..depth; layer 0 copied from emb.
LayerFeatureSet propagate(const EmbeddingTable& emb, const NormalizedAdjacency& adj,
                          std::size_t depth, unsigned threads = 1);

/// Mean of the L+1 layer vectors per entity (the LightGCN readout).
Matrix mean_layer(const LayerFeatureSet& features);

struct TrainOptions {
  std::size_t dim = 64;
  std::size_t depth = 3;
  std::size_t epochs = 100;
  double lr = 0.01;
  double reg = 1e-4;
  std::uint64_t seed = 0;
  std::size_t batch_size = 2048;
  unsigned threads = 1;
};

struct TrainResult {
  EmbeddingTable embeddings;
  /// Mean per-triple loss (BPR + L2) of each epoch.
  std::vector<double> loss_trace;
};

/// Seeded N(0, 0.1^2) initialization used by train_bpr.
EmbeddingTable init_embeddings(Index num_users, Index num_items, std::size_t dim,
                               std::uint64_t seed);

/// LightGCN-style training with BPR loss and Adam. Each epoch visits every
/// edge once in a seeded shuffled order, pairing it with one negative item
/// drawn uniformly from the user's non-interacted items. Throws
/// TrainingError on a non-finite loss.
TrainResult train_bpr(const graph::InteractionGraph& graph, const TrainOptions& options);

/// Layer-feature file: magic "WSFE", u32 version, u32 entities, u32 L+1,
/// u32 d, then (entity, layer, dim) row-major float32, all little-endian.
void export_layer_features(const LayerFeatureSet& features, const std::filesystem::path& path);
LayerFeatureSet import_layer_features(const std::filesystem::path& path);
void write_layer_features(const LayerFeatureSet& features, std::ostream& out);
LayerFeatureSet read_layer_features(std::istream& in);

}  // namespace wsfe::backbone
