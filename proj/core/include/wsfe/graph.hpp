#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wsfe::graph {

using Index = std::uint32_t;

/// Immutable bipartite user-item graph. Users and items live in separate
/// dense index spaces; adjacency lists are sorted and deduplicated.
class InteractionGraph {
 public:
  InteractionGraph() = default;

  /// Builds a graph from raw (user, item) pairs. Duplicates collapse.
  /// Throws ParseError if any pair is out of range.
  InteractionGraph(Index num_users, Index num_items,
                   std::vector<std::pair<Index, Index>> edges);

  Index num_users() const { return num_users_; }
  Index num_items() const { return num_items_; }
  std::size_t num_edges() const { return edges_.size(); }

  /// Edges sorted by (user, item).
  std::span<const std::pair<Index, Index>> edges() const { return edges_; }

  std::span<const Index> user_items(Index user) const;
  std::span<const Index> item_users(Index item) const;

  std::size_t user_degree(Index user) const { return user_items(user).size(); }
  std::size_t item_degree(Index item) const { return item_users(item).size(); }

  friend bool operator==(const InteractionGraph&, const InteractionGraph&) = default;

 private:
  Index num_users_ = 0;
  Index num_items_ = 0;
  std::vector<std::pair<Index, Index>> edges_;
  // CSR in both directions.
  std::vector<std::size_t> user_offsets_{0};
  std::vector<Index> user_adj_;
  std::vector<std::size_t> item_offsets_{0};
  std::vector<Index> item_adj_;
};

enum class InputFormat { tsv_pairs, tsv_rated };

/// How raw identifiers become indices. `dense` remaps arbitrary strings in
/// first-seen order; `numeric` requires positive integers and uses id-1, so
/// the index space spans 1..max id even when some ids never occur.
enum class IdMode { dense, numeric };

struct LoadedGraph {
  InteractionGraph graph;
  std::vector<std::string> user_ids;  // index -> raw id
  std::vector<std::string> item_ids;
};

LoadedGraph load_interactions(const std::filesystem::path& path, InputFormat format,
                              IdMode ids = IdMode::dense);
LoadedGraph parse_interactions(std::istream& in, InputFormat format,
                               IdMode ids = IdMode::dense);

struct GraphStats {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::size_t num_edges = 0;
  double avg_interactions = 0.0;

  /// avg_interactions rounded to two decimals, e.g. "165.60".
  std::string avg_interactions_str() const;
};

GraphStats stats(const InteractionGraph& graph);

/// Binary persistence: magic "WSFG", u32 version, u32 users, u32 items,
/// u32 edges, then (user, item) u32 pairs, all little-endian.
void save_graph(const InteractionGraph& graph, const std::filesystem::path& path);
InteractionGraph load_graph(const std::filesystem::path& path);
void write_graph(const InteractionGraph& graph, std::ostream& out);
InteractionGraph read_graph(std::istream& in);

struct Neighbor {
  Index user;
  std::size_t overlap;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct GroundTruthRanking {
  Index query = 0;
  /// Overlap non-increasing, ties by ascending user index.
  std::vector<Neighbor> ranked;
};

/// The `depth` users sharing the most items with `query`. Users with zero
/// overlap are never included, so the list may be shorter than `depth`.
GroundTruthRanking build_ground_truth(const InteractionGraph& graph, Index query,
                                      std::size_t depth);

/// One row per (query, neighbor): `query<TAB>neighbor<TAB>overlap`.
void write_ground_truth_tsv(std::span<const GroundTruthRanking> rankings, std::ostream& out);

}  // namespace wsfe::graph
