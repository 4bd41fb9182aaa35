#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wsfe/graph.hpp"
#include "wsfe/matrix.hpp"

namespace wsfe::eval {

using graph::Index;

struct Scored {
  Index user;
  double distance;
};

struct RetrievalResult {
  Index query = 0;
  /// Distance non-decreasing, ties by ascending user index, query excluded.
  std::vector<Scored> ranked;
};

/// Exact top-K by Euclidean distance between rows of `encodings`.
RetrievalResult rank_by_distance(const Matrix& encodings, Index query, std::size_t k);

/// |top-K(predicted) ∩ top-K(truth)| / min(K, |truth|). Truth must be non-empty.
double recall_at_k(const RetrievalResult& predicted, const graph::GroundTruthRanking& truth,
                   std::size_t k);

/// Binary-relevance NDCG: a predicted user is relevant iff it is in
/// top-K(truth). Truth must be non-empty.
double ndcg_at_k(const RetrievalResult& predicted, const graph::GroundTruthRanking& truth,
                 std::size_t k);

struct EvalOptions {
  std::vector<std::size_t> k_list{5, 20, 50, 100};
  /// Number of sampled query users; 0 or >= num_users means every user.
  std::size_t num_queries = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct MetricTable {
  std::vector<std::size_t> ks;
  std::vector<double> recall;
  std::vector<double> ndcg;
  /// Queries with a non-empty ground truth (the averaging population).
  std::size_t num_queries = 0;

  double recall_at(std::size_t k) const;
  double ndcg_at(std::size_t k) const;
};

struct EvalReport {
  MetricTable encoded;
  std::optional<MetricTable> baseline;
};

/// Seeded query sampling, overlap ground truth of depth max(K), brute-force
/// retrieval on the first num_users rows. When `baseline` is given the same
/// queries are scored on it too. Throws if no sampled query has a
/// non-empty ground truth.
EvalReport evaluate(const Matrix& encodings, const graph::InteractionGraph& graph,
                    const EvalOptions& options, const Matrix* baseline = nullptr);

/// Aligned plain-text table.
std::string format_table(const EvalReport& report);

/// One `metric@K=value` line per entry; baseline entries are prefixed
/// with `baseline.`.
std::string format_key_values(const EvalReport& report);

}  // namespace wsfe::eval
