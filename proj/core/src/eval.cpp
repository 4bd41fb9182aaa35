#include "wsfe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "wsfe/error.hpp"
#include "wsfe/parallel.hpp"

namespace wsfe::eval {

namespace {

RetrievalResult rank_rows(const Matrix& enc, std::size_t rows, Index query, std::size_t k) {
  if (query >= rows) {
    throw Error("query user " + std::to_string(query) + " out of range (" + std::to_string(rows) +
                " users)");
  }
  RetrievalResult out;
  out.query = query;
  out.ranked.reserve(rows);
  const auto q = enc.row(query);
  for (std::size_t v = 0; v < rows; ++v) {
    if (v == query) continue;
    const auto x = enc.row(v);
    double acc = 0.0;
    for (std::size_t c = 0; c < q.size(); ++c) acc += (q[c] - x[c]) * (q[c] - x[c]);
    out.ranked.push_back({static_cast<Index>(v), acc});
  }
  const auto closer = [](const Scored& a, const Scored& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.user < b.user;
  };
  const auto keep = std::min(k, out.ranked.size());
  std::partial_sort(out.ranked.begin(), out.ranked.begin() + static_cast<std::ptrdiff_t>(keep),
                    out.ranked.end(), closer);
  out.ranked.resize(keep);
  for (auto& s : out.ranked) s.distance = std::sqrt(s.distance);
  return out;
}

std::unordered_set<Index> truth_top(const graph::GroundTruthRanking& truth, std::size_t k) {
  std::unordered_set<Index> top;
  for (std::size_t r = 0; r < std::min(k, truth.ranked.size()); ++r) top.insert(truth.ranked[r].user);
  return top;
}

void require_truth(const graph::GroundTruthRanking& truth) {
  if (truth.ranked.empty()) throw Error("metric undefined for an empty ground truth");
}

struct QueryScores {
  bool valid = false;
  std::vector<double> recall, ndcg;
};

MetricTable average(const std::vector<QueryScores>& scores, const std::vector<std::size_t>& ks) {
  MetricTable t;
  t.ks = ks;
  t.recall.assign(ks.size(), 0.0);
  t.ndcg.assign(ks.size(), 0.0);
  for (const auto& s : scores) {
    if (!s.valid) continue;
    ++t.num_queries;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      t.recall[i] += s.recall[i];
      t.ndcg[i] += s.ndcg[i];
    }
  }
  for (std::size_t i = 0; i < ks.size(); ++i) {
    t.recall[i] /= static_cast<double>(t.num_queries);
    t.ndcg[i] /= static_cast<double>(t.num_queries);
  }
  return t;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

RetrievalResult rank_by_distance(const Matrix& encodings, Index query, std::size_t k) {
  if (k == 0) throw Error("K must be at least 1");
  return rank_rows(encodings, encodings.rows(), query, k);
}

double recall_at_k(const RetrievalResult& predicted, const graph::GroundTruthRanking& truth,
                   std::size_t k) {
  require_truth(truth);
  const auto top = truth_top(truth, k);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < std::min(k, predicted.ranked.size()); ++r) {
    hits += top.count(predicted.ranked[r].user);
  }
  return static_cast<double>(hits) / static_cast<double>(std::min(k, truth.ranked.size()));
}

double ndcg_at_k(const RetrievalResult& predicted, const graph::GroundTruthRanking& truth,
                 std::size_t k) {
  require_truth(truth);
  const auto top = truth_top(truth, k);
  double dcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, predicted.ranked.size()); ++r) {
    if (top.count(predicted.ranked[r].user)) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  double idcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, truth.ranked.size()); ++r) {
    idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  return dcg / idcg;
}

double MetricTable::recall_at(std::size_t k) const {
  const auto it = std::find(ks.begin(), ks.end(), k);
  if (it == ks.end()) throw Error("K=" + std::to_string(k) + " was not evaluated");
  return recall[static_cast<std::size_t>(it - ks.begin())];
}

double MetricTable::ndcg_at(std::size_t k) const {
  const auto it = std::find(ks.begin(), ks.end(), k);
  if (it == ks.end()) throw Error("K=" + std::to_string(k) + " was not evaluated");
  return ndcg[static_cast<std::size_t>(it - ks.begin())];
}

EvalReport evaluate(const Matrix& encodings, const graph::InteractionGraph& graph,
                    const EvalOptions& options, const Matrix* baseline) {
  if (options.k_list.empty()) throw Error("K list must not be empty");
  for (const auto k : options.k_list) {
    if (k == 0) throw Error("K must be at least 1");
  }
  const std::size_t users = graph.num_users();
  if (encodings.rows() < users) {
    throw MetadataError("encodings have " + std::to_string(encodings.rows()) +
                        " rows but the graph has " + std::to_string(users) + " users");
  }
  if (baseline != nullptr && baseline->rows() < users) {
    throw MetadataError("baseline has fewer rows than the graph has users");
  }

  std::vector<Index> queries(users);
  std::iota(queries.begin(), queries.end(), Index{0});
  if (options.num_queries != 0 && options.num_queries < users) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(queries.begin(), queries.end(), rng);
    queries.resize(options.num_queries);
    std::sort(queries.begin(), queries.end());
  }

  const std::size_t depth = *std::max_element(options.k_list.begin(), options.k_list.end());
  std::vector<QueryScores> main_scores(queries.size()), base_scores(queries.size());

  const auto score = [&](const Matrix& enc, Index q, const graph::GroundTruthRanking& truth) {
    QueryScores s;
    s.valid = true;
    const auto predicted = rank_rows(enc, users, q, depth);
    for (const auto k : options.k_list) {
      s.recall.push_back(recall_at_k(predicted, truth, k));
      s.ndcg.push_back(ndcg_at_k(predicted, truth, k));
    }
    return s;
  };

  parallel_for(queries.size(), options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      const auto truth = graph::build_ground_truth(graph, queries[n], depth);
      if (truth.ranked.empty()) continue;
      main_scores[n] = score(encodings, queries[n], truth);
      if (baseline != nullptr) base_scores[n] = score(*baseline, queries[n], truth);
    }
  });

  EvalReport report;
  report.encoded = average(main_scores, options.k_list);
  if (report.encoded.num_queries == 0) throw Error("no valid queries: every sampled user has an empty ground truth");
  if (baseline != nullptr) report.baseline = average(base_scores, options.k_list);
  return report;
}

std::string format_table(const EvalReport& report) {
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%-10s %6s %10s %10s\n", "model", "K", "Recall", "NDCG");
  out << buf;
  const auto emit = [&](const char* name, const MetricTable& t) {
    for (std::size_t i = 0; i < t.ks.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%-10s %6zu %10.6f %10.6f\n", name, t.ks[i], t.recall[i],
                    t.ndcg[i]);
      out << buf;
    }
  };
  emit("wsfe", report.encoded);
  if (report.baseline) emit("baseline", *report.baseline);
  out << "queries=" << report.encoded.num_queries << '\n';
  return out.str();
}

std::string format_key_values(const EvalReport& report) {
  std::ostringstream out;
  const auto emit = [&](const std::string& prefix, const MetricTable& t) {
    for (std::size_t i = 0; i < t.ks.size(); ++i) out << prefix << "recall@" << t.ks[i] << '=' << fmt(t.recall[i]) << '\n';
    for (std::size_t i = 0; i < t.ks.size(); ++i) out << prefix << "ndcg@" << t.ks[i] << '=' << fmt(t.ndcg[i]) << '\n';
  };
  emit("", report.encoded);
  if (report.baseline) emit("baseline.", *report.baseline);
  out << "queries=" << report.encoded.num_queries << '\n';
  return out.str();
}

}  // namespace wsfe::eval
