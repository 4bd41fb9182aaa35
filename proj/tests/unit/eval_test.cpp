#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "wsfe/error.hpp"
#include "wsfe/eval.hpp"
#include "wsfe/synthetic.hpp"

namespace wsfe::eval {
namespace {

using graph::GroundTruthRanking;

RetrievalResult predicted(std::initializer_list<Index> users) {
  RetrievalResult r;
  double d = 0.0;
  for (const auto u : users) r.ranked.push_back({u, d += 1.0});
  return r;
}

GroundTruthRanking truth(std::initializer_list<Index> users) {
  GroundTruthRanking t;
  std::size_t overlap = users.size() + 1;
  for (const auto u : users) t.ranked.push_back({u, overlap--});
  return t;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Matrix m(rows, cols);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (auto& x : m.data()) x = normal(rng);
  return m;
}

TEST(RankByDistance, DuplicateRanksFirst) {
  Matrix m(3, 2);
  m(0, 0) = 1.0;
  m(0, 1) = 2.0;
  m(2, 0) = 1.0;
  m(2, 1) = 2.0;
  const auto r = rank_by_distance(m, 0, 1);
  ASSERT_EQ(r.ranked.size(), 1u);
  EXPECT_EQ(r.ranked[0].user, 2u);
  EXPECT_EQ(r.ranked[0].distance, 0.0);
}

TEST(RankByDistance, HandSetOneDimensional) {
  Matrix m(3, 1);
  m(1, 0) = 1.0;
  m(2, 0) = 5.0;
  const auto r = rank_by_distance(m, 0, 2);
  ASSERT_EQ(r.ranked.size(), 2u);
  EXPECT_EQ(r.ranked[0].user, 1u);
  EXPECT_DOUBLE_EQ(r.ranked[0].distance, 1.0);
  EXPECT_EQ(r.ranked[1].user, 2u);
  EXPECT_DOUBLE_EQ(r.ranked[1].distance, 5.0);
}

TEST(RankByDistance, Errors) {
  Matrix m(3, 1);
  EXPECT_THROW(rank_by_distance(m, 3, 1), Error);
  EXPECT_THROW(rank_by_distance(m, 0, 0), Error);
}

TEST(RankByDistance, MatchesFullSortOracle) {
  const auto m = random_matrix(500, 6, 3);
  for (Index q : {0u, 17u, 250u, 499u}) {
    // Oracle: every pairwise distance, fully sorted.
    std::vector<std::pair<double, Index>> all;
    for (Index v = 0; v < 500; ++v) {
      if (v == q) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < 6; ++c) s += (m(q, c) - m(v, c)) * (m(q, c) - m(v, c));
      all.emplace_back(std::sqrt(s), v);
    }
    std::sort(all.begin(), all.end());
    const auto r = rank_by_distance(m, q, 50);
    ASSERT_EQ(r.ranked.size(), 50u);
    for (std::size_t k = 0; k < 50; ++k) {
      EXPECT_EQ(r.ranked[k].user, all[k].second);
      EXPECT_NEAR(r.ranked[k].distance, all[k].first, 1e-12);
    }
  }
}

TEST(RankByDistance, TiesByUserIndex) {
  Matrix m(4, 1, 7.0);
  const auto r = rank_by_distance(m, 2, 3);
  EXPECT_EQ(r.ranked[0].user, 0u);
  EXPECT_EQ(r.ranked[1].user, 1u);
  EXPECT_EQ(r.ranked[2].user, 3u);
}

TEST(Recall, Definition) {
  EXPECT_DOUBLE_EQ(recall_at_k(predicted({3, 9}), truth({3, 7}), 2), 0.5);
  EXPECT_DOUBLE_EQ(recall_at_k(predicted({3, 7}), truth({3, 7}), 2), 1.0);
  EXPECT_DOUBLE_EQ(recall_at_k(predicted({1, 2}), truth({3, 7}), 2), 0.0);
  // Short truth: denominator min(K, |truth|).
  EXPECT_DOUBLE_EQ(recall_at_k(predicted({5, 3, 1}), truth({3}), 3), 1.0);
  EXPECT_THROW(recall_at_k(predicted({1}), GroundTruthRanking{}, 1), Error);
}

TEST(Ndcg, HandEvaluated) {
  // DCG = 1/log2(2) = 1; IDCG = 1 + 1/log2(3) = 1.6309; NDCG = 0.6131.
  const double v = ndcg_at_k(predicted({3, 9}), truth({3, 7}), 2);
  EXPECT_NEAR(v, 1.0 / (1.0 + 1.0 / std::log2(3.0)), 1e-15);
  EXPECT_NEAR(v, 0.6131, 1e-4);
  EXPECT_DOUBLE_EQ(ndcg_at_k(predicted({7, 3}), truth({3, 7}), 2), 1.0);
  EXPECT_DOUBLE_EQ(ndcg_at_k(predicted({1, 2}), truth({3, 7}), 2), 0.0);
}

TEST(Metrics, BoundedAndRecallMonotoneInK) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Index> users(40);
    for (Index i = 0; i < 40; ++i) users[i] = i;
    std::shuffle(users.begin(), users.end(), rng);
    RetrievalResult p;
    for (std::size_t k = 0; k < 30; ++k) p.ranked.push_back({users[k], static_cast<double>(k)});
    std::shuffle(users.begin(), users.end(), rng);
    GroundTruthRanking t;
    const std::size_t tsize = 1 + rng() % 30;
    for (std::size_t k = 0; k < tsize; ++k) t.ranked.push_back({users[k], tsize - k});
    for (std::size_t k = 1; k <= 30; ++k) {
      const double r = recall_at_k(p, t, k);
      const double n = ndcg_at_k(p, t, k);
      EXPECT_GE(r, 0.0);
      EXPECT_LE(r, 1.0);
      EXPECT_GE(n, 0.0);
      EXPECT_LE(n, 1.0 + 1e-12);
    }
  }
  // Recall is monotone once the truth list is exhausted (fixed top-K set).
  const auto p = predicted({4, 1, 8, 3, 9, 2});
  const auto t = truth({3, 2});
  double prev = 0.0;
  for (std::size_t k = 2; k <= 6; ++k) {
    const double r = recall_at_k(p, t, k);
    EXPECT_GE(r, prev);
    prev = r;
  }
}

TEST(Evaluate, IdenticalEncodingsAreWellFormed) {
  const auto g = synthetic::planted_clusters({}, 4);
  const Matrix same(g.num_users(), 5, 1.0);
  EvalOptions opt;
  opt.num_queries = 0;
  const auto report = evaluate(same, g, opt);
  EXPECT_EQ(report.encoded.ks, (std::vector<std::size_t>{5, 20, 50, 100}));
  EXPECT_EQ(report.encoded.num_queries, g.num_users());
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_GE(report.encoded.recall[i], 0.0);
    EXPECT_LE(report.encoded.recall[i], 1.0);
    EXPECT_GE(report.encoded.ndcg[i], 0.0);
    EXPECT_LE(report.encoded.ndcg[i], 1.0);
  }
  EXPECT_FALSE(report.baseline.has_value());
}

TEST(Evaluate, DeterministicAndThreadIndependent) {
  const auto g = synthetic::planted_clusters({120, 60, 3, 0.3, 0.05}, 8);
  const auto enc = random_matrix(120, 10, 9);
  const auto base = random_matrix(120, 4, 10);
  EvalOptions opt;
  opt.num_queries = 50;
  opt.seed = 6;
  const auto a = evaluate(enc, g, opt, &base);
  const auto b = evaluate(enc, g, opt, &base);
  opt.threads = 4;
  const auto c = evaluate(enc, g, opt, &base);
  EXPECT_EQ(a.encoded.recall, b.encoded.recall);
  EXPECT_EQ(a.encoded.ndcg, c.encoded.ndcg);
  EXPECT_EQ(a.baseline->recall, c.baseline->recall);
  EXPECT_EQ(a.encoded.num_queries, 50u);
}

TEST(Evaluate, PerfectEncodingScoresOne) {
  // Two disjoint cliques: overlap truth is exactly the clique mates, and an
  // encoding that places each clique at one point retrieves them first.
  std::vector<std::pair<Index, Index>> edges;
  for (Index u = 0; u < 10; ++u) {
    for (Index i = 0; i < 3; ++i) edges.emplace_back(u, u < 5 ? i : 3 + i);
  }
  const graph::InteractionGraph g(10, 6, std::move(edges));
  Matrix enc(10, 1);
  for (Index u = 5; u < 10; ++u) enc(u, 0) = 10.0;
  EvalOptions opt;
  opt.k_list = {4};
  opt.num_queries = 0;
  const auto r = evaluate(enc, g, opt);
  EXPECT_DOUBLE_EQ(r.encoded.recall_at(4), 1.0);
  EXPECT_DOUBLE_EQ(r.encoded.ndcg_at(4), 1.0);
  EXPECT_THROW(r.encoded.recall_at(5), Error);
}

TEST(Evaluate, Errors) {
  const graph::InteractionGraph lonely(3, 3, {{0, 0}, {1, 1}, {2, 2}});
  EvalOptions opt;
  EXPECT_THROW(evaluate(Matrix(3, 1), lonely, opt), Error);  // no valid queries
  EXPECT_THROW(evaluate(Matrix(2, 1), lonely, opt), MetadataError);
  opt.k_list.clear();
  EXPECT_THROW(evaluate(Matrix(3, 1), lonely, opt), Error);
}

TEST(Report, KeyValueLines) {
  EvalReport r;
  r.encoded = {{5, 20}, {0.5, 0.75}, {0.25, 1.0}, 3};
  r.baseline = MetricTable{{5, 20}, {0.1, 0.2}, {0.3, 0.4}, 3};
  const auto kv = format_key_values(r);
  EXPECT_NE(kv.find("recall@5=0.500000\n"), std::string::npos);
  EXPECT_NE(kv.find("ndcg@20=1.000000\n"), std::string::npos);
  EXPECT_NE(kv.find("baseline.recall@20=0.200000\n"), std::string::npos);
  EXPECT_NE(format_table(r).find("baseline"), std::string::npos);
}

}  // namespace
}  // namespace wsfe::eval
