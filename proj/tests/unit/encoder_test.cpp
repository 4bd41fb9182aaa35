#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "wsfe/encoder.hpp"
#include "wsfe/error.hpp"
#include "wsfe/ot.hpp"
#include "wsfe/synthetic.hpp"

namespace wsfe::encoder {
namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return std::sqrt(s);
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

ot::PointSet as_points(std::span<const double> block, std::size_t dim) {
  ot::PointSet p(block.size() / dim, dim);
  std::copy(block.begin(), block.end(), p.data().begin());
  return p;
}

TEST(SampleProjections, OneDimensionalDirectionsAreSigns) {
  const auto proj = sample_projections(50, 1, 4);
  for (std::size_t s = 0; s < proj.count(); ++s) {
    EXPECT_EQ(std::abs(proj.direction(s)[0]), 1.0);
  }
}

TEST(SampleProjections, UnitNormAndDeterministic) {
  const auto a = sample_projections(64, 37, 99);
  const auto b = sample_projections(64, 37, 99);
  EXPECT_EQ(a.directions, b.directions);
  for (std::size_t s = 0; s < a.count(); ++s) EXPECT_NEAR(norm(a.direction(s)), 1.0, 1e-12);
  EXPECT_NE(a.directions, sample_projections(64, 37, 100).directions);
}

TEST(SampleProjections, MeanDirectionVanishes) {
  // Uniform on the sphere: E[theta] = 0, and each coordinate has variance
  // 1/d, so the norm of the mean of 10k draws is about sqrt(1/10k) = 0.01.
  const auto proj = sample_projections(10000, 3, 2024);
  std::vector<double> mean(3, 0.0);
  for (std::size_t s = 0; s < proj.count(); ++s) {
    for (std::size_t k = 0; k < 3; ++k) mean[k] += proj.direction(s)[k] / 10000.0;
  }
  EXPECT_LT(norm(mean), 0.05);
}

TEST(ProjectionSet, FromDirectionsNormalizes) {
  Matrix m(2, 2);
  m(0, 0) = 3;
  m(0, 1) = 4;
  m(1, 1) = -2;
  const auto p = ProjectionSet::from_directions(m);
  EXPECT_DOUBLE_EQ(p.direction(0)[0], 0.6);
  EXPECT_DOUBLE_EQ(p.direction(0)[1], 0.8);
  EXPECT_DOUBLE_EQ(p.direction(1)[1], -1.0);
  EXPECT_THROW(ProjectionSet::from_directions(Matrix(1, 3)), DimensionError);
}

TEST(MakeReference, ZeroScaleIsZero) {
  const auto ref = make_reference(3, 8, 1, 0.0);
  EXPECT_EQ(ref.layers(), 4u);
  for (const double x : ref.samples.data()) EXPECT_EQ(x, 0.0);
}

TEST(MakeReference, DeterministicPerSeed) {
  EXPECT_EQ(make_reference(2, 16, 5, 1.0).samples, make_reference(2, 16, 5, 1.0).samples);
}

TEST(MakeReference, VarianceMatchesScale) {
  const auto ref = make_reference(3, 512, 8, 1.0);
  const auto data = ref.samples.data();
  const double n = static_cast<double>(data.size());
  const double mean = std::accumulate(data.begin(), data.end(), 0.0) / n;
  double var = 0.0;
  for (const double x : data) var += (x - mean) * (x - mean);
  var /= n - 1.0;
  EXPECT_GE(var, 0.9);
  EXPECT_LE(var, 1.1);
}

TEST(Project, BasisVectorPicksFirstCoordinate) {
  const std::vector<double> feats{1, 2, 3, 4, 5, 6};  // 2 layers, d=3
  const std::vector<double> e1{1, 0, 0};
  EXPECT_EQ(project(feats, e1), (std::vector<double>{1, 4}));
  EXPECT_EQ(project(std::vector<double>(6, 0.0), e1), (std::vector<double>{0, 0}));
  EXPECT_THROW(project(std::vector<double>(5, 0.0), e1), DimensionError);
}

TEST(Project, MatchesDotProductLoop) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> normal;
  std::vector<double> feats(4 * 8);
  for (auto& x : feats) x = normal(rng);
  const auto proj = sample_projections(1, 8, 43);
  const auto out = project(feats, proj.direction(0));
  ASSERT_EQ(out.size(), 4u);
  for (std::size_t l = 0; l < 4; ++l) {
    double expect = 0.0;
    for (std::size_t k = 0; k < 8; ++k) expect += feats[l * 8 + k] * proj.direction(0)[k];
    EXPECT_NEAR(out[l], expect, 1e-14);
  }
}

TEST(OtMapRanks, WorkedExample) {
  // Ranks of x_ref: 0.5 -> 1, -1.0 -> 0, 2.0 -> 2; sorted user = [1, 2, 3].
  const auto out = ot_map_ranks(std::vector{3.0, 1.0, 2.0}, std::vector{0.5, -1.0, 2.0});
  EXPECT_EQ(out, (std::vector{2.0, 1.0, 3.0}));
}

TEST(OtMapRanks, IdentityAndSortedReference) {
  const std::vector<double> x{0.4, -2.0, 7.0, 1.0};
  EXPECT_EQ(ot_map_ranks(x, x), x);
  auto sorted = x;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(ot_map_ranks(x, std::vector{-5.0, 0.0, 1.0, 9.0}), sorted);
  EXPECT_THROW(ot_map_ranks(x, std::vector{1.0}), DimensionError);
}

TEST(OtMapRanks, TiesFollowLayerOrder) {
  // Tied reference values keep their original order: layer 0 takes the
  // smaller user value.
  const auto out = ot_map_ranks(std::vector{5.0, 1.0}, std::vector{0.0, 0.0});
  EXPECT_EQ(out, (std::vector{1.0, 5.0}));
}

TEST(EncodeUser, ReferenceEncodesToZero) {
  const auto ref = make_reference(3, 10, 12, 1.0);
  const auto proj = sample_projections(16, 10, 13);
  for (const auto layout : {Layout::concat, Layout::sum, Layout::max}) {
    const auto enc = encode_user(ref.samples.data(), ref, proj, layout);
    for (const double x : enc.values) EXPECT_EQ(x, 0.0);
  }
}

TEST(EncodeUser, SingleCoordinateTransport) {
  const auto proj = ProjectionSet::from_directions(Matrix(1, 1, 1.0));
  ReferenceSet ref{0, 1.0, Matrix(1, 1, 0.0)};
  const auto enc = encode_user(std::vector{2.0}, ref, proj, Layout::concat);
  ASSERT_EQ(enc.values.size(), 1u);
  EXPECT_DOUBLE_EQ(enc.values[0], 2.0);
}

TEST(EncodeUser, NormEqualsMonteCarloSw2ToReference) {
  const auto feats = synthetic::gaussian_features(1, 4, 16, 77);
  const auto ref = make_reference(3, 16, 78, 1.0);
  const auto proj = sample_projections(8, 16, 79);
  const auto enc = encode_user(feats.entity(0), ref, proj, Layout::concat);
  EXPECT_EQ(enc.values.size(), 32u);
  const double sw = ot::mc_sw2(as_points(feats.entity(0), 16), ref.samples, proj);
  EXPECT_NEAR(norm(enc.values), sw, 1e-9 * sw);
}

TEST(EncodeUser, PairwiseIsometry) {
  const auto feats = synthetic::gaussian_features(30, 4, 12, 80);
  const auto ref = make_reference(3, 12, 81, 1.0);
  const auto proj = sample_projections(24, 12, 82);
  const auto enc = encode_all(feats, ref, proj, Layout::concat);
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = i + 1; j < 30; ++j) {
      const double sw = ot::mc_sw2(as_points(feats.entity(i), 12), as_points(feats.entity(j), 12), proj);
      EXPECT_NEAR(distance(enc.values.row(i), enc.values.row(j)), sw, 1e-9 * sw);
    }
  }
}

TEST(EncodeUser, LayerOrderDoesNotMatter) {
  auto feats = synthetic::gaussian_features(1, 5, 6, 90);
  const auto ref = make_reference(4, 6, 91, 1.0);
  const auto proj = sample_projections(20, 6, 92);
  const auto before = encode_user(feats.entity(0), ref, proj, Layout::concat).values;
  std::vector<double> permuted(feats.entity(0).size());
  const std::size_t perm[] = {4, 2, 0, 3, 1};
  for (std::size_t l = 0; l < 5; ++l) {
    const auto src = feats.layer(0, perm[l]);
    std::copy(src.begin(), src.end(), permuted.begin() + static_cast<std::ptrdiff_t>(l * 6));
  }
  EXPECT_EQ(encode_user(permuted, ref, proj, Layout::concat).values, before);
}

TEST(EncodeUser, AggregatedLayouts) {
  const auto feats = synthetic::gaussian_features(1, 4, 8, 93);
  const auto ref = make_reference(3, 8, 94, 0.7);
  const auto proj = sample_projections(5, 8, 95);
  const auto concat = encode_user(feats.entity(0), ref, proj, Layout::concat);
  const auto sum = encode_user(feats.entity(0), ref, proj, Layout::sum);
  const auto mx = encode_user(feats.entity(0), ref, proj, Layout::max);
  ASSERT_EQ(sum.values.size(), 5u);
  ASSERT_EQ(mx.values.size(), 5u);
  // Undo the concat scaling to recover raw residuals, then aggregate.
  for (std::size_t s = 0; s < 5; ++s) {
    double total = 0.0, best = -1e300;
    for (std::size_t l = 0; l < 4; ++l) {
      const double raw = concat.values[s * 4 + l] / concat.scale;
      total += raw;
      best = std::max(best, raw);
    }
    EXPECT_NEAR(sum.values[s], total / 4.0 / std::sqrt(5.0), 1e-12);
    EXPECT_NEAR(mx.values[s], best / std::sqrt(5.0), 1e-12);
  }
}

TEST(EncodeUser, PaperScalingUsesLiteralPrefactors) {
  const auto feats = synthetic::gaussian_features(1, 4, 8, 96);
  const auto ref = make_reference(3, 8, 97, 1.0);
  const auto proj = sample_projections(6, 8, 98);
  const auto iso = encode_user(feats.entity(0), ref, proj, Layout::concat, Scaling::isometric);
  const auto lit = encode_user(feats.entity(0), ref, proj, Layout::concat, Scaling::paper);
  EXPECT_DOUBLE_EQ(lit.scale, 1.0 / 24.0);
  for (std::size_t k = 0; k < iso.values.size(); ++k) {
    EXPECT_NEAR(lit.values[k], iso.values[k] / iso.scale / 24.0, 1e-12);
  }
}

TEST(EncodeUser, MismatchesThrow) {
  const auto ref = make_reference(3, 8, 1, 1.0);
  const auto proj = sample_projections(4, 8, 2);
  EXPECT_THROW(encode_user(std::vector<double>(3 * 8, 0.0), ref, proj, Layout::concat), DimensionError);
  EXPECT_THROW(encode_user(std::vector<double>(4 * 7, 0.0), ref, proj, Layout::concat), DimensionError);
}

TEST(EncodeAll, RowsMatchPerUserCalls) {
  const auto feats = synthetic::gaussian_features(200, 4, 16, 100);
  const auto ref = make_reference(3, 16, 101, 1.0);
  const auto proj = sample_projections(8, 16, 102);
  for (const auto layout : {Layout::concat, Layout::sum, Layout::max}) {
    const auto all = encode_all(feats, ref, proj, layout);
    ASSERT_EQ(all.dim(), encoding_dim(layout, 8, 4));
    for (std::size_t m = 0; m < 200; ++m) {
      const auto one = encode_user(feats.entity(m), ref, proj, layout);
      ASSERT_TRUE(std::equal(one.values.begin(), one.values.end(), all.values.row(m).begin()))
          << "row " << m;
    }
  }
}

TEST(EncodeAll, ConcatWidthIsSlicesTimesLayers) {
  const auto feats = synthetic::gaussian_features(1, 4, 5, 110);
  const auto enc = encode_all(feats, make_reference(3, 5, 111, 1.0), sample_projections(64, 5, 112),
                              Layout::concat);
  EXPECT_EQ(enc.rows(), 1u);
  EXPECT_EQ(enc.dim(), 256u);
}

TEST(EncodeAll, ThreadCountDoesNotChangeOutput) {
  const auto feats = synthetic::gaussian_features(97, 4, 16, 120);
  const auto ref = make_reference(3, 16, 121, 1.0);
  const auto proj = sample_projections(32, 16, 122);
  const auto one = encode_all(feats, ref, proj, Layout::concat, Scaling::isometric, 1);
  const auto four = encode_all(feats, ref, proj, Layout::concat, Scaling::isometric, 4);
  EXPECT_EQ(one.values, four.values);
}

TEST(EncodingFile, RoundTripAndErrors) {
  const auto feats = synthetic::gaussian_features(5, 2, 4, 130);
  auto enc = encode_all(feats, make_reference(1, 4, 131, 1.0), sample_projections(3, 4, 132),
                        Layout::sum);
  std::stringstream buf;
  write_encodings(enc, buf);
  const auto back = read_encodings(buf);
  EXPECT_EQ(back.layout, Layout::sum);
  ASSERT_EQ(back.rows(), 5u);
  ASSERT_EQ(back.dim(), 3u);
  for (std::size_t k = 0; k < enc.values.data().size(); ++k) {
    EXPECT_EQ(back.values.data()[k], static_cast<double>(static_cast<float>(enc.values.data()[k])));
  }
  std::stringstream bad("XXXXjunk");
  EXPECT_THROW(read_encodings(bad), ParseError);
  std::stringstream again;
  write_encodings(enc, again);
  const auto bytes = again.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_encodings(truncated), ParseError);
}

TEST(MonteCarlo, SpreadShrinksWithSlices) {
  const auto feats = synthetic::gaussian_features(2, 4, 16, 140);
  const auto p = as_points(feats.entity(0), 16);
  const auto q = as_points(feats.entity(1), 16);
  const auto spread = [&](std::size_t slices) {
    std::vector<double> v;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      v.push_back(ot::mc_sw2(p, q, sample_projections(slices, 16, 1000 + seed)));
    }
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / 50.0;
    double var = 0.0;
    for (const double x : v) var += (x - mean) * (x - mean);
    return std::sqrt(var / 49.0);
  };
  EXPECT_LE(spread(64), 0.55 * spread(4));
}

}  // namespace
}  // namespace wsfe::encoder
