#include "wsfe/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "binary_io.hpp"
#include "wsfe/error.hpp"
#include "wsfe/parallel.hpp"

namespace wsfe::backbone {

namespace {

constexpr std::string_view kFeatureMagic = "WSFE";
constexpr std::uint32_t kFeatureVersion = 1;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// log(1 + exp(-x)) without overflow.
double softplus_neg(double x) {
  return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

// sigmoid(-x)
double sigmoid_neg(double x) {
  if (x >= 0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

class NegativeSampler {
 public:
  explicit NegativeSampler(const graph::InteractionGraph& g) : g_(g) {}

  /// Uniform item outside N(user); returns false when the user has no
  /// non-interacted item.
  template <typename Rng>
  bool sample(Index user, Rng& rng, Index& out) const {
    const auto items = g_.user_items(user);
    const std::size_t n = g_.num_items();
    if (items.size() >= n) return false;
    if (items.size() * 2 <= n) {
      std::uniform_int_distribution<Index> pick(0, static_cast<Index>(n - 1));
      while (true) {
        const Index j = pick(rng);
        if (!std::binary_search(items.begin(), items.end(), j)) {
          out = j;
          return true;
        }
      }
    }
    // Dense user: index directly into the complement.
    std::uniform_int_distribution<std::size_t> pick(0, n - items.size() - 1);
    std::size_t k = pick(rng);
    Index j = 0;
    std::size_t p = 0;
    for (;; ++j) {
      if (p < items.size() && items[p] == j) {
        ++p;
        continue;
      }
      if (k-- == 0) break;
    }
    out = j;
    return true;
  }

 private:
  const graph::InteractionGraph& g_;
};

// Adam state over a dense parameter block.
struct Adam {
  explicit Adam(std::size_t n, double lr) : m(n, 0.0), v(n, 0.0), lr(lr) {}

  void step(std::span<double> params, std::span<const double> grad) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t k = 0; k < params.size(); ++k) {
      m[k] = beta1 * m[k] + (1.0 - beta1) * grad[k];
      v[k] = beta2 * v[k] + (1.0 - beta2) * grad[k] * grad[k];
      params[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps);
    }
  }

  std::vector<double> m;
  std::vector<double> v;
  double lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
};

}  // namespace

LayerFeatureSet::LayerFeatureSet(std::size_t entities, std::size_t layers, std::size_t dim)
    : entities_(entities), layers_(layers), dim_(dim), data_(entities * layers * dim, 0.0) {
  if (layers == 0) throw DimensionError("a layer feature set needs at least one layer");
  if (dim == 0) throw DimensionError("feature dimension must be at least 1");
}

LayerFeatureSet LayerFeatureSet::slice(std::size_t begin, std::size_t count) const {
  if (begin + count > entities_) throw DimensionError("slice exceeds entity count");
  LayerFeatureSet out(count, layers_, dim_);
  const std::size_t stride = layers_ * dim_;
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(begin * stride), count * stride,
              out.data_.begin());
  return out;
}

double NormalizedAdjacency::at(std::size_t row, std::size_t col) const {
  const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(offsets_[row]);
  const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(offsets_[row + 1]);
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return 0.0;
  return vals_[static_cast<std::size_t>(it - cols_.begin())];
}

void NormalizedAdjacency::multiply(const Matrix& in, Matrix& out, unsigned threads) const {
  if (in.rows() != num_nodes()) {
    throw DimensionError("adjacency has " + std::to_string(num_nodes()) +
                         " nodes but operand has " + std::to_string(in.rows()) + " rows");
  }
  if (out.rows() != in.rows() || out.cols() != in.cols()) out = Matrix(in.rows(), in.cols());
  const std::size_t d = in.cols();
  parallel_for(num_nodes(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      auto dst = out.row(r);
      std::fill(dst.begin(), dst.end(), 0.0);
      for (std::size_t p = offsets_[r]; p < offsets_[r + 1]; ++p) {
        const auto src = in.row(cols_[p]);
        const double w = vals_[p];
        for (std::size_t k = 0; k < d; ++k) dst[k] += w * src[k];
      }
    }
  });
}

NormalizedAdjacency normalized_adjacency(const graph::InteractionGraph& g) {
  NormalizedAdjacency a;
  const std::size_t nu = g.num_users();
  const std::size_t n = nu + g.num_items();
  a.offsets_.assign(n + 1, 0);
  a.cols_.reserve(2 * g.num_edges());
  a.vals_.reserve(2 * g.num_edges());
  for (Index u = 0; u < g.num_users(); ++u) {
    const double du = static_cast<double>(g.user_degree(u));
    for (const Index i : g.user_items(u)) {
      a.cols_.push_back(nu + i);
      a.vals_.push_back(1.0 / std::sqrt(du * static_cast<double>(g.item_degree(i))));
    }
    a.offsets_[u + 1] = a.cols_.size();
  }
  for (Index i = 0; i < g.num_items(); ++i) {
    const double di = static_cast<double>(g.item_degree(i));
    for (const Index u : g.item_users(i)) {
      a.cols_.push_back(u);
      a.vals_.push_back(1.0 / std::sqrt(di * static_cast<double>(g.user_degree(u))));
    }
    a.offsets_[nu + i + 1] = a.cols_.size();
  }
  return a;
}

LayerFeatureSet propagate(const EmbeddingTable& emb, const NormalizedAdjacency& adj,
                          std::size_t depth, unsigned threads) {
  if (emb.num_nodes() != adj.num_nodes()) {
    throw DimensionError("embedding table has " + std::to_string(emb.num_nodes()) +
                         " rows but the graph has " + std::to_string(adj.num_nodes()) + " nodes");
  }
  const std::size_t n = emb.num_nodes();
  const std::size_t d = emb.dim();
  LayerFeatureSet out(n, depth + 1, d);
  Matrix current = emb.vectors;
  Matrix next;
  for (std::size_t l = 0; l <= depth; ++l) {
    if (l > 0) {
      adj.multiply(current, next, threads);
      std::swap(current, next);
    }
    for (std::size_t m = 0; m < n; ++m) {
      const auto src = current.row(m);
      std::copy(src.begin(), src.end(), out.layer(m, l).begin());
    }
  }
  return out;
}

Matrix mean_layer(const LayerFeatureSet& features) {
  Matrix out(features.entities(), features.dim());
  const double inv = 1.0 / static_cast<double>(features.layers());
  for (std::size_t m = 0; m < features.entities(); ++m) {
    auto dst = out.row(m);
    for (std::size_t l = 0; l < features.layers(); ++l) {
      const auto src = features.layer(m, l);
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
    for (auto& x : dst) x *= inv;
  }
  return out;
}

EmbeddingTable init_embeddings(Index num_users, Index num_items, std::size_t dim,
                               std::uint64_t seed) {
  if (dim == 0) throw DimensionError("embedding dimension must be at least 1");
  EmbeddingTable t{num_users, num_items,
                   Matrix(static_cast<std::size_t>(num_users) + num_items, dim)};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.1);
  for (auto& x : t.vectors.data()) x = normal(rng);
  return t;
}

TrainResult train_bpr(const graph::InteractionGraph& g, const TrainOptions& opt) {
  TrainResult result;
  result.embeddings = init_embeddings(g.num_users(), g.num_items(), opt.dim, opt.seed);
  if (opt.epochs == 0) return result;
  if (g.num_edges() == 0) throw TrainingError("cannot train on a graph without edges");
  if (opt.batch_size == 0) throw TrainingError("batch size must be positive");

  const auto adj = normalized_adjacency(g);
  const std::size_t n = result.embeddings.num_nodes();
  const std::size_t d = opt.dim;
  const std::size_t nu = g.num_users();
  const double layer_weight = 1.0 / static_cast<double>(opt.depth + 1);
  Matrix& ego = result.embeddings.vectors;

  // Sampling uses its own stream so it does not depend on initialization draws.
  std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
  const NegativeSampler sampler(g);
  std::vector<std::size_t> order(g.num_edges());
  std::iota(order.begin(), order.end(), 0);
  const auto edges = g.edges();

  Adam adam(ego.data().size(), opt.lr);
  Matrix final_emb(n, d), layer(n, d), scratch(n, d), grad_final(n, d), grad_ego(n, d);

  struct Triple {
    std::size_t u, i, j;
  };
  std::vector<Triple> batch;

  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t epoch_count = 0;

    for (std::size_t start = 0; start < order.size(); start += opt.batch_size) {
      const std::size_t stop = std::min(order.size(), start + opt.batch_size);
      batch.clear();
      for (std::size_t k = start; k < stop; ++k) {
        const auto [u, i] = edges[order[k]];
        Index j = 0;
        if (!sampler.sample(u, rng, j)) continue;
        batch.push_back({u, nu + i, nu + j});
      }
      if (batch.empty()) continue;

      // Forward: final = mean_l A^l ego.
      layer = ego;
      final_emb = ego;
      for (std::size_t l = 1; l <= opt.depth; ++l) {
        adj.multiply(layer, scratch, opt.threads);
        std::swap(layer, scratch);
        auto dst = final_emb.data();
        const auto src = layer.data();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
      }
      for (auto& x : final_emb.data()) x *= layer_weight;

      const double inv_b = 1.0 / static_cast<double>(batch.size());
      std::fill(grad_final.data().begin(), grad_final.data().end(), 0.0);
      std::fill(grad_ego.data().begin(), grad_ego.data().end(), 0.0);
      double batch_loss = 0.0;
      for (const auto& t : batch) {
        const auto fu = final_emb.row(t.u);
        const auto fi = final_emb.row(t.i);
        const auto fj = final_emb.row(t.j);
        const double x = dot(fu, fi) - dot(fu, fj);
        const double reg_term = 0.5 * opt.reg *
                                (dot(ego.row(t.u), ego.row(t.u)) + dot(ego.row(t.i), ego.row(t.i)) +
                                 dot(ego.row(t.j), ego.row(t.j)));
        batch_loss += softplus_neg(x) + reg_term;

        const double g = -sigmoid_neg(x) * inv_b;
        auto gu = grad_final.row(t.u);
        auto gi = grad_final.row(t.i);
        auto gj = grad_final.row(t.j);
        for (std::size_t k = 0; k < d; ++k) {
          gu[k] += g * (fi[k] - fj[k]);
          gi[k] += g * fu[k];
          gj[k] -= g * fu[k];
        }
        for (const std::size_t r : {t.u, t.i, t.j}) {
          auto ge = grad_ego.row(r);
          const auto e = ego.row(r);
          for (std::size_t k = 0; k < d; ++k) ge[k] += opt.reg * inv_b * e[k];
        }
      }
      if (!std::isfinite(batch_loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) +
                            " (batch starting at " + std::to_string(start) + ")");
      }
      epoch_loss += batch_loss;
      epoch_count += batch.size();

      // Backward: A is symmetric, so d ego = mean_l A^l grad_final.
      layer = grad_final;
      {
        auto dst = grad_ego.data();
        const auto src = grad_final.data();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += layer_weight * src[k];
      }
      for (std::size_t l = 1; l <= opt.depth; ++l) {
        adj.multiply(layer, scratch, opt.threads);
        std::swap(layer, scratch);
        auto dst = grad_ego.data();
        const auto src = layer.data();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += layer_weight * src[k];
      }
      adam.step(ego.data(), grad_ego.data());
    }
    result.loss_trace.push_back(epoch_count == 0 ? 0.0
                                                 : epoch_loss / static_cast<double>(epoch_count));
  }
  return result;
}

void write_layer_features(const LayerFeatureSet& f, std::ostream& out) {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (f.entities() > kMax || f.layers() > kMax || f.dim() > kMax) {
    throw Error("layer features too large for the WSFE format");
  }
  detail::put_magic(out, kFeatureMagic);
  detail::put_u32(out, kFeatureVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(f.entities()));
  detail::put_u32(out, static_cast<std::uint32_t>(f.layers()));
  detail::put_u32(out, static_cast<std::uint32_t>(f.dim()));
  detail::put_f32s(out, f.data());
}

LayerFeatureSet read_layer_features(std::istream& in) {
  if (!detail::check_magic(in, kFeatureMagic)) throw ParseError("not a WSFE feature file");
  const auto version = detail::get_u32(in, "feature header");
  if (version != kFeatureVersion) {
    throw ParseError("unsupported feature file version " + std::to_string(version));
  }
  const auto m = detail::get_u32(in, "feature header");
  const auto layers = detail::get_u32(in, "feature header");
  const auto d = detail::get_u32(in, "feature header");
  if (layers == 0 || d == 0) throw ParseError("feature header has zero layers or dimension");
  LayerFeatureSet f(m, layers, d);
  detail::get_f32s(in, f.data(), "feature payload");
  detail::expect_eof(in, "feature file");
  for (const double x : f.data()) {
    if (!std::isfinite(x)) throw ParseError("feature file contains non-finite values");
  }
  return f;
}

void export_layer_features(const LayerFeatureSet& features, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  write_layer_features(features, out);
  if (!out) throw Error("write failed: " + path.string());
}

LayerFeatureSet import_layer_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("input not found: " + path.string());
  return read_layer_features(in);
}

}  // namespace wsfe::backbone
