#include "wsfe/encoder.hpp"

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

namespace wsfe {

ProjectionSet ProjectionSet::from_directions(Matrix directions) {
  for (std::size_t s = 0; s < directions.rows(); ++s) {
    auto row = directions.row(s);
    double norm2 = 0.0;
    for (const double x : row) norm2 += x * x;
    if (!(norm2 > 0.0) || !std::isfinite(norm2)) {
      throw DimensionError("projection direction " + std::to_string(s) + " has zero length");
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : row) x *= inv;
  }
  return ProjectionSet{0, std::move(directions)};
}

namespace encoder {

namespace {

// Slice-invariant data about the reference: its projection on every
// direction and the stable ascending order of each projection.
struct ReferenceSlices {
  std::size_t layers = 0;
  std::vector<double> projected;      // S x (L+1)
  std::vector<std::size_t> order;     // S x (L+1), indices into the layer list
};

ReferenceSlices prepare_reference(const ReferenceSet& ref, const ProjectionSet& proj) {
  if (ref.dim() != proj.dim()) {
    throw DimensionError("reference dimension " + std::to_string(ref.dim()) +
                         " does not match projection dimension " + std::to_string(proj.dim()));
  }
  ReferenceSlices rs;
  rs.layers = ref.layers();
  rs.projected.resize(proj.count() * rs.layers);
  rs.order.resize(proj.count() * rs.layers);
  for (std::size_t s = 0; s < proj.count(); ++s) {
    const auto theta = proj.direction(s);
    double* xo = rs.projected.data() + s * rs.layers;
    for (std::size_t l = 0; l < rs.layers; ++l) {
      const auto v = ref.samples.row(l);
      double acc = 0.0;
      for (std::size_t k = 0; k < theta.size(); ++k) acc += theta[k] * v[k];
      xo[l] = acc;
    }
    auto* ord = rs.order.data() + s * rs.layers;
    std::iota(ord, ord + rs.layers, std::size_t{0});
    std::stable_sort(ord, ord + rs.layers, [xo](std::size_t a, std::size_t b) { return xo[a] < xo[b]; });
  }
  return rs;
}

void encode_row(std::span<const double> features, const ReferenceSlices& rs,
                const ProjectionSet& proj, Layout layout, double scale,
                std::vector<double>& scratch, std::span<double> out) {
  const std::size_t layers = rs.layers;
  const std::size_t d = proj.dim();
  scratch.resize(layers);
  for (std::size_t s = 0; s < proj.count(); ++s) {
    const auto theta = proj.direction(s);
    for (std::size_t l = 0; l < layers; ++l) {
      const double* v = features.data() + l * d;
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) acc += theta[k] * v[k];
      scratch[l] = acc;
    }
    std::sort(scratch.begin(), scratch.end());
    const double* xo = rs.projected.data() + s * layers;
    const std::size_t* ord = rs.order.data() + s * layers;

    switch (layout) {
      case Layout::concat: {
        double* dst = out.data() + s * layers;
        // The reference point ranked r is transported to the user's r-th order statistic.
        for (std::size_t r = 0; r < layers; ++r) {
          const std::size_t l = ord[r];
          dst[l] = (scratch[r] - xo[l]) * scale;
        }
        break;
      }
      case Layout::sum: {
        double acc = 0.0;
        for (std::size_t r = 0; r < layers; ++r) acc += scratch[r] - xo[ord[r]];
        out[s] = acc / static_cast<double>(layers) * scale;
        break;
      }
      case Layout::max: {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < layers; ++r) best = std::max(best, scratch[r] - xo[ord[r]]);
        out[s] = best * scale;
        break;
      }
    }
  }
}

void check_features(std::size_t feature_layers, std::size_t feature_dim, const ReferenceSet& ref,
                    const ProjectionSet& proj) {
  if (feature_dim != proj.dim()) {
    throw DimensionError("feature dimension " + std::to_string(feature_dim) +
                         " does not match projection dimension " + std::to_string(proj.dim()));
  }
  if (feature_layers != ref.layers()) {
    throw DimensionError("features have " + std::to_string(feature_layers) +
                         " layers but the reference has " + std::to_string(ref.layers()));
  }
  if (proj.count() == 0) throw DimensionError("projection set is empty");
}

}  // namespace

std::string_view to_string(Layout layout) {
  switch (layout) {
    case Layout::concat: return "concat";
    case Layout::sum: return "sum";
    case Layout::max: return "max";
  }
  return "?";
}

std::string_view to_string(Scaling scaling) {
  return scaling == Scaling::isometric ? "isometric" : "paper";
}

Layout parse_layout(std::string_view s) {
  if (s == "concat") return Layout::concat;
  if (s == "sum") return Layout::sum;
  if (s == "max") return Layout::max;
  throw Error("unknown layout '" + std::string(s) + "' (expected concat, sum or max)");
}

Scaling parse_scaling(std::string_view s) {
  if (s == "isometric") return Scaling::isometric;
  if (s == "paper") return Scaling::paper;
  throw Error("unknown normalization '" + std::string(s) + "' (expected isometric or paper)");
}

ProjectionSet sample_projections(std::size_t count, std::size_t dim, std::uint64_t seed) {
  if (count == 0 || dim == 0) throw DimensionError("projection count and dimension must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix dirs(count, dim);
  for (std::size_t s = 0; s < count; ++s) {
    auto row = dirs.row(s);
    double norm2 = 0.0;
    // A zero draw has probability zero but would break normalization.
    while (!(norm2 > 0.0)) {
      norm2 = 0.0;
      for (auto& x : row) {
        x = normal(rng);
        norm2 += x * x;
      }
    }
    const double norm = std::sqrt(norm2);
    for (auto& x : row) x /= norm;
  }
  return ProjectionSet{seed, std::move(dirs)};
}

ReferenceSet make_reference(std::size_t depth, std::size_t dim, std::uint64_t seed, double scale) {
  if (dim == 0) throw DimensionError("reference dimension must be >= 1");
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw Error("reference scale must be finite and >= 0");
  ReferenceSet ref{seed, scale, Matrix(depth + 1, dim)};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& x : ref.samples.data()) x = scale * normal(rng);
  return ref;
}

double feature_std(const backbone::LayerFeatureSet& features) {
  const auto data = features.data();
  if (data.empty()) return 0.0;
  const double n = static_cast<double>(data.size());
  const double mean = std::accumulate(data.begin(), data.end(), 0.0) / n;
  double ss = 0.0;
  for (const double x : data) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / n);
}

std::vector<double> project(std::span<const double> features, std::span<const double> theta) {
  if (theta.empty() || features.size() % theta.size() != 0) {
    throw DimensionError("feature block of size " + std::to_string(features.size()) +
                         " is not a multiple of direction dimension " + std::to_string(theta.size()));
  }
  const std::size_t d = theta.size();
  std::vector<double> out(features.size() / d);
  for (std::size_t l = 0; l < out.size(); ++l) {
    double acc = 0.0;
    for (std::size_t k = 0; k < d; ++k) acc += theta[k] * features[l * d + k];
    out[l] = acc;
  }
  return out;
}

std::vector<double> ot_map_ranks(std::span<const double> x_user, std::span<const double> x_ref) {
  if (x_user.size() != x_ref.size()) {
    throw DimensionError("ot_map_ranks: length mismatch (" + std::to_string(x_user.size()) +
                         " vs " + std::to_string(x_ref.size()) + ")");
  }
  const std::size_t n = x_ref.size();
  std::vector<std::size_t> ref_order(n);
  std::iota(ref_order.begin(), ref_order.end(), std::size_t{0});
  std::stable_sort(ref_order.begin(), ref_order.end(),
                   [&](std::size_t a, std::size_t b) { return x_ref[a] < x_ref[b]; });
  std::vector<double> sorted_user(x_user.begin(), x_user.end());
  std::stable_sort(sorted_user.begin(), sorted_user.end());
  std::vector<double> out(n);
  for (std::size_t r = 0; r < n; ++r) out[ref_order[r]] = sorted_user[r];
  return out;
}

std::size_t encoding_dim(Layout layout, std::size_t slices, std::size_t layers) {
  return layout == Layout::concat ? slices * layers : slices;
}

double coordinate_scale(Layout layout, Scaling scaling, std::size_t slices, std::size_t layers) {
  const double s = static_cast<double>(slices);
  const double n = static_cast<double>(layers);
  if (layout == Layout::concat) {
    return scaling == Scaling::isometric ? 1.0 / std::sqrt(s * n) : 1.0 / (s * n);
  }
  // Sum and max act on the per-slice mean/max of the residuals.
  return scaling == Scaling::isometric ? 1.0 / std::sqrt(s) : 1.0 / s;
}

UserEncoding encode_user(std::span<const double> features, const ReferenceSet& ref,
                         const ProjectionSet& proj, Layout layout, Scaling scaling) {
  if (proj.dim() == 0 || features.size() % proj.dim() != 0) {
    throw DimensionError("feature block size is not a multiple of the projection dimension");
  }
  check_features(features.size() / proj.dim(), proj.dim(), ref, proj);
  const auto rs = prepare_reference(ref, proj);
  UserEncoding enc;
  enc.layout = layout;
  enc.scale = coordinate_scale(layout, scaling, proj.count(), ref.layers());
  enc.values.resize(encoding_dim(layout, proj.count(), ref.layers()));
  std::vector<double> scratch;
  encode_row(features, rs, proj, layout, enc.scale, scratch, enc.values);
  return enc;
}

EncodingMatrix encode_all(const backbone::LayerFeatureSet& features, const ReferenceSet& ref,
                          const ProjectionSet& proj, Layout layout, Scaling scaling,
                          unsigned threads) {
  check_features(features.layers(), features.dim(), ref, proj);
  const auto rs = prepare_reference(ref, proj);
  EncodingMatrix out;
  out.layout = layout;
  out.scale = coordinate_scale(layout, scaling, proj.count(), ref.layers());
  out.values = Matrix(features.entities(), encoding_dim(layout, proj.count(), ref.layers()));
  parallel_for(features.entities(), threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> scratch;
    for (std::size_t m = begin; m < end; ++m) {
      encode_row(features.entity(m), rs, proj, layout, out.scale, scratch, out.values.row(m));
    }
  });
  return out;
}

namespace {
constexpr std::string_view kEncodingMagic = "WSFV";
constexpr std::uint32_t kEncodingVersion = 1;
}  // namespace

void write_encodings(const EncodingMatrix& enc, std::ostream& out) {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (enc.rows() > kMax || enc.dim() > kMax) throw Error("encoding matrix too large for WSFV");
  detail::put_magic(out, kEncodingMagic);
  detail::put_u32(out, kEncodingVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(enc.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(enc.dim()));
  detail::put_u8(out, static_cast<std::uint8_t>(enc.layout));
  detail::put_f32s(out, enc.values.data());
}

EncodingMatrix read_encodings(std::istream& in) {
  if (!detail::check_magic(in, kEncodingMagic)) throw ParseError("not a WSFE encoding file");
  const auto version = detail::get_u32(in, "encoding header");
  if (version != kEncodingVersion) {
    throw ParseError("unsupported encoding file version " + std::to_string(version));
  }
  const auto rows = detail::get_u32(in, "encoding header");
  const auto dim = detail::get_u32(in, "encoding header");
  const auto tag = detail::get_u8(in, "encoding header");
  if (tag > static_cast<std::uint8_t>(Layout::max)) {
    throw ParseError("unknown layout tag " + std::to_string(tag));
  }
  EncodingMatrix enc;
  enc.layout = static_cast<Layout>(tag);
  enc.values = Matrix(rows, dim);
  detail::get_f32s(in, enc.values.data(), "encoding payload");
  detail::expect_eof(in, "encoding file");
  return enc;
}

void save_encodings(const EncodingMatrix& enc, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path.string());
  write_encodings(enc, out);
  if (!out) throw Error("write failed: " + path.string());
}

EncodingMatrix load_encodings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("input not found: " + path.string());
  return read_encodings(in);
}

}  // namespace encoder
}  // namespace wsfe
