#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wsfe/backbone.hpp"
#include "wsfe/matrix.hpp"

namespace wsfe {

/// S unit directions in R^d used to slice distributions. One row per slice.
struct ProjectionSet {
  std::uint64_t seed = 0;
  Matrix directions;

  std::size_t count() const { return directions.rows(); }
  std::size_t dim() const { return directions.cols(); }
  std::span<const double> direction(std::size_t s) const { return directions.row(s); }

  /// Normalizes each row of `directions`; throws on a zero row.
  static ProjectionSet from_directions(Matrix directions);
};

/// The L+1 fixed samples of the reference distribution. One row per layer.
struct ReferenceSet {
  std::uint64_t seed = 0;
  double scale = 1.0;
  Matrix samples;

  std::size_t layers() const { return samples.rows(); }
  std::size_t dim() const { return samples.cols(); }
};

namespace encoder {

enum class Layout : std::uint8_t { concat = 0, sum = 1, max = 2 };

/// `isometric` scales every concat coordinate by 1/sqrt(S(L+1)), which makes
/// Euclidean distance between encodings equal the Monte-Carlo SW2 exactly.
/// `paper` applies the literal 1/(L+1) and 1/S prefactors instead.
enum class Scaling : std::uint8_t { isometric = 0, paper = 1 };

std::string_view to_string(Layout layout);
std::string_view to_string(Scaling scaling);
Layout parse_layout(std::string_view s);
Scaling parse_scaling(std::string_view s);

/// Directions are i.i.d. standard Gaussian vectors normalized to unit length.
ProjectionSet sample_projections(std::size_t count, std::size_t dim, std::uint64_t seed);

/// L+1 vectors with i.i.d. N(0, scale^2) entries.
ReferenceSet make_reference(std::size_t depth, std::size_t dim, std::uint64_t seed, double scale);

/// Population standard deviation over every entry of the feature set.
double feature_std(const backbone::LayerFeatureSet& features);

/// theta . v for each of the features.size() / theta.size() stacked vectors.
std::vector<double> project(std::span<const double> features, std::span<const double> theta);

/// Monotone 1D transport of x_user onto the positions of x_ref: output[l] is
/// the element of x_user whose ascending rank equals the rank of x_ref[l]
/// among x_ref. Ties keep original order.
std::vector<double> ot_map_ranks(std::span<const double> x_user, std::span<const double> x_ref);

std::size_t encoding_dim(Layout layout, std::size_t slices, std::size_t layers);

/// Per-coordinate factor applied to the (aggregated) transport residuals.
double coordinate_scale(Layout layout, Scaling scaling, std::size_t slices, std::size_t layers);

struct UserEncoding {
  std::vector<double> values;
  Layout layout = Layout::concat;
  double scale = 1.0;
};

/// `features` is one entity's (L+1) x d block, row-major.
UserEncoding encode_user(std::span<const double> features, const ReferenceSet& ref,
                         const ProjectionSet& proj, Layout layout,
                         Scaling scaling = Scaling::isometric);

struct EncodingMatrix {
  Matrix values;
  Layout layout = Layout::concat;
  double scale = 1.0;

  std::size_t rows() const { return values.rows(); }
  std::size_t dim() const { return values.cols(); }
};

/// Row m is encode_user on entity m. Rows are computed independently so the
/// result is the same for every thread count.
EncodingMatrix encode_all(const backbone::LayerFeatureSet& features, const ReferenceSet& ref,
                          const ProjectionSet& proj, Layout layout,
                          Scaling scaling = Scaling::isometric, unsigned threads = 1);

/// Encoding file: magic "WSFV", u32 version, u32 rows, u32 dim, u8 layout
/// tag, then row-major float32, little-endian.
void write_encodings(const EncodingMatrix& enc, std::ostream& out);
EncodingMatrix read_encodings(std::istream& in);
void save_encodings(const EncodingMatrix& enc, const std::filesystem::path& path);
EncodingMatrix load_encodings(const std::filesystem::path& path);

}  // namespace encoder
}  // namespace wsfe
