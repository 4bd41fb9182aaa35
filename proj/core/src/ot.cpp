#include "wsfe/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "wsfe/encoder.hpp"
#include "wsfe/error.hpp"

namespace wsfe::ot {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("only equal-size empirical distributions are supported (" +
                         std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw DimensionError("empirical distributions need at least one point");
}

double squared_w2_sorted(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
  return acc / static_cast<double>(a.size());
}

}  // namespace

double w2_1d(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  return std::sqrt(squared_w2_sorted({a.begin(), a.end()}, {b.begin(), b.end()}));
}

double w2_1d_bruteforce(std::span<const double> a, std::span<const double> b) {
  check_lengths(a, b);
  if (a.size() > 8) throw DimensionError("brute-force W2 is limited to n <= 8");
  std::vector<std::size_t> sigma(a.size());
  std::iota(sigma.begin(), sigma.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[sigma[k]]) * (a[k] - b[sigma[k]]);
    best = std::min(best, acc);
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return std::sqrt(best / static_cast<double>(a.size()));
}

double mc_sw2(const PointSet& p, const PointSet& q, const ProjectionSet& proj) {
  if (p.rows() != q.rows()) {
    throw DimensionError("point sets must have equal sizes (" + std::to_string(p.rows()) + " vs " +
                         std::to_string(q.rows()) + ")");
  }
  if (p.rows() == 0) throw DimensionError("point sets must be non-empty");
  if (p.cols() != proj.dim() || q.cols() != proj.dim()) {
    throw DimensionError("point dimension does not match projection dimension " +
                         std::to_string(proj.dim()));
  }
  if (proj.count() == 0) throw DimensionError("projection set is empty");

  std::vector<double> pa(p.rows()), qa(q.rows());
  double total = 0.0;
  for (std::size_t s = 0; s < proj.count(); ++s) {
    const auto theta = proj.direction(s);
    for (std::size_t n = 0; n < p.rows(); ++n) {
      double x = 0.0, y = 0.0;
      for (std::size_t k = 0; k < theta.size(); ++k) {
        x += theta[k] * p(n, k);
        y += theta[k] * q(n, k);
      }
      pa[n] = x;
      qa[n] = y;
    }
    total += squared_w2_sorted(pa, qa);
  }
  return std::sqrt(total / static_cast<double>(proj.count()));
}

}  // namespace wsfe::ot
