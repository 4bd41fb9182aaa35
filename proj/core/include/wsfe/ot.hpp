#pragma once

#include <span>
#include <vector>

#include "wsfe/matrix.hpp"

namespace wsfe {
struct ProjectionSet;
}

namespace wsfe::ot {

/// Uniform-weight empirical distribution: one point per row.
using PointSet = Matrix;

/// Closed-form 1D Wasserstein-2 between equal-size empirical distributions:
/// sqrt(mean((sort(a) - sort(b))^2)).
double w2_1d(std::span<const double> a, std::span<const double> b);

/// Same quantity by enumerating every bijection. Only for n <= 8.
double w2_1d_bruteforce(std::span<const double> a, std::span<const double> b);

/// Monte-Carlo sliced Wasserstein-2: sqrt(mean_s w2_1d(P theta_s, Q theta_s)^2).
double mc_sw2(const PointSet& p, const PointSet& q, const ProjectionSet& proj);

}  // namespace wsfe::ot
