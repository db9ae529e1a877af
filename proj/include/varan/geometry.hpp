#pragma once

#include "varan/ext_real.hpp"
#include "varan/point_set.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace varan {

/// d_S(x) = inf { |x - a| : a in S }, +inf for empty S.
template <typename Derived, typename Scalar>
ExtReal point_set_distance(const Eigen::MatrixBase<Derived>& x, const PointSet<Scalar>& s) {
  if (x.size() != s.dim()) throw DimensionMismatch("point_set_distance: dimension mismatch");
  if (s.empty()) return ExtReal::infinity();
  const auto& n = s.norm();
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    best = std::min<double>(best, n(x - s.point(j)));
    if (best == 0.0) break;
  }
  return ExtReal(best);
}

/// Gap distance D(A, B) = inf { |a - b| : a in A, b in B }.
/// Exactly symmetric: |a - b| and |b - a| round identically for every norm kind.
template <typename Scalar>
ExtReal gap_distance(const PointSet<Scalar>& a, const PointSet<Scalar>& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("gap_distance: dimension mismatch");
  if (!(a.norm() == b.norm())) throw std::invalid_argument("gap_distance: norm mismatch");
  if (a.empty() || b.empty()) return ExtReal::infinity();
  const auto& n = a.norm();
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < a.size() && best > 0.0; ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      const double d = n(a.point(i) - b.point(j));
      if (d < best) {
        best = d;
        if (best == 0.0) break;
      }
    }
  return ExtReal(best);
}

/// Membership in the closed uniform neighborhood B_delta(S).
template <typename Derived, typename Scalar>
bool uniform_neighborhood_contains(const PointSet<Scalar>& s, double delta, const Eigen::MatrixBase<Derived>& x) {
  if (!(delta >= 0.0)) throw std::invalid_argument("uniform_neighborhood_contains: negative delta");
  return point_set_distance(x, s) <= ExtReal(delta);
}

/// diam(S) = sup of pairwise distances; 0 for the empty set and singletons.
template <typename Scalar>
double diameter(const PointSet<Scalar>& s) {
  const auto& n = s.norm();
  double best = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    for (Eigen::Index j = i + 1; j < s.size(); ++j) best = std::max<double>(best, n(s.point(i) - s.point(j)));
  return best;
}

}  // namespace varan
