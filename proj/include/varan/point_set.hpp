#pragma once

#include "varan/norm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace varan {

using Point = Eigen::VectorXd;

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A finite set of points in R^d, stored column-wise, with its norm.
/// Duplicated columns are removed on construction (order of first
/// occurrence is kept).
template <typename Scalar = double>
class PointSet {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  PointSet(Eigen::Index dim, Norm norm) : points_(dim, 0), norm_(std::move(norm)) {
    if (dim <= 0) throw std::invalid_argument("PointSet: dimension must be positive");
  }

  PointSet(Matrix columns, Norm norm) : points_(std::move(columns)), norm_(std::move(norm)) {
    if (points_.rows() <= 0) throw std::invalid_argument("PointSet: dimension must be positive");
    if (!points_.allFinite()) throw std::invalid_argument("PointSet: non-finite coordinate");
    deduplicate();
  }

  static PointSet from_points(const std::vector<Vector>& pts, Eigen::Index dim, Norm norm) {
    Matrix m(dim, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (pts[j].size() != dim) throw DimensionMismatch("PointSet: point of wrong dimension");
      m.col(static_cast<Eigen::Index>(j)) = pts[j];
    }
    return PointSet(std::move(m), std::move(norm));
  }

  Eigen::Index dim() const { return points_.rows(); }
  Eigen::Index size() const { return points_.cols(); }
  bool empty() const { return points_.cols() == 0; }
  const Norm& norm() const { return norm_; }
  const Matrix& points() const { return points_; }
  auto point(Eigen::Index j) const { return points_.col(j); }

 private:
  void deduplicate() {
    const Eigen::Index n = points_.cols();
    if (n < 2) return;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto lex_less = [this](Eigen::Index a, Eigen::Index b) {
      for (Eigen::Index r = 0; r < points_.rows(); ++r) {
        if (points_(r, a) < points_(r, b)) return true;
        if (points_(r, b) < points_(r, a)) return false;
      }
      return a < b;
    };
    std::sort(order.begin(), order.end(), lex_less);
    std::vector<char> keep(static_cast<std::size_t>(n), 1);
    for (std::size_t i = 1; i < order.size(); ++i)
      if (points_.col(order[i]) == points_.col(order[i - 1])) keep[static_cast<std::size_t>(order[i])] = 0;
    const auto kept = std::count(keep.begin(), keep.end(), 1);
    if (kept == n) return;
    Matrix out(points_.rows(), kept);
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (keep[static_cast<std::size_t>(j)]) out.col(c++) = points_.col(j);
    points_ = std::move(out);
  }

  Matrix points_;
  Norm norm_;
};

}  // namespace varan
