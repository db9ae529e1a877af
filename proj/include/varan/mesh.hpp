#pragma once

#include "varan/norm.hpp"
#include "varan/point_set.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace varan {

/// Axis-aligned closed box.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index dim() const { return lower.size(); }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
  }
  double diameter(const Norm& n) const { return n(upper - lower); }
  friend bool operator==(const Box& a, const Box& b) { return a.lower == b.lower && a.upper == b.upper; }
};

/// Regular tensor mesh on a box. Nodes include both endpoints of every
/// coordinate interval; the requested resolution is rounded so that the
/// interval splits into an integer number of cells.
class Mesh {
 public:
  /// Requested resolution per coordinate (one entry, or one per axis).
  Mesh(Box box, const Eigen::VectorXd& resolution, Norm norm = Norm::euclidean());

  static Mesh interval(double lo, double hi, double h, Norm norm = Norm::euclidean());
  /// Tensor power base^k, used for product spaces X^k with the max norm.
  static Mesh power(const Mesh& base, Eigen::Index k);

  Eigen::Index dim() const { return box_.dim(); }
  Eigen::Index node_count() const { return nodes_.cols(); }
  const Box& box() const { return box_; }
  const Norm& norm() const { return norm_; }
  const Eigen::VectorXd& spacing() const { return spacing_; }
  const Eigen::VectorXi& counts() const { return counts_; }
  /// Smallest spacing over all axes.
  double resolution() const { return spacing_.minCoeff(); }
  /// Largest spacing over all axes.
  double coarsest() const { return spacing_.maxCoeff(); }

  const Eigen::MatrixXd& nodes() const { return nodes_; }
  auto node(Eigen::Index i) const { return nodes_.col(i); }

  /// Index of the node at x, if x is a node (up to 1e-9 relative spacing).
  std::optional<Eigen::Index> find_node(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Index of the node closest to x in the sup sense (x clamped to the box).
  Eigen::Index nearest_node(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Node indices inside the closed ball B_r(center).
  std::vector<Eigen::Index> ball(const Eigen::Ref<const Eigen::VectorXd>& center, double r) const;

  PointSet<double> as_point_set() const { return PointSet<double>(nodes_, norm_); }

  /// Radius moved to the middle between two node shells: (floor(r/h) + 1/2) h.
  /// Zero stays zero.
  double snap_radius(double r) const;

  friend bool operator==(const Mesh& a, const Mesh& b) {
    return a.box_ == b.box_ && a.counts_ == b.counts_ && a.norm_ == b.norm_;
  }

 private:
  Mesh() = default;
  void build_nodes();

  Box box_;
  Eigen::VectorXd spacing_;
  Eigen::VectorXi counts_;
  Norm norm_;
  Eigen::MatrixXd nodes_;
};

}  // namespace varan
