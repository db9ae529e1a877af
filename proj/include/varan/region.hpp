#pragma once

#include "varan/mesh.hpp"
#include "varan/norm.hpp"
#include "varan/point_set.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <string>

namespace varan {

/// A closed subset S of R^d that knows its own distance function d_S.
///
/// Regions are the constraint sets S of r_S(f), f_S and n d_S^p. Every
/// concrete kind computes d_S exactly for the attached norm: balls through
/// max(0, |x - c| - r), boxes through the componentwise clamp (exact for all
/// three norm kinds since they are monotone in |x_i|), finite sets by
/// enumeration.
class Region {
 public:
  enum class Kind { Whole, Ball, Box, Finite, Custom };
  using Predicate = std::function<bool(const Eigen::Ref<const Eigen::VectorXd>&)>;
  using Distance = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

  static Region whole(Eigen::Index dim);
  static Region ball(Eigen::VectorXd center, double radius, Norm norm = Norm::euclidean());
  static Region box(Box b, Norm norm = Norm::euclidean());
  static Region points(PointSet<double> s);
  static Region singleton(Eigen::VectorXd p, Norm norm = Norm::euclidean());
  /// Arbitrary closed set; the caller vouches that distance is d_S.
  static Region custom(std::string label, Eigen::Index dim, Predicate contains, Distance distance);

  Kind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }
  const std::string& label() const { return label_; }

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double distance(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Ball parameters (Kind::Ball only).
  const Eigen::VectorXd& center() const { return center_; }
  double radius() const { return radius_; }

 private:
  Region() = default;

  Kind kind_ = Kind::Whole;
  Eigen::Index dim_ = 0;
  std::string label_;
  Norm norm_;
  Eigen::VectorXd center_;
  double radius_ = 0.0;
  Box box_;
  std::shared_ptr<const PointSet<double>> finite_;
  Predicate contains_;
  Distance distance_;
};

}  // namespace varan
