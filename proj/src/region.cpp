#include "varan/region.hpp"

#include "varan/geometry.hpp"

#include <sstream>
#include <stdexcept>

namespace varan {

namespace {
std::string format_vec(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v(i);
  os << ")";
  return os.str();
}
}  // namespace

Region Region::whole(Eigen::Index dim) {
  Region r;
  r.kind_ = Kind::Whole;
  r.dim_ = dim;
  r.label_ = "whole";
  return r;
}

Region Region::ball(Eigen::VectorXd center, double radius, Norm norm) {
  if (!(radius >= 0.0)) throw std::invalid_argument("Region::ball: negative radius");
  Region r;
  r.kind_ = Kind::Ball;
  r.dim_ = center.size();
  r.label_ = "ball" + format_vec(center) + "r=" + std::to_string(radius);
  r.center_ = std::move(center);
  r.radius_ = radius;
  r.norm_ = std::move(norm);
  return r;
}

Region Region::box(Box b, Norm norm) {
  if (b.lower.size() != b.upper.size()) throw DimensionMismatch("Region::box: malformed box");
  if ((b.lower.array() > b.upper.array()).any()) throw std::invalid_argument("Region::box: empty box");
  Region r;
  r.kind_ = Kind::Box;
  r.dim_ = b.lower.size();
  r.label_ = "box" + format_vec(b.lower) + "-" + format_vec(b.upper);
  r.box_ = std::move(b);
  r.norm_ = std::move(norm);
  return r;
}

Region Region::points(PointSet<double> s) {
  if (s.empty()) throw std::invalid_argument("Region::points: empty set");
  Region r;
  r.kind_ = Kind::Finite;
  r.dim_ = s.dim();
  r.label_ = "finite[" + std::to_string(s.size()) + "]";
  r.norm_ = s.norm();
  r.finite_ = std::make_shared<const PointSet<double>>(std::move(s));
  return r;
}

Region Region::singleton(Eigen::VectorXd p, Norm norm) {
  Eigen::MatrixXd m = p;
  Region r = points(PointSet<double>(std::move(m), std::move(norm)));
  r.label_ = "point" + format_vec(p);
  return r;
}

Region Region::custom(std::string label, Eigen::Index dim, Predicate contains, Distance distance) {
  Region r;
  r.kind_ = Kind::Custom;
  r.dim_ = dim;
  r.label_ = std::move(label);
  r.contains_ = std::move(contains);
  r.distance_ = std::move(distance);
  return r;
}

bool Region::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim_) throw DimensionMismatch("Region::contains: dimension mismatch");
  switch (kind_) {
    case Kind::Whole: return true;
    case Kind::Ball: return norm_(x - center_) <= radius_;
    case Kind::Box: return box_.contains(x);
    case Kind::Finite: return point_set_distance(x, *finite_) == ExtReal(0.0);
    case Kind::Custom: return contains_(x);
  }
  return false;
}

double Region::distance(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim_) throw DimensionMismatch("Region::distance: dimension mismatch");
  switch (kind_) {
    case Kind::Whole: return 0.0;
    case Kind::Ball: return std::max(0.0, norm_(x - center_) - radius_);
    case Kind::Box: {
      const Eigen::VectorXd clamped = x.cwiseMax(box_.lower).cwiseMin(box_.upper);
      return norm_(x - clamped);
    }
    case Kind::Finite: return point_set_distance(x, *finite_).raw();
    case Kind::Custom: return distance_(x);
  }
  return 0.0;
}

}  // namespace varan
