#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace varan {

enum class NormKind { Euclidean, Max, Taxicab };

inline std::string to_string(NormKind k) {
  switch (k) {
    case NormKind::Euclidean: return "euclidean";
    case NormKind::Max: return "max";
    case NormKind::Taxicab: return "taxicab";
  }
  return "?";
}

NormKind norm_kind_from_string(const std::string& s);

/// Norm tag attached to points, sets and function models.
///
/// A plain tag applies `kind` to the whole vector. A blocked tag splits the
/// vector into consecutive blocks and takes the max over blocks of the
/// per-block `kind` norm. That single rule covers both the box norm
/// max{|x|, |t|} on X x R and the max norm on a product X^k.
class Norm {
 public:
  Norm() = default;
  explicit Norm(NormKind kind) : kind_(kind) {}
  Norm(NormKind kind, std::vector<Eigen::Index> blocks) : kind_(kind), blocks_(std::move(blocks)) {
    for (auto b : blocks_)
      if (b <= 0) throw std::invalid_argument("Norm: block sizes must be positive");
  }

  static Norm euclidean() { return Norm(NormKind::Euclidean); }
  static Norm max() { return Norm(NormKind::Max); }
  static Norm taxicab() { return Norm(NormKind::Taxicab); }

  /// Box norm on X x R for X of dimension `dim`.
  static Norm box(NormKind base, Eigen::Index dim) { return Norm(base, {dim, 1}); }
  /// Max norm on X^k, X of dimension `dim`.
  static Norm product(NormKind base, Eigen::Index dim, Eigen::Index k) {
    return Norm(base, std::vector<Eigen::Index>(static_cast<std::size_t>(k), dim));
  }

  NormKind kind() const { return kind_; }
  const std::vector<Eigen::Index>& blocks() const { return blocks_; }
  bool is_blocked() const { return !blocks_.empty(); }

  template <typename Derived>
  typename Derived::Scalar operator()(const Eigen::MatrixBase<Derived>& v) const {
    using Scalar = typename Derived::Scalar;
    if (blocks_.empty()) return flat(v, kind_);
    Eigen::Index offset = 0;
    Scalar best(0);
    for (auto b : blocks_) {
      if (offset + b > v.size()) throw std::invalid_argument("Norm: vector shorter than block layout");
      best = std::max<Scalar>(best, flat(v.segment(offset, b), kind_));
      offset += b;
    }
    if (offset != v.size()) throw std::invalid_argument("Norm: vector longer than block layout");
    return best;
  }

  /// Dual norm, used to measure subgradients.
  /// Blocked max-norms dualize to the sum of per-block dual norms.
  template <typename Derived>
  typename Derived::Scalar dual(const Eigen::MatrixBase<Derived>& v) const {
    using Scalar = typename Derived::Scalar;
    const NormKind dk = dual_kind(kind_);
    if (blocks_.empty()) return flat(v, dk);
    Eigen::Index offset = 0;
    Scalar total(0);
    for (auto b : blocks_) {
      total += flat(v.segment(offset, b), dk);
      offset += b;
    }
    return total;
  }

  friend bool operator==(const Norm& a, const Norm& b) { return a.kind_ == b.kind_ && a.blocks_ == b.blocks_; }

  std::string describe() const;

 private:
  static NormKind dual_kind(NormKind k) {
    switch (k) {
      case NormKind::Euclidean: return NormKind::Euclidean;
      case NormKind::Max: return NormKind::Taxicab;
      case NormKind::Taxicab: return NormKind::Max;
    }
    return k;
  }

  template <typename Derived>
  static typename Derived::Scalar flat(const Eigen::MatrixBase<Derived>& v, NormKind k) {
    switch (k) {
      case NormKind::Euclidean: return v.norm();
      case NormKind::Max: return v.size() == 0 ? typename Derived::Scalar(0) : v.cwiseAbs().maxCoeff();
      case NormKind::Taxicab: return v.cwiseAbs().sum();
    }
    return v.norm();
  }

  NormKind kind_ = NormKind::Euclidean;
  std::vector<Eigen::Index> blocks_;
};

}  // namespace varan
