#pragma once

#include "varan/convergence.hpp"
#include "varan/function_model.hpp"
#include "varan/mesh.hpp"
#include "varan/region.hpp"
#include "varan/slopes.hpp"
#include "varan/verdict.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace varan {

/// Shape of the diagonal of X^k: k copies of a d-dimensional space.
struct DiagonalGeometry {
  Eigen::Index k = 2;
  Eigen::Index dim = 1;
  Norm norm;  ///< base norm on X
};

/// F(x_1, ..., x_k) = sum f_i(x_i) on X^k with the max-over-blocks norm.
class DecoupledSum {
 public:
  /// Components must share box and norm; at least two are required.
  explicit DecoupledSum(std::vector<FunctionModel> components);

  Eigen::Index k() const { return static_cast<Eigen::Index>(components_.size()); }
  Eigen::Index dim() const { return components_.front().dim(); }
  const std::vector<FunctionModel>& components() const { return components_; }
  DiagonalGeometry geometry() const { return {k(), dim(), components_.front().norm()}; }
  Norm product_norm() const { return Norm::product(components_.front().norm().kind(), dim(), k()); }
  Box product_box() const;

  /// (x, ..., x)
  Point embed(const Point& x) const;
  /// Block i of a product point.
  Point block(const Eigen::Ref<const Eigen::VectorXd>& p, Eigen::Index i) const {
    return p.segment(i * dim(), dim());
  }

  ExtReal operator()(const Eigen::Ref<const Eigen::VectorXd>& p) const;
  /// F as a model on the product box.
  FunctionModel model() const;
  /// sum f_i on the base box (F restricted to the diagonal).
  FunctionModel sum_model() const;

 private:
  std::vector<FunctionModel> components_;
};

/// d_Delta(p) = min over z of max_i |x_i - z|. Exact when dim = 1
/// ((max - min) / 2) or k = 2 (|x_1 - x_2| / 2); otherwise minimized over the
/// nodes of `base`, an overestimate by at most diagonal_distance_error.
ExtReal diagonal_distance(const Eigen::Ref<const Eigen::VectorXd>& p, const DiagonalGeometry& g, const Mesh& base);
double diagonal_distance_error(const DiagonalGeometry& g, const Mesh& base);
/// The diagonal as a Region, with d_Delta as its distance.
Region diagonal_region(const DiagonalGeometry& g, const Mesh& base);

class BudgetExceeded : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr Eigen::Index kMaxProductDimension = 4;
inline constexpr double kMaxProductNodes = 1 << 20;

/// base^k with the product norm. Throws BudgetExceeded when k * d > 4 or the
/// node count passes 2^20; the message carries the requested size.
Mesh product_mesh(const DecoupledSum& ds, const Mesh& base);

struct DecouplingRow {
  double lambda = 0.0;
  ExtReal lhs;      ///< r over the product ball of F restricted to the diagonal
  ExtReal rhs;      ///< r over the diagonal of F restricted to the product ball
  ExtReal raw_lhs;  ///< sup_delta inf over B_{lambda+delta}(x) of sum f_i
  ExtReal raw_rhs;  ///< sup_delta inf of sum f_i(x_i), x_i in B_lambda(x), |x_i - x_j| <= 2 delta
  double excess = 0.0;
};

struct DecouplingReport {
  std::vector<DecouplingRow> rows;  ///< increasing lambda
  double holds_up_to = 0.0;         ///< largest lambda of the prefix of rows within tol (0 if none)
  Verdict verdict;
};

/// The decoupling inequality at x per positive lambda rung below
/// lambda_max, in both the raw tuple form and the uniform-infimum form on
/// the product mesh (the two must coincide; checked).
DecouplingReport decoupling_report(const DecoupledSum& ds, const Point& x, const Mesh& base, const LimitConfig& cfg,
                                   double lambda_max = 0.5);
Verdict decoupling_inequality(const DecoupledSum& ds, const Point& x, const Mesh& base, const LimitConfig& cfg,
                              double lambda_max = 0.5);

/// f_n = F + n d_Delta as a sequence on the product box.
FunctionSequence diagonal_penalty_sequence(const DecoupledSum& ds, const Mesh& base);

struct DecouplingBridge {
  Verdict inequality;
  Verdict wijsman;  ///< F + n d_Delta -> F restricted to the diagonal, at (x, ..., x)

  /// False only when both are decisive and disagree.
  bool consistent() const;
};

DecouplingBridge prop71_bridge(const DecoupledSum& ds, const Point& x, const Mesh& base, const LimitConfig& cfg,
                               double lambda_max = 0.5);

/// Subdifferential samples of scale * d_Delta for dim = 1: the extreme
/// points (e_i - e_j) scale / 2 with i in the argmax and j in the argmin.
SubdifferentialOracle diagonal_oracle(const DiagonalGeometry& g, double scale);
/// Cartesian product of per-component samples.
SubdifferentialOracle product_oracle(const DecoupledSum& ds, const std::vector<SubdifferentialOracle>& parts);

struct SumRuleRow {
  long n = 0;
  Point point;                         ///< (x_1n, ..., x_kn)
  double diameter = 0.0;               ///< max_ij |x_in - x_jn|
  std::vector<double> subgradient_norms;  ///< |x*_in|
  Eigen::VectorXd sum;                 ///< sum_i x*_in
  double sum_norm = 0.0;
};

struct SumRuleWitness {
  std::vector<SumRuleRow> rows;
  double slope = 0.0;  ///< slope of sum f_i at x
  Verdict verdict;
};

/// Slope-control witnesses for a decouplable family at x (one-dimensional
/// components): subgradient pairs for F and n d_Delta on the product,
/// split blockwise. Holds when the window max of |sum x*_in| is within tol
/// of the slope and the window max of diam * |x*_in| is within tol.
/// Throws PreconditionFailed unless the decoupling inequality Holds.
SumRuleWitness r2_witness(const DecoupledSum& ds, const std::vector<SubdifferentialOracle>& oracles, const Point& x,
                          const Mesh& base, const LimitConfig& cfg, const StabilityOptions& opt = {},
                          double lambda_max = 0.5);

Json to_json(const DecouplingReport& r);
Json to_json(const SumRuleWitness& w);
/// n, x_1.., diam, norm_1.., sum_norm
std::string to_csv(const SumRuleWitness& w);

}  // namespace varan
