#pragma once

#include "varan/convergence.hpp"
#include "varan/function_model.hpp"
#include "varan/mesh.hpp"
#include "varan/verdict.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace varan {

struct SlopeEstimate {
  ExtReal value;
  double radius_used = 0.0;
  std::vector<std::pair<double, double>> ratio_trace;  ///< (radius, sup ratio), decreasing radius
};

/// Radius rungs of cfg that reach at least one neighbouring node.
std::vector<double> slope_rungs(const LimitConfig& cfg, const Mesh& mesh);

/// Strong slope at a node from node values: for each rung the max of
/// (f(x) - f(y))^+ / |x - y| over nodes y != x in B_r(x); the value is the
/// entry at the smallest rung. Nodes with f(y) = +inf contribute 0.
SlopeEstimate strong_slope(const Eigen::VectorXd& values, const Mesh& mesh, Eigen::Index node,
                           const std::vector<double>& rungs);
SlopeEstimate strong_slope(const FunctionModel& f, const Point& x, const Mesh& mesh, const LimitConfig& cfg);

struct EkelandPoint {
  Eigen::Index node = -1;
  Point point;
  double value = 0.0;
  int moves = 0;
};

/// Exact Ekeland point on the nodes of B_radius(start): repeatedly moves z
/// to the minimizer of f + sigma |. - z| while that is a strict
/// improvement. The result satisfies f(z) <= f(start) and
/// f(z) <= f(y) + sigma |y - z| for every ball node y (checked).
EkelandPoint ekeland_point(const Eigen::VectorXd& values, const Mesh& mesh, Eigen::Index start, double sigma,
                           double radius);
EkelandPoint ekeland_point(const FunctionModel& f, const Point& x0, double sigma, double radius, const Mesh& mesh);

struct StabilityOptions {
  double lambda_x = 0.5;  ///< radius up to which the Wijsman test is required
  int k_max = 150;        ///< epsilon = 1/k for k <= k_max
};

struct StabilityWitness {
  std::vector<long> n;
  std::vector<Point> points;
  std::vector<double> values;
  std::vector<ExtReal> slopes;
  std::vector<int> level;  ///< k with epsilon = 1/k used at n, 0 before the first usable k
  double target_value = 0.0;
  double slope_at_limit = 0.0;
  double limsup_bound = 0.0;
  Verdict verdict;

  /// Largest slope over the eventually-window.
  double suffix_max_slope(const LimitConfig& cfg) const;
};

/// Sequence x_n with x_n -> x, f_n(x_n) -> f(x) and slopes of f_n at x_n
/// eventually below |grad f|(x) + tol, built by the recovery/Ekeland
/// construction with epsilon = 1/k and the diagonal re-indexing over k.
/// Throws PreconditionFailed if the Wijsman test at x fails.
StabilityWitness slope_stability_witness(const FunctionSequence& seq, const FunctionModel& f, const Point& x,
                                         const Mesh& mesh, const LimitConfig& cfg, const StabilityOptions& opt = {});

/// Sequence with f_n(x_n) -> min f and slopes -> 0: near-minimizers of f,
/// an Ekeland step with sigma = 1/n, then the same transfer to f_n.
StabilityWitness stationary_sequence(const FunctionSequence& seq, const FunctionModel& f, const Mesh& mesh,
                                     const LimitConfig& cfg, const StabilityOptions& opt = {});

Json to_json(const StabilityWitness& w);
/// n, x_0..x_{d-1}, value, slope
std::string to_csv(const StabilityWitness& w);
/// radius, sup_ratio
std::string to_csv(const SlopeEstimate& s);

/// x* in the Frechet subdifferential of f at x: slope of f - <x*, .> at x
/// within tol. The witness carries the liminf-quotient form of the same
/// test on the smallest rung; the two always agree (checked).
Verdict frechet_membership(const FunctionModel& f, const Point& x, const Eigen::VectorXd& xstar, const Mesh& mesh,
                           const LimitConfig& cfg);
/// The quotient form alone: min over the smallest ball of
/// (f(y) - f(x) - <x*, y - x>) / |y - x| >= -tol.
Verdict frechet_quotient_form(const FunctionModel& f, const Point& x, const Eigen::VectorXd& xstar, const Mesh& mesh,
                              const LimitConfig& cfg);

// ---- subdifferential oracles ------------------------------------------------

/// A finite sample of a subdifferential: for convex pieces the extreme
/// points of the subdifferential, whose convex hull is the full set.
struct SubdifferentialOracle {
  std::string provenance;  ///< "analytic-convex", "smooth-gradient" or "frechet-sampled"
  std::function<std::vector<Eigen::VectorXd>(const Point&)> at;

  std::vector<Eigen::VectorXd> operator()(const Point& x) const { return at(x); }
};

SubdifferentialOracle gradient_oracle(std::function<Eigen::VectorXd(const Point&)> gradient);
SubdifferentialOracle convex_oracle(std::function<std::vector<Eigen::VectorXd>(const Point&)> extreme_points);
/// Linear functional <c, .>.
SubdifferentialOracle linear_oracle(Eigen::VectorXd c);
/// scale |. - center| (Euclidean). At the center in dimension > 1 the
/// sample is +-scale e_i.
SubdifferentialOracle distance_oracle(double scale, Point center);
/// Zero function.
SubdifferentialOracle zero_oracle(Eigen::Index dim);
/// One-dimensional mesh subdifferential of a model: the interval between
/// the left and right difference quotients at a node (endpoints returned;
/// one endpoint at the box boundary, none when the quotients cross).
SubdifferentialOracle frechet_oracle(const FunctionModel& f, const Mesh& mesh);

struct SumChoice {
  Eigen::VectorXd xstar;
  Eigen::VectorXd ystar;
  double norm = 0.0;  ///< dual norm of xstar + ystar; +inf when a sample is empty
};

/// a in conv(as), b in conv(bs) with a + b small in the dual norm. Exact in
/// dimension 1. Otherwise a + b is the Euclidean min-norm point of the
/// Minkowski hull, replaced by the best vertex pair if that is smaller in
/// the dual norm; exact whenever 0 is reachable or the norm is Euclidean.
SumChoice closest_sum(const std::vector<Eigen::VectorXd>& as, const std::vector<Eigen::VectorXd>& bs, const Norm& norm);

/// Slope control at z: nodes x_n -> z with f(x_n) -> f(z), y_n -> z and
/// subgradients minimizing |x* + y*|; Holds when the window max is within
/// tol of |grad(f + phi)|(z).
Verdict p2_witness(const FunctionModel& f, const SubdifferentialOracle& df, const FunctionModel& phi,
                   const SubdifferentialOracle& dphi, const Point& z, const Mesh& mesh, const LimitConfig& cfg);

using OracleSequence = std::function<SubdifferentialOracle(long)>;

/// One subgradient pair chosen at step n.
struct P2Pair {
  long n = 0;
  Point anchor;  ///< slope-stable point z_n the search is centred on
  Point x;
  Point y;
  Eigen::VectorXd xstar;
  Eigen::VectorXd ystar;
  double norm = 0.0;  ///< dual norm of xstar + ystar
};

struct P2Sequence {
  std::vector<P2Pair> pairs;  ///< eventually-window only
  double slope_at_limit = 0.0;
  Verdict verdict;
};

/// Stability of slope control: f_n + phi_n -> f at z, slope-stable points
/// z_n, then subgradient pairs within 1/n of z_n. Holds when the window max
/// of |x*_n + y*_n| is within tol of |grad f|(z).
Verdict sequence_p2_stability(const FunctionSequence& f_seq, const OracleSequence& df, const FunctionSequence& phi_seq,
                              const OracleSequence& dphi, const FunctionModel& f, const Point& z, const Mesh& mesh,
                              const LimitConfig& cfg, const StabilityOptions& opt = {});
/// Same construction, returning the chosen pairs.
P2Sequence sequence_p2_pairs(const FunctionSequence& f_seq, const OracleSequence& df, const FunctionSequence& phi_seq,
                             const OracleSequence& dphi, const FunctionModel& f, const Point& z, const Mesh& mesh,
                             const LimitConfig& cfg, const StabilityOptions& opt = {});

}  // namespace varan
