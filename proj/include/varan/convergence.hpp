#pragma once

#include "varan/function_model.hpp"
#include "varan/mesh.hpp"
#include "varan/point_set.hpp"
#include "varan/verdict.hpp"

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace varan {

/// n -> S_n, all sets sharing one dimension and norm.
class SetSequence {
 public:
  using Generator = std::function<PointSet<double>(long)>;

  SetSequence(Generator gen, Eigen::Index dim, Norm norm);

  /// S_n; throws if the generated set has the wrong dimension or norm.
  PointSet<double> operator()(long n) const;
  Eigen::Index dim() const { return dim_; }
  const Norm& norm() const { return norm_; }

 private:
  Generator gen_;
  Eigen::Index dim_;
  Norm norm_;
};

/// n -> f_n. Generated models and their node values are memoized, so a
/// sequence can be shared by several checks without recomputing envelopes.
/// Access is thread-safe.
class FunctionSequence {
 public:
  using Generator = std::function<FunctionModel(long)>;

  FunctionSequence(std::string name, Generator gen);

  const std::string& name() const { return name_; }
  FunctionModel operator()(long n) const;
  /// Node values of f_n on `mesh`.
  Eigen::VectorXd values(long n, const Mesh& mesh) const;

 private:
  struct Cache {
    std::mutex mu;
    std::map<long, FunctionModel> models;
    std::map<long, Eigen::VectorXd> values;
    std::optional<Mesh> mesh;
  };
  std::string name_;
  Generator gen_;
  std::shared_ptr<Cache> cache_;
};

/// f_n = f for every n.
FunctionSequence constant_sequence(const FunctionModel& f);
/// f_n = f inf-conv n|.| on the mesh.
FunctionSequence envelope_sequence(const FunctionModel& f, const Mesh& mesh);
/// f_n = f + (1/n) g.
FunctionSequence perturbed_sequence(const FunctionModel& f, const FunctionModel& g);
/// f_n = f + n d_S^p.
FunctionSequence penalty_sequence(const FunctionModel& f, const Region& s, double p);
/// n -> seq(n) + <xstar, .>.
FunctionSequence tilted_sequence(const FunctionSequence& seq, const Eigen::VectorXd& xstar);
/// n -> seq(n) + phi(n), pointwise.
FunctionSequence sum_sequence(const FunctionSequence& a, const FunctionSequence& b);

// ---- sets ------------------------------------------------------------------

/// y in Li S_n: d(y, S_n) <= tol over the whole window.
Verdict in_lower_limit(const Point& y, const SetSequence& seq, const LimitConfig& cfg);
/// y in Ls S_n: d(y, S_n) <= tol somewhere in the window.
Verdict in_upper_limit(const Point& y, const SetSequence& seq, const LimitConfig& cfg);
/// |d(y, S_n) - d(y, S)| <= tol over the window, for every probe.
Verdict wijsman_sets(const SetSequence& seq, const PointSet<double>& s, const std::vector<Point>& probes,
                     const LimitConfig& cfg);
/// The hit-and-miss pair at (y, lambda): the hit branch applies when
/// d(y, S) <= tol, the miss branch when D(B_lambda(y), S) > tol; otherwise
/// the verdict holds vacuously. Ball gaps use D(B_r(y), T) = (d(y,T) - r)^+.
Verdict hit_and_miss(const SetSequence& seq, const PointSet<double>& s, const Point& y, double lambda,
                     const LimitConfig& cfg);
/// hit_and_miss at lambda = 0 over all probes.
Verdict kuratowski_sets(const SetSequence& seq, const PointSet<double>& s, const std::vector<Point>& probes,
                        const LimitConfig& cfg);

// ---- functions -------------------------------------------------------------

struct RecoveryResult {
  std::vector<long> n;
  std::vector<Eigen::VectorXd> points;
  std::vector<double> values;
  std::vector<double> radii;
  Verdict verdict;
};

/// Radius paired with position i of an n-schedule of length count: the
/// radius ladder is stretched proportionally over the schedule.
double recovery_radius(const LimitConfig& cfg, std::size_t i, std::size_t count);

/// x_n = argmin over nodes of B_{r_n}(x) of |f_n - f(x)| (ties: closer to x,
/// then lower index). Holds when max(|x_n - x|, |f_n(x_n) - f(x)|) <= tol
/// over the window. Throws if f(x) = +inf or x is not a node.
RecoveryResult recovery_sequence(const FunctionSequence& seq, const FunctionModel& f, const Point& x,
                                 const Mesh& mesh, const LimitConfig& cfg);

/// Ball infima behind the analytic Wijsman test at a point.
struct BallInfima {
  std::vector<double> lambdas;
  std::vector<ExtReal> uniform_inf;                ///< r_{B_lambda(x)}(f)
  std::vector<std::vector<ExtReal>> sequence_inf;  ///< per lambda, per window n: inf_{B_lambda(x)} f_n
};

/// Verdict of r_{B_lambda(x)}(f) <= liminf_n inf_{B_lambda(x)} f_n for all
/// lambdas, combined with the recovery verdict when given.
Verdict analytic_wijsman_verdict(const BallInfima& b, const std::vector<long>& window, const Verdict* recovery,
                                 double tol);

/// lambda values used for a point test: 0 plus every radius rung below
/// lambda_max, snapped to half-node offsets on the mesh.
std::vector<double> lambda_ladder(const LimitConfig& cfg, double lambda_max, const Mesh* mesh);

/// Wijsman convergence of f_n to f at x with radius lambda_max.
Verdict wijsman_at_point(const FunctionSequence& seq, const FunctionModel& f, const Point& x, double lambda_max,
                         const Mesh& mesh, const LimitConfig& cfg);

/// Same test restricted to lambda = 0 (epi-convergence at x).
Verdict epi_at_point(const FunctionSequence& seq, const FunctionModel& f, const Point& x, const Mesh& mesh,
                     const LimitConfig& cfg);

/// Wijsman test at x for f_n = f inf-conv n|.| with f a FiniteException model,
/// computed without a mesh (x_n = x serves as recovery sequence).
Verdict envelope_wijsman_at_point(const FunctionModel& f, const Point& x, double lambda_max, const LimitConfig& cfg);

/// Default directions: 0, +-e_i, and normalized seeded random directions
/// scaled by 1 and 4.
std::vector<Eigen::VectorXd> default_directions(Eigen::Index dim, std::uint64_t seed, int random_count = 2);

/// Wijsman test for every tilted pair (f_n + x*, f + x*). `directions` must
/// contain 0. The witness lists one entry per direction and the largest
/// radius checked.
Verdict slice_at_point(const FunctionSequence& seq, const FunctionModel& f, const Point& x, double lambda_max,
                       const std::vector<Eigen::VectorXd>& directions, const Mesh& mesh, const LimitConfig& cfg);

/// D(graph g, epi h) on a shared mesh: min over node pairs (x in dom g, y in
/// dom h) of max(|x - y|, (h(y) - g(x))^+), in the box norm.
ExtReal graph_epi_gap(const FunctionModel& g, const FunctionModel& h, const Mesh& mesh);

struct TiltGapPair {
  ExtReal plain;   ///< D(graph g, epi(f - x*))
  ExtReal tilted;  ///< D(graph(g + x*), epi f)
  double tol_plain;
  double tol_tilted;  ///< tol / (1 + |x*|_dual)
};

TiltGapPair tilt_gap_pair(const FunctionModel& f, const FunctionModel& g, const Eigen::VectorXd& xstar,
                          const Mesh& mesh, double tol);

/// Holds when positivity of the two gaps (each against its tolerance)
/// agrees; Fails when a gap is positive while the other one is below the
/// bound D/(1 + |x*|) that the tilt argument guarantees; Inconclusive when
/// they disagree only inside the tolerance band.
Verdict tilt_gap_invariance(const TiltGapPair& pair, double dual_norm);

}  // namespace varan
