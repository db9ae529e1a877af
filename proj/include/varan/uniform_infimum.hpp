#pragma once

#include "varan/exception_table.hpp"
#include "varan/function_model.hpp"
#include "varan/mesh.hpp"
#include "varan/rational.hpp"
#include "varan/region.hpp"
#include "varan/verdict.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace varan {

struct UniformInfimum {
  ExtReal value = ExtReal::infinity();
  std::vector<double> rungs;       ///< delta rungs actually used, decreasing
  std::vector<ExtReal> per_rung;   ///< inf over B_delta(S), nondecreasing
};

/// Delta rungs of cfg that are >= 2 * (coarsest mesh spacing).
std::vector<double> effective_ladder(const LimitConfig& cfg, const Mesh& mesh);

/// r_S(f) on the mesh: max over rungs delta of the min of f over nodes with
/// d_S <= delta. Throws if no rung survives, if no node lies within the
/// largest rung, or if the rung values are not monotone.
UniformInfimum uniform_infimum_trace(const FunctionModel& f, const Region& s, const Mesh& mesh, const LimitConfig& cfg);
inline ExtReal uniform_infimum(const FunctionModel& f, const Region& s, const Mesh& mesh, const LimitConfig& cfg) {
  return uniform_infimum_trace(f, s, mesh, cfg).value;
}

/// r_S(f) for a FiniteException model and a Euclidean ball S, mesh-free,
/// over the full delta ladder.
UniformInfimum uniform_infimum_trace(const FunctionModel& f, const Region& s, const LimitConfig& cfg);
inline ExtReal uniform_infimum(const FunctionModel& f, const Region& s, const LimitConfig& cfg) {
  return uniform_infimum_trace(f, s, cfg).value;
}

struct PenaltySpec {
  double exponent = 1.0;
  std::vector<double> n_schedule;
  std::size_t window = 0;  ///< suffix length judged against r_S(f); 0 = last half

  void validate() const;
  std::size_t window_size() const;
  Json to_json() const;
};

/// min over nodes of f + n d_S^p.
ExtReal penalty_value(const FunctionModel& f, const Region& s, double n, const PenaltySpec& spec, const Mesh& mesh);
/// inf over R^d of f + n d_S^p for a FiniteException f and a Euclidean ball S.
ExtReal penalty_value(const FunctionModel& f, const Region& s, double n, const PenaltySpec& spec);

struct PenaltyLimit {
  ExtReal limit = ExtReal::infinity();  ///< value at the last n
  std::vector<double> n;
  std::vector<ExtReal> values;
  ExtReal uniform_inf = ExtReal::infinity();
  Verdict verdict;
};

/// Penalty values along spec.n_schedule (asserted nondecreasing); Holds when
/// they stay within cfg.tol of r_S(f) over the window.
PenaltyLimit penalty_limit(const FunctionModel& f, const Region& s, const PenaltySpec& spec, const Mesh& mesh,
                           const LimitConfig& cfg);
PenaltyLimit penalty_limit(const FunctionModel& f, const Region& s, const PenaltySpec& spec, const LimitConfig& cfg);

struct RobustnessReport {
  ExtReal r_value = ExtReal::infinity();
  ExtReal plain_inf = ExtReal::infinity();
  bool robust = true;
  double gap = 0.0;  ///< inf_S f - r_S(f), 0 when both are +inf
};

/// Plain infimum over the nodes of S and the uniform infimum, with robust
/// meaning gap <= tol. Throws if r exceeds the plain infimum by more than tol.
RobustnessReport robustness(const FunctionModel& f, const Region& s, const Mesh& mesh, const LimitConfig& cfg);
RobustnessReport robustness(const FunctionModel& f, const Region& s, const LimitConfig& cfg);

Json to_json(const RobustnessReport& r);
Json to_json(const PenaltyLimit& p);

// ---- the l2 counterexample ---------------------------------------------------

class TruncationTooSmall : public std::invalid_argument {
 public:
  TruncationTooSmall(const std::string& what, long required) : std::invalid_argument(what), required_(required) {}
  long required() const { return required_; }

 private:
  long required_;
};

/// Exact form of the sparse counterexample on R^I: default 0 and, for
/// 1 <= m <= N and 2 <= i <= I, the point e_i/m + e_1/(i m) with value -1/m.
/// Squared norms are kept as exact fractions around the origin.
struct NogoodExact {
  int levels = 0;     ///< N
  int dimension = 0;  ///< I
  ExceptionTable<Rational> table;
  std::vector<std::pair<int, int>> labels;  ///< (m, i) per exception
};

NogoodExact nogood_exact(int levels, int dimension);

/// Same instance as a FiniteException FunctionModel (double coordinates).
/// Refuses (TruncationTooSmall) unless dimension >= levels * 2^k_max.
FunctionModel nogoodlsc(int levels, int dimension, int k_max);

/// Smallest k with 2^-k < 1/(n_max (n_max - 1)), and 1 for n_max = 1.
int nogood_default_k_max(int n_max);
void nogood_check_bound(int levels, int dimension, int k_max);

/// 2^-1, ..., 2^-k_max as exact fractions.
std::vector<Rational> dyadic_ladder(int k_max);

struct NogoodRow {
  int n = 0;
  Rational r;    ///< uniform infimum over B_{1/n}(0)
  Rational inf;  ///< plain infimum over B_{1/n}(0)
};

/// Rows n = 1..n_max, built from N = n_max + 1 levels so the plain infimum at
/// n = n_max sees the level n_max + 1. k_max = 0 selects the default.
std::vector<NogoodRow> nogood_table(int n_max, int dimension, int k_max = 0);

// ---- penalization and Wijsman convergence ---------------------------------------

struct BridgeResult {
  Verdict inequality;  ///< r_{B_lambda(x)}(f_S) <= r_S(f_{B_lambda(x)}) over the lambda ladder
  Verdict wijsman;     ///< f + n d_S^p -> f_S at x
};

/// Both sides of the characterization on the mesh. Lambdas are the radius
/// rungs below lambda_max.
BridgeResult carac_W_bridge(const FunctionModel& f, const Region& s, const Point& x, double p, double lambda_max,
                            const Mesh& mesh, const LimitConfig& cfg);

/// Mesh-free version for a FiniteException f and a Euclidean ball S centered at x.
BridgeResult carac_W_bridge(const FunctionModel& f, const Region& s, const Point& x, double p, double lambda_max,
                            const LimitConfig& cfg);

}  // namespace varan
