#pragma once

#include "varan/function_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace varan {

/// A FiniteException function seen from one reference point c: the default
/// value, and for every exception point p its value and |p - c|^2
/// (Euclidean). All ball computations below are for balls centered at c and
/// are exact in Scalar arithmetic: the default value is attained at
/// non-exception points arbitrarily close to any point, so it enters every
/// infimum over a ball of positive radius.
template <typename Scalar>
struct ExceptionTable {
  Scalar default_value{};
  std::vector<Scalar> values;
  std::vector<Scalar> sq_dist;

  std::size_t size() const { return values.size(); }
};

/// Double-valued table of a FiniteException model around `center`.
/// Requires a finite default value and the Euclidean norm.
ExceptionTable<double> exception_table(const FunctionModel& f, const Eigen::VectorXd& center);

/// inf of f over the closed ball B_rho(c). Radius 0 gives f(c).
template <typename Scalar>
Scalar inf_over_ball(const ExceptionTable<Scalar>& t, const Scalar& rho) {
  const Scalar r2 = rho * rho;
  if (rho == Scalar(0)) {
    for (std::size_t j = 0; j < t.size(); ++j)
      if (t.sq_dist[j] == Scalar(0)) return t.values[j];
    return t.default_value;
  }
  Scalar best = t.default_value;
  for (std::size_t j = 0; j < t.size(); ++j)
    if (t.sq_dist[j] <= r2 && t.values[j] < best) best = t.values[j];
  return best;
}

template <typename Scalar>
struct LadderValue {
  Scalar value{};
  std::vector<Scalar> per_rung;  ///< inf over B_{rho + delta}(c), one entry per rung
};

/// max over rungs delta of inf over B_{rho + delta}(c): the uniform infimum of
/// f on B_rho(c) along the ladder. Throws if the ladder values are not
/// nondecreasing as delta decreases.
template <typename Scalar>
LadderValue<Scalar> uniform_infimum_ball(const ExceptionTable<Scalar>& t, const Scalar& rho,
                                         const std::vector<Scalar>& ladder) {
  if (ladder.empty()) throw std::invalid_argument("uniform_infimum_ball: empty ladder");
  LadderValue<Scalar> out;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (k > 0 && !(ladder[k] < ladder[k - 1])) throw std::invalid_argument("uniform_infimum_ball: ladder not decreasing");
    const Scalar v = inf_over_ball(t, rho + ladder[k]);
    if (k > 0 && v < out.per_rung.back()) throw std::logic_error("uniform_infimum_ball: ladder values not monotone");
    out.per_rung.push_back(v);
  }
  out.value = out.per_rung.back();
  return out;
}

/// inf over y in B_lambda(c) of f(y) + n * max(0, |y - c| - rho_s)^p, i.e. the
/// penalized function f + n d_S^p with S = B_{rho_s}(c), restricted to the
/// concentric ball B_lambda(c). lambda = +inf gives the unrestricted penalty value.
double penalized_inf(const ExceptionTable<double>& t, double n, double p, double rho_s,
                     double lambda = std::numeric_limits<double>::infinity());

/// inf over y in B_lambda(c) of the envelope (f inf-conv n|.|)(y)
/// = min(default, min_p f(p) + n * max(0, |p - c| - lambda)).
double envelope_inf(const ExceptionTable<double>& t, double n, double lambda);

}  // namespace varan
