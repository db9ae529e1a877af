#include "varan/exception_table.hpp"

namespace varan {

ExceptionTable<double> exception_table(const FunctionModel& f, const Eigen::VectorXd& center) {
  if (f.kind() != ModelKind::FiniteException) throw std::invalid_argument("exception_table: needs a FiniteException model");
  if (!f.default_value().is_finite()) throw std::invalid_argument("exception_table: default value must be finite");
  if (f.norm().kind() != NormKind::Euclidean || f.norm().is_blocked())
    throw std::invalid_argument("exception_table: Euclidean norm required");
  if (center.size() != f.dim()) throw DimensionMismatch("exception_table: center dimension");
  ExceptionTable<double> t;
  t.default_value = f.default_value().value();
  for (const auto& e : f.exceptions()) {
    if (!e.value.is_finite()) continue;  // +inf exceptions never lower an infimum
    t.values.push_back(e.value.value());
    t.sq_dist.push_back((e.point - center).squaredNorm());
  }
  return t;
}

double penalized_inf(const ExceptionTable<double>& t, double n, double p, double rho_s, double lambda) {
  if (!(n >= 0.0) || !(p > 0.0)) throw std::invalid_argument("penalized_inf: need n >= 0 and p > 0");
  double best = t.default_value;
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double r = std::sqrt(t.sq_dist[j]);
    if (r > lambda) continue;
    const double gap = std::max(0.0, r - rho_s);
    best = std::min(best, t.values[j] + n * std::pow(gap, p));
  }
  return best;
}

double envelope_inf(const ExceptionTable<double>& t, double n, double lambda) {
  if (!(n > 0.0)) throw std::invalid_argument("envelope_inf: n must be positive");
  double best = t.default_value;
  for (std::size_t j = 0; j < t.size(); ++j)
    best = std::min(best, t.values[j] + n * std::max(0.0, std::sqrt(t.sq_dist[j]) - lambda));
  return best;
}

}  // namespace varan
