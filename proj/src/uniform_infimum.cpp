#include "varan/uniform_infimum.hpp"

#include "varan/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace varan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const ExceptionTable<double> ball_table(const FunctionModel& f, const Region& s, const char* who) {
  if (s.kind() != Region::Kind::Ball) throw std::invalid_argument(std::string(who) + ": S must be a ball");
  return exception_table(f, s.center());
}

}  // namespace

std::vector<double> effective_ladder(const LimitConfig& cfg, const Mesh& mesh) {
  std::vector<double> out;
  for (double d : cfg.delta_ladder)
    if (d >= 2.0 * mesh.coarsest()) out.push_back(d);
  return out;
}

UniformInfimum uniform_infimum_trace(const FunctionModel& f, const Region& s, const Mesh& mesh, const LimitConfig& cfg) {
  cfg.validate();
  if (s.dim() != mesh.dim() || f.dim() != mesh.dim()) throw DimensionMismatch("uniform_infimum: dimension mismatch");
  UniformInfimum out;
  out.rungs = effective_ladder(cfg, mesh);
  if (out.rungs.empty()) throw std::invalid_argument("uniform_infimum: no delta rung is >= 2 mesh spacings");
  const Eigen::VectorXd vals = tabulate(f, mesh);
  const Eigen::Index count = mesh.node_count();
  std::vector<double> dist(static_cast<std::size_t>(count));
  for (Eigen::Index j = 0; j < count; ++j) dist[static_cast<std::size_t>(j)] = s.distance(mesh.node(j));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return dist[static_cast<std::size_t>(a)] < dist[static_cast<std::size_t>(b)]; });
  if (dist[static_cast<std::size_t>(order.front())] > out.rungs.front())
    throw std::invalid_argument("uniform_infimum: no node within the largest delta of S");

  // prefix minima along increasing d_S, read off at the rungs from smallest up
  std::vector<ExtReal> ascending;
  double running = kInf;
  std::size_t pos = 0;
  for (auto it = out.rungs.rbegin(); it != out.rungs.rend(); ++it) {
    while (pos < order.size() && dist[static_cast<std::size_t>(order[pos])] <= *it) {
      running = std::min(running, vals(order[pos]));
      ++pos;
    }
    ascending.push_back(ExtReal(running));
  }
  out.per_rung.assign(ascending.rbegin(), ascending.rend());
  for (std::size_t k = 1; k < out.per_rung.size(); ++k)
    if (out.per_rung[k] < out.per_rung[k - 1]) throw std::logic_error("uniform_infimum: rung values not monotone");
  out.value = out.per_rung.back();
  return out;
}

UniformInfimum uniform_infimum_trace(const FunctionModel& f, const Region& s, const LimitConfig& cfg) {
  cfg.validate();
  const auto t = ball_table(f, s, "uniform_infimum");
  const auto lv = uniform_infimum_ball(t, s.radius(), cfg.delta_ladder);
  UniformInfimum out;
  out.rungs = cfg.delta_ladder;
  for (double v : lv.per_rung) out.per_rung.push_back(ExtReal(v));
  out.value = ExtReal(lv.value);
  return out;
}

void PenaltySpec::validate() const {
  if (!(exponent > 0.0) || !std::isfinite(exponent)) throw std::invalid_argument("PenaltySpec: exponent must be positive");
  if (n_schedule.empty()) throw std::invalid_argument("PenaltySpec: empty n_schedule");
  for (std::size_t i = 0; i < n_schedule.size(); ++i) {
    if (!(n_schedule[i] > 0.0) || !std::isfinite(n_schedule[i]))
      throw std::invalid_argument("PenaltySpec: n_schedule must be positive");
    if (i > 0 && !(n_schedule[i] > n_schedule[i - 1])) throw std::invalid_argument("PenaltySpec: n_schedule must increase");
  }
  if (window > n_schedule.size()) throw std::invalid_argument("PenaltySpec: window longer than n_schedule");
}

std::size_t PenaltySpec::window_size() const {
  if (window != 0) return window;
  return std::max<std::size_t>(1, n_schedule.size() / 2);
}

Json PenaltySpec::to_json() const {
  return Json{{"exponent", exponent}, {"n_schedule", n_schedule}, {"window", window_size()}};
}

ExtReal penalty_value(const FunctionModel& f, const Region& s, double n, const PenaltySpec& spec, const Mesh& mesh) {
  if (!(n > 0.0)) throw std::invalid_argument("penalty_value: n must be positive");
  const Eigen::VectorXd vals = tabulate(f, mesh);
  double best = kInf;
  for (Eigen::Index j = 0; j < mesh.node_count(); ++j) {
    if (vals(j) == kInf) continue;
    best = std::min(best, vals(j) + n * std::pow(s.distance(mesh.node(j)), spec.exponent));
  }
  return ExtReal(best);
}

ExtReal penalty_value(const FunctionModel& f, const Region& s, double n, const PenaltySpec& spec) {
  if (!(n > 0.0)) throw std::invalid_argument("penalty_value: n must be positive");
  const auto t = ball_table(f, s, "penalty_value");
  return ExtReal(penalized_inf(t, n, spec.exponent, s.radius()));
}

namespace {

PenaltyLimit finish_penalty(std::vector<ExtReal> values, ExtReal r, const PenaltySpec& spec, const LimitConfig& cfg) {
  PenaltyLimit out;
  out.n = spec.n_schedule;
  out.values = std::move(values);
  out.uniform_inf = r;
  for (std::size_t i = 1; i < out.values.size(); ++i) {
    const ExtReal a = out.values[i - 1], b = out.values[i];
    if (b.is_finite() && (a.is_infinite() || b.value() < a.value() - 1e-12))
      throw std::logic_error("penalty_limit: penalty values decreased in n");
  }
  out.limit = out.values.back();
  double q = 0.0;
  for (std::size_t i = out.values.size() - spec.window_size(); i < out.values.size(); ++i)
    q = std::max(q, abs_diff(out.values[i], r));
  Json w{{"check", "penalty_limit"}, {"penalty", spec.to_json()}, {"uniform_inf", json_number(r)}};
  Json trace = Json::array();
  for (std::size_t i = 0; i < out.values.size(); ++i)
    trace.push_back(Json{{"n", out.n[i]}, {"value", json_number(out.values[i])}});
  w["trace"] = std::move(trace);
  out.verdict = decide_at_most(q, cfg.tol, std::move(w));
  return out;
}

}  // namespace

PenaltyLimit penalty_limit(const FunctionModel& f, const Region& s, const PenaltySpec& spec, const Mesh& mesh,
                           const LimitConfig& cfg) {
  spec.validate();
  const Eigen::VectorXd vals = tabulate(f, mesh);
  std::vector<double> dp(static_cast<std::size_t>(mesh.node_count()));
  bool meets = false;
  for (Eigen::Index j = 0; j < mesh.node_count(); ++j) {
    const double d = s.distance(mesh.node(j));
    dp[static_cast<std::size_t>(j)] = std::pow(d, spec.exponent);
    if (d == 0.0 && vals(j) != kInf) meets = true;
  }
  if (!meets) throw std::invalid_argument("penalty_limit: S and dom f share no mesh node");
  std::vector<ExtReal> values;
  for (double n : spec.n_schedule) {
    double best = kInf;
    for (Eigen::Index j = 0; j < mesh.node_count(); ++j)
      if (vals(j) != kInf) best = std::min(best, vals(j) + n * dp[static_cast<std::size_t>(j)]);
    values.push_back(ExtReal(best));
  }
  return finish_penalty(std::move(values), uniform_infimum(f, s, mesh, cfg), spec, cfg);
}

PenaltyLimit penalty_limit(const FunctionModel& f, const Region& s, const PenaltySpec& spec, const LimitConfig& cfg) {
  spec.validate();
  const auto t = ball_table(f, s, "penalty_limit");
  std::vector<ExtReal> values;
  for (double n : spec.n_schedule) values.push_back(ExtReal(penalized_inf(t, n, spec.exponent, s.radius())));
  return finish_penalty(std::move(values), uniform_infimum(f, s, cfg), spec, cfg);
}

namespace {

RobustnessReport make_report(ExtReal r, ExtReal plain, double tol) {
  RobustnessReport out;
  out.r_value = r;
  out.plain_inf = plain;
  if (excess(r, plain) > tol) throw std::logic_error("robustness: uniform infimum exceeds the plain infimum");
  out.gap = std::max(0.0, excess(plain, r));
  out.robust = out.gap <= tol;
  return out;
}

}  // namespace

RobustnessReport robustness(const FunctionModel& f, const Region& s, const Mesh& mesh, const LimitConfig& cfg) {
  return make_report(uniform_infimum(f, s, mesh, cfg), inf_over_region(f, s, mesh), cfg.tol);
}

RobustnessReport robustness(const FunctionModel& f, const Region& s, const LimitConfig& cfg) {
  const auto t = ball_table(f, s, "robustness");
  return make_report(uniform_infimum(f, s, cfg), ExtReal(inf_over_ball(t, s.radius())), cfg.tol);
}

Json to_json(const RobustnessReport& r) {
  return Json{{"r_value", json_number(r.r_value)},
              {"plain_inf", json_number(r.plain_inf)},
              {"robust", r.robust},
              {"gap", json_number(r.gap)}};
}

Json to_json(const PenaltyLimit& p) {
  Json j{{"limit", json_number(p.limit)}, {"uniform_inf", json_number(p.uniform_inf)}};
  j["verdict"] = to_json(p.verdict);
  return j;
}

// ---- the l2 counterexample ---------------------------------------------------

NogoodExact nogood_exact(int levels, int dimension) {
  if (levels < 1 || dimension < 2) throw std::invalid_argument("nogood: need levels >= 1 and dimension >= 2");
  NogoodExact out;
  out.levels = levels;
  out.dimension = dimension;
  out.table.default_value = Rational(0);
  for (int m = 1; m <= levels; ++m) {
    for (int i = 2; i <= dimension; ++i) {
      const std::int64_t ii = i, mm = m;
      out.table.values.push_back(Rational(-1, mm));
      out.table.sq_dist.push_back(Rational(ii * ii + 1, ii * ii * mm * mm));
      out.labels.emplace_back(m, i);
    }
  }
  return out;
}

int nogood_default_k_max(int n_max) {
  if (n_max < 1) throw std::invalid_argument("nogood: n_max must be >= 1");
  if (n_max == 1) return 1;
  const long long bound = static_cast<long long>(n_max) * (n_max - 1);
  int k = 0;
  while ((1LL << k) <= bound) ++k;
  return k;
}

void nogood_check_bound(int levels, int dimension, int k_max) {
  if (k_max < 1 || k_max > 40) throw std::invalid_argument("nogood: k_max out of range");
  const long long required = static_cast<long long>(levels) << k_max;
  if (static_cast<long long>(dimension) < required)
    throw TruncationTooSmall("nogood: dimension " + std::to_string(dimension) + " is below levels * 2^k_max = " +
                                 std::to_string(required),
                             static_cast<long>(required));
}

FunctionModel nogoodlsc(int levels, int dimension, int k_max) {
  nogood_check_bound(levels, dimension, k_max);
  std::vector<FunctionModel::Exception> ex;
  for (int m = 1; m <= levels; ++m) {
    for (int i = 2; i <= dimension; ++i) {
      Eigen::VectorXd p = Eigen::VectorXd::Zero(dimension);
      p(i - 1) = 1.0 / m;
      p(0) = 1.0 / (static_cast<double>(i) * m);
      ex.push_back({std::move(p), ExtReal(-1.0 / m)});
    }
  }
  Box box{Eigen::VectorXd::Constant(dimension, -1.0), Eigen::VectorXd::Constant(dimension, 1.0)};
  return FunctionModel::finite_exception("nogoodlsc(" + std::to_string(levels) + "," + std::to_string(dimension) + ")",
                                         box, ExtReal(0.0), std::move(ex), Norm::euclidean());
}

std::vector<Rational> dyadic_ladder(int k_max) {
  std::vector<Rational> out;
  for (int k = 1; k <= k_max; ++k) out.push_back(Rational(1, std::int64_t{1} << k));
  return out;
}

std::vector<NogoodRow> nogood_table(int n_max, int dimension, int k_max) {
  if (n_max < 1) throw std::invalid_argument("nogood_table: n_max must be >= 1");
  if (k_max == 0) k_max = nogood_default_k_max(n_max);
  const int levels = n_max + 1;
  nogood_check_bound(levels, dimension, k_max);
  const NogoodExact ex = nogood_exact(levels, dimension);
  const auto ladder = dyadic_ladder(k_max);
  std::vector<NogoodRow> rows;
  for (int n = 1; n <= n_max; ++n) {
    const Rational rho(1, n);
    rows.push_back({n, uniform_infimum_ball(ex.table, rho, ladder).value, inf_over_ball(ex.table, rho)});
  }
  return rows;
}

// ---- penalization and Wijsman convergence ---------------------------------------

BridgeResult carac_W_bridge(const FunctionModel& f, const Region& s, const Point& x, double p, double lambda_max,
                            const Mesh& mesh, const LimitConfig& cfg) {
  cfg.validate();
  const FunctionModel fs = restrict(f, s);
  auto lambdas = lambda_ladder(cfg, lambda_max, &mesh);
  lambdas.erase(std::remove(lambdas.begin(), lambdas.end(), 0.0), lambdas.end());
  if (lambdas.empty()) throw std::invalid_argument("carac_W_bridge: no positive radius below lambda_max");
  double q = -kInf;
  Json rows = Json::array();
  for (double lambda : lambdas) {
    const Region ball = Region::ball(x, lambda, mesh.norm());
    const ExtReal lhs = uniform_infimum(fs, ball, mesh, cfg);
    const ExtReal rhs = uniform_infimum(restrict(f, ball), s, mesh, cfg);
    const double e = excess(lhs, rhs);
    q = std::max(q, e);
    rows.push_back(Json{{"lambda", lambda}, {"r_ball_fS", json_number(lhs)}, {"r_S_fball", json_number(rhs)},
                        {"excess", json_number(e)}});
  }
  BridgeResult out;
  out.inequality = decide_at_most(q, cfg.tol, Json{{"check", "bridge_inequality"}, {"lambdas", rows}});
  out.wijsman = wijsman_at_point(penalty_sequence(f, s, p), fs, x, lambda_max, mesh, cfg);
  return out;
}

BridgeResult carac_W_bridge(const FunctionModel& f, const Region& s, const Point& x, double p, double lambda_max,
                            const LimitConfig& cfg) {
  cfg.validate();
  if (s.kind() != Region::Kind::Ball || (s.center() - x).norm() != 0.0)
    throw std::invalid_argument("carac_W_bridge: S must be a ball centered at x");
  const auto t = exception_table(f, x);
  const double rho = s.radius();
  // r_{B_a}(f restricted to B_b) for concentric balls, over the delta ladder
  auto r_nested = [&](double a, double b) {
    double best = -kInf;
    for (double d : cfg.delta_ladder) best = std::max(best, inf_over_ball(t, std::min(a + d, b)));
    return best;
  };
  const auto lambdas = lambda_ladder(cfg, lambda_max, nullptr);
  double q = -kInf;
  Json rows = Json::array();
  BallInfima b;
  b.lambdas = lambdas;
  const auto window = cfg.window();
  for (double lambda : lambdas) {
    const double lhs = r_nested(lambda, rho);
    if (lambda > 0.0) {
      const double rhs = r_nested(rho, lambda);
      q = std::max(q, lhs - rhs);
      rows.push_back(Json{{"lambda", lambda}, {"r_ball_fS", lhs}, {"r_S_fball", rhs}, {"excess", lhs - rhs}});
    }
    b.uniform_inf.push_back(ExtReal(lhs));
    std::vector<ExtReal> row;
    for (long n : window) row.push_back(ExtReal(penalized_inf(t, static_cast<double>(n), p, rho, lambda)));
    b.sequence_inf.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("carac_W_bridge: no positive radius below lambda_max");
  BridgeResult out;
  out.inequality = decide_at_most(q, cfg.tol, Json{{"check", "bridge_inequality"}, {"lambdas", rows}});
  // x is the center of S, so f_n(x) = f(x) = f_S(x) and x_n = x recovers it
  const Verdict rec = decide_at_most(0.0, cfg.tol, Json{{"check", "recovery"}, {"x_n", "x"}});
  const Verdict* rec_ptr = f(x).is_finite() ? &rec : nullptr;
  out.wijsman = analytic_wijsman_verdict(b, window, rec_ptr, cfg.tol);
  return out;
}

}  // namespace varan
