#include "varan/sum_rules.hpp"

#include "varan/uniform_infimum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace varan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Json point_json(const Eigen::Ref<const Eigen::VectorXd>& p) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p(i));
  return a;
}

void check_base(const DecoupledSum& ds, const Mesh& base, const Point& x, const char* who) {
  if (base.dim() != ds.dim() || x.size() != ds.dim()) throw DimensionMismatch(std::string(who) + ": dimension mismatch");
  if (!base.find_node(x)) throw std::invalid_argument(std::string(who) + ": point is not a mesh node");
}

// Odometer over k-tuples of indices into a list of size m.
bool next_tuple(std::vector<std::size_t>& idx, std::size_t m) {
  for (auto& i : idx) {
    if (++i < m) return true;
    i = 0;
  }
  return false;
}

}  // namespace

DecoupledSum::DecoupledSum(std::vector<FunctionModel> components) : components_(std::move(components)) {
  if (components_.size() < 2) throw std::invalid_argument("DecoupledSum: at least two components are required");
  const FunctionModel& first = components_.front();
  if (first.norm().is_blocked()) throw std::invalid_argument("DecoupledSum: component norm must be unblocked");
  for (const auto& f : components_) {
    if (!(f.box() == first.box())) throw std::invalid_argument("DecoupledSum: components must share a box");
    if (!(f.norm() == first.norm())) throw std::invalid_argument("DecoupledSum: components must share a norm");
  }
}

Box DecoupledSum::product_box() const {
  const Box& b = components_.front().box();
  Box out{Eigen::VectorXd(dim() * k()), Eigen::VectorXd(dim() * k())};
  for (Eigen::Index i = 0; i < k(); ++i) {
    out.lower.segment(i * dim(), dim()) = b.lower;
    out.upper.segment(i * dim(), dim()) = b.upper;
  }
  return out;
}

Point DecoupledSum::embed(const Point& x) const {
  if (x.size() != dim()) throw DimensionMismatch("DecoupledSum::embed: dimension mismatch");
  return x.replicate(k(), 1);
}

ExtReal DecoupledSum::operator()(const Eigen::Ref<const Eigen::VectorXd>& p) const {
  if (p.size() != dim() * k()) throw DimensionMismatch("DecoupledSum: product point has the wrong dimension");
  ExtReal total(0.0);
  for (Eigen::Index i = 0; i < k(); ++i) {
    total += components_[static_cast<std::size_t>(i)](block(p, i));
    if (total.is_infinite()) return total;
  }
  return total;
}

FunctionModel DecoupledSum::model() const {
  std::string name = "F[";
  for (std::size_t i = 0; i < components_.size(); ++i) name += (i ? "," : "") + components_[i].name();
  name += "]";
  const DecoupledSum self = *this;
  return FunctionModel::composite(
      name, product_box(), [self](const Eigen::Ref<const Eigen::VectorXd>& p) { return self(p); }, product_norm());
}

FunctionModel DecoupledSum::sum_model() const {
  FunctionModel total = components_.front();
  for (std::size_t i = 1; i < components_.size(); ++i) total = sum(total, components_[i]);
  return total;
}

// ---- diagonal ----------------------------------------------------------------

ExtReal diagonal_distance(const Eigen::Ref<const Eigen::VectorXd>& p, const DiagonalGeometry& g, const Mesh& base) {
  if (p.size() != g.k * g.dim || base.dim() != g.dim) throw DimensionMismatch("diagonal_distance: dimension mismatch");
  if (g.dim == 1) return ExtReal((p.maxCoeff() - p.minCoeff()) / 2);
  if (g.k == 2) return ExtReal(g.norm(p.head(g.dim) - p.tail(g.dim)) / 2);
  double best = kInf;
  for (Eigen::Index z = 0; z < base.node_count(); ++z) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < g.k && worst < best; ++i)
      worst = std::max(worst, g.norm(p.segment(i * g.dim, g.dim) - base.node(z)));
    best = std::min(best, worst);
  }
  return ExtReal(best);
}

double diagonal_distance_error(const DiagonalGeometry& g, const Mesh& base) {
  if (g.dim == 1 || g.k == 2) return 0.0;
  return g.norm(base.spacing());
}

Region diagonal_region(const DiagonalGeometry& g, const Mesh& base) {
  return Region::custom(
      "diagonal", g.k * g.dim,
      [g](const Eigen::Ref<const Eigen::VectorXd>& p) {
        for (Eigen::Index i = 1; i < g.k; ++i)
          if (p.segment(i * g.dim, g.dim) != p.head(g.dim)) return false;
        return true;
      },
      [g, base](const Eigen::Ref<const Eigen::VectorXd>& p) { return diagonal_distance(p, g, base).raw(); });
}

Mesh product_mesh(const DecoupledSum& ds, const Mesh& base) {
  const Eigen::Index dims = ds.k() * ds.dim();
  double nodes = std::pow(static_cast<double>(base.node_count()), static_cast<double>(ds.k()));
  if (dims > kMaxProductDimension || nodes > kMaxProductNodes) {
    std::ostringstream os;
    os << "product mesh refused: k*d = " << dims << " (limit " << kMaxProductDimension << "), " << nodes
       << " nodes (limit " << kMaxProductNodes << ")";
    throw BudgetExceeded(os.str());
  }
  return Mesh::power(base, ds.k());
}

// ---- decoupling inequality -----------------------------------------------------

DecouplingReport decoupling_report(const DecoupledSum& ds, const Point& x, const Mesh& base, const LimitConfig& cfg,
                                   double lambda_max) {
  cfg.validate();
  check_base(ds, base, x, "decoupling_inequality");
  if (!(lambda_max > 0.0)) throw std::invalid_argument("decoupling_inequality: lambda_max must be positive");
  const Mesh prod = product_mesh(ds, base);
  const DiagonalGeometry g = ds.geometry();
  const Region diag = diagonal_region(g, base);
  const FunctionModel big = ds.model();
  const FunctionModel on_diag = restrict(big, diag);
  const Point center = ds.embed(x);
  const auto deltas = effective_ladder(cfg, prod);
  auto lambdas = lambda_ladder(cfg, lambda_max, &prod);
  lambdas.erase(std::remove(lambdas.begin(), lambdas.end(), 0.0), lambdas.end());
  if (lambdas.empty()) throw std::invalid_argument("decoupling_inequality: no positive radius below lambda_max");

  const Eigen::VectorXd sum_values = tabulate(ds.sum_model(), base);
  std::vector<Eigen::VectorXd> parts;
  for (const auto& f : ds.components()) parts.push_back(tabulate(f, base));

  DecouplingReport out;
  double q = -kInf;
  bool prefix = true;
  for (double lambda : lambdas) {
    const Region ball = Region::ball(center, lambda, prod.norm());
    DecouplingRow row;
    row.lambda = lambda;
    row.lhs = uniform_infimum(on_diag, ball, prod, cfg);
    row.rhs = uniform_infimum(restrict(big, ball), diag, prod, cfg);

    // raw tuple form on the base mesh, same delta rungs
    double raw_lhs = -kInf;
    for (double delta : deltas) {
      double m = kInf;
      for (Eigen::Index j = 0; j < base.node_count(); ++j)
        if (std::max(0.0, base.norm()(base.node(j) - x) - lambda) <= delta) m = std::min(m, sum_values(j));
      raw_lhs = std::max(raw_lhs, m);
    }
    const Region base_ball = Region::ball(x, lambda, base.norm());
    std::vector<Eigen::Index> inside;
    for (Eigen::Index j = 0; j < base.node_count(); ++j)
      if (base_ball.contains(base.node(j))) inside.push_back(j);
    std::vector<std::pair<double, double>> tuples;  // (diameter, value)
    if (!inside.empty()) {
      std::vector<std::size_t> idx(static_cast<std::size_t>(ds.k()), 0);
      do {
        double diam = 0.0, value = 0.0;
        for (std::size_t a = 0; a < idx.size(); ++a) {
          value += parts[a](inside[idx[a]]);
          for (std::size_t b = a + 1; b < idx.size(); ++b)
            diam = std::max(diam, base.norm()(base.node(inside[idx[a]]) - base.node(inside[idx[b]])));
        }
        tuples.emplace_back(diam, value);
      } while (next_tuple(idx, inside.size()));
    }
    std::sort(tuples.begin(), tuples.end());
    double raw_rhs = -kInf, run = kInf;
    std::size_t t = 0;
    for (auto it = deltas.rbegin(); it != deltas.rend(); ++it) {  // increasing delta
      while (t < tuples.size() && tuples[t].first <= 2 * *it) run = std::min(run, tuples[t++].second);
      raw_rhs = std::max(raw_rhs, run);
    }
    row.raw_lhs = ExtReal(raw_lhs);
    row.raw_rhs = ExtReal(raw_rhs);
    if (row.raw_lhs.raw() != row.lhs.raw() || row.raw_rhs.raw() != row.rhs.raw())
      throw std::logic_error("decoupling_inequality: raw and product forms disagree");
    row.excess = excess(row.lhs, row.rhs);
    q = std::max(q, row.excess);
    if (prefix && row.excess <= cfg.tol) out.holds_up_to = lambda;
    else prefix = false;
    out.rows.push_back(row);
  }
  Json rows = Json::array();
  for (const auto& r : out.rows)
    rows.push_back(Json{{"lambda", r.lambda},
                        {"r_ball_F_diag", json_number(r.lhs)},
                        {"r_diag_F_ball", json_number(r.rhs)},
                        {"excess", json_number(r.excess)}});
  out.verdict = decide_at_most(q, cfg.tol,
                               Json{{"check", "decoupling_inequality"},
                                    {"lambdas", rows},
                                    {"holds_up_to_lambda", out.holds_up_to},
                                    {"diagonal_distance_error", diagonal_distance_error(g, base)}});
  return out;
}

Verdict decoupling_inequality(const DecoupledSum& ds, const Point& x, const Mesh& base, const LimitConfig& cfg,
                              double lambda_max) {
  return decoupling_report(ds, x, base, cfg, lambda_max).verdict;
}

FunctionSequence diagonal_penalty_sequence(const DecoupledSum& ds, const Mesh& base) {
  return penalty_sequence(ds.model(), diagonal_region(ds.geometry(), base), 1.0);
}

bool DecouplingBridge::consistent() const {
  const bool decisive = inequality.status != Status::Inconclusive && wijsman.status != Status::Inconclusive;
  return !decisive || inequality.status == wijsman.status;
}

DecouplingBridge prop71_bridge(const DecoupledSum& ds, const Point& x, const Mesh& base, const LimitConfig& cfg,
                               double lambda_max) {
  DecouplingBridge out;
  out.inequality = decoupling_inequality(ds, x, base, cfg, lambda_max);
  const Mesh prod = product_mesh(ds, base);
  const FunctionModel on_diag = restrict(ds.model(), diagonal_region(ds.geometry(), base));
  out.wijsman = wijsman_at_point(diagonal_penalty_sequence(ds, base), on_diag, ds.embed(x), lambda_max, prod, cfg);
  return out;
}

// ---- subgradient witnesses -------------------------------------------------------

SubdifferentialOracle diagonal_oracle(const DiagonalGeometry& g, double scale) {
  if (g.dim != 1) throw std::invalid_argument("diagonal_oracle: one-dimensional components only");
  if (!(scale >= 0.0)) throw std::invalid_argument("diagonal_oracle: scale must be >= 0");
  return {"analytic-convex", [g, scale](const Point& p) {
            const double hi = p.maxCoeff(), lo = p.minCoeff();
            std::vector<Eigen::VectorXd> out;
            for (Eigen::Index i = 0; i < g.k; ++i)
              for (Eigen::Index j = 0; j < g.k; ++j) {
                if (i == j || p(i) != hi || p(j) != lo) continue;
                Eigen::VectorXd v = Eigen::VectorXd::Zero(g.k);
                v(i) = scale / 2;
                v(j) = -scale / 2;
                out.push_back(std::move(v));
              }
            return out;
          }};
}

SubdifferentialOracle product_oracle(const DecoupledSum& ds, const std::vector<SubdifferentialOracle>& parts) {
  if (static_cast<Eigen::Index>(parts.size()) != ds.k())
    throw std::invalid_argument("product_oracle: one oracle per component is required");
  std::string provenance = "product(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!parts[i].at) throw std::invalid_argument("product_oracle: missing component oracle");
    provenance += (i ? "," : "") + parts[i].provenance;
  }
  provenance += ")";
  const Eigen::Index d = ds.dim();
  return {provenance, [parts, d](const Point& p) {
            std::vector<std::vector<Eigen::VectorXd>> samples;
            for (std::size_t i = 0; i < parts.size(); ++i) {
              samples.push_back(parts[i](p.segment(static_cast<Eigen::Index>(i) * d, d)));
              if (samples.back().empty()) return std::vector<Eigen::VectorXd>{};
            }
            std::vector<Eigen::VectorXd> out;
            std::vector<std::size_t> idx(parts.size(), 0);
            while (true) {
              Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()) * d);
              for (std::size_t i = 0; i < parts.size(); ++i)
                v.segment(static_cast<Eigen::Index>(i) * d, d) = samples[i][idx[i]];
              out.push_back(std::move(v));
              std::size_t a = 0;
              for (; a < idx.size(); ++a) {
                if (++idx[a] < samples[a].size()) break;
                idx[a] = 0;
              }
              if (a == idx.size()) break;
            }
            return out;
          }};
}

SumRuleWitness r2_witness(const DecoupledSum& ds, const std::vector<SubdifferentialOracle>& oracles, const Point& x,
                          const Mesh& base, const LimitConfig& cfg, const StabilityOptions& opt, double lambda_max) {
  cfg.validate();
  check_base(ds, base, x, "r2_witness");
  if (ds.dim() != 1) throw std::invalid_argument("r2_witness: one-dimensional components only");
  const SubdifferentialOracle big_oracle = product_oracle(ds, oracles);
  const Verdict pre = decoupling_inequality(ds, x, base, cfg, lambda_max);
  if (!pre.holds()) throw PreconditionFailed("r2_witness: decoupling inequality does not hold", pre);

  const Mesh prod = product_mesh(ds, base);
  const DiagonalGeometry g = ds.geometry();
  const Region diag = diagonal_region(g, base);
  const FunctionModel big = ds.model();
  const FunctionSequence penalty("n d_diagonal", [g, diag, box = ds.product_box(), norm = ds.product_norm()](long n) {
    const double nn = static_cast<double>(n);
    return FunctionModel::composite(
        std::to_string(n) + "d_diagonal", box,
        [diag, nn](const Eigen::Ref<const Eigen::VectorXd>& p) { return ExtReal(nn * diag.distance(p)); }, norm, nn);
  });
  const SlopeEstimate slope = strong_slope(ds.sum_model(), x, base, cfg);
  const P2Sequence p2 =
      sequence_p2_pairs(constant_sequence(big), [big_oracle](long) { return big_oracle; }, penalty,
                        [g](long n) { return diagonal_oracle(g, static_cast<double>(n)); }, restrict(big, diag),
                        ds.embed(x), prod, cfg, opt);

  SumRuleWitness out;
  out.slope = slope.value.raw();
  double q_sum = -kInf, q_diam = -kInf, attentive = 0.0;
  for (const P2Pair& pair : p2.pairs) {
    SumRuleRow row;
    row.n = pair.n;
    if (pair.xstar.size() == 0) {
      row.point = Eigen::VectorXd::Constant(ds.k(), std::nan(""));
      row.sum = Eigen::VectorXd::Constant(1, std::nan(""));
      row.sum_norm = kInf;
      row.diameter = kInf;
      q_sum = q_diam = kInf;
      out.rows.push_back(std::move(row));
      continue;
    }
    row.point = pair.x;
    row.sum = Eigen::VectorXd::Zero(1);
    double largest = 0.0;
    for (Eigen::Index i = 0; i < ds.k(); ++i) {
      const double xs = pair.xstar(i);
      const auto samples = oracles[static_cast<std::size_t>(i)](ds.block(pair.x, i));
      double lo = kInf, hi = -kInf;
      for (const auto& s : samples) lo = std::min(lo, s(0)), hi = std::max(hi, s(0));
      if (!(xs >= lo - 1e-9 && xs <= hi + 1e-9))
        throw std::logic_error("r2_witness: product subgradient does not split into component subgradients");
      row.sum(0) += xs;
      row.subgradient_norms.push_back(std::abs(xs));
      largest = std::max(largest, std::abs(xs));
      const ExtReal fi = ds.components()[static_cast<std::size_t>(i)](ds.block(pair.x, i));
      const ExtReal fx = ds.components()[static_cast<std::size_t>(i)](x);
      attentive = std::max({attentive, std::abs(pair.x(i) - x(0)), abs_diff(fi, fx)});
    }
    row.diameter = pair.x.maxCoeff() - pair.x.minCoeff();
    row.sum_norm = std::abs(row.sum(0));
    q_sum = std::max(q_sum, row.sum_norm - out.slope);
    q_diam = std::max(q_diam, row.diameter * largest);
    out.rows.push_back(std::move(row));
  }
  Json w{{"check", "r2_witness"},
         {"slope_sum", out.slope},
         {"decoupling", to_string(pre.status)},
         {"p2_stability", to_string(p2.verdict.status)},
         {"attentive_gap", json_number(attentive)}};
  out.verdict = conjunction({decide_at_most(q_sum, cfg.tol, Json{{"check", "sum_norm_vs_slope"}}),
                             decide_at_most(q_diam, cfg.tol, Json{{"check", "diameter_times_norm"}})},
                            std::move(w));
  const auto& trace = slope.ratio_trace;
  if (trace.size() >= 2 && trace.back().second > 0.0 && trace.back().second >= 1.8 * trace[trace.size() - 2].second) {
    out.verdict.status = Status::Inconclusive;
    out.verdict.witness["slope_finiteness"] = "doubtful: sup-ratio grows like 1/r at the smallest rungs";
  }
  return out;
}

Json to_json(const DecouplingReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back(Json{{"lambda", row.lambda},
                        {"lhs", json_number(row.lhs)},
                        {"rhs", json_number(row.rhs)},
                        {"raw_lhs", json_number(row.raw_lhs)},
                        {"raw_rhs", json_number(row.raw_rhs)},
                        {"excess", json_number(row.excess)}});
  return Json{{"rows", rows}, {"holds_up_to_lambda", r.holds_up_to}, {"verdict", to_json(r.verdict)}};
}

Json to_json(const SumRuleWitness& w) {
  Json rows = Json::array();
  for (const auto& r : w.rows) {
    Json norms = Json::array();
    for (double v : r.subgradient_norms) norms.push_back(v);
    rows.push_back(Json{{"n", r.n},
                        {"points", point_json(r.point)},
                        {"diam", json_number(r.diameter)},
                        {"subgradient_norms", norms},
                        {"sum", point_json(r.sum)},
                        {"sum_norm", json_number(r.sum_norm)}});
  }
  return Json{{"witness", rows}, {"slope", w.slope}, {"verdict", to_json(w.verdict)}};
}

std::string to_csv(const SumRuleWitness& w) {
  std::ostringstream os;
  os.precision(17);
  const Eigen::Index k = w.rows.empty() ? 0 : w.rows.front().point.size();
  os << "n";
  for (Eigen::Index i = 0; i < k; ++i) os << ",x" << i + 1;
  os << ",diam";
  for (Eigen::Index i = 0; i < k; ++i) os << ",norm" << i + 1;
  os << ",sum_norm\n";
  for (const auto& r : w.rows) {
    os << r.n;
    for (Eigen::Index i = 0; i < k; ++i) os << ',' << r.point(i);
    os << ',' << r.diameter;
    for (Eigen::Index i = 0; i < k; ++i)
      os << ',' << (static_cast<std::size_t>(i) < r.subgradient_norms.size() ? r.subgradient_norms[i] : std::nan(""));
    os << ',' << r.sum_norm << '\n';
  }
  return os.str();
}

}  // namespace varan
