#include "varan/convergence.hpp"

#include "varan/exception_table.hpp"
#include "varan/geometry.hpp"
#include "varan/uniform_infimum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace varan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Json point_json(const Eigen::Ref<const Eigen::VectorXd>& p) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p(i));
  return a;
}

std::vector<double> distances_along(const Point& y, const SetSequence& seq, const std::vector<long>& ns) {
  if (y.size() != seq.dim()) throw DimensionMismatch("set sequence check: probe dimension mismatch");
  std::vector<double> out;
  out.reserve(ns.size());
  for (long n : ns) out.push_back(point_set_distance(y, seq(n)).raw());
  return out;
}

Json distance_trace(const std::vector<long>& ns, const std::vector<double>& d) {
  Json t = Json::array();
  for (std::size_t i = 0; i < ns.size(); ++i) t.push_back(Json{{"n", ns[i]}, {"d", json_number(d[i])}});
  return t;
}

}  // namespace

// ---- sequences -------------------------------------------------------------

SetSequence::SetSequence(Generator gen, Eigen::Index dim, Norm norm)
    : gen_(std::move(gen)), dim_(dim), norm_(std::move(norm)) {
  if (!gen_) throw std::invalid_argument("SetSequence: empty generator");
}

PointSet<double> SetSequence::operator()(long n) const {
  PointSet<double> s = gen_(n);
  if (s.dim() != dim_) throw DimensionMismatch("SetSequence: generated set has the wrong dimension");
  if (!(s.norm() == norm_)) throw std::invalid_argument("SetSequence: generated set has the wrong norm");
  return s;
}

FunctionSequence::FunctionSequence(std::string name, Generator gen)
    : name_(std::move(name)), gen_(std::move(gen)), cache_(std::make_shared<Cache>()) {
  if (!gen_) throw std::invalid_argument("FunctionSequence: empty generator");
}

FunctionModel FunctionSequence::operator()(long n) const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  auto it = cache_->models.find(n);
  if (it == cache_->models.end()) it = cache_->models.emplace(n, gen_(n)).first;
  return it->second;
}

Eigen::VectorXd FunctionSequence::values(long n, const Mesh& mesh) const {
  const FunctionModel fn = (*this)(n);
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->mesh || !(*cache_->mesh == mesh)) {
    cache_->values.clear();
    cache_->mesh = mesh;
  }
  auto it = cache_->values.find(n);
  if (it == cache_->values.end()) it = cache_->values.emplace(n, tabulate(fn, mesh)).first;
  return it->second;
}

FunctionSequence constant_sequence(const FunctionModel& f) {
  return FunctionSequence("const[" + f.name() + "]", [f](long) { return f; });
}

FunctionSequence envelope_sequence(const FunctionModel& f, const Mesh& mesh) {
  auto base = std::make_shared<const Eigen::VectorXd>(tabulate(f, mesh));
  const std::string name = f.name();
  return FunctionSequence("envelope[" + name + "]", [base, mesh, name](long n) {
    const double nn = static_cast<double>(n);
    return FunctionModel::tabulated(name + " infconv " + std::to_string(n) + "|.|", mesh,
                                    pasch_hausdorff_values(*base, nn, mesh), nn);
  });
}

FunctionSequence perturbed_sequence(const FunctionModel& f, const FunctionModel& g) {
  return FunctionSequence("perturbed[" + f.name() + "," + g.name() + "]",
                          [f, g](long n) { return add_scaled(f, 1.0 / static_cast<double>(n), g); });
}

FunctionSequence penalty_sequence(const FunctionModel& f, const Region& s, double p) {
  if (!(p > 0.0)) throw std::invalid_argument("penalty_sequence: exponent must be positive");
  return FunctionSequence("penalty[" + f.name() + "," + s.label() + "]", [f, s, p](long n) {
    const double nn = static_cast<double>(n);
    return FunctionModel::composite(
        f.name() + "+" + std::to_string(n) + "d^p", f.box(),
        [f, s, p, nn](const Eigen::Ref<const Eigen::VectorXd>& x) {
          const ExtReal fx = f(x);
          if (fx.is_infinite()) return fx;
          return fx + ExtReal(nn * std::pow(s.distance(x), p));
        },
        f.norm());
  });
}

FunctionSequence tilted_sequence(const FunctionSequence& seq, const Eigen::VectorXd& xstar) {
  return FunctionSequence(seq.name() + "+<x*,.>", [seq, xstar](long n) { return tilt(seq(n), xstar); });
}

FunctionSequence sum_sequence(const FunctionSequence& a, const FunctionSequence& b) {
  return FunctionSequence(a.name() + "+" + b.name(), [a, b](long n) { return sum(a(n), b(n)); });
}

// ---- sets ------------------------------------------------------------------

Verdict in_lower_limit(const Point& y, const SetSequence& seq, const LimitConfig& cfg) {
  cfg.validate();
  const auto ns = cfg.window();
  const auto d = distances_along(y, seq, ns);
  const double q = *std::max_element(d.begin(), d.end());
  return decide_at_most(q, cfg.tol, Json{{"check", "lower_limit"}, {"trace", distance_trace(ns, d)}});
}

Verdict in_upper_limit(const Point& y, const SetSequence& seq, const LimitConfig& cfg) {
  cfg.validate();
  const auto ns = cfg.window();
  const auto d = distances_along(y, seq, ns);
  const double q = *std::min_element(d.begin(), d.end());
  return decide_at_most(q, cfg.tol, Json{{"check", "upper_limit"}, {"trace", distance_trace(ns, d)}});
}

Verdict wijsman_sets(const SetSequence& seq, const PointSet<double>& s, const std::vector<Point>& probes,
                     const LimitConfig& cfg) {
  cfg.validate();
  if (probes.empty()) throw std::invalid_argument("wijsman_sets: no probes");
  const auto ns = cfg.window();
  std::vector<Verdict> parts;
  Json per_probe = Json::array();
  for (const auto& y : probes) {
    const ExtReal target = point_set_distance(y, s);
    const auto d = distances_along(y, seq, ns);
    double q = 0.0;
    for (double di : d) q = std::max(q, abs_diff(ExtReal(di), target));
    parts.push_back(decide_at_most(q, cfg.tol));
    per_probe.push_back(Json{{"probe", point_json(y)},
                             {"d_limit", json_number(target)},
                             {"max_deviation", json_number(q)},
                             {"status", to_string(parts.back().status)}});
  }
  return conjunction(parts, Json{{"check", "wijsman_sets"}, {"probes", per_probe}});
}

Verdict hit_and_miss(const SetSequence& seq, const PointSet<double>& s, const Point& y, double lambda,
                     const LimitConfig& cfg) {
  cfg.validate();
  if (!(lambda >= 0.0)) throw std::invalid_argument("hit_and_miss: lambda must be >= 0");
  const auto ns = cfg.window();
  const double dy = point_set_distance(y, s).raw();
  const auto d = distances_along(y, seq, ns);
  Json w{{"check", "hit_and_miss"}, {"probe", point_json(y)}, {"lambda", lambda}, {"d_limit", json_number(dy)}};
  if (dy <= cfg.tol) {
    const double q = *std::max_element(d.begin(), d.end());
    w["branch"] = "hit";
    w["trace"] = distance_trace(ns, d);
    return decide_at_most(q, cfg.tol, std::move(w));
  }
  const double gap = std::max(0.0, dy - lambda);
  if (gap > cfg.tol) {
    // sup over delta of liminf_n D(B_{lambda + delta}(y), S_n)
    double best = 0.0;
    Json rungs = Json::array();
    for (double delta : cfg.delta_ladder) {
      double low = kInf;
      for (double dn : d) low = std::min(low, std::max(0.0, dn - lambda - delta));
      rungs.push_back(Json{{"delta", delta}, {"liminf_gap", json_number(low)}});
      best = std::max(best, low);
    }
    w["branch"] = "miss";
    w["limit_gap"] = gap;
    w["rungs"] = rungs;
    return decide_positive(best, cfg.tol, std::move(w));
  }
  w["branch"] = "vacuous";
  return decide_at_most(0.0, cfg.tol, std::move(w));
}

Verdict kuratowski_sets(const SetSequence& seq, const PointSet<double>& s, const std::vector<Point>& probes,
                        const LimitConfig& cfg) {
  if (probes.empty()) throw std::invalid_argument("kuratowski_sets: no probes");
  std::vector<Verdict> parts;
  Json per_probe = Json::array();
  for (const auto& y : probes) {
    parts.push_back(hit_and_miss(seq, s, y, 0.0, cfg));
    per_probe.push_back(Json{{"probe", point_json(y)},
                             {"branch", parts.back().witness["branch"]},
                             {"status", to_string(parts.back().status)}});
  }
  return conjunction(parts, Json{{"check", "kuratowski_sets"}, {"probes", per_probe}});
}

// ---- functions -------------------------------------------------------------

double recovery_radius(const LimitConfig& cfg, std::size_t i, std::size_t count) {
  const std::size_t levels = cfg.radius_ladder.size();
  const std::size_t idx = std::min(levels - 1, i * levels / std::max<std::size_t>(count, 1));
  return cfg.radius_ladder[idx];
}

RecoveryResult recovery_sequence(const FunctionSequence& seq, const FunctionModel& f, const Point& x,
                                 const Mesh& mesh, const LimitConfig& cfg) {
  cfg.validate();
  const ExtReal fx = f(x);
  if (fx.is_infinite()) throw std::invalid_argument("recovery_sequence: f(x) = +inf");
  if (!mesh.find_node(x)) throw std::invalid_argument("recovery_sequence: x is not a mesh node");
  RecoveryResult out;
  const std::size_t start = cfg.window_start();
  double q = 0.0;
  Json trace = Json::array();
  for (std::size_t i = start; i < cfg.n_schedule.size(); ++i) {
    const long n = cfg.n_schedule[i];
    const double r = recovery_radius(cfg, i, cfg.n_schedule.size());
    const Eigen::VectorXd vals = seq.values(n, mesh);
    Eigen::Index best = -1;
    double best_err = kInf, best_dist = kInf;
    for (Eigen::Index j : mesh.ball(x, r)) {
      const double err = abs_diff(ExtReal(vals(j)), fx);
      const double dist = mesh.norm()(mesh.node(j) - x);
      if (best < 0 || err < best_err || (err == best_err && dist < best_dist)) {
        best = j;
        best_err = err;
        best_dist = dist;
      }
    }
    out.n.push_back(n);
    out.points.push_back(mesh.node(best));
    out.values.push_back(vals(best));
    out.radii.push_back(r);
    q = std::max(q, std::max(best_dist, best_err));
    trace.push_back(Json{{"n", n}, {"x_n", point_json(mesh.node(best))}, {"f_n(x_n)", json_number(vals(best))}});
  }
  out.verdict = decide_at_most(q, cfg.tol, Json{{"check", "recovery"}, {"f(x)", json_number(fx)}, {"trace", trace}});
  return out;
}

Verdict analytic_wijsman_verdict(const BallInfima& b, const std::vector<long>& window, const Verdict* recovery,
                                 double tol) {
  double q = -kInf;
  Json rows = Json::array();
  for (std::size_t k = 0; k < b.lambdas.size(); ++k) {
    ExtReal low = ExtReal::infinity();
    for (const ExtReal& v : b.sequence_inf[k]) low = min(low, v);
    const double e = excess(b.uniform_inf[k], low);
    q = std::max(q, e);
    rows.push_back(Json{{"lambda", b.lambdas[k]},
                        {"uniform_inf", json_number(b.uniform_inf[k])},
                        {"liminf_ball_inf", json_number(low)},
                        {"excess", json_number(e)}});
  }
  Json w{{"check", "wijsman_at_point"},
         {"window", Json{{"first", window.front()}, {"last", window.back()}}},
         {"max_verified_radius", b.lambdas.empty() ? 0.0 : *std::max_element(b.lambdas.begin(), b.lambdas.end())},
         {"lambdas", rows}};
  std::vector<Verdict> parts{decide_at_most(q, tol)};
  if (recovery) {
    parts.push_back(*recovery);
    w["recovery"] = Json{{"status", to_string(recovery->status)}, {"margin", json_number(recovery->margin)}};
  } else {
    w["recovery"] = "vacuous";
  }
  Verdict v = conjunction(parts, std::move(w));
  return v;
}

std::vector<double> lambda_ladder(const LimitConfig& cfg, double lambda_max, const Mesh* mesh) {
  std::vector<double> out{0.0};
  for (double r : cfg.radius_ladder) {
    if (!(r < lambda_max)) continue;
    const double l = mesh ? mesh->snap_radius(r) : r;
    if (l < lambda_max) out.push_back(l);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

Verdict wijsman_with_lambdas(const FunctionSequence& seq, const FunctionModel& f, const Point& x,
                             const std::vector<double>& lambdas, const Mesh& mesh, const LimitConfig& cfg) {
  cfg.validate();
  std::optional<Verdict> rec;
  if (f(x).is_finite()) rec = recovery_sequence(seq, f, x, mesh, cfg).verdict;
  const auto window = cfg.window();
  std::vector<Eigen::VectorXd> vals;
  vals.reserve(window.size());
  for (long n : window) vals.push_back(seq.values(n, mesh));
  BallInfima b;
  b.lambdas = lambdas;
  for (double lambda : lambdas) {
    b.uniform_inf.push_back(uniform_infimum(f, Region::ball(x, lambda, mesh.norm()), mesh, cfg));
    const auto nodes = mesh.ball(x, lambda);
    std::vector<ExtReal> row;
    for (const auto& v : vals) {
      double m = kInf;
      for (Eigen::Index j : nodes) m = std::min(m, v(j));
      row.push_back(ExtReal(m));
    }
    b.sequence_inf.push_back(std::move(row));
  }
  return analytic_wijsman_verdict(b, window, rec ? &*rec : nullptr, cfg.tol);
}

}  // namespace

Verdict wijsman_at_point(const FunctionSequence& seq, const FunctionModel& f, const Point& x, double lambda_max,
                         const Mesh& mesh, const LimitConfig& cfg) {
  if (!(lambda_max > 0.0)) throw std::invalid_argument("wijsman_at_point: lambda_max must be positive");
  return wijsman_with_lambdas(seq, f, x, lambda_ladder(cfg, lambda_max, &mesh), mesh, cfg);
}

Verdict epi_at_point(const FunctionSequence& seq, const FunctionModel& f, const Point& x, const Mesh& mesh,
                     const LimitConfig& cfg) {
  Verdict v = wijsman_with_lambdas(seq, f, x, {0.0}, mesh, cfg);
  v.witness["check"] = "epi_at_point";
  return v;
}

Verdict envelope_wijsman_at_point(const FunctionModel& f, const Point& x, double lambda_max, const LimitConfig& cfg) {
  cfg.validate();
  const ExceptionTable<double> t = exception_table(f, x);
  const ExtReal fx = f(x);
  const auto window = cfg.window();
  std::optional<Verdict> rec;
  if (fx.is_finite()) {
    double q = 0.0;
    Json trace = Json::array();
    for (long n : window) {
      const double fnx = std::min(fx.value(), envelope_inf(t, static_cast<double>(n), 0.0));
      q = std::max(q, std::abs(fnx - fx.value()));
      trace.push_back(Json{{"n", n}, {"f_n(x)", fnx}});
    }
    rec = decide_at_most(q, cfg.tol, Json{{"check", "recovery"}, {"x_n", "x"}, {"trace", trace}});
  }
  BallInfima b;
  b.lambdas = lambda_ladder(cfg, lambda_max, nullptr);
  for (double lambda : b.lambdas) {
    b.uniform_inf.push_back(ExtReal(uniform_infimum_ball(t, lambda, cfg.delta_ladder).value));
    std::vector<ExtReal> row;
    for (long n : window) row.push_back(ExtReal(envelope_inf(t, static_cast<double>(n), lambda)));
    b.sequence_inf.push_back(std::move(row));
  }
  return analytic_wijsman_verdict(b, window, rec ? &*rec : nullptr, cfg.tol);
}

std::vector<Eigen::VectorXd> default_directions(Eigen::Index dim, std::uint64_t seed, int random_count) {
  std::vector<Eigen::VectorXd> out{Eigen::VectorXd::Zero(dim)};
  for (Eigen::Index i = 0; i < dim; ++i) {
    out.push_back(Eigen::VectorXd::Unit(dim, i));
    out.push_back(-Eigen::VectorXd::Unit(dim, i));
  }
  std::mt19937_64 gen(seed);
  for (int k = 0; k < random_count; ++k) {
    Eigen::VectorXd v(dim);
    do {
      for (Eigen::Index i = 0; i < dim; ++i) v(i) = 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
    } while (v.norm() < 1e-3);
    v.normalize();
    for (double scale : {1.0, 4.0}) out.push_back(scale * v);
  }
  std::vector<Eigen::VectorXd> unique;
  for (auto& v : out)
    if (std::none_of(unique.begin(), unique.end(), [&](const Eigen::VectorXd& u) { return u == v; }))
      unique.push_back(v);
  return unique;
}

Verdict slice_at_point(const FunctionSequence& seq, const FunctionModel& f, const Point& x, double lambda_max,
                       const std::vector<Eigen::VectorXd>& directions, const Mesh& mesh, const LimitConfig& cfg) {
  if (directions.empty()) throw std::invalid_argument("slice_at_point: no directions");
  if (std::none_of(directions.begin(), directions.end(), [](const Eigen::VectorXd& d) { return d.isZero(0.0); }))
    throw std::invalid_argument("slice_at_point: the zero functional must be among the directions");
  std::vector<Verdict> parts;
  Json per_dir = Json::array();
  for (const auto& xs : directions) {
    if (xs.size() != f.dim()) throw DimensionMismatch("slice_at_point: direction dimension");
    const Verdict v = xs.isZero(0.0) ? wijsman_at_point(seq, f, x, lambda_max, mesh, cfg)
                                     : wijsman_at_point(tilted_sequence(seq, xs), tilt(f, xs), x, lambda_max, mesh, cfg);
    parts.push_back(v);
    per_dir.push_back(Json{{"direction", point_json(xs)},
                           {"status", to_string(v.status)},
                           {"margin", json_number(v.margin)}});
  }
  const auto lambdas = lambda_ladder(cfg, lambda_max, &mesh);
  return conjunction(parts, Json{{"check", "slice_at_point"},
                                 {"directions", per_dir},
                                 {"direction_set", "finite sample of the dual space"},
                                 {"max_verified_radius", lambdas.back()}});
}

ExtReal graph_epi_gap(const FunctionModel& g, const FunctionModel& h, const Mesh& mesh) {
  const Eigen::VectorXd gv = tabulate(g, mesh);
  const Eigen::VectorXd hv = tabulate(h, mesh);
  double best = kInf;
  for (Eigen::Index x = 0; x < mesh.node_count(); ++x) {
    if (gv(x) == kInf) continue;
    for (Eigen::Index y = 0; y < mesh.node_count(); ++y) {
      if (hv(y) == kInf) continue;
      const double d = std::max(mesh.norm()(mesh.node(x) - mesh.node(y)), std::max(0.0, hv(y) - gv(x)));
      best = std::min(best, d);
    }
  }
  return ExtReal(best);
}

TiltGapPair tilt_gap_pair(const FunctionModel& f, const FunctionModel& g, const Eigen::VectorXd& xstar,
                          const Mesh& mesh, double tol) {
  TiltGapPair out;
  out.plain = graph_epi_gap(g, tilt(f, -xstar), mesh);
  out.tilted = graph_epi_gap(tilt(g, xstar), f, mesh);
  out.tol_plain = tol;
  out.tol_tilted = tol / (1.0 + mesh.norm().dual(xstar));
  return out;
}

Verdict tilt_gap_invariance(const TiltGapPair& pair, double dual_norm) {
  const double c = 1.0 + dual_norm;
  const bool plain_pos = pair.plain > ExtReal(pair.tol_plain);
  const bool tilted_pos = pair.tilted > ExtReal(pair.tol_tilted);
  Json w{{"check", "tilt_gap_invariance"},
         {"plain_gap", json_number(pair.plain)},
         {"tilted_gap", json_number(pair.tilted)},
         {"tol_plain", pair.tol_plain},
         {"tol_tilted", pair.tol_tilted},
         {"plain_positive", plain_pos},
         {"tilted_positive", tilted_pos}};
  auto bound_ok = [c](ExtReal a, ExtReal b) {
    if (a.is_infinite()) return b.is_infinite();
    if (b.is_infinite()) return true;
    return b.value() >= a.value() / c - 1e-12;
  };
  Verdict v;
  v.witness = std::move(w);
  v.margin = plain_pos == tilted_pos ? 0.0 : 1.0;
  if (!bound_ok(pair.plain, pair.tilted) || !bound_ok(pair.tilted, pair.plain)) v.status = Status::Fails;
  else if (plain_pos == tilted_pos) v.status = Status::Holds;
  else v.status = Status::Inconclusive;
  return v;
}

}  // namespace varan
