#include "varan/slopes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace varan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Json point_json(const Eigen::Ref<const Eigen::VectorXd>& p) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p(i));
  return a;
}

Eigen::Index require_node(const Mesh& mesh, const Point& x, const char* who) {
  const auto idx = mesh.find_node(x);
  if (!idx) throw std::invalid_argument(std::string(who) + ": point is not a mesh node");
  return *idx;
}

std::vector<Eigen::Index> nodes_within(const Mesh& mesh, Eigen::Index center, double r) {
  if (r == kInf) {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(mesh.node_count()));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    return all;
  }
  return mesh.ball(mesh.node(center), r);
}

double node_dist(const Mesh& mesh, Eigen::Index a, Eigen::Index b) { return mesh.norm()(mesh.node(a) - mesh.node(b)); }

double ball_min(const Eigen::VectorXd& v, const Mesh& mesh, Eigen::Index center, double r) {
  double m = kInf;
  for (Eigen::Index j : mesh.ball(mesh.node(center), r)) m = std::min(m, v(j));
  return m;
}

// Largest half-node offset not above r; 0 when r is below half a spacing.
double snap_down(double r, const Mesh& mesh) {
  const double h = mesh.resolution();
  if (r < 0.5 * h) return 0.0;
  return (std::floor(r / h - 0.5) + 0.5) * h;
}

Eigen::Index closest_value_node(const Eigen::VectorXd& v, const Mesh& mesh, Eigen::Index center, double target,
                                double r) {
  Eigen::Index best = center;
  double best_err = kInf, best_dist = kInf;
  for (Eigen::Index j : mesh.ball(mesh.node(center), r)) {
    const double err = v(j) == kInf ? kInf : std::abs(v(j) - target);
    const double d = node_dist(mesh, j, center);
    if (err < best_err || (err == best_err && d < best_dist)) {
      best = j;
      best_err = err;
      best_dist = d;
    }
  }
  return best;
}

// One instance of the epsilon-claim: from x_n near x, an Ekeland point of
// f_n inside B_mu(x_n) with slope at most sigma + 3 eps.
struct Claim {
  bool ok = false;
  double lambda = 0.0;
  double mu_raw = 0.0;
  double mu = 0.0;
};

double claim_lambda(const Eigen::VectorXd& fv, const Mesh& mesh, Eigen::Index x, double sigma, double eps,
                    const std::vector<double>& rungs) {
  for (double r : rungs) {  // decreasing
    if (!(r < eps)) continue;
    if (fv(x) < ball_min(fv, mesh, x, r) + (sigma + eps) * r) return r;
  }
  return 0.0;
}

Claim check_claim(const Eigen::VectorXd& fv, const Eigen::VectorXd& fnv, const Mesh& mesh, Eigen::Index x,
                  Eigen::Index xn, double sigma, double eps, double lambda) {
  Claim c;
  if (lambda <= 0.0 || fnv(xn) == kInf) return c;
  c.lambda = lambda;
  c.mu_raw = (sigma + 2 * eps) / (sigma + 3 * eps) * lambda;
  c.mu = snap_down(c.mu_raw, mesh);
  c.ok = c.mu > 0.0 && node_dist(mesh, xn, x) + c.mu <= lambda && fnv(xn) < fv(x) + lambda * eps &&
         fnv(xn) < ball_min(fnv, mesh, xn, c.mu) + (sigma + 3 * eps) * c.mu;
  return c;
}

void check_options(const StabilityOptions& opt) {
  if (!(opt.lambda_x > 0.0)) throw std::invalid_argument("StabilityOptions: lambda_x must be positive");
  if (opt.k_max < 1) throw std::invalid_argument("StabilityOptions: k_max must be >= 1");
}

Verdict witness_verdict(const StabilityWitness& w, const Mesh& mesh, const Point& target_point, bool use_point,
                        const LimitConfig& cfg, Json extra) {
  double q = -kInf;
  for (std::size_t i = cfg.window_start(); i < w.n.size(); ++i) {
    q = std::max(q, excess(w.slopes[i], ExtReal(w.slope_at_limit)));
    q = std::max(q, std::abs(w.values[i] - w.target_value));
    if (use_point) q = std::max(q, mesh.norm()(w.points[i] - target_point));
  }
  extra["slope_at_limit"] = w.slope_at_limit;
  extra["limsup_bound"] = w.limsup_bound;
  extra["suffix_max_slope"] = json_number(w.suffix_max_slope(cfg));
  return decide_at_most(q, cfg.tol, std::move(extra));
}

}  // namespace

std::vector<double> slope_rungs(const LimitConfig& cfg, const Mesh& mesh) {
  std::vector<double> out;
  for (double r : cfg.radius_ladder)
    if (r >= mesh.resolution() * (1 - 1e-12)) out.push_back(r);
  if (out.empty()) throw std::invalid_argument("strong_slope: every radius rung is below the mesh spacing");
  return out;
}

SlopeEstimate strong_slope(const Eigen::VectorXd& values, const Mesh& mesh, Eigen::Index node,
                           const std::vector<double>& rungs) {
  if (values(node) == kInf) throw std::invalid_argument("strong_slope: f(x) = +inf");
  if (rungs.empty()) throw std::invalid_argument("strong_slope: no radius rungs");
  std::vector<std::pair<double, double>> ratios;  // (distance, ratio)
  for (Eigen::Index j : mesh.ball(mesh.node(node), rungs.front())) {
    if (j == node) continue;
    const double d = node_dist(mesh, j, node);
    const double drop = values(j) == kInf ? 0.0 : std::max(0.0, values(node) - values(j));
    ratios.emplace_back(d, drop / d);
  }
  std::sort(ratios.begin(), ratios.end());
  SlopeEstimate out;
  std::vector<double> prefix(ratios.size());
  double run = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) prefix[i] = run = std::max(run, ratios[i].second);
  for (double r : rungs) {
    const auto end = std::upper_bound(ratios.begin(), ratios.end(), std::make_pair(r, kInf));
    const std::size_t count = static_cast<std::size_t>(end - ratios.begin());
    const double sup = count == 0 ? 0.0 : prefix[count - 1];
    if (!out.ratio_trace.empty() && sup > out.ratio_trace.back().second)
      throw std::logic_error("strong_slope: ratio trace increased as the radius shrank");
    out.ratio_trace.emplace_back(r, sup);
  }
  out.radius_used = out.ratio_trace.back().first;
  out.value = ExtReal(out.ratio_trace.back().second);
  return out;
}

SlopeEstimate strong_slope(const FunctionModel& f, const Point& x, const Mesh& mesh, const LimitConfig& cfg) {
  const Eigen::Index node = require_node(mesh, x, "strong_slope");
  return strong_slope(tabulate(f, mesh), mesh, node, slope_rungs(cfg, mesh));
}

EkelandPoint ekeland_point(const Eigen::VectorXd& values, const Mesh& mesh, Eigen::Index start, double sigma,
                           double radius) {
  if (!(sigma > 0.0)) throw std::invalid_argument("ekeland_point: sigma must be positive");
  if (!(radius >= 0.0)) throw std::invalid_argument("ekeland_point: radius must be >= 0");
  if (values(start) == kInf) throw std::invalid_argument("ekeland_point: f(x0) = +inf");
  const auto ball = nodes_within(mesh, start, radius);
  for (Eigen::Index j : ball)
    if (std::isnan(values(j)) || values(j) == -kInf) throw std::invalid_argument("ekeland_point: f unbounded below");
  EkelandPoint out;
  Eigen::Index z = start;
  while (true) {
    Eigen::Index best = z;
    double best_val = values(z);
    for (Eigen::Index y : ball) {
      if (y == z || values(y) == kInf) continue;
      const double v = values(y) + sigma * node_dist(mesh, y, z);
      if (v < best_val) {
        best = y;
        best_val = v;
      }
    }
    if (best == z) break;
    z = best;
    ++out.moves;
  }
  for (Eigen::Index y : ball)
    if (values(y) != kInf && values(z) > values(y) + sigma * node_dist(mesh, y, z))
      throw std::logic_error("ekeland_point: fixpoint condition violated");
  out.node = z;
  out.point = mesh.node(z);
  out.value = values(z);
  return out;
}

EkelandPoint ekeland_point(const FunctionModel& f, const Point& x0, double sigma, double radius, const Mesh& mesh) {
  return ekeland_point(tabulate(f, mesh), mesh, require_node(mesh, x0, "ekeland_point"), sigma, radius);
}

double StabilityWitness::suffix_max_slope(const LimitConfig& cfg) const {
  double m = 0.0;
  for (std::size_t i = std::min(cfg.window_start(), slopes.size()); i < slopes.size(); ++i) m = std::max(m, slopes[i].raw());
  return m;
}

StabilityWitness slope_stability_witness(const FunctionSequence& seq, const FunctionModel& f, const Point& x,
                                         const Mesh& mesh, const LimitConfig& cfg, const StabilityOptions& opt) {
  cfg.validate();
  check_options(opt);
  const Eigen::Index xn = require_node(mesh, x, "slope_stability_witness");
  const Eigen::VectorXd fv = tabulate(f, mesh);
  if (fv(xn) == kInf) throw std::invalid_argument("slope_stability_witness: f(x) = +inf");
  const Verdict pre = wijsman_at_point(seq, f, x, opt.lambda_x, mesh, cfg);
  if (pre.fails()) throw PreconditionFailed("slope_stability_witness: sequence is not Wijsman convergent at x", pre);

  const auto rungs = slope_rungs(cfg, mesh);
  const double sigma = strong_slope(fv, mesh, xn, rungs).value.raw();
  const std::size_t count = cfg.n_schedule.size();
  std::vector<Eigen::VectorXd> fnv;
  std::vector<Eigen::Index> recov;
  for (std::size_t i = 0; i < count; ++i) {
    fnv.push_back(seq.values(cfg.n_schedule[i], mesh));
    recov.push_back(closest_value_node(fnv.back(), mesh, xn, fv(xn), recovery_radius(cfg, i, count)));
  }

  // N_k per epsilon = 1/k, pushed up so that N_k increases strictly with k
  struct Level {
    int k;
    std::size_t start;
    double lambda;
  };
  std::vector<Level> levels;
  Json snaps = Json::array();
  const int k_first = static_cast<int>(std::floor(1.0 / opt.lambda_x)) + 1;
  for (int k = k_first; k <= opt.k_max; ++k) {
    const double eps = 1.0 / k;
    const double lambda = claim_lambda(fv, mesh, xn, sigma, eps, rungs);
    if (lambda <= 0.0) continue;
    std::size_t nk = count;
    for (std::size_t i = count; i-- > 0;) {
      if (!check_claim(fv, fnv[i], mesh, xn, recov[i], sigma, eps, lambda).ok) break;
      nk = i;
    }
    if (nk == count) continue;
    const std::size_t start = levels.empty() ? nk : std::max(nk, levels.back().start + 1);
    if (start >= count) break;
    levels.push_back({k, start, lambda});
    const Claim c = check_claim(fv, fnv[start], mesh, xn, recov[start], sigma, eps, lambda);
    snaps.push_back(Json{{"k", k}, {"first_n", cfg.n_schedule[start]}, {"lambda", lambda}, {"mu", c.mu_raw},
                         {"mu_snapped", c.mu}});
  }

  StabilityWitness w;
  w.target_value = fv(xn);
  w.slope_at_limit = sigma;
  w.limsup_bound = sigma + cfg.tol;
  std::size_t li = 0;
  for (std::size_t i = 0; i < count; ++i) {
    while (li < levels.size() && levels[li].start <= i) ++li;
    Eigen::Index node = recov[i];
    int k = 0;
    if (li > 0) {
      const Level& lv = levels[li - 1];
      const double eps = 1.0 / lv.k;
      const Claim c = check_claim(fv, fnv[i], mesh, xn, recov[i], sigma, eps, lv.lambda);
      if (!c.ok) throw std::logic_error("slope_stability_witness: claim lost after N_k");
      node = ekeland_point(fnv[i], mesh, recov[i], sigma + 3 * eps, c.mu).node;
      k = lv.k;
    }
    w.n.push_back(cfg.n_schedule[i]);
    w.points.push_back(mesh.node(node));
    w.values.push_back(fnv[i](node));
    w.slopes.push_back(strong_slope(fnv[i], mesh, node, rungs).value);
    w.level.push_back(k);
  }
  w.verdict = witness_verdict(w, mesh, x, true, cfg,
                              Json{{"check", "slope_stability"},
                                   {"wijsman_precondition", to_string(pre.status)},
                                   {"levels", snaps}});
  return w;
}

StabilityWitness stationary_sequence(const FunctionSequence& seq, const FunctionModel& f, const Mesh& mesh,
                                     const LimitConfig& cfg, const StabilityOptions& opt) {
  cfg.validate();
  check_options(opt);
  const Eigen::VectorXd fv = tabulate(f, mesh);
  Eigen::Index argmin = 0;
  const double low = fv.minCoeff(&argmin);
  if (low == kInf) throw std::invalid_argument("stationary_sequence: f is +inf on every node");
  const Verdict pre = wijsman_at_point(seq, f, mesh.node(argmin), opt.lambda_x, mesh, cfg);
  if (pre.fails()) throw PreconditionFailed("stationary_sequence: sequence is not Wijsman convergent at the minimizer", pre);

  const auto rungs = slope_rungs(cfg, mesh);
  const std::size_t count = cfg.n_schedule.size();
  StabilityWitness w;
  w.target_value = low;
  w.slope_at_limit = 0.0;
  w.limsup_bound = cfg.tol;
  Json steps = Json::array();
  for (std::size_t i = 0; i < count; ++i) {
    const long n = cfg.n_schedule[i];
    const double nn = static_cast<double>(n);
    const Eigen::VectorXd fnv = seq.values(n, mesh);
    Eigen::Index y = 0;
    while (!(fv(y) <= low + 1.0 / (nn * nn))) ++y;
    const Eigen::Index z = ekeland_point(fv, mesh, y, 1.0 / nn, kInf).node;
    const double sz = strong_slope(fv, mesh, z, rungs).value.raw();
    const Eigen::Index start = closest_value_node(fnv, mesh, z, fv(z), recovery_radius(cfg, i, count));
    Eigen::Index node = start;
    int level = 0;
    for (int k = opt.k_max; k >= 1; --k) {
      const double eps = 1.0 / k;
      const double lambda = claim_lambda(fv, mesh, z, sz, eps, rungs);
      const Claim c = check_claim(fv, fnv, mesh, z, start, sz, eps, lambda);
      if (!c.ok) continue;
      node = ekeland_point(fnv, mesh, start, sz + 3 * eps, c.mu).node;
      level = k;
      break;
    }
    w.n.push_back(n);
    w.points.push_back(mesh.node(node));
    w.values.push_back(fnv(node));
    w.slopes.push_back(strong_slope(fnv, mesh, node, rungs).value);
    w.level.push_back(level);
    steps.push_back(Json{{"n", n}, {"y_n", point_json(mesh.node(y))}, {"z_n", point_json(mesh.node(z))},
                         {"slope_f_z_n", sz}});
  }
  w.verdict = witness_verdict(w, mesh, Point(), false, cfg,
                              Json{{"check", "stationary_sequence"},
                                   {"wijsman_precondition", to_string(pre.status)},
                                   {"node_min", low},
                                   {"steps", steps}});
  return w;
}

Json to_json(const StabilityWitness& w) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < w.n.size(); ++i)
    rows.push_back(Json{{"n", w.n[i]},
                        {"x_n", point_json(w.points[i])},
                        {"f_n(x_n)", json_number(w.values[i])},
                        {"slope_n", json_number(w.slopes[i])}});
  Json j;
  j["witness"] = rows;
  j["limsup_bound"] = w.limsup_bound;
  j["verdict"] = to_json(w.verdict);
  return j;
}

std::string to_csv(const StabilityWitness& w) {
  std::ostringstream os;
  os.precision(17);
  const Eigen::Index d = w.points.empty() ? 0 : w.points.front().size();
  os << "n";
  for (Eigen::Index a = 0; a < d; ++a) os << ",x" << a;
  os << ",value,slope\n";
  for (std::size_t i = 0; i < w.n.size(); ++i) {
    os << w.n[i];
    for (Eigen::Index a = 0; a < d; ++a) os << ',' << w.points[i](a);
    os << ',' << w.values[i] << ',' << w.slopes[i] << '\n';
  }
  return os.str();
}

std::string to_csv(const SlopeEstimate& s) {
  std::ostringstream os;
  os.precision(17);
  os << "radius,sup_ratio\n";
  for (const auto& [r, v] : s.ratio_trace) os << r << ',' << v << '\n';
  return os.str();
}

Verdict frechet_quotient_form(const FunctionModel& f, const Point& x, const Eigen::VectorXd& xstar, const Mesh& mesh,
                              const LimitConfig& cfg) {
  const Eigen::Index node = require_node(mesh, x, "frechet_quotient_form");
  const Eigen::VectorXd fv = tabulate(f, mesh);
  if (fv(node) == kInf) throw std::invalid_argument("frechet_quotient_form: f(x) = +inf");
  const double r = slope_rungs(cfg, mesh).back();
  double low = kInf;
  for (Eigen::Index j : mesh.ball(x, r)) {
    if (j == node || fv(j) == kInf) continue;
    const Eigen::VectorXd step = mesh.node(j) - x;
    low = std::min(low, (fv(j) - fv(node) - xstar.dot(step)) / mesh.norm()(step));
  }
  return decide_at_most(low == kInf ? 0.0 : std::max(0.0, -low), cfg.tol,
                        Json{{"check", "frechet_quotient_form"}, {"radius", r}, {"liminf_quotient", json_number(low)}});
}

Verdict frechet_membership(const FunctionModel& f, const Point& x, const Eigen::VectorXd& xstar, const Mesh& mesh,
                           const LimitConfig& cfg) {
  if (xstar.size() != f.dim()) throw DimensionMismatch("frechet_membership: functional dimension");
  const SlopeEstimate s = strong_slope(tilt(f, -xstar), x, mesh, cfg);
  const Verdict quotient = frechet_quotient_form(f, x, xstar, mesh, cfg);
  Verdict v = decide_at_most(s.value.raw(), cfg.tol,
                             Json{{"check", "frechet_membership"},
                                  {"xstar", point_json(xstar)},
                                  {"tilted_slope", json_number(s.value)},
                                  {"radius", s.radius_used},
                                  {"quotient_form", to_json(quotient)}});
  if (v.status != quotient.status) throw std::logic_error("frechet_membership: slope and quotient forms disagree");
  return v;
}

// ---- subdifferential oracles ------------------------------------------------

SubdifferentialOracle gradient_oracle(std::function<Eigen::VectorXd(const Point&)> gradient) {
  return {"smooth-gradient", [gradient](const Point& x) { return std::vector<Eigen::VectorXd>{gradient(x)}; }};
}

SubdifferentialOracle convex_oracle(std::function<std::vector<Eigen::VectorXd>(const Point&)> extreme_points) {
  return {"analytic-convex", std::move(extreme_points)};
}

SubdifferentialOracle linear_oracle(Eigen::VectorXd c) {
  return {"analytic-convex", [c](const Point&) { return std::vector<Eigen::VectorXd>{c}; }};
}

SubdifferentialOracle zero_oracle(Eigen::Index dim) { return linear_oracle(Eigen::VectorXd::Zero(dim)); }

SubdifferentialOracle distance_oracle(double scale, Point center) {
  if (!(scale >= 0.0)) throw std::invalid_argument("distance_oracle: scale must be >= 0");
  return {"analytic-convex", [scale, center](const Point& x) {
            const Eigen::VectorXd d = x - center;
            const double len = d.norm();
            if (len > 0.0) return std::vector<Eigen::VectorXd>{scale * d / len};
            std::vector<Eigen::VectorXd> out;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
              out.push_back(scale * Eigen::VectorXd::Unit(x.size(), i));
              out.push_back(-scale * Eigen::VectorXd::Unit(x.size(), i));
            }
            return out;
          }};
}

SubdifferentialOracle frechet_oracle(const FunctionModel& f, const Mesh& mesh) {
  if (mesh.dim() != 1) throw std::invalid_argument("frechet_oracle: one-dimensional meshes only");
  auto values = std::make_shared<const Eigen::VectorXd>(tabulate(f, mesh));
  return {"frechet-sampled", [values, mesh](const Point& x) {
            const auto idx = mesh.find_node(x);
            if (!idx) throw std::invalid_argument("frechet_oracle: point is not a mesh node");
            const Eigen::VectorXd& v = *values;
            const Eigen::Index j = *idx;
            std::vector<Eigen::VectorXd> out;
            if (v(j) == kInf) return out;
            double lo = -kInf, hi = kInf;
            if (j > 0 && v(j - 1) != kInf) lo = (v(j) - v(j - 1)) / (mesh.node(j)(0) - mesh.node(j - 1)(0));
            if (j + 1 < mesh.node_count() && v(j + 1) != kInf)
              hi = (v(j + 1) - v(j)) / (mesh.node(j + 1)(0) - mesh.node(j)(0));
            if (lo > hi) return out;
            if (lo == -kInf && hi == kInf) {
              out.push_back(Eigen::VectorXd::Zero(1));  // isolated point of the domain: all of R, sample 0
              return out;
            }
            if (lo != -kInf) out.push_back(Eigen::VectorXd::Constant(1, lo));
            if (hi != kInf && hi != lo) out.push_back(Eigen::VectorXd::Constant(1, hi));
            return out;
          }};
}

namespace {

// Convex weights of the Euclidean min-norm point of conv(pts), by Wolfe's
// active-set method.
Eigen::VectorXd min_norm_weights(const std::vector<Eigen::VectorXd>& pts) {
  const auto m = static_cast<Eigen::Index>(pts.size());
  double scale = 0.0;
  Eigen::Index first = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    scale = std::max(scale, pts[static_cast<std::size_t>(i)].squaredNorm());
    if (pts[static_cast<std::size_t>(i)].squaredNorm() < pts[static_cast<std::size_t>(first)].squaredNorm()) first = i;
  }
  const double eps = 1e-12 * std::max(scale, 1.0);
  std::vector<Eigen::Index> active{first};
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(m);
  weight(first) = 1.0;
  auto point_of = [&](const Eigen::VectorXd& wt) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(pts.front().size());
    for (Eigen::Index i : active) x += wt(i) * pts[static_cast<std::size_t>(i)];
    return x;
  };
  for (int major = 0; major < 1000; ++major) {
    const Eigen::VectorXd x = point_of(weight);
    Eigen::Index j = 0;
    for (Eigen::Index i = 1; i < m; ++i)
      if (x.dot(pts[static_cast<std::size_t>(i)]) < x.dot(pts[static_cast<std::size_t>(j)])) j = i;
    if (x.dot(pts[static_cast<std::size_t>(j)]) >= x.squaredNorm() - eps) break;
    if (std::find(active.begin(), active.end(), j) != active.end()) break;
    active.push_back(j);
    for (int minor = 0; minor < 1000; ++minor) {
      // affine min-norm point over the active set
      const auto s = static_cast<Eigen::Index>(active.size());
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(s + 1, s + 1);
      for (Eigen::Index a = 0; a < s; ++a) {
        for (Eigen::Index b = 0; b < s; ++b)
          kkt(a, b) = pts[static_cast<std::size_t>(active[a])].dot(pts[static_cast<std::size_t>(active[b])]);
        kkt(a, s) = kkt(s, a) = 1.0;
      }
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
      rhs(s) = 1.0;
      const Eigen::VectorXd alpha = kkt.completeOrthogonalDecomposition().solve(rhs).head(s);
      if ((alpha.array() > 1e-14).all()) {
        weight.setZero();
        for (Eigen::Index a = 0; a < s; ++a) weight(active[a]) = alpha(a);
        break;
      }
      double theta = 1.0;
      for (Eigen::Index a = 0; a < s; ++a)
        if (alpha(a) <= 1e-14) theta = std::min(theta, weight(active[a]) / (weight(active[a]) - alpha(a)));
      std::vector<Eigen::Index> kept;
      for (Eigen::Index a = 0; a < s; ++a) {
        const double v = theta * alpha(a) + (1 - theta) * weight(active[a]);
        weight(active[a]) = v;
        if (v > 1e-14) kept.push_back(active[a]);
        else weight(active[a]) = 0.0;
      }
      active = kept;
      if (active.empty()) {
        weight(j) = 1.0;
        active.push_back(j);
      }
    }
  }
  return weight / weight.sum();
}

}  // namespace

SumChoice closest_sum(const std::vector<Eigen::VectorXd>& as, const std::vector<Eigen::VectorXd>& bs, const Norm& norm) {
  SumChoice out;
  out.norm = kInf;
  if (as.empty() || bs.empty()) return out;
  const Eigen::Index d = as.front().size();
  if (d == 1) {
    double amin = kInf, amax = -kInf, bmin = kInf, bmax = -kInf;
    for (const auto& a : as) amin = std::min(amin, a(0)), amax = std::max(amax, a(0));
    for (const auto& b : bs) bmin = std::min(bmin, b(0)), bmax = std::max(bmax, b(0));
    const double t = std::clamp(0.0, amin + bmin, amax + bmax);
    const double a = std::clamp(t - bmax, amin, amax);
    out.xstar = Eigen::VectorXd::Constant(1, a);
    out.ystar = Eigen::VectorXd::Constant(1, t - a);
    out.norm = norm.dual(out.xstar + out.ystar);
    return out;
  }
  for (const auto& a : as)
    for (const auto& b : bs) {
      const double v = norm.dual(a + b);
      if (v < out.norm) out = {a, b, v};
    }
  std::vector<Eigen::VectorXd> sums;
  for (const auto& a : as)
    for (const auto& b : bs) sums.push_back(a + b);
  const Eigen::VectorXd w = min_norm_weights(sums);
  Eigen::VectorXd xa = Eigen::VectorXd::Zero(d), xb = Eigen::VectorXd::Zero(d);
  for (std::size_t i = 0; i < as.size(); ++i)
    for (std::size_t j = 0; j < bs.size(); ++j) {
      const double wij = w(static_cast<Eigen::Index>(i * bs.size() + j));
      xa += wij * as[i];
      xb += wij * bs[j];
    }
  const double v = norm.dual(xa + xb);
  if (v < out.norm) out = {xa, xb, v};
  return out;
}

namespace {

struct PairSearch {
  SumChoice best;
  Eigen::Index x = -1, y = -1;
};

PairSearch search_pairs(const Eigen::VectorXd& fv, const SubdifferentialOracle& df, const SubdifferentialOracle& dphi,
                        const Mesh& mesh, Eigen::Index center, double r, double value_slack) {
  PairSearch out;
  out.best.norm = kInf;
  const auto ball = mesh.ball(mesh.node(center), r);
  std::map<Eigen::Index, std::vector<Eigen::VectorXd>> phi_sub;
  for (Eigen::Index y : ball) phi_sub[y] = dphi(mesh.node(y));
  for (Eigen::Index x : ball) {
    if (fv(x) == kInf || std::abs(fv(x) - fv(center)) > value_slack) continue;
    const auto fx = df(mesh.node(x));
    for (Eigen::Index y : ball) {
      const SumChoice c = closest_sum(fx, phi_sub[y], mesh.norm());
      if (c.norm < out.best.norm) {
        out.best = c;
        out.x = x;
        out.y = y;
      }
    }
  }
  return out;
}

Json pair_json(long n, const PairSearch& p, const Mesh& mesh) {
  Json j{{"n", n}, {"norm", json_number(p.best.norm)}};
  if (p.x >= 0) {
    j["x_n"] = point_json(mesh.node(p.x));
    j["y_n"] = point_json(mesh.node(p.y));
    j["xstar"] = point_json(p.best.xstar);
    j["ystar"] = point_json(p.best.ystar);
  }
  return j;
}

void require_oracle(const SubdifferentialOracle& o, const char* who) {
  if (!o.at) throw std::invalid_argument(std::string(who) + ": missing subdifferential oracle");
}

}  // namespace

Verdict p2_witness(const FunctionModel& f, const SubdifferentialOracle& df, const FunctionModel& phi,
                   const SubdifferentialOracle& dphi, const Point& z, const Mesh& mesh, const LimitConfig& cfg) {
  cfg.validate();
  require_oracle(df, "p2_witness");
  require_oracle(dphi, "p2_witness");
  if (!phi.lipschitz_hint()) throw std::invalid_argument("p2_witness: phi needs a Lipschitz hint");
  const Eigen::Index zn = require_node(mesh, z, "p2_witness");
  const Eigen::VectorXd fv = tabulate(f, mesh);
  if (fv(zn) == kInf) throw std::invalid_argument("p2_witness: f(z) = +inf");
  const double slope = strong_slope(tabulate(sum(f, phi), mesh), mesh, zn, slope_rungs(cfg, mesh)).value.raw();
  double q = -kInf;
  Json rows = Json::array();
  const std::size_t count = cfg.n_schedule.size();
  for (std::size_t i = cfg.window_start(); i < count; ++i) {
    const double r = recovery_radius(cfg, i, count);
    const PairSearch p = search_pairs(fv, df, dphi, mesh, zn, r, r);
    q = std::max(q, p.best.norm - slope);
    rows.push_back(pair_json(cfg.n_schedule[i], p, mesh));
  }
  return decide_at_most(q, cfg.tol,
                        Json{{"check", "p2_witness"},
                             {"oracles", Json::array({df.provenance, dphi.provenance})},
                             {"slope_sum", slope},
                             {"pairs", rows}});
}

P2Sequence sequence_p2_pairs(const FunctionSequence& f_seq, const OracleSequence& df, const FunctionSequence& phi_seq,
                             const OracleSequence& dphi, const FunctionModel& f, const Point& z, const Mesh& mesh,
                             const LimitConfig& cfg, const StabilityOptions& opt) {
  if (!df || !dphi) throw std::invalid_argument("sequence_p2_stability: missing oracle sequence");
  const StabilityWitness w = slope_stability_witness(sum_sequence(f_seq, phi_seq), f, z, mesh, cfg, opt);
  P2Sequence out;
  out.slope_at_limit = w.slope_at_limit;
  double q = -kInf;
  Json rows = Json::array();
  for (std::size_t i = cfg.window_start(); i < w.n.size(); ++i) {
    const long n = w.n[i];
    const Eigen::Index zn = require_node(mesh, w.points[i], "sequence_p2_stability");
    const Eigen::VectorXd fnv = f_seq.values(n, mesh);
    const double slack = 1.0 / static_cast<double>(n);
    const SubdifferentialOracle dfn = df(n), dphin = dphi(n);
    require_oracle(dfn, "sequence_p2_stability");
    require_oracle(dphin, "sequence_p2_stability");
    const PairSearch p = search_pairs(fnv, dfn, dphin, mesh, zn, slack, slack);
    q = std::max(q, p.best.norm - w.slope_at_limit);
    Json row = pair_json(n, p, mesh);
    row["z_n"] = point_json(w.points[i]);
    row["slope_sum_at_z_n"] = json_number(w.slopes[i]);
    rows.push_back(std::move(row));
    P2Pair pair;
    pair.n = n;
    pair.anchor = w.points[i];
    pair.norm = p.best.norm;
    if (p.x >= 0) {
      pair.x = mesh.node(p.x);
      pair.y = mesh.node(p.y);
      pair.xstar = p.best.xstar;
      pair.ystar = p.best.ystar;
    }
    out.pairs.push_back(std::move(pair));
  }
  out.verdict = decide_at_most(q, cfg.tol,
                               Json{{"check", "sequence_p2_stability"},
                                    {"slope_at_limit", w.slope_at_limit},
                                    {"stability", Json{{"status", to_string(w.verdict.status)},
                                                       {"margin", json_number(w.verdict.margin)}}},
                                    {"pairs", rows}});
  return out;
}

Verdict sequence_p2_stability(const FunctionSequence& f_seq, const OracleSequence& df, const FunctionSequence& phi_seq,
                              const OracleSequence& dphi, const FunctionModel& f, const Point& z, const Mesh& mesh,
                              const LimitConfig& cfg, const StabilityOptions& opt) {
  return sequence_p2_pairs(f_seq, df, phi_seq, dphi, f, z, mesh, cfg, opt).verdict;
}

}  // namespace varan
