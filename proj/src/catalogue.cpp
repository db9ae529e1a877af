#include "varan/catalogue.hpp"

#include "varan/uniform_infimum.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace varan {

namespace {

using Fn = std::function<double(double)>;

Box unit_box() { return Box{Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0)}; }
Point pt(double x) { return Eigen::VectorXd::Constant(1, x); }

FunctionModel line_model(std::string name, Fn fn, std::optional<double> lip = std::nullopt, Box box = unit_box()) {
  return FunctionModel::analytic(
      std::move(name), std::move(box), [fn](const Eigen::Ref<const Eigen::VectorXd>& x) { return ExtReal(fn(x(0))); },
      Norm::euclidean(), lip);
}

FunctionModel jump_model() {
  return line_model("jump", [](double x) { return x > 0 ? 1.0 : 0.0; });
}

FunctionModel spike_model() { return indicator(Region::singleton(pt(0)), unit_box()).renamed("spike"); }

// 0 on the nodes of one parity of the grid with `cells` cells on [-1, 1], `other` elsewhere
FunctionModel parity_model(std::string name, long cells, bool odd, ExtReal other) {
  return FunctionModel::analytic(std::move(name), unit_box(), [cells, odd, other](const Eigen::Ref<const Eigen::VectorXd>& x) {
    const long j = std::lround((x(0) + 1) * static_cast<double>(cells) / 2);
    return ((j % 2) == 1) == odd ? ExtReal(0.0) : other;
  });
}

SubdifferentialOracle quadratic_oracle(double scale, double center) {
  return gradient_oracle([scale, center](const Point& x) { return Eigen::VectorXd(2 * scale * (x.array() - center)); });
}

Instance base(std::string name, FunctionModel f, double x, const InstanceParams& p) {
  Instance in{std::move(name), std::move(f)};
  in.point = pt(x);
  in.xstar = Eigen::VectorXd::Zero(1);
  in.resolution = p.resolution;
  return in;
}

Instance decoupling(std::string name, std::vector<FunctionModel> parts, const InstanceParams& p,
                    std::vector<SubdifferentialOracle> oracles = {}) {
  FunctionModel zero = line_model("zero", [](double) { return 0.0; });
  Instance in = base(std::move(name), zero, 0.0, p);
  in.components = std::move(parts);
  in.component_oracles = std::move(oracles);
  return in;
}

long parity_cells(const InstanceParams& p) { return std::lround(2.0 / p.resolution); }

std::vector<CatalogueEntry> build_catalogue() {
  std::vector<CatalogueEntry> c;
  auto add = [&c](std::string name, std::string role, std::vector<std::string> tags, std::string description,
                  double h, std::function<Instance(const InstanceParams&)> build) {
    c.push_back({std::move(name), std::move(role), std::move(tags), std::move(description), h, std::move(build)});
  };

  add("quadratic-at-origin", "smooth baseline", {"penalty", "slope", "frechet", "wijsman"},
      "x^2 on [-1, 1] at 0, constraint set {0}", 1.0 / 256, [](const InstanceParams& p) {
        Instance in = base("quadratic-at-origin", line_model("sq", [](double x) { return x * x; }, 2.0), 0.0, p);
        in.set = Region::singleton(pt(0));
        in.f_oracle = quadratic_oracle(1, 0);
        return in;
      });
  add("abs-at-origin", "kink with subdifferential [-1, 1]", {"frechet", "slope", "subdifferential", "penalty"},
      "|x| at 0, constraint ball [-0.5, 0.5]", 1.0 / 64, [](const InstanceParams& p) {
        Instance in = base("abs-at-origin", line_model("abs", [](double x) { return std::abs(x); }, 1.0), 0.0, p);
        in.set = Region::ball(pt(0), 0.5);
        in.f_oracle = distance_oracle(1, pt(0));
        in.xstar = pt(0.5);
        return in;
      });
  add("envelope-of-jump", "Lipschitz envelope driver", {"envelope", "slope", "wijsman", "slope-control"},
      "0 for x <= 0, 1 for x > 0; f_n its n-Lipschitz envelope; probed at 0", 1.0 / 64, [](const InstanceParams& p) {
        Instance in = base("envelope-of-jump", jump_model(), 0.0, p);
        in.sequence = SequenceKind::Envelope;
        in.set = Region::ball(pt(0.25), 0.25);
        return in;
      });
  add("envelope-of-spike", "envelope of an indicator", {"envelope", "slope", "indicator", "wijsman"},
      "indicator of {0}; f_n = n|x|", 1.0 / 64, [](const InstanceParams& p) {
        Instance in = base("envelope-of-spike", spike_model(), 0.0, p);
        in.sequence = SequenceKind::Envelope;
        return in;
      });
  add("envelope-of-abs", "envelope of a Lipschitz function", {"envelope", "slope", "wijsman"},
      "|x| probed off the kink at 0.3125", 1.0 / 64, [](const InstanceParams& p) {
        Instance in = base("envelope-of-abs", line_model("abs", [](double x) { return std::abs(x); }, 1.0), 0.3125, p);
        in.sequence = SequenceKind::Envelope;
        in.f_oracle = distance_oracle(1, pt(0));
        return in;
      });
  add("envelope-of-wells", "stationary points of a tilted double well", {"envelope", "stationary", "slope"},
      "(x^2 - 1/4)^2 + x/10 with Lipschitz envelopes", 1.0 / 64, [](const InstanceParams& p) {
        auto f = line_model("wells", [](double x) { return (x * x - 0.25) * (x * x - 0.25) + 0.1 * x; });
        Instance in = base("envelope-of-wells", f, -0.5, p);
        in.sequence = SequenceKind::Envelope;
        return in;
      });
  add("perturbed-kink", "uniform perturbation driver", {"perturbation", "slope", "wijsman"},
      "0.4x + |x - 1/4| + sin(5x)/n probed at 0.5", 1.0 / 64, [](const InstanceParams& p) {
        Instance in = base("perturbed-kink", line_model("kink", [](double x) { return 0.4 * x + std::abs(x - 0.25); }), 0.5, p);
        in.g = line_model("sin5", [](double x) { return std::sin(5 * x); });
        in.sequence = SequenceKind::Perturbed;
        return in;
      });
  add("perturbed-ramp", "stationary sequence on a half-line", {"perturbation", "stationary", "slope"},
      "x restricted to [0, 1] plus sin(10x)/n", 1.0 / 64, [](const InstanceParams& p) {
        auto ramp = restrict(line_model("id", [](double x) { return x; }),
                             Region::box(Box{Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1)}));
        Instance in = base("perturbed-ramp", ramp, 0.0, p);
        in.g = line_model("sin10", [](double x) { return std::sin(10 * x); });
        in.sequence = SequenceKind::Perturbed;
        return in;
      });
  add("penalty-of-jump", "penalty on a lower semicontinuous jump", {"penalty", "jump"},
      "the jump with constraint set [0.25, 0.75]", 1.0 / 256, [](const InstanceParams& p) {
        Instance in = base("penalty-of-jump", jump_model(), 0.5, p);
        in.set = Region::ball(pt(0.5), 0.25);
        in.sequence = SequenceKind::Penalty;
        return in;
      });
  add("penalty-of-indicator", "penalty on an extended-valued function", {"penalty", "indicator"},
      "x + indicator of [0.5, 1] with constraint set [-0.05, 0.55]", 1.0 / 256, [](const InstanceParams& p) {
        auto f = sum(line_model("id", [](double x) { return x; }),
                     indicator(Region::box(Box{pt(0.5), pt(1.0)}), unit_box()));
        Instance in = base("penalty-of-indicator", f.renamed("x+indicator"), 0.5, p);
        in.set = Region::ball(pt(0.25), 0.3);
        in.sequence = SequenceKind::Penalty;
        return in;
      });
  add("sparse-counterexample", "uniform infimum strictly below the infimum",
      {"counterexample", "penalty", "mesh-free"},
      "sparse lower semicontinuous function on R^64 with 5 levels; constraint ball of radius 1/2", 0.0,
      [](const InstanceParams& p) {
        const int dim = 64;
        Instance in{"sparse-counterexample", nogoodlsc(5, dim, 3)};
        in.point = Eigen::VectorXd::Zero(dim);
        in.set = Region::ball(Eigen::VectorXd::Zero(dim), 0.5);
        in.xstar = Eigen::VectorXd::Zero(dim);
        in.resolution = p.resolution;
        in.delta_ladder = geometric_ladder(0.5, 0.5, 3);
        in.mesh_free = true;
        in.sequence = SequenceKind::Penalty;
        return in;
      });
  add("decoupling-lipschitz-jump", "decoupling through a Lipschitz component", {"decoupling", "bridge"},
      "x + jump on the diagonal of R^2, at 0", 1.0 / 64, [](const InstanceParams& p) {
        return decoupling("decoupling-lipschitz-jump", {line_model("id", [](double x) { return x; }, 1.0), jump_model()}, p);
      });
  add("decoupling-common-point", "decoupling through indicators of a shared point", {"decoupling", "bridge", "indicator"},
      "indicator of {0} twice", 1.0 / 64, [](const InstanceParams& p) {
        return decoupling("decoupling-common-point", {spike_model(), spike_model()}, p);
      });
  add("decoupling-parity-split", "engineered decoupling failure", {"decoupling", "bridge", "counterexample"},
      "indicators of the even and of the odd mesh nodes", 1.0 / 64, [](const InstanceParams& p) {
        const long cells = parity_cells(p);
        return decoupling("decoupling-parity-split",
                          {parity_model("even", cells, false, ExtReal::infinity()),
                           parity_model("odd", cells, true, ExtReal::infinity())},
                          p);
      });
  add("decoupling-parity-boundary", "decoupling excess on the tolerance boundary", {"decoupling", "bridge"},
      "parity functions with value 1.5 tol off their nodes", 1.0 / 64, [](const InstanceParams& p) {
        const long cells = parity_cells(p);
        const ExtReal c(1.5 * p.tol);
        return decoupling("decoupling-parity-boundary",
                          {parity_model("even", cells, false, c), parity_model("odd", cells, true, c)}, p);
      });
  add("sum-rule-quadratic-abs", "sum rule across a kink", {"sum-rule", "decoupling", "subdifferential"},
      "x^2 + |x| at 0 with exact subdifferentials", 1.0 / 128, [](const InstanceParams& p) {
        return decoupling("sum-rule-quadratic-abs",
                          {line_model("sq", [](double x) { return x * x; }), line_model("abs", [](double x) { return std::abs(x); })},
                          p, {quadratic_oracle(1, 0), distance_oracle(1, pt(0))});
      });
  add("sum-rule-cancelling", "sum rule with cancelling gradients", {"sum-rule", "decoupling", "subdifferential"},
      "x + (-x) at 0", 1.0 / 128, [](const InstanceParams& p) {
        return decoupling("sum-rule-cancelling",
                          {line_model("id", [](double x) { return x; }), line_model("-id", [](double x) { return -x; })}, p,
                          {linear_oracle(pt(1)), linear_oracle(pt(-1))});
      });
  add("sum-rule-offset-kink", "sum rule with a kink off the mesh", {"sum-rule", "decoupling", "subdifferential"},
      "|x - (0.3 + 1/96)| + 0 at 0", 1.0 / 128, [](const InstanceParams& p) {
        const double kink = 0.3 + 1.0 / 96;
        return decoupling("sum-rule-offset-kink",
                          {line_model("offset-abs", [kink](double x) { return std::abs(x - kink); }),
                           line_model("zero", [](double) { return 0.0; })},
                          p, {distance_oracle(1, pt(kink)), zero_oracle(1)});
      });
  add("slope-control-abs-linear", "slope control with a Lipschitz term", {"slope-control", "subdifferential", "slope"},
      "|x| plus the 1-Lipschitz term x, at 0", 1.0 / 64, [](const InstanceParams& p) {
        Instance in = base("slope-control-abs-linear", line_model("abs", [](double x) { return std::abs(x); }), 0.0, p);
        in.f_oracle = distance_oracle(1, pt(0));
        in.g = line_model("id", [](double x) { return x; }, 1.0);
        in.g_oracle = linear_oracle(pt(1));
        return in;
      });
  add("tilt-quadratic-abs", "tilt invariance of graph gaps", {"tilt", "gap"},
      "f = x^2, g = |x| - 1/2, functional 0.2", 1.0 / 64, [](const InstanceParams& p) {
        Instance in = base("tilt-quadratic-abs", line_model("sq", [](double x) { return x * x; }), 0.0, p);
        in.g = line_model("abs-half", [](double x) { return std::abs(x) - 0.5; });
        in.xstar = pt(0.2);
        return in;
      });
  add("gap-jump-quadratic", "epigraph and hypograph gaps", {"gap"},
      "f = jump, g = x^2 + 1/4", 1.0 / 64, [](const InstanceParams& p) {
        Instance in = base("gap-jump-quadratic", jump_model(), 0.0, p);
        in.g = line_model("sq+1/4", [](double x) { return x * x + 0.25; });
        return in;
      });
  add("random-piecewise", "seeded piecewise instance", {"random", "envelope", "gap", "wijsman"},
      "lower semicontinuous piecewise-linear function drawn from the seed; g from seed + 1", 1.0 / 64,
      [](const InstanceParams& p) {
        Instance in = base("random-piecewise", random_piecewise(p.seed), 0.0, p);
        in.g = random_piecewise(p.seed + 1);
        in.sequence = SequenceKind::Envelope;
        return in;
      });
  return c;
}

// ---- inline descriptions ----------------------------------------------------

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
  throw std::invalid_argument("instance." + key + ": " + why);
}

double number_at(const Json& j, const std::string& key, const std::string& path, std::optional<double> fallback) {
  const std::string full = path.empty() ? key : path + "." + key;
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    bad_key(full, "missing");
  }
  if (!j.at(key).is_number()) bad_key(full, "expected a number");
  return j.at(key).get<double>();
}

Eigen::VectorXd vector_at(const Json& j, const std::string& path) {
  if (j.is_number()) return Eigen::VectorXd::Constant(1, j.get<double>());
  if (!j.is_array() || j.empty()) bad_key(path, "expected a number or a non-empty array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) bad_key(path, "expected numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

void check_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad_key(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; }))
      bad_key(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
  }
}

struct InlineFunction {
  FunctionModel model;
  std::optional<SubdifferentialOracle> oracle;
};

InlineFunction inline_function(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) bad_key(path + ".kind", "missing or not a string");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "quadratic" || kind == "abs") {
    check_keys(j, path, {"kind", "scale", "center"});
    const double a = number_at(j, "scale", path, 1.0), c = number_at(j, "center", path, 0.0);
    if (kind == "quadratic")
      return {line_model("quadratic", [a, c](double x) { return a * (x - c) * (x - c); }), quadratic_oracle(a, c)};
    if (a < 0) bad_key(path + ".scale", "must be >= 0 for abs");
    return {line_model("abs", [a, c](double x) { return a * std::abs(x - c); }, a), distance_oracle(a, pt(c))};
  }
  if (kind == "linear") {
    check_keys(j, path, {"kind", "slope", "offset"});
    const double s = number_at(j, "slope", path, 1.0), o = number_at(j, "offset", path, 0.0);
    return {line_model("linear", [s, o](double x) { return s * x + o; }, std::abs(s)), linear_oracle(pt(s))};
  }
  if (kind == "step") {
    check_keys(j, path, {"kind", "at", "low", "high"});
    const double t = number_at(j, "at", path, 0.0), lo = number_at(j, "low", path, 0.0), hi = number_at(j, "high", path, 1.0);
    if (hi < lo) bad_key(path + ".high", "must be >= low");
    return {line_model("step", [t, lo, hi](double x) { return x > t ? hi : lo; }), std::nullopt};
  }
  if (kind == "indicator") {
    check_keys(j, path, {"kind", "interval"});
    if (!j.contains("interval")) bad_key(path + ".interval", "missing");
    const Eigen::VectorXd iv = vector_at(j["interval"], path + ".interval");
    if (iv.size() != 2 || iv(0) > iv(1)) bad_key(path + ".interval", "expected [lo, hi] with lo <= hi");
    return {indicator(Region::box(Box{pt(iv(0)), pt(iv(1))}), unit_box()), std::nullopt};
  }
  if (kind == "piecewise") {
    check_keys(j, path, {"kind", "knots"});
    if (!j.contains("knots") || !j["knots"].is_array() || j["knots"].size() < 2)
      bad_key(path + ".knots", "expected at least two [x, y] pairs");
    std::vector<std::pair<double, double>> knots;
    for (const auto& k : j["knots"]) {
      const Eigen::VectorXd xy = vector_at(k, path + ".knots");
      if (xy.size() != 2) bad_key(path + ".knots", "expected [x, y] pairs");
      if (!knots.empty() && !(xy(0) > knots.back().first)) bad_key(path + ".knots", "x must increase");
      knots.emplace_back(xy(0), xy(1));
    }
    return {line_model("piecewise",
                       [knots](double x) {
                         if (x <= knots.front().first) return knots.front().second;
                         for (std::size_t i = 1; i < knots.size(); ++i) {
                           if (x <= knots[i].first) {
                             const auto [x0, y0] = knots[i - 1];
                             const auto [x1, y1] = knots[i];
                             return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
                           }
                         }
                         return knots.back().second;
                       }),
            std::nullopt};
  }
  if (kind == "random-piecewise") {
    check_keys(j, path, {"kind", "seed", "pieces"});
    const double seed = number_at(j, "seed", path, std::nullopt), pieces = number_at(j, "pieces", path, 4.0);
    if (seed < 0 || pieces < 1) bad_key(path, "seed and pieces must be non-negative / positive");
    return {random_piecewise(static_cast<std::uint64_t>(seed), static_cast<int>(pieces)), std::nullopt};
  }
  bad_key(path + ".kind", "unknown function kind '" + kind + "'");
}

Region inline_set(const Json& j) {
  if (j.is_string() && j.get<std::string>() == "whole") return Region::whole(1);
  if (!j.is_object() || j.size() != 1) bad_key("set", "expected \"whole\" or one of {ball, interval, point}");
  const std::string kind = j.begin().key();
  const Json& v = j.begin().value();
  if (kind == "ball") {
    check_keys(v, "set.ball", {"center", "radius"});
    const double r = number_at(v, "radius", "set.ball", std::nullopt);
    if (r < 0) bad_key("set.ball.radius", "must be >= 0");
    return Region::ball(v.contains("center") ? vector_at(v["center"], "set.ball.center") : pt(0), r);
  }
  if (kind == "interval") {
    const Eigen::VectorXd iv = vector_at(v, "set.interval");
    if (iv.size() != 2 || iv(0) > iv(1)) bad_key("set.interval", "expected [lo, hi] with lo <= hi");
    return Region::box(Box{pt(iv(0)), pt(iv(1))});
  }
  if (kind == "point") return Region::singleton(vector_at(v, "set.point"));
  bad_key("set." + kind, "unknown set kind");
}

}  // namespace

std::string to_string(SequenceKind k) {
  switch (k) {
    case SequenceKind::Constant: return "constant";
    case SequenceKind::Envelope: return "envelope";
    case SequenceKind::Perturbed: return "perturbed";
    case SequenceKind::Penalty: return "penalty";
  }
  return "constant";
}

SequenceKind sequence_kind_from_string(const std::string& s) {
  for (SequenceKind k : {SequenceKind::Constant, SequenceKind::Envelope, SequenceKind::Perturbed, SequenceKind::Penalty})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown sequence kind '" + s + "' (constant, envelope, perturbed, penalty)");
}

bool CatalogueEntry::has_tag(const std::string& tag) const {
  return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

const std::vector<CatalogueEntry>& catalogue() {
  static const std::vector<CatalogueEntry> entries = build_catalogue();
  return entries;
}

const CatalogueEntry& catalogue_entry(const std::string& name) {
  for (const auto& e : catalogue())
    if (e.name == name) return e;
  throw UnknownInstance("unknown catalogue instance '" + name + "'");
}

std::vector<const CatalogueEntry*> catalogue_filter(const std::string& tag) {
  std::vector<const CatalogueEntry*> out;
  for (const auto& e : catalogue())
    if (tag.empty() || e.has_tag(tag)) out.push_back(&e);
  return out;
}

Json catalogue_json(const std::vector<const CatalogueEntry*>& entries) {
  Json arr = Json::array();
  for (const auto* e : entries) {
    arr.push_back(Json{{"name", e->name},
                       {"role", e->role},
                       {"tags", e->tags},
                       {"description", e->description},
                       {"default_resolution", e->default_resolution}});
  }
  return arr;
}

std::string catalogue_text(const std::vector<const CatalogueEntry*>& entries) {
  std::ostringstream os;
  for (const auto* e : entries) {
    os << e->name << ": " << e->role << " [";
    for (std::size_t i = 0; i < e->tags.size(); ++i) os << (i ? ", " : "") << e->tags[i];
    os << "]\n";
  }
  return os.str();
}

FunctionModel random_piecewise(std::uint64_t seed, int pieces) {
  if (pieces < 1) throw std::invalid_argument("random_piecewise: pieces must be positive");
  std::mt19937_64 gen(seed);
  auto uniform = [&gen](double lo, double hi) { return lo + (hi - lo) * static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  std::vector<double> breaks{-1.0};
  for (int i = 1; i < pieces; ++i) breaks.push_back(uniform(-0.9, 0.9));
  std::sort(breaks.begin(), breaks.end());
  breaks.push_back(1.0);
  std::vector<double> slope, offset;
  for (int i = 0; i < pieces; ++i) {
    slope.push_back(uniform(-2, 2));
    offset.push_back(uniform(-1, 1));
  }
  // a breakpoint takes the smaller one-sided value, which makes the function lsc
  return line_model("random-piecewise-" + std::to_string(seed), [breaks, slope, offset](double x) {
    const auto piece = [&](std::size_t i) { return slope[i] * x + offset[i]; };
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
      if (x < breaks[i + 1]) return piece(i);
      if (x == breaks[i + 1]) return i + 2 < breaks.size() ? std::min(piece(i), piece(i + 1)) : piece(i);
    }
    return piece(slope.size() - 1);
  });
}

Instance inline_instance(const Json& j, const InstanceParams& params) {
  check_keys(j, "", {"name", "function", "perturbation", "set", "point", "sequence", "xstar", "resolution"});
  if (!j.contains("function")) bad_key("function", "missing");
  auto f = inline_function(j["function"], "function");
  Instance in{j.value("name", std::string("inline")), f.model};
  in.f_oracle = f.oracle;
  if (j.contains("perturbation")) {
    auto g = inline_function(j["perturbation"], "perturbation");
    in.g = g.model;
    in.g_oracle = g.oracle;
  }
  if (j.contains("set")) in.set = inline_set(j["set"]);
  in.point = j.contains("point") ? vector_at(j["point"], "point") : pt(0);
  if (in.point.size() != 1) bad_key("point", "inline instances are one-dimensional");
  in.xstar = j.contains("xstar") ? vector_at(j["xstar"], "xstar") : pt(0);
  if (j.contains("sequence")) {
    if (!j["sequence"].is_string()) bad_key("sequence", "expected a string");
    try {
      in.sequence = sequence_kind_from_string(j["sequence"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      bad_key("sequence", e.what());
    }
  }
  in.resolution = j.contains("resolution") ? number_at(j, "resolution", "", std::nullopt) : params.resolution;
  return in;
}

}  // namespace varan
