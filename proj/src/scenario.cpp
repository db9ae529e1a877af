#include "varan/scenario.hpp"

#include "varan/convergence.hpp"
#include "varan/sampling.hpp"
#include "varan/slopes.hpp"
#include "varan/sum_rules.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#ifndef VARAN_VERSION
#define VARAN_VERSION "0.0.0"
#endif

namespace varan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ParamType { Number, Integer, Vector, String, Bool };

const std::map<std::string, ParamType>& param_schema() {
  static const std::map<std::string, ParamType> schema{
      {"point", ParamType::Vector},          {"xstar", ParamType::Vector},
      {"lambda_max", ParamType::Number},     {"exponent", ParamType::Number},
      {"sequence", ParamType::String},       {"sigma", ParamType::Number},
      {"radius", ParamType::Number},         {"alpha_step", ParamType::Number},
      {"cross_levels", ParamType::Bool},     {"random_directions", ParamType::Integer},
      {"lambda_x", ParamType::Number},       {"stability_levels", ParamType::Integer},
      {"n_max", ParamType::Integer},         {"dim_trunc", ParamType::Integer},
      {"k_max", ParamType::Integer},
  };
  return schema;
}

void check_param(const std::string& key, const Json& v) {
  const auto& schema = param_schema();
  const auto it = schema.find(key);
  if (it == schema.end()) throw ScenarioError("params." + key, "unknown parameter");
  const std::string path = "params." + key;
  switch (it->second) {
    case ParamType::Number:
      if (!v.is_number()) throw ScenarioError(path, "expected a number");
      break;
    case ParamType::Integer:
      if (!v.is_number_integer() || v.get<long>() < 0) throw ScenarioError(path, "expected a non-negative integer");
      break;
    case ParamType::Vector:
      if (v.is_number()) break;
      if (!v.is_array() || v.empty()) throw ScenarioError(path, "expected a number or an array of numbers");
      for (const auto& e : v)
        if (!e.is_number()) throw ScenarioError(path, "expected an array of numbers");
      break;
    case ParamType::String:
      if (!v.is_string()) throw ScenarioError(path, "expected a string");
      if (key == "sequence") {
        try {
          sequence_kind_from_string(v.get<std::string>());
        } catch (const std::invalid_argument& e) {
          throw ScenarioError(path, e.what());
        }
      }
      break;
    case ParamType::Bool:
      if (!v.is_boolean()) throw ScenarioError(path, "expected true or false");
      break;
  }
}

double param_number(const Json& params, const std::string& key, double fallback) {
  return params.contains(key) ? params[key].get<double>() : fallback;
}

long param_integer(const Json& params, const std::string& key, long fallback) {
  return params.contains(key) ? params[key].get<long>() : fallback;
}

Eigen::VectorXd param_vector(const Json& params, const std::string& key, const Eigen::VectorXd& fallback) {
  if (!params.contains(key)) return fallback;
  const Json& v = params[key];
  if (v.is_number()) return Eigen::VectorXd::Constant(1, v.get<double>());
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  return out;
}

PenaltySpec parse_penalty(const Json& j) {
  if (!j.is_object()) throw ScenarioError("penalty", "expected an object");
  PenaltySpec spec;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string path = "penalty." + it.key();
    if (it.key() == "exponent") {
      if (!it->is_number()) throw ScenarioError(path, "expected a number");
      spec.exponent = it->get<double>();
    } else if (it.key() == "n_schedule") {
      if (!it->is_array()) throw ScenarioError(path, "expected an array of numbers");
      for (const auto& e : *it) {
        if (!e.is_number()) throw ScenarioError(path, "expected an array of numbers");
        spec.n_schedule.push_back(e.get<double>());
      }
    } else if (it.key() == "window") {
      if (!it->is_number_integer() || it->get<long>() < 0) throw ScenarioError(path, "expected a non-negative integer");
      spec.window = it->get<std::size_t>();
    } else {
      throw ScenarioError(path, "unknown key");
    }
  }
  if (spec.n_schedule.empty()) throw ScenarioError("penalty.n_schedule", "missing");
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("penalty", e.what());
  }
  return spec;
}

void check_config(const Json& j) {
  if (!j.is_object()) throw ScenarioError("config", "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    try {
      LimitConfig::from_json(Json{{it.key(), *it}});
    } catch (const std::exception& e) {
      throw ScenarioError("config." + it.key(), e.what());
    }
  }
  try {
    LimitConfig::from_json(j);
  } catch (const std::exception& e) {
    throw ScenarioError("config", e.what());
  }
}

InstanceRef parse_ref(const Json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    try {
      catalogue_entry(name);
    } catch (const UnknownInstance& e) {
      throw ScenarioError(path, e.what());
    }
    return {name, Json()};
  }
  if (j.is_object()) {
    try {
      inline_instance(j, InstanceParams{});
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(path, e.what());
    }
    return {"", j};
  }
  throw ScenarioError(path, "expected a catalogue name or an inline description");
}

// ---- execution -----------------------------------------------------------------

struct Outcome {
  Verdict verdict;
  Json result = Json::object();
  std::string csv;
};

Verdict computed(Json witness = Json::object()) { return Verdict{Status::Holds, 0.0, std::move(witness)}; }

/// Holds when both sides are decisive and agree, Fails when they disagree.
Verdict agreement(const Verdict& a, const Verdict& b) {
  Json w{{"first", to_string(a.status)}, {"second", to_string(b.status)}};
  if (!a.decisive() || !b.decisive()) return Verdict{Status::Inconclusive, 0.0, w};
  return Verdict{a.status == b.status ? Status::Holds : Status::Fails, 0.0, w};
}

struct Context {
  const Scenario& scenario;
  const Instance& instance;
  LimitConfig cfg;
  std::uint64_t seed;
};

const Region& need_set(const Context& c) {
  if (!c.instance.set) throw std::invalid_argument("instance '" + c.instance.name + "' has no constraint set");
  return *c.instance.set;
}

const FunctionModel& need_g(const Context& c) {
  if (!c.instance.g) throw std::invalid_argument("instance '" + c.instance.name + "' has no second function");
  return *c.instance.g;
}

Mesh need_mesh(const Context& c) {
  if (c.instance.mesh_free)
    throw std::invalid_argument("operation '" + c.scenario.operation + "' needs a mesh; instance '" + c.instance.name +
                                "' is mesh-free");
  const Box& box = c.instance.components.empty() ? c.instance.f.box() : c.instance.components.front().box();
  return Mesh(box, Eigen::VectorXd::Constant(box.dim(), c.instance.resolution), c.instance.f.norm());
}

Point point_of(const Context& c) { return param_vector(c.scenario.params, "point", c.instance.point); }

SequenceKind sequence_of(const Context& c) {
  const Json& p = c.scenario.params;
  return p.contains("sequence") ? sequence_kind_from_string(p["sequence"].get<std::string>()) : c.instance.sequence;
}

double exponent_of(const Context& c) {
  if (c.scenario.penalty) return c.scenario.penalty->exponent;
  return param_number(c.scenario.params, "exponent", 1.0);
}

/// f_n and its limit for the chosen sequence kind.
std::pair<FunctionSequence, FunctionModel> sequence_and_limit(const Context& c, const Mesh& mesh) {
  const FunctionModel& f = c.instance.f;
  switch (sequence_of(c)) {
    case SequenceKind::Constant: return {constant_sequence(f), f};
    case SequenceKind::Envelope: return {envelope_sequence(f, mesh), f};
    case SequenceKind::Perturbed: return {perturbed_sequence(f, need_g(c)), f};
    case SequenceKind::Penalty: {
      const Region& s = need_set(c);
      return {penalty_sequence(f, s, exponent_of(c)), restrict(f, s)};
    }
  }
  throw std::logic_error("unreachable sequence kind");
}

std::vector<FunctionModel> need_components(const Context& c) {
  if (c.instance.components.size() < 2)
    throw std::invalid_argument("instance '" + c.instance.name + "' is not a decoupled sum");
  return c.instance.components;
}

double gap_of(ExtReal a, ExtReal b) {
  if (a.is_infinite() && b.is_infinite()) return 0.0;
  if (a.is_infinite() || b.is_infinite()) return kInf;
  return std::abs(a.value() - b.value());
}

StabilityOptions stability_options(const Context& c) {
  StabilityOptions opt;
  opt.lambda_x = param_number(c.scenario.params, "lambda_x", opt.lambda_x);
  opt.k_max = static_cast<int>(param_integer(c.scenario.params, "stability_levels", opt.k_max));
  return opt;
}

Outcome run_uniform_infimum(const Context& c) {
  const Region& s = need_set(c);
  const UniformInfimum u =
      c.instance.mesh_free ? uniform_infimum_trace(c.instance.f, s, c.cfg) : uniform_infimum_trace(c.instance.f, s, need_mesh(c), c.cfg);
  Json per = Json::array();
  for (const auto& v : u.per_rung) per.push_back(json_number(v));
  return {computed(), Json{{"value", json_number(u.value)}, {"rungs", u.rungs}, {"per_rung", per}}, ""};
}

Outcome run_robustness(const Context& c) {
  const Region& s = need_set(c);
  const RobustnessReport r =
      c.instance.mesh_free ? robustness(c.instance.f, s, c.cfg) : robustness(c.instance.f, s, need_mesh(c), c.cfg);
  return {Verdict{r.robust ? Status::Holds : Status::Fails, r.gap, Json::object()}, to_json(r), ""};
}

Outcome run_penalty_limit(const Context& c) {
  const Region& s = need_set(c);
  PenaltySpec spec;
  if (c.scenario.penalty) {
    spec = *c.scenario.penalty;
  } else {
    spec.exponent = exponent_of(c);
    for (long n : c.cfg.n_schedule) spec.n_schedule.push_back(static_cast<double>(n));
  }
  const PenaltyLimit pl = c.instance.mesh_free ? penalty_limit(c.instance.f, s, spec, c.cfg)
                                               : penalty_limit(c.instance.f, s, spec, need_mesh(c), c.cfg);
  Json result = to_json(pl);
  result["gap"] = json_number(gap_of(pl.limit, pl.uniform_inf));
  std::ostringstream csv;
  csv.precision(17);
  csv << "n,penalty_value\n";
  for (std::size_t i = 0; i < pl.n.size(); ++i) csv << pl.n[i] << ',' << pl.values[i].raw() << '\n';
  return {pl.verdict, result, csv.str()};
}

Outcome run_penalty_bridge(const Context& c) {
  const Region& s = need_set(c);
  const double lambda_max = param_number(c.scenario.params, "lambda_max", 0.5);
  const BridgeResult b =
      c.instance.mesh_free ? carac_W_bridge(c.instance.f, s, point_of(c), exponent_of(c), lambda_max, c.cfg)
                           : carac_W_bridge(c.instance.f, s, point_of(c), exponent_of(c), lambda_max, need_mesh(c), c.cfg);
  return {agreement(b.inequality, b.wijsman), Json{{"inequality", to_json(b.inequality)}, {"wijsman", to_json(b.wijsman)}}, ""};
}

Outcome run_point_test(const Context& c) {
  const Mesh mesh = need_mesh(c);
  const auto [seq, limit] = sequence_and_limit(c, mesh);
  const Point x = point_of(c);
  const double lambda_max = param_number(c.scenario.params, "lambda_max", 0.5);
  const std::string& op = c.scenario.operation;
  Verdict v;
  if (op == "wijsman_at_point") {
    v = wijsman_at_point(seq, limit, x, lambda_max, mesh, c.cfg);
  } else if (op == "epi_at_point") {
    v = epi_at_point(seq, limit, x, mesh, c.cfg);
  } else {
    const int extra = static_cast<int>(param_integer(c.scenario.params, "random_directions", 2));
    v = slice_at_point(seq, limit, x, lambda_max, default_directions(x.size(), c.seed, extra), mesh, c.cfg);
  }
  return {v, Json{{"sequence", to_string(sequence_of(c))}, {"verdict", to_json(v)}}, ""};
}

Outcome run_gap_triple(const Context& c) {
  const Mesh mesh = need_mesh(c);
  const FunctionModel& f = c.instance.f;
  const FunctionModel& g = need_g(c);
  const double alpha = param_number(c.scenario.params, "alpha_step", 0.1);
  const bool cross = c.scenario.params.value("cross_levels", true);
  const double cap = std::max(default_value_cap(f, mesh), default_value_cap(g, mesh));
  double low = kInf;
  for (const auto& v : {tabulate(f, mesh), tabulate(g, mesh)})
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (std::isfinite(v(i))) low = std::min(low, v(i));
  const GapTriple t = epi_hypo_gap_triple(f, g, mesh, cap, low - 1.0, alpha, cross);
  const double spread = std::max({gap_of(t.hypo_epi, t.hypo_graph), gap_of(t.hypo_epi, t.graph_epi),
                                  gap_of(t.hypo_graph, t.graph_epi)});
  const double bound = cross ? 0.0 : 2.0 * (mesh.resolution() + alpha);
  Json w{{"spread", json_number(spread)}, {"bound", bound}};
  const Verdict v{spread <= bound ? Status::Holds : Status::Fails, spread, w};
  return {v,
          Json{{"hypo_epi", json_number(t.hypo_epi)},
               {"hypo_graph", json_number(t.hypo_graph)},
               {"graph_epi", json_number(t.graph_epi)},
               {"cross_levels", cross},
               {"alpha_step", alpha}},
          ""};
}

Outcome run_tilt_gap(const Context& c) {
  const Mesh mesh = need_mesh(c);
  const Eigen::VectorXd xs = param_vector(c.scenario.params, "xstar", c.instance.xstar);
  const TiltGapPair pair = tilt_gap_pair(c.instance.f, need_g(c), xs, mesh, c.cfg.tol);
  const Verdict v = tilt_gap_invariance(pair, c.instance.f.norm().dual(xs));
  return {v,
          Json{{"plain", json_number(pair.plain)},
               {"tilted", json_number(pair.tilted)},
               {"tol_plain", pair.tol_plain},
               {"tol_tilted", pair.tol_tilted}},
          ""};
}

Outcome run_strong_slope(const Context& c) {
  const Mesh mesh = need_mesh(c);
  const SlopeEstimate s = strong_slope(c.instance.f, point_of(c), mesh, c.cfg);
  return {computed(), Json{{"slope", json_number(s.value)}, {"radius_used", s.radius_used}}, to_csv(s)};
}

Outcome run_ekeland(const Context& c) {
  const Mesh mesh = need_mesh(c);
  const double sigma = param_number(c.scenario.params, "sigma", 0.5);
  const double radius = param_number(c.scenario.params, "radius", kInf);
  const EkelandPoint e = ekeland_point(c.instance.f, point_of(c), sigma, radius, mesh);
  return {computed(),
          Json{{"point", std::vector<double>(e.point.data(), e.point.data() + e.point.size())},
               {"value", e.value},
               {"moves", e.moves},
               {"sigma", sigma}},
          ""};
}

Outcome run_stability(const Context& c) {
  const Mesh mesh = need_mesh(c);
  const auto [seq, limit] = sequence_and_limit(c, mesh);
  const StabilityOptions opt = stability_options(c);
  const StabilityWitness w = c.scenario.operation == "slope_stability"
                                 ? slope_stability_witness(seq, limit, point_of(c), mesh, c.cfg, opt)
                                 : stationary_sequence(seq, limit, mesh, c.cfg, opt);
  Json result = to_json(w);
  result["sequence"] = to_string(sequence_of(c));
  result["suffix_max_slope"] = json_number(w.suffix_max_slope(c.cfg));
  return {w.verdict, result, to_csv(w)};
}

Outcome run_frechet(const Context& c) {
  const Mesh mesh = need_mesh(c);
  const Eigen::VectorXd xs = param_vector(c.scenario.params, "xstar", c.instance.xstar);
  const Verdict v = frechet_membership(c.instance.f, point_of(c), xs, mesh, c.cfg);
  const Verdict q = frechet_quotient_form(c.instance.f, point_of(c), xs, mesh, c.cfg);
  return {v, Json{{"slope_form", to_json(v)}, {"quotient_form", to_json(q)}}, ""};
}

Outcome run_slope_control(const Context& c) {
  const Mesh mesh = need_mesh(c);
  if (!c.instance.f_oracle || !c.instance.g_oracle)
    throw std::invalid_argument("instance '" + c.instance.name + "' has no subdifferential oracles");
  const Verdict v = p2_witness(c.instance.f, *c.instance.f_oracle, need_g(c), *c.instance.g_oracle, point_of(c), mesh, c.cfg);
  return {v, Json{{"verdict", to_json(v)}}, ""};
}

Outcome run_decoupling(const Context& c) {
  const Mesh base = need_mesh(c);
  const DecoupledSum ds(need_components(c));
  const Point x = point_of(c);
  const double lambda_max = param_number(c.scenario.params, "lambda_max", 0.5);
  const std::string& op = c.scenario.operation;
  if (op == "decoupling_inequality") {
    const DecouplingReport r = decoupling_report(ds, x, base, c.cfg, lambda_max);
    return {r.verdict, to_json(r), ""};
  }
  if (op == "decoupling_bridge") {
    const DecouplingBridge b = prop71_bridge(ds, x, base, c.cfg, lambda_max);
    return {agreement(b.inequality, b.wijsman), Json{{"inequality", to_json(b.inequality)}, {"wijsman", to_json(b.wijsman)}}, ""};
  }
  if (c.instance.component_oracles.size() != ds.components().size())
    throw std::invalid_argument("instance '" + c.instance.name + "' needs one subdifferential oracle per component");
  const SumRuleWitness w = r2_witness(ds, c.instance.component_oracles, x, base, c.cfg, stability_options(c), lambda_max);
  return {w.verdict, to_json(w), to_csv(w)};
}

Outcome run_operation(const Context& c) {
  const std::string& op = c.scenario.operation;
  if (op == "uniform_infimum") return run_uniform_infimum(c);
  if (op == "robustness") return run_robustness(c);
  if (op == "penalty_limit") return run_penalty_limit(c);
  if (op == "penalty_bridge") return run_penalty_bridge(c);
  if (op == "wijsman_at_point" || op == "epi_at_point" || op == "slice_at_point") return run_point_test(c);
  if (op == "gap_triple") return run_gap_triple(c);
  if (op == "tilt_gap") return run_tilt_gap(c);
  if (op == "strong_slope") return run_strong_slope(c);
  if (op == "ekeland_point") return run_ekeland(c);
  if (op == "slope_stability" || op == "stationary_sequence") return run_stability(c);
  if (op == "frechet_membership") return run_frechet(c);
  if (op == "slope_control") return run_slope_control(c);
  if (op == "decoupling_inequality" || op == "decoupling_bridge" || op == "sum_rule_witness") return run_decoupling(c);
  throw std::logic_error("operation not dispatched: " + op);
}

Json header(const std::string& scenario, const std::string& op) {
  return Json{{"toolkit", "varan"}, {"version", toolkit_version()}, {"report_schema", kReportSchemaVersion},
              {"scenario", scenario}, {"operation", op}};
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

Rational expected_r(int n) { return Rational(-1, n); }
Rational expected_inf(int n) { return Rational(-1, n + 1); }

}  // namespace

std::string toolkit_version() { return VARAN_VERSION; }

const std::vector<std::string>& scenario_operations() {
  static const std::vector<std::string> ops{
      "uniform_infimum",   "robustness",      "penalty_limit",      "penalty_bridge",        "wijsman_at_point",
      "epi_at_point",      "slice_at_point",  "gap_triple",         "tilt_gap",              "strong_slope",
      "ekeland_point",     "slope_stability", "stationary_sequence", "frechet_membership",   "slope_control",
      "decoupling_inequality", "decoupling_bridge", "sum_rule_witness", "counterexample_table"};
  return ops;
}

Scenario parse_scenario(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    throw ScenarioError("<document>", e.what());
  }
  if (!j.is_object()) throw ScenarioError("<document>", "expected an object");
  Scenario s;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const Json& v = *it;
    if (k == "name") {
      if (!v.is_string()) throw ScenarioError(k, "expected a string");
      s.name = v.get<std::string>();
    } else if (k == "description") {
      if (!v.is_string()) throw ScenarioError(k, "expected a string");
    } else if (k == "operation") {
      if (!v.is_string()) throw ScenarioError(k, "expected a string");
      s.operation = v.get<std::string>();
      const auto& ops = scenario_operations();
      if (std::find(ops.begin(), ops.end(), s.operation) == ops.end())
        throw ScenarioError(k, "unknown operation '" + s.operation + "'");
    } else if (k == "instance") {
      s.instances.push_back(parse_ref(v, k));
    } else if (k == "instances") {
      if (!v.is_array() || v.empty()) throw ScenarioError(k, "expected a non-empty array");
      for (std::size_t i = 0; i < v.size(); ++i) s.instances.push_back(parse_ref(v[i], k + "[" + std::to_string(i) + "]"));
    } else if (k == "config") {
      check_config(v);
      s.config_overrides = v;
    } else if (k == "mesh") {
      if (!v.is_object()) throw ScenarioError(k, "expected an object");
      for (auto m = v.begin(); m != v.end(); ++m) {
        if (m.key() != "resolution") throw ScenarioError("mesh." + m.key(), "unknown key");
        if (!m->is_number() || !(m->get<double>() > 0)) throw ScenarioError("mesh.resolution", "expected a positive number");
        s.resolution = m->get<double>();
      }
    } else if (k == "penalty") {
      s.penalty = parse_penalty(v);
    } else if (k == "params") {
      if (!v.is_object()) throw ScenarioError(k, "expected an object");
      for (auto p = v.begin(); p != v.end(); ++p) check_param(p.key(), *p);
      s.params = v;
    } else if (k == "expected") {
      if (!v.is_string()) throw ScenarioError(k, "expected Holds, Fails or Inconclusive");
      try {
        s.expected = status_from_string(v.get<std::string>());
      } catch (const std::exception&) {
        throw ScenarioError(k, "expected Holds, Fails or Inconclusive");
      }
    } else if (k == "seed") {
      if (!v.is_number_unsigned()) throw ScenarioError(k, "expected a non-negative integer");
      s.seed = v.get<std::uint64_t>();
    } else {
      throw ScenarioError(k, "unknown key");
    }
  }
  if (s.name.empty()) throw ScenarioError("name", "missing");
  if (s.operation.empty()) throw ScenarioError("operation", "missing");
  if (s.operation == "counterexample_table") {
    if (!s.instances.empty()) throw ScenarioError("instance", "counterexample_table takes no instance");
  } else if (s.instances.empty()) {
    throw ScenarioError("instance", "missing");
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("<file>", "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_scenario(os.str());
}

int exit_code(Status s) {
  switch (s) {
    case Status::Holds: return 0;
    case Status::Fails: return 2;
    case Status::Inconclusive: return 3;
  }
  return 1;
}

int RunReport::exit_code() const {
  if (expectation_met) return *expectation_met ? 0 : 2;
  return varan::exit_code(status);
}

std::string RunReport::text() const { return json.dump(2) + "\n"; }

RunReport run_scenario(const Scenario& s, const RunOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t seed = kDefaultSeed;
  std::string source = "default";
  if (opt.seed) {
    seed = *opt.seed;
    source = "command-line";
  } else if (opt.env_seed) {
    seed = *opt.env_seed;
    source = "TOOLKIT_SEED";
  } else if (s.seed) {
    seed = *s.seed;
    source = "scenario";
  }

  RunReport report;
  if (s.operation == "counterexample_table") {
    report = reproduce_counterexample(static_cast<int>(param_integer(s.params, "n_max", 5)),
                                      static_cast<int>(param_integer(s.params, "dim_trunc", 256)),
                                      static_cast<int>(param_integer(s.params, "k_max", 0)), false);
    report.json["scenario"] = s.name;
  } else {
    const LimitConfig base_cfg = LimitConfig::from_json(s.config_overrides);
    const bool ladder_given = s.config_overrides.contains("delta_ladder") || s.config_overrides.contains("delta_levels");
    Json results = Json::array();
    Json timings = Json::object();
    std::vector<Verdict> statuses;
    std::string csv;
    for (const InstanceRef& ref : s.instances) {
      const auto t0 = std::chrono::steady_clock::now();
      InstanceParams params;
      params.tol = base_cfg.tol;
      params.seed = seed;
      Instance in = [&] {
        if (!ref.name.empty()) {
          const CatalogueEntry& e = catalogue_entry(ref.name);
          params.resolution = s.resolution.value_or(e.default_resolution);
          return e.build(params);
        }
        params.resolution = s.resolution.value_or(params.resolution);
        return inline_instance(ref.description, params);
      }();
      LimitConfig cfg = base_cfg;
      if (!ladder_given && !in.delta_ladder.empty()) cfg.delta_ladder = in.delta_ladder;
      const Context ctx{s, in, cfg, seed};
      Json entry{{"instance", in.name}};
      Outcome out;
      try {
        out = run_operation(ctx);
      } catch (const PreconditionFailed& e) {
        out.verdict = e.verdict();
        out.result = Json{{"precondition_failed", e.what()}, {"verdict", to_json(e.verdict())}};
      }
      entry["status"] = to_string(out.verdict.status);
      entry["margin"] = json_number(out.verdict.margin);
      entry["resolution"] = in.mesh_free ? Json(nullptr) : Json(in.resolution);
      entry["limits"] = cfg.to_json();
      entry["result"] = out.result;
      if (out.result.is_object() && !out.result.contains("verdict") && !out.verdict.witness.empty())
        entry["witness"] = out.verdict.witness;
      results.push_back(entry);
      statuses.push_back(out.verdict);
      if (!out.csv.empty()) {
        if (s.instances.size() > 1) csv += "# " + in.name + "\n";
        csv += out.csv;
      }
      timings[in.name] = elapsed_ms(t0);
    }
    report.status = conjunction(statuses).status;
    report.csv = csv;
    report.json = header(s.name, s.operation);
    report.json["results"] = results;
    if (opt.timings) report.json["timings"] = timings;
  }

  Json& j = report.json;
  j["status"] = to_string(report.status);
  j["seed"] = Json{{"value", seed}, {"source", source}};
  Json echo{{"limits_override", s.config_overrides}, {"params", s.params}};
  echo["resolution"] = s.resolution ? Json(*s.resolution) : Json(nullptr);
  echo["penalty"] = s.penalty ? s.penalty->to_json() : Json(nullptr);
  j["config"] = echo;
  if (s.expected) {
    report.expectation_met = report.status == *s.expected;
    j["expected"] = to_string(*s.expected);
    j["expectation_met"] = *report.expectation_met;
  }
  if (opt.timings) {
    if (!j.contains("timings")) j["timings"] = Json::object();
    j["timings"]["total_ms"] = elapsed_ms(start);
  }
  return report;
}

RunReport reproduce_counterexample(int n_max, int dimension, int k_max, bool timings) {
  const auto start = std::chrono::steady_clock::now();
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  const std::vector<NogoodRow> rows = nogood_table(n_max, dimension, k_max);
  RunReport report;
  report.json = header("counterexample-table", "counterexample_table");
  Json table = Json::array();
  std::string csv = "n,r,inf,expected_r,expected_inf,matches\n";
  std::vector<int> deviating;
  for (const NogoodRow& row : rows) {
    const bool ok = row.r == expected_r(row.n) && row.inf == expected_inf(row.n);
    if (!ok) deviating.push_back(row.n);
    table.push_back(Json{{"n", row.n}, {"r", row.r.str()}, {"inf", row.inf.str()}, {"matches", ok}});
    csv += std::to_string(row.n) + "," + row.r.str() + "," + row.inf.str() + "," + expected_r(row.n).str() + "," +
           expected_inf(row.n).str() + "," + (ok ? "true" : "false") + "\n";
  }
  report.status = deviating.empty() ? Status::Holds : Status::Fails;
  report.csv = csv;
  report.json["status"] = to_string(report.status);
  report.json["results"] = Json::array({Json{{"instance", "sparse-counterexample"},
                                             {"status", to_string(report.status)},
                                             {"n_max", n_max},
                                             {"dim_trunc", dimension},
                                             {"k_max", k_max == 0 ? nogood_default_k_max(n_max) : k_max},
                                             {"rows", table},
                                             {"deviating_rows", deviating}}});
  if (timings) report.json["timings"] = Json{{"total_ms", elapsed_ms(start)}};
  return report;
}

std::vector<double> sweep_schedule(const std::string& kind, double first, double last, double factor) {
  if (!(first > 0) || last < first) throw std::invalid_argument("sweep schedule: need 0 < first <= last");
  std::vector<double> out;
  if (kind == "linear") {
    for (double n = first; n <= last; n += 1.0) out.push_back(n);
  } else if (kind == "geometric") {
    if (!(factor > 1)) throw std::invalid_argument("sweep schedule: factor must be > 1");
    for (double n = first; n <= last; n *= factor) out.push_back(n);
  } else {
    throw std::invalid_argument("sweep schedule: unknown kind '" + kind + "' (linear, geometric)");
  }
  return out;
}

std::string penalty_sweep_csv(const SweepSpec& spec) {
  const CatalogueEntry& e = catalogue_entry(spec.instance);
  InstanceParams params;
  params.resolution = spec.resolution.value_or(e.default_resolution);
  params.tol = spec.tol;
  params.seed = spec.seed;
  const Instance in = e.build(params);
  if (!in.set) throw std::invalid_argument("instance '" + in.name + "' has no constraint set");
  LimitConfig cfg = LimitConfig::defaults();
  cfg.tol = spec.tol;
  if (!in.delta_ladder.empty()) cfg.delta_ladder = in.delta_ladder;
  std::ostringstream os;
  os.precision(17);
  os << "exponent,n,penalty_value,uniform_infimum,gap\n";
  for (double p : spec.exponents) {
    PenaltySpec ps;
    ps.exponent = p;
    ps.n_schedule = spec.n_schedule;
    const PenaltyLimit pl = in.mesh_free
                                ? penalty_limit(in.f, *in.set, ps, cfg)
                                : penalty_limit(in.f, *in.set, ps, Mesh(in.f.box(), Eigen::VectorXd::Constant(1, in.resolution)), cfg);
    for (std::size_t i = 0; i < pl.n.size(); ++i)
      os << p << ',' << pl.n[i] << ',' << pl.values[i].raw() << ',' << pl.uniform_inf.raw() << ','
         << gap_of(pl.values[i], pl.uniform_inf) << '\n';
  }
  return os.str();
}

}  // namespace varan
